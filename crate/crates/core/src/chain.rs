//! Ion string in a harmonic axial well.
//!
//! Positions are solved in dimensionless units `u_i = z_i / ℓ` with
//! `ℓ = (e² / (4π ε0 m ω_z²))^{1/3}`, where the potential is
//! `V(u) = Σ u_i²/2 + Σ_{i<j} 1/|u_i − u_j|`. The axial modes are the eigenpairs of
//! the Hessian of `V` at equilibrium; mode frequency `ω_m = sqrt(λ_m)·ω_z`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::constants::{HBAR, VACUUM_PERMITTIVITY};
use crate::species::IonSpecies;
use crate::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
const MAX_NEWTON_ITERATIONS: usize = 200;
const MAX_DESCENT_ITERATIONS: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub n_ions: usize,
    /// rad/s
    pub omega_axial: f64,
    pub species: IonSpecies,
}

impl ChainConfig {
    pub fn new(n_ions: usize, omega_axial: f64, species: IonSpecies) -> Result<Self> {
        let cfg = ChainConfig {
            n_ions,
            omega_axial,
            species,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ions == 0 {
            return Err(Error::domain("chain needs at least one ion"));
        }
        if !(self.omega_axial > 0.0) || !self.omega_axial.is_finite() {
            return Err(Error::domain("axial frequency must be positive"));
        }
        self.species.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainModes {
    /// ℓ in m.
    pub length_scale: f64,
    /// Dimensionless equilibrium positions, ascending.
    pub reduced_positions: Vec<f64>,
    /// Positions in m.
    pub positions: Vec<f64>,
    /// Hessian eigenvalues, ascending (1 for the CM mode, 3 for breathing).
    pub eigenvalues: Vec<f64>,
    /// rad/s, ascending.
    pub mode_frequencies: Vec<f64>,
    /// Column `m` is the normalised participation vector of mode `m`.
    pub mode_vectors: DMatrix<f64>,
    /// Smallest adjacent gap in m; `None` for a single ion.
    pub min_spacing: Option<f64>,
}

impl ChainModes {
    pub fn solve(cfg: &ChainConfig, tol: f64) -> Result<Self> {
        cfg.validate()?;
        let length_scale = length_scale(cfg.omega_axial, &cfg.species)?;
        let reduced_positions = equilibrium_positions(cfg.n_ions, tol)?;
        let (eigenvalues, mode_vectors) = axial_normal_modes(&reduced_positions, tol)?;
        let mode_frequencies = eigenvalues
            .iter()
            .map(|&l| l.sqrt() * cfg.omega_axial)
            .collect();
        let positions: Vec<f64> = reduced_positions.iter().map(|u| u * length_scale).collect();
        let min_spacing = reduced_min_gap(&reduced_positions).map(|g| g * length_scale);
        Ok(ChainModes {
            length_scale,
            reduced_positions,
            positions,
            eigenvalues,
            mode_frequencies,
            mode_vectors,
            min_spacing,
        })
    }

    pub fn n_ions(&self) -> usize {
        self.reduced_positions.len()
    }
}

pub fn length_scale(omega_axial: f64, species: &IonSpecies) -> Result<f64> {
    if !(omega_axial > 0.0) || !omega_axial.is_finite() {
        return Err(Error::domain("axial frequency must be positive"));
    }
    species.validate()?;
    let k = species.charge.powi(2)
        / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY * species.mass * omega_axial.powi(2));
    Ok(k.cbrt())
}

/// Force-balance residuals `∂V/∂u_i` for sorted dimensionless positions.
pub fn force_residuals(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut f = u.to_vec();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = u[i] - u[j];
            f[i] -= d.signum() / (d * d);
        }
    }
    f
}

fn potential(u: &[f64]) -> f64 {
    let mut v: f64 = u.iter().map(|x| 0.5 * x * x).sum();
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            v += 1.0 / (u[j] - u[i]).abs();
        }
    }
    v
}

fn hessian(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 1.0;
        for j in 0..n {
            if i != j {
                let c = 2.0 / (u[i] - u[j]).abs().powi(3);
                a[(i, j)] = -c;
                diag += c;
            }
        }
        a[(i, i)] = diag;
    }
    a
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn strictly_increasing(u: &[f64]) -> bool {
    u.windows(2).all(|w| w[1] > w[0])
}

/// Dimensionless equilibrium positions, ascending, with every force residual below `tol`.
///
/// Damped Newton from a uniform grid over `±0.5·N^0.9`, with a backtracking line
/// search on the potential. A stalled line search hands over to gradient descent
/// until Newton can make progress again.
pub fn equilibrium_positions(n_ions: usize, tol: f64) -> Result<Vec<f64>> {
    if n_ions == 0 {
        return Err(Error::domain("chain needs at least one ion"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    if n_ions == 1 {
        return Ok(vec![0.0]);
    }
    let half = 0.5 * (n_ions as f64).powf(0.9);
    let mut u: Vec<f64> = (0..n_ions)
        .map(|i| -half + 2.0 * half * i as f64 / (n_ions - 1) as f64)
        .collect();

    let mut residuals = force_residuals(&u);
    for _ in 0..MAX_NEWTON_ITERATIONS {
        if max_abs(&residuals) < tol {
            let sym = symmetrize(&u);
            if max_abs(&force_residuals(&sym)) < tol {
                return Ok(sym);
            }
        }
        let step = hessian(&u)
            .cholesky()
            .map(|c| c.solve(&DVector::from_column_slice(&residuals)));
        let accepted = match step {
            Some(step) => line_search(&u, step.as_slice(), -1.0),
            None => None,
        };
        u = match accepted {
            Some(next) => next,
            None => gradient_descent(u, tol)?,
        };
        residuals = force_residuals(&u);
    }
    if max_abs(&residuals) < tol {
        return Ok(u);
    }
    Err(Error::NonConvergence {
        iterations: MAX_NEWTON_ITERATIONS,
        max_residual: max_abs(&residuals),
        residuals,
    })
}

/// Tries `u + sign·α·dir` for α = 1, 1/2, ... and accepts the first ordered point
/// that lowers either the potential or the largest force residual. The residual
/// test takes over near the minimum, where the potential is flat to rounding.
fn line_search(u: &[f64], dir: &[f64], sign: f64) -> Option<Vec<f64>> {
    let v0 = potential(u);
    let r0 = max_abs(&force_residuals(u));
    let mut alpha = 1.0;
    for _ in 0..60 {
        let trial: Vec<f64> = u.iter().zip(dir).map(|(x, d)| x + sign * alpha * d).collect();
        if trial.as_slice() == u {
            return None;
        }
        if strictly_increasing(&trial)
            && (potential(&trial) < v0 || max_abs(&force_residuals(&trial)) < r0)
        {
            return Some(trial);
        }
        alpha *= 0.5;
    }
    None
}

fn gradient_descent(mut u: Vec<f64>, tol: f64) -> Result<Vec<f64>> {
    for _ in 0..MAX_DESCENT_ITERATIONS {
        let g = force_residuals(&u);
        if max_abs(&g) < tol {
            return Ok(u);
        }
        match line_search(&u, &g, -1.0) {
            Some(next) => u = next,
            None => break,
        }
    }
    let residuals = force_residuals(&u);
    if max_abs(&residuals) < tol {
        return Ok(u);
    }
    Err(Error::NonConvergence {
        iterations: MAX_DESCENT_ITERATIONS,
        max_residual: max_abs(&residuals),
        residuals,
    })
}

/// Removes rounding-level asymmetry: the exact solution satisfies `u_i = −u_{N−1−i}`.
fn symmetrize(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    (0..n).map(|i| 0.5 * (u[i] - u[n - 1 - i])).collect()
}

fn reduced_min_gap(u: &[f64]) -> Option<f64> {
    u.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
}

/// Eigen-decomposition of the dimensionless Hessian at an equilibrium.
///
/// Returns ascending eigenvalues and orthonormal eigenvectors as matrix columns,
/// each oriented so that its first non-negligible component is positive.
pub fn axial_normal_modes(positions: &[f64], tol: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if positions.is_empty() {
        return Err(Error::domain("no ions"));
    }
    if !strictly_increasing(positions) {
        return Err(Error::Precondition("positions must be strictly increasing".into()));
    }
    let residual = max_abs(&force_residuals(positions));
    if residual > tol {
        return Err(Error::Precondition(format!(
            "positions are not an equilibrium (max residual {residual:.3e} > {tol:.1e})"
        )));
    }
    let n = positions.len();
    let eig = SymmetricEigen::new(hessian(positions));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k).into_owned();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-8) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        vectors.set_column(col, &v);
    }
    Ok((eigenvalues, vectors))
}

/// Smallest adjacent gap in m, `None` for a single ion.
pub fn min_spacing(cfg: &ChainConfig) -> Result<Option<f64>> {
    Ok(ChainModes::solve(cfg, DEFAULT_TOLERANCE)?.min_spacing)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambDicke {
    pub eta: f64,
    /// Optical wavevector 2π/λ, rad/m.
    pub wavevector: f64,
    /// Angle between beam and trap axis, rad.
    pub projection_angle: f64,
    pub mode_index: usize,
    /// Set when the beam has no component along the axis.
    pub no_axial_coupling: bool,
}

/// Lamb-Dicke parameter of one ion on the centre-of-mass mode:
/// `η = k·cos θ·sqrt(ħ / (2·N·m·ω_z))`.
pub fn lamb_dicke_cm(cfg: &ChainConfig, wavelength: f64, projection_angle: f64) -> Result<LambDicke> {
    cfg.validate()?;
    if !(wavelength > 0.0) {
        return Err(Error::domain("wavelength must be positive"));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    if !(0.0..=half_pi).contains(&projection_angle) {
        return Err(Error::domain("projection angle must lie in [0, π/2]"));
    }
    let wavevector = std::f64::consts::TAU / wavelength;
    let no_axial_coupling = (projection_angle - half_pi).abs() < 1e-12;
    let projection = if no_axial_coupling {
        0.0
    } else {
        projection_angle.cos()
    };
    let eta = wavevector
        * projection
        * (HBAR / (2.0 * cfg.n_ions as f64 * cfg.species.mass * cfg.omega_axial)).sqrt();
    Ok(LambDicke {
        eta,
        wavevector,
        projection_angle,
        mode_index: 0,
        no_axial_coupling,
    })
}
