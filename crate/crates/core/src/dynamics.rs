//! State-vector engine for N three-level ions sharing one phonon mode.
//!
//! Each ion carries `|0⟩`, `|1⟩` and an auxiliary level `|aux⟩`; the centre-of-mass
//! mode is truncated at `n_max` phonons. Amplitudes are stored ion-major with the
//! phonon number as the least significant index:
//!
//! `index = (Σ_i level_i · 3^(N−1−i)) · (n_max + 1) + n`
//!
//! Pulses act in the interaction picture of the ideal resonant drive, so free
//! evolution between pulses contributes no phase. On the addressed pair
//! `{|l⟩, |u⟩}` a pulse of area `θ` and phase `φ` applies
//!
//! `cos(θ/2)·I − i·sin(θ/2)·(e^{−iφ}|u⟩⟨l| + e^{iφ}|l⟩⟨u|)`.
//!
//! Carrier (V) pulses use the pair `|l,n⟩ ↔ |u,n⟩` for every `n`. Red-sideband (U)
//! pulses use `|l,n⟩ ↔ |u,n−1⟩` with area `θ·√n`, blue-sideband pulses
//! `|l,n⟩ ↔ |u,n+1⟩` with area `θ·√(n+1)`: `θ` is always the area on the
//! one-phonon pair.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::LambDicke;
use crate::constants::BOHR_MAGNETON_HZ_PER_T;
use crate::exec::{self, Execution};
use crate::{Error, Result};

/// Amplitude below which a phonon level counts as empty.
pub const TRUNCATION_GUARD: f64 = 1e-9;
pub const DEFAULT_N_MAX: usize = 3;
const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Zero = 0,
    One = 1,
    Aux = 2,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Zero, Level::One, Level::Aux];

    pub fn symbol(self) -> char {
        match self {
            Level::Zero => '0',
            Level::One => '1',
            Level::Aux => 'a',
        }
    }

    fn from_digit(d: usize) -> Level {
        Level::ALL[d]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// Qubit transition `|0⟩ ↔ |1⟩`.
    ZeroOne,
    /// Auxiliary transition `|0⟩ ↔ |aux⟩`.
    ZeroAux,
}

impl Transition {
    /// (lower, upper)
    pub fn levels(self) -> (Level, Level) {
        match self {
            Transition::ZeroOne => (Level::Zero, Level::One),
            Transition::ZeroAux => (Level::Zero, Level::Aux),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    /// Carrier pulse, internal states only.
    V,
    /// Sideband pulse, exchanges internal excitation with a phonon.
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sideband {
    Red,
    Carrier,
    Blue,
}

impl Sideband {
    pub fn from_offset(offset: i32) -> Option<Sideband> {
        match offset {
            -1 => Some(Sideband::Red),
            0 => Some(Sideband::Carrier),
            1 => Some(Sideband::Blue),
            _ => None,
        }
    }

    pub fn offset(self) -> i32 {
        match self {
            Sideband::Red => -1,
            Sideband::Carrier => 0,
            Sideband::Blue => 1,
        }
    }
}

/// Optical phase of a pulse. With two-beam Raman driving only the pump−Stokes
/// difference enters the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpticalPhase {
    Single(f64),
    Raman { pump: f64, stokes: f64 },
}

impl OpticalPhase {
    pub fn effective(self) -> f64 {
        match self {
            OpticalPhase::Single(phi) => phi,
            OpticalPhase::Raman { pump, stokes } => pump - stokes,
        }
    }

    fn shifted(self, delta: f64) -> Self {
        match self {
            OpticalPhase::Single(phi) => OpticalPhase::Single(phi + delta),
            OpticalPhase::Raman { pump, stokes } => OpticalPhase::Raman {
                pump: pump + delta,
                stokes,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub kind: PulseKind,
    pub ion: usize,
    /// Rotation angle in rad (for U pulses, on the one-phonon pair).
    pub theta: f64,
    pub phase: OpticalPhase,
    pub transition: Transition,
    pub sideband: Sideband,
}

impl PulseSpec {
    pub fn v(ion: usize, theta: f64, phi: f64, transition: Transition) -> Self {
        PulseSpec {
            kind: PulseKind::V,
            ion,
            theta,
            phase: OpticalPhase::Single(phi),
            transition,
            sideband: Sideband::Carrier,
        }
    }

    pub fn u(ion: usize, theta: f64, phi: f64, transition: Transition, sideband: Sideband) -> Self {
        PulseSpec {
            kind: PulseKind::U,
            ion,
            theta,
            phase: OpticalPhase::Single(phi),
            transition,
            sideband,
        }
    }

    pub fn with_phase(mut self, phase: OpticalPhase) -> Self {
        self.phase = phase;
        self
    }

    pub fn phi(&self) -> f64 {
        self.phase.effective()
    }

    /// The pulse that undoes this one: same area, phase advanced by π.
    pub fn inverse(&self) -> Self {
        PulseSpec {
            phase: self.phase.shifted(PI),
            ..*self
        }
    }

    pub fn validate(&self, n_ions: usize) -> Result<()> {
        if self.ion >= n_ions {
            return Err(Error::IonIndex {
                index: self.ion,
                n_ions,
            });
        }
        if !(self.theta >= 0.0) || !self.theta.is_finite() {
            return Err(Error::domain(format!("pulse area must be >= 0, got {}", self.theta)));
        }
        if !self.phi().is_finite() {
            return Err(Error::domain("pulse phase must be finite"));
        }
        match (self.kind, self.sideband) {
            (PulseKind::V, Sideband::Carrier) => Ok(()),
            (PulseKind::V, _) => Err(Error::domain("V pulses act on the carrier only")),
            (PulseKind::U, Sideband::Carrier) => {
                Err(Error::domain("U pulses need a red (-1) or blue (+1) sideband"))
            }
            (PulseKind::U, _) => Ok(()),
        }
    }
}

/// Scales the pulse area by `1 + fractional_error`.
pub fn pulse_area_perturbation(pulse: &PulseSpec, fractional_error: f64) -> Result<PulseSpec> {
    if !(fractional_error.abs() < 1.0) {
        return Err(Error::domain("fractional area error must satisfy |error| < 1"));
    }
    Ok(PulseSpec {
        theta: pulse.theta * (1.0 + fractional_error),
        ..*pulse
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    SingleLaser,
    Raman,
}

/// Which atomic levels play the roles of `|0⟩`, `|1⟩` and `|aux⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitAssignment {
    pub zero: &'static str,
    pub one: &'static str,
    pub aux: &'static str,
    pub scheme: Scheme,
    /// T, Raman scheme only.
    pub magnetic_field: Option<f64>,
    /// Ground-state Zeeman splitting in Hz (g_J = 2), Raman scheme only.
    pub zeeman_splitting: Option<f64>,
}

impl QubitAssignment {
    pub fn single_laser() -> Self {
        QubitAssignment {
            zero: "4S1/2 mj=+1/2",
            one: "3D5/2 mj=+3/2",
            aux: "3D5/2 mj=-1/2",
            scheme: Scheme::SingleLaser,
            magnetic_field: None,
            zeeman_splitting: None,
        }
    }

    /// Zeeman qubit in the ground state, driven through 4P1/2. 40Ca+ has no third
    /// ground sublevel, so the auxiliary role is assigned to a 3D5/2 sublevel.
    pub fn raman(field_gauss: f64) -> Self {
        let tesla = field_gauss * 1e-4;
        QubitAssignment {
            zero: "4S1/2 mj=-1/2",
            one: "4S1/2 mj=+1/2",
            aux: "3D5/2 mj=-1/2",
            scheme: Scheme::Raman,
            magnetic_field: Some(tesla),
            zeeman_splitting: Some(2.0 * BOHR_MAGNETON_HZ_PER_T * tesla),
        }
    }

    pub fn labels(&self) -> [&'static str; 3] {
        [self.zero, self.one, self.aux]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegisterState {
    n_ions: usize,
    n_max: usize,
    amplitudes: Vec<Complex64>,
}

fn register_dim(n_ions: usize, n_max: usize) -> usize {
    3usize.pow(n_ions as u32) * (n_max + 1)
}

impl RegisterState {
    /// Every ion in `|0⟩`, motional ground state.
    pub fn ground(n_ions: usize, n_max: usize) -> Result<Self> {
        Self::basis(&vec![Level::Zero; n_ions], 0, n_max)
    }

    pub fn basis(levels: &[Level], phonons: usize, n_max: usize) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::domain("register needs at least one ion"));
        }
        if phonons > n_max {
            return Err(Error::domain(format!("phonon number {phonons} exceeds n_max {n_max}")));
        }
        let mut s = RegisterState {
            n_ions: levels.len(),
            n_max,
            amplitudes: vec![Complex64::new(0.0, 0.0); register_dim(levels.len(), n_max)],
        };
        let idx = s.index(levels, phonons);
        s.amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Product state from per-ion amplitudes over `(|0⟩, |1⟩, |aux⟩)`, renormalised.
    pub fn product(ions: &[[Complex64; 3]], phonons: usize, n_max: usize) -> Result<Self> {
        let mut s = Self::basis(&vec![Level::Zero; ions.len()], phonons, n_max)?;
        let levels_dim = 3usize.pow(ions.len() as u32);
        for digits in 0..levels_dim {
            let mut amp = Complex64::new(1.0, 0.0);
            for (i, ion) in ions.iter().enumerate() {
                let d = (digits / 3usize.pow((ions.len() - 1 - i) as u32)) % 3;
                amp *= ion[d];
            }
            s.amplitudes[digits * (n_max + 1) + phonons] = amp;
        }
        let norm = s.norm_sqr().sqrt();
        if !(norm > 0.0) {
            return Err(Error::domain("product state has zero norm"));
        }
        s.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    pub fn from_amplitudes(n_ions: usize, n_max: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = register_dim(n_ions, n_max);
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                left: amplitudes.len(),
                right: dim,
            });
        }
        let s = RegisterState {
            n_ions,
            n_max,
            amplitudes,
        };
        if (s.norm_sqr() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::domain(format!("state not normalised (norm² = {})", s.norm_sqr())));
        }
        Ok(s)
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn index(&self, levels: &[Level], phonons: usize) -> usize {
        debug_assert_eq!(levels.len(), self.n_ions);
        let digits = levels.iter().fold(0, |acc, l| acc * 3 + *l as usize);
        digits * (self.n_max + 1) + phonons
    }

    pub fn decode(&self, index: usize) -> (Vec<Level>, usize) {
        let n = index % (self.n_max + 1);
        let mut digits = index / (self.n_max + 1);
        let mut levels = vec![Level::Zero; self.n_ions];
        for slot in levels.iter_mut().rev() {
            *slot = Level::from_digit(digits % 3);
            digits /= 3;
        }
        (levels, n)
    }

    /// Basis label such as `|1a;n=0>`, ion 0 first.
    pub fn label(&self, index: usize) -> String {
        let (levels, n) = self.decode(index);
        let s: String = levels.iter().map(|l| l.symbol()).collect();
        format!("|{s};n={n}>")
    }

    pub fn amplitude(&self, levels: &[Level], phonons: usize) -> Complex64 {
        self.amplitudes[self.index(levels, phonons)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Population of each phonon number.
    pub fn phonon_distribution(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.n_max + 1];
        for (i, a) in self.amplitudes.iter().enumerate() {
            p[i % (self.n_max + 1)] += a.norm_sqr();
        }
        p
    }

    /// Root of the total population outside the motional ground state.
    pub fn phonon_excitation(&self) -> f64 {
        self.phonon_distribution()[1..].iter().sum::<f64>().sqrt()
    }

    /// Largest amplitude magnitude at `n = n_max`.
    pub fn top_phonon_amplitude(&self) -> f64 {
        self.amplitudes
            .iter()
            .skip(self.n_max)
            .step_by(self.n_max + 1)
            .fold(0.0, |m, a| m.max(a.norm()))
    }

    fn level_stride(&self, ion: usize) -> usize {
        3usize.pow((self.n_ions - 1 - ion) as u32) * (self.n_max + 1)
    }

    fn rotate_pairs(&mut self, pulse: &PulseSpec) {
        let (lower, upper) = pulse.transition.levels();
        let stride = self.level_stride(pulse.ion);
        let shift = (upper as usize - lower as usize) * stride;
        let phonon_dim = self.n_max + 1;
        let phase = Complex64::from_polar(1.0, pulse.phi());
        let minus_i = Complex64::new(0.0, -1.0);
        for idx in 0..self.amplitudes.len() {
            if (idx / stride) % 3 != lower as usize {
                continue;
            }
            let n = idx % phonon_dim;
            let (partner, area) = match pulse.sideband {
                Sideband::Carrier => (idx + shift, pulse.theta),
                Sideband::Red if n >= 1 => (idx + shift - 1, pulse.theta * (n as f64).sqrt()),
                Sideband::Blue if n < self.n_max => {
                    (idx + shift + 1, pulse.theta * ((n + 1) as f64).sqrt())
                }
                _ => continue,
            };
            let (s, c) = (0.5 * area).sin_cos();
            let a_l = self.amplitudes[idx];
            let a_u = self.amplitudes[partner];
            self.amplitudes[idx] = c * a_l + minus_i * s * phase * a_u;
            self.amplitudes[partner] = minus_i * s * phase.conj() * a_l + c * a_u;
        }
    }

    pub fn apply_v(&mut self, pulse: &PulseSpec) -> Result<()> {
        pulse.validate(self.n_ions)?;
        if pulse.kind != PulseKind::V {
            return Err(Error::domain("expected a V pulse"));
        }
        self.rotate_pairs(pulse);
        Ok(())
    }

    /// Sideband pulse. The beam must project onto the trap axis (`eta > 0`) and the
    /// top phonon level must be empty.
    pub fn apply_u(&mut self, pulse: &PulseSpec, eta: &LambDicke) -> Result<()> {
        pulse.validate(self.n_ions)?;
        if pulse.kind != PulseKind::U {
            return Err(Error::domain("expected a U pulse"));
        }
        if self.n_max < 1 {
            return Err(Error::domain("sideband pulses need n_max >= 1"));
        }
        if !(eta.eta > 0.0) {
            return Err(Error::Precondition(
                "sideband pulse needs an addressing beam with an axial component (eta > 0)".into(),
            ));
        }
        let top = self.top_phonon_amplitude();
        if top >= TRUNCATION_GUARD {
            return Err(Error::Truncation {
                n_max: self.n_max,
                amplitude: top,
            });
        }
        self.rotate_pairs(pulse);
        Ok(())
    }

    pub fn apply(&mut self, pulse: &PulseSpec, eta: &LambDicke) -> Result<()> {
        match pulse.kind {
            PulseKind::V => self.apply_v(pulse),
            PulseKind::U => self.apply_u(pulse, eta),
        }
    }

    pub fn apply_sequence(&mut self, pulses: &[PulseSpec], eta: &LambDicke) -> Result<()> {
        pulses.iter().try_for_each(|p| self.apply(p, eta))
    }

    fn require_motional_ground(&self) -> Result<()> {
        let excitation = self.phonon_excitation();
        if excitation >= TRUNCATION_GUARD {
            return Err(Error::Precondition(format!(
                "phonon mode must start in |0> (excited amplitude {excitation:.3e})"
            )));
        }
        Ok(())
    }
}

pub fn apply_v_pulse(state: &RegisterState, pulse: &PulseSpec) -> Result<RegisterState> {
    let mut out = state.clone();
    out.apply_v(pulse)?;
    Ok(out)
}

pub fn apply_u_pulse(state: &RegisterState, pulse: &PulseSpec, eta: &LambDicke) -> Result<RegisterState> {
    let mut out = state.clone();
    out.apply_u(pulse, eta)?;
    Ok(out)
}

fn check_pair(n_ions: usize, control: usize, target: usize) -> Result<()> {
    for index in [control, target] {
        if index >= n_ions {
            return Err(Error::IonIndex { index, n_ions });
        }
    }
    if control == target {
        return Err(Error::domain("control and target must differ"));
    }
    Ok(())
}

/// Red-sideband π on the control qubit transition, 2π on the target auxiliary
/// transition, π on the control again.
pub fn controlled_z_sequence(control: usize, target: usize) -> Vec<PulseSpec> {
    let red = |ion, theta, transition| PulseSpec::u(ion, theta, 0.0, transition, Sideband::Red);
    vec![
        red(control, PI, Transition::ZeroOne),
        red(target, 2.0 * PI, Transition::ZeroAux),
        red(control, PI, Transition::ZeroOne),
    ]
}

/// Controlled-Z conjugated by carrier π/2 pulses on the target. The φ = π/2 /
/// φ = 3π/2 pair makes the result exactly CNOT in the computational basis.
pub fn cnot_sequence(control: usize, target: usize) -> Vec<PulseSpec> {
    let mut seq = vec![PulseSpec::v(target, PI / 2.0, 0.5 * PI, Transition::ZeroOne)];
    seq.extend(controlled_z_sequence(control, target));
    seq.push(PulseSpec::v(target, PI / 2.0, 1.5 * PI, Transition::ZeroOne));
    seq
}

pub fn controlled_z(
    state: &RegisterState,
    control: usize,
    target: usize,
    eta: &LambDicke,
) -> Result<RegisterState> {
    check_pair(state.n_ions, control, target)?;
    state.require_motional_ground()?;
    let mut out = state.clone();
    out.apply_sequence(&controlled_z_sequence(control, target), eta)?;
    Ok(out)
}

pub fn cnot(state: &RegisterState, control: usize, target: usize, eta: &LambDicke) -> Result<RegisterState> {
    check_pair(state.n_ions, control, target)?;
    state.require_motional_ground()?;
    let mut out = state.clone();
    out.apply_sequence(&cnot_sequence(control, target), eta)?;
    Ok(out)
}

/// `|⟨a|b⟩|²`
pub fn fidelity(a: &RegisterState, b: &RegisterState) -> Result<f64> {
    if a.dim() != b.dim() || a.n_ions != b.n_ions {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let overlap: Complex64 = a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(overlap.norm_sqr().min(1.0))
}

/// Random normalised state with the top phonon level empty.
pub fn random_state(n_ions: usize, n_max: usize, rng: &mut impl Rng) -> RegisterState {
    let dim = register_dim(n_ions, n_max);
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|i| {
            if i % (n_max + 1) == n_max {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }
        })
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    RegisterState {
        n_ions,
        n_max,
        amplitudes: amps,
    }
}

pub fn random_pulse(n_ions: usize, rng: &mut impl Rng) -> PulseSpec {
    let ion = rng.random_range(0..n_ions);
    let theta = rng.random_range(0.0..4.0 * PI);
    let phi = rng.random_range(-PI..PI);
    let transition = if rng.random_bool(0.5) {
        Transition::ZeroOne
    } else {
        Transition::ZeroAux
    };
    match rng.random_range(0..3) {
        0 => PulseSpec::v(ion, theta, phi, transition),
        1 => PulseSpec::u(ion, theta, phi, transition, Sideband::Red),
        _ => PulseSpec::u(ion, theta, phi, transition, Sideband::Blue),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnitaritySweep {
    pub samples: usize,
    /// max |‖ψ'‖² − 1|
    pub max_norm_deviation: f64,
    /// max (1 − F) after a pulse followed by its inverse.
    pub max_inverse_infidelity: f64,
}

/// Applies `samples` random pulses to independent random states. Sample `i`
/// draws from its own ChaCha stream, so the result is the same in every
/// execution mode.
pub fn unitarity_sweep(
    n_ions: usize,
    n_max: usize,
    samples: usize,
    seed: u64,
    eta: &LambDicke,
    exec: Execution,
) -> Result<UnitaritySweep> {
    if n_ions == 0 || n_max < 2 {
        return Err(Error::domain("unitarity sweep needs n_ions >= 1 and n_max >= 2"));
    }
    let per_sample = |i: usize| -> Result<UnitaritySweep> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let start = random_state(n_ions, n_max, &mut rng);
        let pulse = random_pulse(n_ions, &mut rng);
        let mut s = start.clone();
        s.apply(&pulse, eta)?;
        let norm_dev = (s.norm_sqr() - 1.0).abs();
        // the blue sideband can feed n_max; the inverse check only runs when it stays empty
        let inv = if s.top_phonon_amplitude() < TRUNCATION_GUARD || pulse.kind == PulseKind::V {
            s.apply(&pulse.inverse(), eta)?;
            1.0 - fidelity(&start, &s)?
        } else {
            0.0
        };
        Ok(UnitaritySweep {
            samples: 1,
            max_norm_deviation: norm_dev,
            max_inverse_infidelity: inv,
        })
    };
    exec::map_reduce(
        samples,
        exec,
        || Ok(UnitaritySweep::default()),
        per_sample,
        |a, b| {
            let (a, b) = (a?, b?);
            Ok(UnitaritySweep {
                samples: a.samples + b.samples,
                max_norm_deviation: a.max_norm_deviation.max(b.max_norm_deviation),
                max_inverse_infidelity: a.max_inverse_infidelity.max(b.max_inverse_infidelity),
            })
        },
    )
}

/// Mean CNOT infidelity over the four computational inputs when every pulse of
/// the sequence carries the same fractional area error, for each error in `errors`.
pub fn cnot_area_error_sweep(
    errors: &[f64],
    n_max: usize,
    eta: &LambDicke,
    exec: Execution,
) -> Result<Vec<(f64, f64)>> {
    let ideal = cnot_sequence(0, 1);
    exec::map_collect(errors.len(), exec, |k| {
        let eps = errors[k];
        let perturbed = ideal
            .iter()
            .map(|p| pulse_area_perturbation(p, eps))
            .collect::<Result<Vec<_>>>()?;
        let mut total = 0.0;
        for (c, t) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let lv = |b| if b == 1 { Level::One } else { Level::Zero };
            let input = RegisterState::basis(&[lv(c), lv(t)], 0, n_max)?;
            let expected = RegisterState::basis(&[lv(c), lv(t ^ c)], 0, n_max)?;
            let mut s = input;
            s.apply_sequence(&perturbed, eta)?;
            total += 1.0 - fidelity(&expected, &s)?;
        }
        Ok((eps, total / 4.0))
    })
    .into_iter()
    .collect()
}
