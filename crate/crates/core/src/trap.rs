//! Linear RF quadrupole trap: Mathieu parameter, secular frequencies, stability.
//!
//! Conventions:
//!
//! * `q = 2·e·V_rf / (m·r0²·Ω²)` (Mathieu form `ü + (a − 2q·cos 2τ)u = 0`, `τ = Ωt/2`).
//! * Radial frequency to lowest order with `a = 0`: `ω_r = q·Ω / (2√2)`. The DC
//!   de-confinement from the endcaps (the `a` parameter) is neglected.
//! * Axial frequency: `ω_z = sqrt(2·κ·e·U_dc / (m·z0²))`.
//!
//! The lowest-order radial formula underestimates the exact Floquet frequency by
//! roughly 1% at q = 0.2 and 5–6% at q = 0.5.

use crate::constants::angular;
use crate::species::IonSpecies;
use crate::{Error, Result};

/// Edge of the first stability region on the `a = 0` axis.
pub const Q_STABILITY_LIMIT: f64 = 0.908;

#[derive(Debug, Clone, PartialEq)]
pub struct TrapParams {
    /// RF amplitude, V.
    pub v_rf: f64,
    /// RF drive angular frequency, rad/s.
    pub omega_rf: f64,
    /// Radial field radius (half the rod gap), m.
    pub r0: f64,
    /// Endcap DC voltage, V.
    pub u_dc: f64,
    /// Half the endcap separation, m.
    pub z0: f64,
    /// Geometric efficiency of the conical endcaps.
    pub kappa: f64,
}

impl Default for TrapParams {
    /// 1.7 mm rod gap, 10 mm endcap separation, drive chosen for a ~2π·1.8 MHz
    /// radial and ~2π·200 kHz axial frequency with calcium.
    fn default() -> Self {
        TrapParams {
            v_rf: 300.0,
            omega_rf: angular(10e6),
            r0: 0.85e-3,
            u_dc: 27.25,
            z0: 5.0e-3,
            kappa: 0.3,
        }
    }
}

impl TrapParams {
    /// Voltages may be zero (no drive); geometry and drive frequency must be positive.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_rf", self.omega_rf),
            ("r0", self.r0),
            ("z0", self.z0),
            ("kappa", self.kappa),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("trap {name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("v_rf", self.v_rf), ("u_dc", self.u_dc)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("trap {name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecularFrequencies {
    /// Lowest-order radial frequency, rad/s. Not meaningful when `stable` is false.
    pub omega_radial: f64,
    /// rad/s
    pub omega_axial: f64,
    pub q: f64,
    pub stable: bool,
    /// `omega_radial > omega_axial`
    pub radial_dominant: bool,
}

pub fn mathieu_q(trap: &TrapParams, species: &IonSpecies) -> Result<f64> {
    trap.validate()?;
    species.validate()?;
    Ok(2.0 * species.charge * trap.v_rf / (species.mass * trap.r0.powi(2) * trap.omega_rf.powi(2)))
}

pub fn axial_frequency(trap: &TrapParams, species: &IonSpecies) -> Result<f64> {
    trap.validate()?;
    species.validate()?;
    Ok((2.0 * trap.kappa * species.charge * trap.u_dc / (species.mass * trap.z0.powi(2))).sqrt())
}

pub fn is_stable(q: f64) -> bool {
    q > 0.0 && q < Q_STABILITY_LIMIT
}

pub fn secular_frequencies(trap: &TrapParams, species: &IonSpecies) -> Result<SecularFrequencies> {
    let q = mathieu_q(trap, species)?;
    let omega_axial = axial_frequency(trap, species)?;
    let omega_radial = q * trap.omega_rf / (2.0 * std::f64::consts::SQRT_2);
    let stable = is_stable(q);
    Ok(SecularFrequencies {
        omega_radial,
        omega_axial,
        q,
        stable,
        radial_dominant: stable && omega_radial > omega_axial,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub frequencies: SecularFrequencies,
    /// `omega_radial / omega_axial`; infinite when there is no axial confinement.
    pub ratio: f64,
    pub threshold: f64,
    /// Ions are expected to line up on the axis (ratio above threshold, trap stable).
    pub string_phase: bool,
    pub notes: Vec<&'static str>,
}

/// Default radial/axial ratio above which a string is assumed.
pub const DEFAULT_STRING_RATIO: f64 = 3.0;

pub fn stability_report(
    trap: &TrapParams,
    species: &IonSpecies,
    string_ratio_threshold: f64,
) -> Result<StabilityReport> {
    if !(string_ratio_threshold > 1.0) {
        return Err(Error::domain("string-phase ratio threshold must exceed 1"));
    }
    let frequencies = secular_frequencies(trap, species)?;
    let ratio = frequencies.omega_radial / frequencies.omega_axial;
    let string_phase = frequencies.stable && ratio > string_ratio_threshold;
    let mut notes = vec![
        "q = 2eV/(m r0^2 Omega^2)",
        "radial frequency to lowest order, a-parameter (endcap DC) neglected",
    ];
    if !frequencies.stable {
        notes.push("UNSTABLE: q outside (0, 0.908), radial frequency unusable");
    }
    Ok(StabilityReport {
        frequencies,
        ratio,
        threshold: string_ratio_threshold,
        string_phase,
        notes,
    })
}
