//! Single-ion addressing optics.
//!
//! Crosstalk is the relative intensity of a Gaussian addressing beam at the
//! neighbouring ion: `exp(−8·d²/D²)` for spacing `d` and 1/e² diameter `D`.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BeamGeometry {
    /// 1/e² intensity diameter at the focus, m.
    pub spot_diameter: f64,
    /// m
    pub wavelength: f64,
    /// Beam diameter entering the focusing lens, m.
    pub input_beam_diameter: f64,
    /// m
    pub focal_length: f64,
    /// Wedge that tilts the line of focus, rad. Recorded, not modelled.
    pub tilt_wedge: f64,
}

impl Default for BeamGeometry {
    fn default() -> Self {
        BeamGeometry {
            spot_diameter: 10e-6,
            wavelength: 397e-9,
            input_beam_diameter: 3e-3,
            focal_length: 30e-3,
            tilt_wedge: 2f64.to_radians(),
        }
    }
}

impl BeamGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("spot_diameter", self.spot_diameter),
            ("wavelength", self.wavelength),
            ("input_beam_diameter", self.input_beam_diameter),
            ("focal_length", self.focal_length),
            ("tilt_wedge", self.tilt_wedge),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("beam {name} must be positive")));
            }
        }
        Ok(())
    }

    /// Smallest 1/e² spot a collimated Gaussian of the input diameter can be
    /// focused to: `4λf / (π·D_in)`.
    pub fn diffraction_limit(&self) -> f64 {
        4.0 * self.wavelength * self.focal_length / (std::f64::consts::PI * self.input_beam_diameter)
    }

    /// True when the requested spot is below the diffraction limit.
    pub fn below_diffraction_limit(&self) -> bool {
        self.spot_diameter < self.diffraction_limit()
    }
}

/// Electro-optic deflector with ideal linear response.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflectorSpec {
    /// rad
    pub max_angle: f64,
    /// V
    pub max_voltage: f64,
    /// s
    pub switch_time: f64,
}

impl Default for DeflectorSpec {
    fn default() -> Self {
        DeflectorSpec {
            max_angle: 9e-3,
            max_voltage: 3000.0,
            switch_time: 10e-9,
        }
    }
}

impl DeflectorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_angle >= 0.0) || !(self.max_voltage > 0.0) || !(self.switch_time > 0.0) {
            return Err(Error::domain(
                "deflector needs max_angle >= 0, max_voltage > 0 and switch_time > 0",
            ));
        }
        Ok(())
    }

    pub fn angle(&self, voltage: f64) -> Result<f64> {
        if voltage.abs() > self.max_voltage {
            return Err(Error::domain(format!(
                "deflector voltage {voltage} V outside ±{} V",
                self.max_voltage
            )));
        }
        Ok(self.max_angle * voltage / self.max_voltage)
    }

    /// Voltage that steers the focus by `offset` in the focal plane.
    pub fn voltage_for_offset(&self, offset: f64, focal_length: f64) -> Result<f64> {
        let angle = offset / focal_length;
        if angle.abs() > self.max_angle * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "offset {offset} m needs {angle} rad, beyond ±{} rad",
                self.max_angle
            )));
        }
        Ok((angle / self.max_angle).clamp(-1.0, 1.0) * self.max_voltage)
    }
}

pub fn crosstalk(ion_spacing: f64, spot_diameter: f64) -> Result<f64> {
    if !(ion_spacing >= 0.0) || !(spot_diameter > 0.0) {
        return Err(Error::domain("crosstalk needs spacing >= 0 and diameter > 0"));
    }
    Ok((-8.0 * (ion_spacing / spot_diameter).powi(2)).exp())
}

/// Largest 1/e² diameter keeping the crosstalk at `epsilon`: `d·sqrt(8 / ln(1/ε))`.
pub fn max_spot_for_crosstalk(ion_spacing: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain("crosstalk target must lie in (0, 1)"));
    }
    if !(ion_spacing > 0.0) {
        return Err(Error::domain("ion spacing must be positive"));
    }
    Ok(ion_spacing * (8.0 / (1.0 / epsilon).ln()).sqrt())
}

/// Rayleigh-resolved spots across the full deflection range,
/// `floor(2·θ_max / (1.22·λ/D_in))`.
pub fn resolvable_spots(beam: &BeamGeometry, deflector: &DeflectorSpec) -> Result<u64> {
    beam.validate()?;
    deflector.validate()?;
    let rayleigh = 1.22 * beam.wavelength / beam.input_beam_diameter;
    Ok((2.0 * deflector.max_angle / rayleigh).floor() as u64)
}

/// Ion sites reachable at the given spacing: `floor(2·θ_max·f / d) + 1`.
pub fn addressable_ions(deflector: &DeflectorSpec, focal_length: f64, ion_spacing: f64) -> Result<u64> {
    deflector.validate()?;
    if !(focal_length > 0.0) || !(ion_spacing > 0.0) {
        return Err(Error::domain("focal length and ion spacing must be positive"));
    }
    let span = 2.0 * deflector.max_angle * focal_length;
    // relative slack so exact multiples are not lost to rounding
    Ok((span / ion_spacing * (1.0 + 1e-12)).floor() as u64 + 1)
}

/// Root-sum-square of the intensity noise and the timing jitter relative to the pulse.
pub fn pulse_area_error_budget(intensity_stability: f64, timing_resolution: f64, pulse_width: f64) -> Result<f64> {
    if !(pulse_width > 0.0) {
        return Err(Error::domain("pulse width must be positive"));
    }
    if !(intensity_stability >= 0.0) || !(timing_resolution >= 0.0) {
        return Err(Error::domain("error sources must be non-negative"));
    }
    Ok(intensity_stability.hypot(timing_resolution / pulse_width))
}
