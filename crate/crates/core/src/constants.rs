//! CODATA 2018 constants, SI units.

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Bohr magneton over Planck's constant, Hz/T.
pub const BOHR_MAGNETON_HZ_PER_T: f64 = 1.399_624_493_61e10;

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Converts a cyclic frequency in Hz to angular frequency in rad/s.
pub fn angular(hz: f64) -> f64 {
    TWO_PI * hz
}

/// Converts an angular frequency in rad/s to Hz.
pub fn cyclic(rad_per_s: f64) -> f64 {
    rad_per_s / TWO_PI
}
