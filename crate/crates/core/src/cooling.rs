//! Cooling budgets, fluorescence readout and the imaging chain.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::ChainModes;
use crate::constants::{angular, BOLTZMANN, HBAR};
use crate::exec::{self, Execution};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingParams {
    /// Natural linewidth of the 397 nm dipole transition, rad/s. Assumed value,
    /// standard Ca+ data rather than a design input.
    pub gamma_dipole: f64,
    /// W/m²
    pub i_sat: f64,
    /// Lifetime of the 732 nm upper level, s.
    pub d_lifetime: f64,
    /// Lifetime shortening from 866 nm repumping, ≥ 1.
    pub repump_factor: f64,
}

impl Default for CoolingParams {
    fn default() -> Self {
        CoolingParams {
            gamma_dipole: angular(20.7e6),
            i_sat: 100.0,
            d_lifetime: 1.08,
            repump_factor: 1.0,
        }
    }
}

impl CoolingParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_dipole", self.gamma_dipole),
            ("i_sat", self.i_sat),
            ("d_lifetime", self.d_lifetime),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("cooling {name} must be positive")));
            }
        }
        if !(self.repump_factor >= 1.0) {
            return Err(Error::domain("repump factor must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerLimit {
    /// K
    pub temperature: f64,
    pub mean_phonons: f64,
}

/// `T = ħΓ/(2k_B)`, `n̄ = Γ/(2ω_z)`.
pub fn doppler_limit(params: &CoolingParams, omega_axial: f64) -> Result<DopplerLimit> {
    params.validate()?;
    if !(omega_axial > 0.0) {
        return Err(Error::domain("axial frequency must be positive"));
    }
    Ok(DopplerLimit {
        temperature: HBAR * params.gamma_dipole / (2.0 * BOLTZMANN),
        mean_phonons: params.gamma_dipole / (2.0 * omega_axial),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLine {
    pub label: String,
    /// rad/s
    pub frequency: f64,
}

/// Carrier plus first-order red and blue sidebands of every axial mode, ascending.
pub fn sideband_spectrum(omega_0: f64, chain: &ChainModes) -> Result<Vec<SpectralLine>> {
    if chain.mode_frequencies.is_empty() {
        return Err(Error::domain("chain has no modes"));
    }
    let mut lines = vec![SpectralLine {
        label: "carrier".into(),
        frequency: omega_0,
    }];
    for (m, &w) in chain.mode_frequencies.iter().enumerate() {
        lines.push(SpectralLine {
            label: format!("red mode {m}"),
            frequency: omega_0 - w,
        });
        lines.push(SpectralLine {
            label: format!("blue mode {m}"),
            frequency: omega_0 + w,
        });
    }
    lines.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(lines)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionCheck {
    pub pass: bool,
    /// omega_cm / linewidth
    pub margin: f64,
    pub required_factor: f64,
}

pub const DEFAULT_RESOLUTION_FACTOR: f64 = 10.0;
/// Upper bound on the Doppler-cooling laser linewidth, rad/s.
pub const DOPPLER_LINEWIDTH_LIMIT: f64 = std::f64::consts::TAU * 10e6;

/// Passes when the laser linewidth is below `omega_cm / factor`.
pub fn sideband_resolution_check(laser_linewidth: f64, omega_cm: f64, factor: f64) -> Result<ResolutionCheck> {
    if !(laser_linewidth > 0.0) || !(omega_cm > 0.0) || !(factor > 0.0) {
        return Err(Error::domain("linewidth, mode frequency and factor must be positive"));
    }
    Ok(ResolutionCheck {
        pass: laser_linewidth < omega_cm / factor,
        margin: omega_cm / laser_linewidth,
        required_factor: factor,
    })
}

/// Doppler stage: linewidth below about 2π·10 MHz.
pub fn doppler_linewidth_check(laser_linewidth: f64) -> Result<bool> {
    if !(laser_linewidth > 0.0) {
        return Err(Error::domain("linewidth must be positive"));
    }
    Ok(laser_linewidth < DOPPLER_LINEWIDTH_LIMIT)
}

/// Sideband-cooling bottleneck: one phonon per effective metastable lifetime.
pub fn phonon_removal_rate(params: &CoolingParams) -> Result<f64> {
    params.validate()?;
    Ok(params.repump_factor / params.d_lifetime)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutParams {
    /// Photons/s scattered by a bright ion.
    pub scatter_rate_bright: f64,
    /// sr
    pub collection_solid_angle: f64,
    pub quantum_efficiency: f64,
    /// s
    pub integration_time: f64,
    /// Background counts/s at the detector.
    pub dark_rate: f64,
    /// A trial is bright when its count exceeds this value.
    pub threshold: u64,
    pub seed: u64,
}

impl ReadoutParams {
    pub fn validate(&self) -> Result<()> {
        let sphere = 4.0 * std::f64::consts::PI;
        if !(self.collection_solid_angle > 0.0 && self.collection_solid_angle <= sphere) {
            return Err(Error::domain("solid angle must lie in (0, 4π]"));
        }
        if !(0.0..=1.0).contains(&self.quantum_efficiency) {
            return Err(Error::domain("quantum efficiency must lie in [0, 1]"));
        }
        for (name, v) in [
            ("scatter_rate_bright", self.scatter_rate_bright),
            ("integration_time", self.integration_time),
            ("dark_rate", self.dark_rate),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("readout {name} must be non-negative")));
            }
        }
        Ok(())
    }

    /// Expected counts for a dark ion.
    pub fn dark_mean(&self) -> f64 {
        self.dark_rate * self.integration_time
    }

    /// Expected counts for a bright ion.
    pub fn bright_mean(&self) -> f64 {
        let eff = self.collection_solid_angle / (4.0 * std::f64::consts::PI) * self.quantum_efficiency;
        self.scatter_rate_bright * eff * self.integration_time + self.dark_mean()
    }
}

/// `(Ω / 4π)·QE`
pub fn collection_efficiency(readout: &ReadoutParams) -> Result<f64> {
    readout.validate()?;
    Ok(readout.collection_solid_angle / (4.0 * std::f64::consts::PI) * readout.quantum_efficiency)
}

/// Prepared-state probabilities: `bright` is `|0⟩` (scatters at 397 nm), `dark` is `|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateProbabilities {
    pub bright: f64,
    pub dark: f64,
}

impl StateProbabilities {
    pub fn new(bright: f64, dark: f64) -> Result<Self> {
        if !(bright >= 0.0 && dark >= 0.0) || (bright + dark - 1.0).abs() > 1e-9 {
            return Err(Error::domain("state probabilities must be non-negative and sum to 1"));
        }
        Ok(StateProbabilities { bright, dark })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReadoutOutcome {
    pub trials: u64,
    /// Detected counts → number of trials.
    pub histogram: BTreeMap<u64, u64>,
    pub prepared_bright: u64,
    pub prepared_dark: u64,
    pub bright_read_dark: u64,
    pub dark_read_bright: u64,
    pub warnings: Vec<String>,
}

impl ReadoutOutcome {
    /// Fraction of bright preparations classified dark.
    pub fn bright_error_rate(&self) -> f64 {
        ratio(self.bright_read_dark, self.prepared_bright)
    }

    /// Fraction of dark preparations classified bright.
    pub fn dark_error_rate(&self) -> f64 {
        ratio(self.dark_read_bright, self.prepared_dark)
    }

    fn merge(mut self, other: ReadoutOutcome) -> Self {
        self.trials += other.trials;
        self.prepared_bright += other.prepared_bright;
        self.prepared_dark += other.prepared_dark;
        self.bright_read_dark += other.bright_read_dark;
        self.dark_read_bright += other.dark_read_bright;
        for (k, v) in other.histogram {
            *self.histogram.entry(k).or_default() += v;
        }
        self
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Trials per independently seeded block.
pub const READOUT_BLOCK: u64 = 4096;
/// Largest mean sampled in one inverse-CDF pass; larger means are split into
/// independent Poisson parts, which keeps `e^{−λ}` away from underflow.
const POISSON_CHUNK: f64 = 500.0;

/// Poisson sample by sequential inverse-CDF search.
pub fn sample_poisson(mean: f64, rng: &mut impl Rng) -> u64 {
    let mut remaining = mean.max(0.0);
    let mut total = 0;
    while remaining > 0.0 {
        let lambda = remaining.min(POISSON_CHUNK);
        remaining -= lambda;
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut pmf = (-lambda).exp();
        let mut cdf = pmf;
        while u > cdf {
            k += 1;
            pmf *= lambda / k as f64;
            let next = cdf + pmf;
            if next == cdf {
                // u sits above the representable tail
                break;
            }
            cdf = next;
        }
        total += k;
    }
    total
}

/// `P(X ≤ k)` for `X ~ Poisson(mean)` by direct summation.
pub fn poisson_cdf(mean: f64, k: u64) -> f64 {
    let mut pmf = (-mean).exp();
    let mut cdf = pmf;
    for j in 1..=k {
        pmf *= mean / j as f64;
        cdf += pmf;
    }
    cdf.min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticErrorRates {
    /// P(bright counts ≤ threshold)
    pub bright_as_dark: f64,
    /// P(dark counts > threshold)
    pub dark_as_bright: f64,
}

pub fn analytic_error_rates(readout: &ReadoutParams) -> AnalyticErrorRates {
    AnalyticErrorRates {
        bright_as_dark: poisson_cdf(readout.bright_mean(), readout.threshold),
        dark_as_bright: 1.0 - poisson_cdf(readout.dark_mean(), readout.threshold),
    }
}

/// Monte Carlo quantum-jump readout of one ion.
///
/// Trials are cut into blocks of [`READOUT_BLOCK`]; block `b` draws from ChaCha
/// stream `b` of the master seed, so the merged result is the same for any
/// number of worker threads.
pub fn simulate_readout(
    probabilities: StateProbabilities,
    readout: &ReadoutParams,
    trials: u64,
    exec: Execution,
) -> Result<ReadoutOutcome> {
    readout.validate()?;
    if trials == 0 {
        return Err(Error::domain("readout needs at least one trial"));
    }
    let bright_mean = readout.bright_mean();
    let dark_mean = readout.dark_mean();
    let n_blocks = trials.div_ceil(READOUT_BLOCK) as usize;
    let run_block = |b: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(readout.seed);
        rng.set_stream(b as u64);
        let start = b as u64 * READOUT_BLOCK;
        let len = READOUT_BLOCK.min(trials - start);
        let mut out = ReadoutOutcome::default();
        for _ in 0..len {
            let is_bright = rng.random::<f64>() < probabilities.bright;
            let counts = sample_poisson(if is_bright { bright_mean } else { dark_mean }, &mut rng);
            let read_bright = counts > readout.threshold;
            *out.histogram.entry(counts).or_default() += 1;
            out.trials += 1;
            if is_bright {
                out.prepared_bright += 1;
                out.bright_read_dark += u64::from(!read_bright);
            } else {
                out.prepared_dark += 1;
                out.dark_read_bright += u64::from(read_bright);
            }
        }
        out
    };
    let mut outcome = exec::map_reduce(n_blocks, exec, ReadoutOutcome::default, run_block, ReadoutOutcome::merge);
    let plausible_max = bright_mean + 10.0 * bright_mean.sqrt() + 10.0;
    if readout.threshold as f64 > plausible_max {
        outcome.warnings.push(format!(
            "threshold {} above plausible bright counts (~{plausible_max:.0}); every trial reads dark",
            readout.threshold
        ));
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImagingChain {
    pub magnification: f64,
    /// MCP channel pitch, m.
    pub mcp_channel_pitch: f64,
    /// Separation at the MCP needed to resolve two photons, in channel pitches.
    pub min_channel_separation: f64,
}

impl Default for ImagingChain {
    /// 7.5× onto 12 µm channels, 36 µm (three pitches) needed at the plate.
    fn default() -> Self {
        ImagingChain {
            magnification: 7.5,
            mcp_channel_pitch: 12e-6,
            min_channel_separation: 3.0,
        }
    }
}

/// Smallest resolvable separation in the object plane, m.
pub fn imaging_min_separation(chain: &ImagingChain) -> Result<f64> {
    if !(chain.magnification > 0.0) || !(chain.mcp_channel_pitch > 0.0) || !(chain.min_channel_separation > 0.0) {
        return Err(Error::domain("imaging magnification, pitch and separation must be positive"));
    }
    Ok(chain.min_channel_separation * chain.mcp_channel_pitch / chain.magnification)
}

/// True when ions `expected_spacing` apart can be told apart on the MCP.
pub fn imaging_resolves(chain: &ImagingChain, expected_spacing: f64) -> Result<bool> {
    Ok(imaging_min_separation(chain)? < expected_spacing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{ChainConfig, DEFAULT_TOLERANCE};
    use crate::species::IonSpecies;
    use approx::assert_relative_eq;

    #[test]
    fn doppler_values() {
        let p = CoolingParams::default();
        let d = doppler_limit(&p, angular(200e3)).unwrap();
        assert!((d.temperature * 1e3 - 0.50).abs() < 0.005);
        assert_relative_eq!(d.mean_phonons, 51.75, max_relative = 1e-12);
        let d2 = doppler_limit(&p, angular(400e3)).unwrap();
        assert_relative_eq!(d2.mean_phonons, d.mean_phonons / 2.0, max_relative = 1e-12);
        assert_eq!(d2.temperature, d.temperature);
    }

    #[test]
    fn spectrum_lines() {
        let one = ChainModes::solve(
            &ChainConfig::new(1, angular(200e3), IonSpecies::calcium40()).unwrap(),
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        let w0 = 2.5e15;
        let lines = sideband_spectrum(w0, &one).unwrap();
        let f: Vec<f64> = lines.iter().map(|l| l.frequency).collect();
        assert_eq!(f, vec![w0 - angular(200e3), w0, w0 + angular(200e3)]);
        let two = ChainModes::solve(
            &ChainConfig::new(2, angular(200e3), IonSpecies::calcium40()).unwrap(),
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        let lines = sideband_spectrum(0.0, &two).unwrap();
        assert_eq!(lines.len(), 5);
        assert_relative_eq!(lines[4].frequency, 3f64.sqrt() * angular(200e3), max_relative = 1e-10);
        assert_eq!(lines[1].label, "red mode 0");
    }

    #[test]
    fn resolution_checks() {
        let r = sideband_resolution_check(angular(10e3), angular(200e3), 10.0).unwrap();
        assert!(r.pass);
        assert_relative_eq!(r.margin, 20.0, max_relative = 1e-12);
        assert!(!sideband_resolution_check(1.0, 1.0, 10.0).unwrap().pass);
        assert!(doppler_linewidth_check(angular(1e6)).unwrap());
        assert!(!doppler_linewidth_check(angular(20e6)).unwrap());
    }

    #[test]
    fn phonon_rates() {
        let mut p = CoolingParams::default();
        assert_relative_eq!(phonon_removal_rate(&p).unwrap(), 1.0 / 1.08);
        p.repump_factor = 1000.0;
        let r = phonon_removal_rate(&p).unwrap();
        assert!((r - 926.0).abs() < 0.5);
        assert!((52.0 / r * 1e3 - 56.0).abs() < 0.5);
        p.repump_factor = 0.5;
        assert!(phonon_removal_rate(&p).is_err());
    }

    fn readout(qe: f64, solid: f64) -> ReadoutParams {
        ReadoutParams {
            scatter_rate_bright: 1e7,
            collection_solid_angle: solid,
            quantum_efficiency: qe,
            integration_time: 1e-3,
            dark_rate: 1e3,
            threshold: 10,
            seed: 1,
        }
    }

    #[test]
    fn collection() {
        assert!((collection_efficiency(&readout(1.0, 0.25)).unwrap() - 0.0199).abs() < 1e-4);
        assert_eq!(collection_efficiency(&readout(0.0, 0.25)).unwrap(), 0.0);
        let full = collection_efficiency(&readout(1.0, 4.0 * std::f64::consts::PI)).unwrap();
        assert_relative_eq!(full, 1.0);
        assert!(collection_efficiency(&readout(1.5, 0.25)).is_err());
    }

    #[test]
    fn zero_integration_reads_dark() {
        let mut r = readout(0.2, 0.25);
        r.integration_time = 0.0;
        let out = simulate_readout(StateProbabilities::new(0.5, 0.5).unwrap(), &r, 1000, Execution::Parallel).unwrap();
        assert_eq!(out.bright_error_rate(), 1.0);
        assert_eq!(out.dark_error_rate(), 0.0);
        assert_eq!(out.histogram.keys().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn implausible_threshold_warns() {
        let mut r = readout(0.2, 0.25);
        r.threshold = 100_000;
        let out = simulate_readout(StateProbabilities::new(1.0, 0.0).unwrap(), &r, 10, Execution::Sequential).unwrap();
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn poisson_sampler_mean_and_large_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20_000;
        let mean = (0..n).map(|_| sample_poisson(50.0, &mut rng)).sum::<u64>() as f64 / n as f64;
        assert!((mean - 50.0).abs() < 5.0 * (50.0f64 / n as f64).sqrt());
        let big = (0..2000).map(|_| sample_poisson(1800.0, &mut rng)).sum::<u64>() as f64 / 2000.0;
        assert!((big - 1800.0).abs() < 5.0 * (1800.0f64 / 2000.0).sqrt());
        assert_eq!(sample_poisson(0.0, &mut rng), 0);
    }

    #[test]
    fn imaging() {
        let sep = imaging_min_separation(&ImagingChain::default()).unwrap();
        assert_relative_eq!(sep, 4.8e-6, max_relative = 1e-12);
        assert!(imaging_resolves(&ImagingChain::default(), 25e-6).unwrap());
        let huge = ImagingChain {
            magnification: 1e9,
            ..ImagingChain::default()
        };
        assert!(imaging_min_separation(&huge).unwrap() < 1e-12);
    }
}
