//! Flat `key = value` run configuration.
//!
//! ```text
//! schema_version = 1
//! seed = 42
//!
//! [trap]
//! v_rf = 300
//! z0 = 0.005
//! ```
//!
//! A `[section]` header prefixes the following keys with `section.`; dotted keys
//! such as `trap.z0 = 0.005` are accepted anywhere. `#` starts a comment line.
//! Values are SI except keys ending in `_hz` (cyclic frequency) and `_deg`.
//! Unknown keys, duplicates and out-of-range values are errors.

use std::fmt::Write as _;

use crate::chain::ChainConfig;
use crate::constants::angular;
use crate::cooling::{CoolingParams, ImagingChain, ReadoutParams, StateProbabilities};
use crate::dynamics::{QubitAssignment, Scheme};
use crate::optics::{BeamGeometry, DeflectorSpec};
use crate::species::IonSpecies;
use crate::trap::TrapParams;
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "json" => Some(OutputFormat::Json),
            "csv" => Some(OutputFormat::Csv),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrapSettings {
    pub v_rf: f64,
    pub rf_drive_hz: f64,
    pub r0: f64,
    pub u_dc: f64,
    pub z0: f64,
    pub kappa: f64,
    pub string_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSettings {
    pub n_ions: usize,
    pub tolerance: f64,
    /// Addressing wavelength used for the Lamb-Dicke factor, m.
    pub wavelength: f64,
    pub projection_angle: f64,
    /// Second axial operating point reported alongside the trap-derived one.
    pub alt_axial_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSettings {
    pub script: Option<String>,
    pub n_max: usize,
    pub scheme: Scheme,
    pub raman_field_gauss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpticsSettings {
    pub spot_diameter: f64,
    pub wavelength: f64,
    pub input_beam_diameter: f64,
    pub focal_length: f64,
    pub wedge_deg: f64,
    pub ion_spacing: f64,
    pub crosstalk_target: f64,
    pub deflector_max_angle: f64,
    pub deflector_max_voltage: f64,
    pub deflector_switch_time: f64,
    pub intensity_stability: f64,
    pub timing_resolution: f64,
    pub pulse_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingSettings {
    pub gamma_hz: f64,
    pub i_sat: f64,
    pub d_lifetime: f64,
    pub repump_factor: f64,
    pub sideband_linewidth_hz: f64,
    pub doppler_linewidth_hz: f64,
    pub resolution_factor: f64,
    /// Sideband-cooling transition wavelength, m.
    pub transition_wavelength: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutSettings {
    pub scatter_rate: f64,
    pub solid_angle: f64,
    pub quantum_efficiency: f64,
    pub integration_time: f64,
    pub dark_rate: f64,
    pub threshold: u64,
    pub trials: u64,
    pub p_bright: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImagingSettings {
    pub magnification: f64,
    pub channel_pitch: f64,
    pub channel_separation: f64,
    pub expected_spacing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: Option<u64>,
    pub format: OutputFormat,
    pub species: String,
    pub trap: TrapSettings,
    pub chain: ChainSettings,
    pub gate: GateSettings,
    pub optics: OpticsSettings,
    pub cooling: CoolingSettings,
    pub readout: ReadoutSettings,
    pub imaging: ImagingSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: None,
            format: OutputFormat::Json,
            species: "ca40".into(),
            trap: TrapSettings {
                v_rf: 300.0,
                rf_drive_hz: 10e6,
                r0: 0.85e-3,
                u_dc: 27.25,
                z0: 5e-3,
                kappa: 0.3,
                string_ratio: crate::trap::DEFAULT_STRING_RATIO,
            },
            chain: ChainSettings {
                n_ions: 5,
                tolerance: crate::chain::DEFAULT_TOLERANCE,
                wavelength: 732e-9,
                projection_angle: 0.0,
                alt_axial_hz: 100e3,
            },
            gate: GateSettings {
                script: None,
                n_max: crate::dynamics::DEFAULT_N_MAX,
                scheme: Scheme::SingleLaser,
                raman_field_gauss: 200.0,
            },
            optics: OpticsSettings {
                spot_diameter: 10e-6,
                wavelength: 397e-9,
                input_beam_diameter: 3e-3,
                focal_length: 30e-3,
                wedge_deg: 2.0,
                ion_spacing: 20e-6,
                crosstalk_target: 1e-3,
                deflector_max_angle: 9e-3,
                deflector_max_voltage: 3000.0,
                deflector_switch_time: 10e-9,
                intensity_stability: 1e-3,
                timing_resolution: 1e-9,
                pulse_width: 10e-6,
            },
            cooling: CoolingSettings {
                gamma_hz: 20.7e6,
                i_sat: 100.0,
                d_lifetime: 1.08,
                repump_factor: 1.0,
                sideband_linewidth_hz: 10e3,
                doppler_linewidth_hz: 1e6,
                resolution_factor: crate::cooling::DEFAULT_RESOLUTION_FACTOR,
                transition_wavelength: 732e-9,
            },
            readout: ReadoutSettings {
                // 49 signal counts in 5 ms through 0.25 sr at QE 0.2
                scatter_rate: 2.463e6,
                solid_angle: 0.25,
                quantum_efficiency: 0.2,
                integration_time: 5e-3,
                dark_rate: 200.0,
                threshold: 10,
                trials: 100_000,
                p_bright: 0.5,
            },
            imaging: ImagingSettings {
                magnification: 7.5,
                channel_pitch: 12e-6,
                channel_separation: 3.0,
                expected_spacing: 25e-6,
            },
        }
    }
}

impl RunConfig {
    pub fn species(&self) -> Result<IonSpecies> {
        IonSpecies::by_name(&self.species)
    }

    pub fn trap_params(&self) -> TrapParams {
        let t = &self.trap;
        TrapParams {
            v_rf: t.v_rf,
            omega_rf: angular(t.rf_drive_hz),
            r0: t.r0,
            u_dc: t.u_dc,
            z0: t.z0,
            kappa: t.kappa,
        }
    }

    pub fn chain_config(&self, omega_axial: f64) -> Result<ChainConfig> {
        ChainConfig::new(self.chain.n_ions, omega_axial, self.species()?)
    }

    pub fn qubit_assignment(&self) -> QubitAssignment {
        match self.gate.scheme {
            Scheme::SingleLaser => QubitAssignment::single_laser(),
            Scheme::Raman => QubitAssignment::raman(self.gate.raman_field_gauss),
        }
    }

    pub fn beam(&self) -> BeamGeometry {
        let o = &self.optics;
        BeamGeometry {
            spot_diameter: o.spot_diameter,
            wavelength: o.wavelength,
            input_beam_diameter: o.input_beam_diameter,
            focal_length: o.focal_length,
            tilt_wedge: o.wedge_deg.to_radians(),
        }
    }

    pub fn deflector(&self) -> DeflectorSpec {
        DeflectorSpec {
            max_angle: self.optics.deflector_max_angle,
            max_voltage: self.optics.deflector_max_voltage,
            switch_time: self.optics.deflector_switch_time,
        }
    }

    pub fn cooling_params(&self) -> CoolingParams {
        let c = &self.cooling;
        CoolingParams {
            gamma_dipole: angular(c.gamma_hz),
            i_sat: c.i_sat,
            d_lifetime: c.d_lifetime,
            repump_factor: c.repump_factor,
        }
    }

    /// Readout parameters; randomised output needs an explicit seed.
    pub fn readout_params(&self) -> Result<ReadoutParams> {
        let seed = self.require_seed()?;
        let r = &self.readout;
        Ok(ReadoutParams {
            scatter_rate_bright: r.scatter_rate,
            collection_solid_angle: r.solid_angle,
            quantum_efficiency: r.quantum_efficiency,
            integration_time: r.integration_time,
            dark_rate: r.dark_rate,
            threshold: r.threshold,
            seed,
        })
    }

    pub fn state_probabilities(&self) -> Result<StateProbabilities> {
        StateProbabilities::new(self.readout.p_bright, 1.0 - self.readout.p_bright)
    }

    pub fn imaging_chain(&self) -> ImagingChain {
        ImagingChain {
            magnification: self.imaging.magnification,
            mcp_channel_pitch: self.imaging.channel_pitch,
            min_channel_separation: self.imaging.channel_separation,
        }
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::ConfigValue {
            key: "seed".into(),
            message: "randomised output requires an explicit seed (config `seed` or --seed)".into(),
        })
    }
}

type Getter = fn(&RunConfig) -> Option<String>;
type Setter = fn(&mut RunConfig, &str) -> std::result::Result<(), String>;

struct Field {
    key: &'static str,
    get: Getter,
    set: Setter,
}

fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-3..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("`{v}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{v}` is not finite"))
    }
}

fn parse_int<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("`{v}` is not a non-negative integer"))
}

fn positive(x: f64) -> std::result::Result<(), String> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(format!("must be positive, got {x}"))
    }
}

fn non_negative(x: f64) -> std::result::Result<(), String> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(format!("must be non-negative, got {x}"))
    }
}

fn fraction(x: f64) -> std::result::Result<(), String> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(format!("must lie in [0, 1], got {x}"))
    }
}

fn open_fraction(x: f64) -> std::result::Result<(), String> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(format!("must lie in (0, 1), got {x}"))
    }
}

fn above_one(x: f64) -> std::result::Result<(), String> {
    if x > 1.0 {
        Ok(())
    } else {
        Err(format!("must exceed 1, got {x}"))
    }
}

fn at_least_one(x: f64) -> std::result::Result<(), String> {
    if x >= 1.0 {
        Ok(())
    } else {
        Err(format!("must be >= 1, got {x}"))
    }
}

fn projection(x: f64) -> std::result::Result<(), String> {
    if (0.0..=std::f64::consts::FRAC_PI_2).contains(&x) {
        Ok(())
    } else {
        Err(format!("must lie in [0, π/2], got {x}"))
    }
}

fn solid_angle(x: f64) -> std::result::Result<(), String> {
    if x > 0.0 && x <= 4.0 * std::f64::consts::PI {
        Ok(())
    } else {
        Err(format!("must lie in (0, 4π], got {x}"))
    }
}

macro_rules! real {
    ($key:literal, $($f:ident).+, $check:expr) => {
        Field {
            key: $key,
            get: |c| Some(fmt_f64(c.$($f).+)),
            set: |c, v| {
                let x = parse_f64(v)?;
                $check(x)?;
                c.$($f).+ = x;
                Ok(())
            },
        }
    };
}

macro_rules! int {
    ($key:literal, $($f:ident).+, $min:expr) => {
        Field {
            key: $key,
            get: |c| Some(c.$($f).+.to_string()),
            set: |c, v| {
                let x = parse_int(v)?;
                #[allow(unused_comparisons)]
                if x < $min {
                    return Err(format!("must be >= {}, got {x}", $min));
                }
                c.$($f).+ = x;
                Ok(())
            },
        }
    };
}

const FIELDS: &[Field] = &[
    Field {
        key: "schema_version",
        get: |c| Some(c.schema_version.to_string()),
        set: |c, v| {
            let x: u32 = parse_int(v)?;
            if x != SCHEMA_VERSION {
                return Err(format!("unsupported schema version {x}, expected {SCHEMA_VERSION}"));
            }
            c.schema_version = x;
            Ok(())
        },
    },
    Field {
        key: "seed",
        get: |c| c.seed.map(|s| s.to_string()),
        set: |c, v| {
            c.seed = Some(parse_int(v)?);
            Ok(())
        },
    },
    Field {
        key: "output.format",
        get: |c| Some(c.format.as_str().to_string()),
        set: |c, v| {
            c.format = OutputFormat::parse(v).ok_or_else(|| format!("expected json or csv, got `{v}`"))?;
            Ok(())
        },
    },
    Field {
        key: "species.name",
        get: |c| Some(c.species.clone()),
        set: |c, v| {
            IonSpecies::by_name(v).map_err(|e| e.to_string())?;
            c.species = v.to_string();
            Ok(())
        },
    },
    real!("trap.v_rf", trap.v_rf, non_negative),
    real!("trap.rf_drive_hz", trap.rf_drive_hz, positive),
    real!("trap.r0", trap.r0, positive),
    real!("trap.u_dc", trap.u_dc, non_negative),
    real!("trap.z0", trap.z0, positive),
    real!("trap.kappa", trap.kappa, positive),
    real!("trap.string_ratio", trap.string_ratio, above_one),
    int!("chain.n_ions", chain.n_ions, 1),
    real!("chain.tolerance", chain.tolerance, positive),
    real!("chain.wavelength", chain.wavelength, positive),
    real!("chain.projection_angle", chain.projection_angle, projection),
    real!("chain.alt_axial_hz", chain.alt_axial_hz, positive),
    Field {
        key: "gate.script",
        get: |c| c.gate.script.clone(),
        set: |c, v| {
            if v.is_empty() {
                return Err("script path is empty".into());
            }
            c.gate.script = Some(v.to_string());
            Ok(())
        },
    },
    int!("gate.n_max", gate.n_max, 2),
    Field {
        key: "gate.scheme",
        get: |c| {
            Some(match c.gate.scheme {
                Scheme::SingleLaser => "single".into(),
                Scheme::Raman => "raman".into(),
            })
        },
        set: |c, v| {
            c.gate.scheme = match v {
                "single" => Scheme::SingleLaser,
                "raman" => Scheme::Raman,
                _ => return Err(format!("expected single or raman, got `{v}`")),
            };
            Ok(())
        },
    },
    real!("gate.raman_field_gauss", gate.raman_field_gauss, positive),
    real!("optics.spot_diameter", optics.spot_diameter, positive),
    real!("optics.wavelength", optics.wavelength, positive),
    real!("optics.input_beam_diameter", optics.input_beam_diameter, positive),
    real!("optics.focal_length", optics.focal_length, positive),
    real!("optics.wedge_deg", optics.wedge_deg, positive),
    real!("optics.ion_spacing", optics.ion_spacing, positive),
    real!("optics.crosstalk_target", optics.crosstalk_target, open_fraction),
    real!("optics.deflector_max_angle", optics.deflector_max_angle, non_negative),
    real!("optics.deflector_max_voltage", optics.deflector_max_voltage, positive),
    real!("optics.deflector_switch_time", optics.deflector_switch_time, positive),
    real!("optics.intensity_stability", optics.intensity_stability, non_negative),
    real!("optics.timing_resolution", optics.timing_resolution, non_negative),
    real!("optics.pulse_width", optics.pulse_width, positive),
    real!("cooling.gamma_hz", cooling.gamma_hz, positive),
    real!("cooling.i_sat", cooling.i_sat, positive),
    real!("cooling.d_lifetime", cooling.d_lifetime, positive),
    real!("cooling.repump_factor", cooling.repump_factor, at_least_one),
    real!("cooling.sideband_linewidth_hz", cooling.sideband_linewidth_hz, positive),
    real!("cooling.doppler_linewidth_hz", cooling.doppler_linewidth_hz, positive),
    real!("cooling.resolution_factor", cooling.resolution_factor, positive),
    real!("cooling.transition_wavelength", cooling.transition_wavelength, positive),
    real!("readout.scatter_rate", readout.scatter_rate, non_negative),
    real!("readout.solid_angle", readout.solid_angle, solid_angle),
    real!("readout.quantum_efficiency", readout.quantum_efficiency, fraction),
    real!("readout.integration_time", readout.integration_time, non_negative),
    real!("readout.dark_rate", readout.dark_rate, non_negative),
    int!("readout.threshold", readout.threshold, 0),
    int!("readout.trials", readout.trials, 1),
    real!("readout.p_bright", readout.p_bright, fraction),
    real!("imaging.magnification", imaging.magnification, positive),
    real!("imaging.channel_pitch", imaging.channel_pitch, positive),
    real!("imaging.channel_separation", imaging.channel_separation, positive),
    real!("imaging.expected_spacing", imaging.expected_spacing, positive),
];

const SECTIONS: &[&str] = &[
    "output", "species", "trap", "chain", "gate", "optics", "cooling", "readout", "imaging",
];

/// Drops a trailing `# comment` that is preceded by whitespace and not quoted.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    let mut prev_space = true;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '#' if !quoted && prev_space => return &line[..i],
            _ => {}
        }
        prev_space = ch.is_whitespace();
    }
    line
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(v)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut section: Option<&str> = None;
    let mut seen: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let syntax = |message: String| Error::ConfigSyntax {
            line: line_no,
            message,
        };
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| syntax(format!("unterminated section header `{line}`")))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(syntax(format!("unknown section `[{name}]`")));
            }
            section = Some(name);
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected `key = value`, got `{line}`")))?;
        let (k, v) = (k.trim(), unquote(v.trim()));
        if k.is_empty() {
            return Err(syntax("missing key".into()));
        }
        let key = match section {
            Some(s) if !k.contains('.') => format!("{s}.{k}"),
            _ => k.to_string(),
        };
        let field = FIELDS
            .iter()
            .find(|f| f.key == key)
            .ok_or_else(|| syntax(format!("unknown key `{key}`")))?;
        if seen.contains(&key) {
            return Err(syntax(format!("duplicate key `{key}`")));
        }
        (field.set)(&mut cfg, v).map_err(|message| Error::ConfigValue {
            key: key.clone(),
            message: format!("{message} (line {line_no})"),
        })?;
        seen.push(key);
    }
    Ok(cfg)
}

/// Canonical text form: top-level keys, then one `[section]` per group, every key
/// written out (defaults included), fixed order.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let mut current = "";
    for field in FIELDS {
        let Some(value) = (field.get)(cfg) else {
            continue;
        };
        let (section, name) = field.key.split_once('.').unwrap_or(("", field.key));
        if section != current {
            let _ = writeln!(out, "\n[{section}]");
            current = section;
        }
        let _ = writeln!(out, "{name} = {value}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
        assert_eq!(parse_config("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn range_error_names_the_key() {
        let err = parse_config("trap.z0 = -1").unwrap_err();
        match err {
            Error::ConfigValue { key, .. } => assert_eq!(key, "trap.z0"),
            other => panic!("{other:?}"),
        }
        let err = parse_config("[trap]\nz0 = 0").unwrap_err();
        assert!(matches!(err, Error::ConfigValue { ref key, .. } if key == "trap.z0"));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_config("seed = 1\n\nbogus line").unwrap_err();
        assert!(matches!(err, Error::ConfigSyntax { line: 3, .. }));
        let err = parse_config("[trap]\nfrobnicate = 2").unwrap_err();
        assert!(matches!(err, Error::ConfigSyntax { line: 2, .. }));
        let err = parse_config("[nosuch]").unwrap_err();
        assert!(matches!(err, Error::ConfigSyntax { line: 1, .. }));
        let err = parse_config("seed = 1\nseed = 2").unwrap_err();
        assert!(matches!(err, Error::ConfigSyntax { line: 2, .. }));
    }

    #[test]
    fn inline_comments() {
        let cfg = parse_config("seed = 4   # fixed\n[gate]\nscript = \"a#b.pulses\" # quoted hash").unwrap();
        assert_eq!(cfg.seed, Some(4));
        assert_eq!(cfg.gate.script.as_deref(), Some("a#b.pulses"));
    }

    #[test]
    fn schema_version_pinned() {
        assert!(parse_config("schema_version = 1").is_ok());
        assert!(parse_config("schema_version = 2").is_err());
    }

    #[test]
    fn sections_and_dotted_keys_mix() {
        let cfg = parse_config("seed = 9\n[optics]\nspot_diameter = 4e-5\ntrap.v_rf = 250\n[gate]\nscript = \"cnot.pulses\"").unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.optics.spot_diameter, 4e-5);
        assert_eq!(cfg.trap.v_rf, 250.0);
        assert_eq!(cfg.gate.script.as_deref(), Some("cnot.pulses"));
    }

    #[test]
    fn missing_seed_is_a_config_error() {
        let err = RunConfig::default().readout_params().unwrap_err();
        assert_eq!(err.kind(), crate::ErrorKind::Config);
    }

    #[test]
    fn serialization_is_a_fixed_point() {
        let cfg = parse_config("seed = 3\nchain.n_ions = 7\noptics.timing_resolution = 2.5e-9").unwrap();
        let text = serialize_config(&cfg);
        let again = parse_config(&text).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(serialize_config(&again), text);
    }
}
