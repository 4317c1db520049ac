//! Report builders behind the CLI subcommands.
//!
//! Each builder turns a [`RunConfig`] into one report [`Section`]; the design
//! report strings them together and adds the feasibility verdict. Errors are
//! wrapped with the name of the section that raised them.

use crate::chain::{lamb_dicke_cm, ChainConfig, ChainModes, LambDicke};
use crate::config::RunConfig;
use crate::constants::{angular, cyclic, SPEED_OF_LIGHT};
use crate::cooling::{
    analytic_error_rates, collection_efficiency, doppler_limit, doppler_linewidth_check, imaging_min_separation,
    imaging_resolves, phonon_removal_rate, sideband_resolution_check, sideband_spectrum, simulate_readout,
    ReadoutOutcome,
};
use crate::dynamics::{cnot_area_error_sweep, fidelity, pulse_area_perturbation, RegisterState, TRUNCATION_GUARD};
use crate::exec::Execution;
use crate::optics::{addressable_ions, crosstalk, max_spot_for_crosstalk, pulse_area_error_budget, resolvable_spots};
use crate::report::{Report, Section, Table, Value};
use crate::script::{label_string, parse_script, product_state, GateScript};
use crate::trap::{stability_report, Q_STABILITY_LIMIT};
use crate::{Error, Result};

/// Addressable-ion count the design has to reach.
pub const REQUIRED_IONS: u64 = 20;
/// Residual phonon excitation accepted as "restored".
pub const PHONON_RESTORED_TOLERANCE: f64 = 1e-10;

trait SectionContext<T> {
    fn section(self, name: &str) -> Result<T>;
}

impl<T> SectionContext<T> for Result<T> {
    fn section(self, name: &str) -> Result<T> {
        self.map_err(|e| e.context(format!("{name} section")))
    }
}

/// Axial frequency set by the trap endcaps, rad/s.
fn trap_axial(cfg: &RunConfig) -> Result<f64> {
    let report = stability_report(&cfg.trap_params(), &cfg.species()?, cfg.trap.string_ratio)?;
    let w = report.frequencies.omega_axial;
    if !(w > 0.0) {
        return Err(Error::Precondition(
            "trap.u_dc = 0 gives no axial confinement; a chain needs u_dc > 0".into(),
        ));
    }
    Ok(w)
}

pub fn trap_section(cfg: &RunConfig) -> Result<Section> {
    let build = || -> Result<Section> {
        let trap = cfg.trap_params();
        let r = stability_report(&trap, &cfg.species()?, cfg.trap.string_ratio)?;
        let f = &r.frequencies;
        let mut s = Section::new("trap");
        s.text("species", cfg.species.clone())
            .real("v_rf", trap.v_rf, "V")
            .real("rf_drive", cfg.trap.rf_drive_hz, "Hz")
            .real("r0", trap.r0, "m")
            .real("u_dc", trap.u_dc, "V")
            .real("z0", trap.z0, "m")
            .real("kappa", trap.kappa, "1")
            .real("q", f.q, "1")
            .real("q_limit", Q_STABILITY_LIMIT, "1")
            .flag("stable", f.stable)
            .real("radial_frequency", cyclic(f.omega_radial), "Hz")
            .real("axial_frequency", cyclic(f.omega_axial), "Hz")
            .real("radial_axial_ratio", r.ratio, "1")
            .real("string_ratio_threshold", r.threshold, "1")
            .flag("string_phase", r.string_phase)
            .flag("radial_dominant", f.radial_dominant);
        for (i, note) in r.notes.iter().enumerate() {
            s.text(format!("note_{i}"), *note);
        }
        Ok(s)
    };
    build().section("trap")
}

fn chain_point(s: &mut Section, prefix: &str, cfg: &ChainConfig, tol: f64) -> Result<ChainModes> {
    let modes = ChainModes::solve(cfg, tol)?;
    s.real(format!("{prefix}axial_frequency"), cyclic(cfg.omega_axial), "Hz")
        .real(format!("{prefix}length_scale"), modes.length_scale, "m");
    match modes.min_spacing {
        Some(d) => s.real(format!("{prefix}min_spacing"), d, "m"),
        None => s.text(format!("{prefix}min_spacing"), "no spacing"),
    };
    Ok(modes)
}

/// Chain at the trap-derived axial frequency plus the alternative operating point.
pub fn chain_section(cfg: &RunConfig) -> Result<(Section, ChainModes, LambDicke)> {
    let build = || -> Result<(Section, ChainModes, LambDicke)> {
        let omega = trap_axial(cfg)?;
        let chain = cfg.chain_config(omega)?;
        let mut s = Section::new("chain");
        s.int("n_ions", chain.n_ions as i64, "count")
            .real("tolerance", cfg.chain.tolerance, "1");
        let modes = chain_point(&mut s, "", &chain, cfg.chain.tolerance)?;
        for (i, x) in modes.positions.iter().enumerate() {
            s.real(format!("position_{i}"), *x, "m");
        }
        for (m, w) in modes.mode_frequencies.iter().enumerate() {
            s.real(format!("mode_{m}_frequency"), cyclic(*w), "Hz");
        }
        let eta = lamb_dicke_cm(&chain, cfg.chain.wavelength, cfg.chain.projection_angle)?;
        s.real("wavelength", cfg.chain.wavelength, "m")
            .real("projection_angle", cfg.chain.projection_angle, "rad")
            .real("lamb_dicke_cm", eta.eta, "1")
            .flag("no_axial_coupling", eta.no_axial_coupling);
        let alt = cfg.chain_config(angular(cfg.chain.alt_axial_hz))?;
        chain_point(&mut s, "alt_", &alt, cfg.chain.tolerance)?;
        Ok((s, modes, eta))
    };
    build().section("chain")
}

pub fn optics_section(cfg: &RunConfig) -> Result<Section> {
    let build = || -> Result<Section> {
        let o = &cfg.optics;
        let beam = cfg.beam();
        beam.validate()?;
        let defl = cfg.deflector();
        let mut s = Section::new("optics");
        s.real("spot_diameter", beam.spot_diameter, "m")
            .real("ion_spacing", o.ion_spacing, "m")
            .real("crosstalk", crosstalk(o.ion_spacing, beam.spot_diameter)?, "1")
            .real("crosstalk_target", o.crosstalk_target, "1")
            .real(
                "max_spot_for_target",
                max_spot_for_crosstalk(o.ion_spacing, o.crosstalk_target)?,
                "m",
            )
            .real("diffraction_limit", beam.diffraction_limit(), "m")
            .flag("below_diffraction_limit", beam.below_diffraction_limit())
            .real("wavelength", beam.wavelength, "m")
            .real("input_beam_diameter", beam.input_beam_diameter, "m")
            .real("focal_length", beam.focal_length, "m")
            .real("deflector_max_angle", defl.max_angle, "rad")
            .real("deflector_max_voltage", defl.max_voltage, "V")
            .real("deflector_switch_time", defl.switch_time, "s")
            .int("resolvable_spots", resolvable_spots(&beam, &defl)? as i64, "count")
            .int(
                "addressable_ions",
                addressable_ions(&defl, beam.focal_length, o.ion_spacing)? as i64,
                "count",
            )
            .real(
                "pulse_area_error",
                pulse_area_error_budget(o.intensity_stability, o.timing_resolution, o.pulse_width)?,
                "1",
            )
            .real("pulse_width", o.pulse_width, "s")
            .real("tilt_wedge", o.wedge_deg, "deg")
            .text("tilt_wedge_note", "line-of-focus wedge recorded as a constant, not ray traced");
        Ok(s)
    };
    build().section("optics")
}

pub fn cooling_section(cfg: &RunConfig) -> Result<Section> {
    let build = || -> Result<Section> {
        let c = &cfg.cooling;
        let params = cfg.cooling_params();
        let omega = trap_axial(cfg)?;
        let chain = ChainModes::solve(&cfg.chain_config(omega)?, cfg.chain.tolerance)?;
        let omega_cm = chain.mode_frequencies[0];
        let limit = doppler_limit(&params, omega_cm)?;
        let rate = phonon_removal_rate(&params)?;
        let resolution = sideband_resolution_check(angular(c.sideband_linewidth_hz), omega_cm, c.resolution_factor)?;
        let mut s = Section::new("cooling");
        s.real("gamma_dipole", c.gamma_hz, "Hz")
            .text("gamma_dipole_source", "assumed (standard Ca+ data)")
            .real("doppler_temperature", limit.temperature, "K")
            .real("doppler_mean_phonons", limit.mean_phonons, "1")
            .real("doppler_laser_linewidth", c.doppler_linewidth_hz, "Hz")
            .flag("doppler_linewidth_ok", doppler_linewidth_check(angular(c.doppler_linewidth_hz))?)
            .real("sideband_laser_linewidth", c.sideband_linewidth_hz, "Hz")
            .real("cm_frequency", cyclic(omega_cm), "Hz")
            .real("resolution_margin", resolution.margin, "1")
            .real("resolution_required", resolution.required_factor, "1")
            .flag("sideband_resolved", resolution.pass)
            .real("phonon_removal_rate", rate, "1/s")
            .real("sideband_cooling_time", limit.mean_phonons / rate, "s")
            .real("transition_wavelength", c.transition_wavelength, "m");
        s.real("carrier_frequency", SPEED_OF_LIGHT / c.transition_wavelength, "Hz");
        // offsets from a zero carrier; subtracting the optical frequency would cost ~8 digits
        for line in sideband_spectrum(0.0, &chain)? {
            s.real(format!("{} offset", line.label), cyclic(line.frequency), "Hz");
        }
        Ok(s)
    };
    build().section("cooling")
}

/// Readout summary with Monte Carlo and analytic error rates side by side.
pub fn readout_section(cfg: &RunConfig, exec: Execution) -> Result<(Section, ReadoutOutcome)> {
    let build = || -> Result<(Section, ReadoutOutcome)> {
        let params = cfg.readout_params()?;
        let outcome = simulate_readout(cfg.state_probabilities()?, &params, cfg.readout.trials, exec)?;
        let analytic = analytic_error_rates(&params);
        let mut s = Section::new("readout");
        s.int("seed", params.seed as i64, "1")
            .int("trials", outcome.trials as i64, "count")
            .real("p_bright", cfg.readout.p_bright, "1")
            .real("collection_efficiency", collection_efficiency(&params)?, "1")
            .real("bright_mean_counts", params.bright_mean(), "count")
            .real("dark_mean_counts", params.dark_mean(), "count")
            .int("threshold", params.threshold as i64, "count")
            .int("prepared_bright", outcome.prepared_bright as i64, "count")
            .int("prepared_dark", outcome.prepared_dark as i64, "count")
            .real("bright_error_rate", outcome.bright_error_rate(), "1")
            .real("bright_error_analytic", analytic.bright_as_dark, "1")
            .real("dark_error_rate", outcome.dark_error_rate(), "1")
            .real("dark_error_analytic", analytic.dark_as_bright, "1");
        for (i, w) in outcome.warnings.iter().enumerate() {
            s.text(format!("warning_{i}"), w.clone());
        }
        Ok((s, outcome))
    };
    build().section("readout")
}

pub fn imaging_section(cfg: &RunConfig) -> Result<Section> {
    let build = || -> Result<Section> {
        let chain = cfg.imaging_chain();
        let mut s = Section::new("imaging");
        s.real("magnification", chain.magnification, "1")
            .real("channel_pitch", chain.mcp_channel_pitch, "m")
            .real(
                "plate_separation",
                chain.min_channel_separation * chain.mcp_channel_pitch,
                "m",
            )
            .real("min_separation", imaging_min_separation(&chain)?, "m")
            .real("expected_spacing", cfg.imaging.expected_spacing, "m")
            .flag("resolvable", imaging_resolves(&chain, cfg.imaging.expected_spacing)?);
        Ok(s)
    };
    build().section("imaging")
}

/// CNOT truth table and the effect of the optics area-error budget on it.
pub fn gate_section(cfg: &RunConfig, eta: &LambDicke, exec: Execution) -> Result<Section> {
    let build = || -> Result<Section> {
        let o = &cfg.optics;
        let budget = pulse_area_error_budget(o.intensity_stability, o.timing_resolution, o.pulse_width)?;
        let sweep = cnot_area_error_sweep(&[0.0, budget], cfg.gate.n_max, eta, exec)?;
        let assignment = cfg.qubit_assignment();
        let mut s = Section::new("gate");
        s.text("scheme", format!("{:?}", assignment.scheme))
            .text("level_zero", assignment.zero)
            .text("level_one", assignment.one)
            .text("level_aux", assignment.aux);
        if let Some(b) = assignment.magnetic_field {
            s.real("magnetic_field", b, "G");
        }
        if let Some(z) = assignment.zeeman_splitting {
            s.real("zeeman_splitting", z, "Hz");
        }
        s.int("n_max", cfg.gate.n_max as i64, "count")
            .real("cnot_mean_infidelity", sweep[0].1, "1")
            .real("area_error", budget, "1")
            .real("cnot_mean_infidelity_at_area_error", sweep[1].1, "1");
        Ok(s)
    };
    build().section("gate")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub addressable_ions: u64,
    pub crosstalk: f64,
    pub sideband_resolved: bool,
    pub imaging_resolvable: bool,
    pub string_phase: bool,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    pub report: Report,
    pub verdict: Verdict,
}

/// Aggregate design report; readout needs a seed.
pub fn run_design_report(cfg: &RunConfig, exec: Execution) -> Result<DesignReport> {
    let trap = trap_section(cfg)?;
    let (chain, _, eta) = chain_section(cfg)?;
    let gate = gate_section(cfg, &eta, exec)?;
    let optics = optics_section(cfg)?;
    let cooling = cooling_section(cfg)?;
    let (readout, _) = readout_section(cfg, exec)?;
    let imaging = imaging_section(cfg)?;

    let verdict = Verdict {
        addressable_ions: optics.real_value("addressable_ions").unwrap_or(0.0) as u64,
        crosstalk: optics.real_value("crosstalk").unwrap_or(1.0),
        sideband_resolved: cooling.flag_value("sideband_resolved").unwrap_or(false),
        imaging_resolvable: imaging.flag_value("resolvable").unwrap_or(false),
        string_phase: trap.flag_value("string_phase").unwrap_or(false),
        feasible: false,
    };
    let feasible = verdict.addressable_ions >= REQUIRED_IONS
        && verdict.crosstalk <= cfg.optics.crosstalk_target
        && verdict.sideband_resolved
        && verdict.imaging_resolvable;
    let verdict = Verdict { feasible, ..verdict };

    let mut f = Section::new("feasibility");
    f.int("addressable_ions", verdict.addressable_ions as i64, "count")
        .int("required_ions", REQUIRED_IONS as i64, "count")
        .flag("crosstalk_ok", verdict.crosstalk <= cfg.optics.crosstalk_target)
        .flag("sideband_resolved", verdict.sideband_resolved)
        .flag("imaging_resolvable", verdict.imaging_resolvable)
        .flag("string_phase", verdict.string_phase)
        .flag("verdict", verdict.feasible);

    let mut report = Report::new("design report");
    report.sections = vec![trap, chain, gate, optics, cooling, readout, imaging, f];
    Ok(DesignReport { report, verdict })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateReport {
    pub report: Report,
    pub initial: RegisterState,
    pub final_state: RegisterState,
    pub fidelity_vs_expected: Option<f64>,
    pub fidelity_vs_input: f64,
    pub phonon_residual: f64,
}

/// Runs a parsed gate script through the state-vector engine.
pub fn run_gate_script(cfg: &RunConfig, script: &GateScript) -> Result<GateReport> {
    let n_max = script.n_max.unwrap_or(cfg.gate.n_max);
    let omega = trap_axial(cfg).section("gate")?;
    let chain = cfg.chain_config(omega)?;
    let chain = ChainConfig {
        n_ions: script.n_ions,
        ..chain
    };
    let eta = lamb_dicke_cm(&chain, cfg.chain.wavelength, cfg.chain.projection_angle).section("gate")?;

    let initial = product_state(&script.init, n_max)?;
    let mut state = initial.clone();
    for p in &script.pulses {
        let pulse = pulse_area_perturbation(&p.pulse, script.area_error)?;
        state
            .apply(&pulse, &eta)
            .map_err(|e| e.context(format!("gate script line {}", p.line)))?;
    }
    let fidelity_vs_input = fidelity(&initial, &state)?;
    let fidelity_vs_expected = match &script.expect {
        Some(labels) => Some(fidelity(&product_state(labels, n_max)?, &state)?),
        None => None,
    };
    let phonon_residual = state.phonon_excitation();

    let mut s = Section::new("gate");
    s.int("n_ions", script.n_ions as i64, "count")
        .int("n_max", n_max as i64, "count")
        .int("pulses", script.pulses.len() as i64, "count")
        .real("area_error", script.area_error, "1")
        .real("lamb_dicke_cm", eta.eta, "1")
        .text("init", label_string(&script.init));
    if let Some(labels) = &script.expect {
        s.text("expect", label_string(labels));
    }
    s.real("norm", state.norm_sqr(), "1")
        .real("fidelity_vs_input", fidelity_vs_input, "1");
    if let Some(f) = fidelity_vs_expected {
        s.real("fidelity_vs_expected", f, "1").real("infidelity", 1.0 - f, "1");
    }
    s.real("phonon_residual", phonon_residual, "1")
        .flag("phonon_restored", phonon_residual < PHONON_RESTORED_TOLERANCE)
        .real("top_phonon_amplitude", state.top_phonon_amplitude(), "1")
        .flag("truncation_safe", state.top_phonon_amplitude() < TRUNCATION_GUARD);

    let rows = state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 1e-12)
        .map(|(i, a)| {
            vec![
                Value::Text(state.label(i)),
                Value::Real(a.re),
                Value::Real(a.im),
                Value::Real(a.norm_sqr()),
            ]
        })
        .collect();
    let mut report = Report::new("gate demo");
    report.sections.push(s);
    report.tables.push(Table {
        name: "amplitudes".into(),
        columns: vec!["state".into(), "re".into(), "im".into(), "probability".into()],
        rows,
    });
    Ok(GateReport {
        report,
        initial,
        final_state: state,
        fidelity_vs_expected,
        fidelity_vs_input,
        phonon_residual,
    })
}

pub fn run_gate_demo(cfg: &RunConfig, script_text: &str) -> Result<GateReport> {
    run_gate_script(cfg, &parse_script(script_text)?)
}

pub fn trap_report(cfg: &RunConfig) -> Result<Report> {
    let mut r = Report::new("trap");
    r.sections.push(trap_section(cfg)?);
    Ok(r)
}

pub fn chain_report(cfg: &RunConfig) -> Result<Report> {
    let mut r = Report::new("chain");
    r.sections.push(chain_section(cfg)?.0);
    Ok(r)
}

pub fn optics_report(cfg: &RunConfig) -> Result<Report> {
    let mut r = Report::new("optics");
    r.sections.push(optics_section(cfg)?);
    Ok(r)
}

pub fn cooling_report(cfg: &RunConfig) -> Result<Report> {
    let mut r = Report::new("cooling");
    r.sections.push(cooling_section(cfg)?);
    Ok(r)
}

/// Readout summary, imaging check and the photon-count histogram.
pub fn readout_report(cfg: &RunConfig, exec: Execution) -> Result<Report> {
    let (s, outcome) = readout_section(cfg, exec)?;
    let mut r = Report::new("readout");
    r.sections.push(s);
    r.sections.push(imaging_section(cfg)?);
    r.tables.push(Table {
        name: "histogram".into(),
        columns: vec!["count".into(), "frequency".into()],
        rows: outcome
            .histogram
            .iter()
            .map(|(&k, &n)| vec![Value::Int(k as i64), Value::Int(n as i64)])
            .collect(),
    });
    Ok(r)
}
