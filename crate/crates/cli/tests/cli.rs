use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ionforge_core::config::{parse_config, serialize_config};
use ionforge_core::dynamics::{cnot_sequence, pulse_area_perturbation, Level, PulseSpec, Sideband};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn ionforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ionforge"))
        .args(args)
        .env_remove("IONFORGE_CONFIG")
        .output()
        .expect("spawn ionforge")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn value<'a>(v: &'a Value, section: &str, key: &str) -> &'a Value {
    &v["sections"][section][key]["value"]
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn reference_cfg() -> String {
    data("reference_design.cfg").to_str().unwrap().to_string()
}

#[test]
fn report_is_deterministic_and_feasible() {
    let cfg = reference_cfg();
    let a = ionforge(&["report", "--config", &cfg, "--seed", "7"]);
    let b = ionforge(&["report", "--config", &cfg, "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["title"], "design report");
    assert_eq!(*value(&v, "feasibility", "verdict"), Value::Bool(true));
    assert_eq!(value(&v, "optics", "addressable_ions").as_i64(), Some(28));
    let other = ionforge(&["report", "--config", &cfg, "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn sequential_flag_gives_identical_output() {
    let cfg = reference_cfg();
    let par = ionforge(&["readout", "--config", &cfg]);
    let seq = ionforge(&["readout", "--config", &cfg, "--sequential"]);
    assert!(par.status.success());
    assert_eq!(par.stdout, seq.stdout);
}

#[test]
fn exit_codes_by_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    // readout without any seed
    let no_seed = write(dir.path(), "a.cfg", "[readout]\ntrials = 100\n");
    assert_eq!(ionforge(&["readout", "--config", no_seed.to_str().unwrap()]).status.code(), Some(2));
    let bad = write(dir.path(), "b.cfg", "trap.z0 = -1\n");
    let out = ionforge(&["trap", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trap.z0"));
    let syntax = write(dir.path(), "c.cfg", "[trap]\nnot a line\n");
    assert_eq!(ionforge(&["trap", "--config", syntax.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(ionforge(&["trap", "--config", "/nonexistent/x.cfg"]).status.code(), Some(2));

    let flat = write(dir.path(), "d.cfg", "trap.u_dc = 0\n");
    let out = ionforge(&["chain", "--config", flat.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("chain section"));

    let tight = write(dir.path(), "e.cfg", "chain.tolerance = 1e-300\n");
    assert_eq!(ionforge(&["chain", "--config", tight.to_str().unwrap()]).status.code(), Some(4));

    let script = write(dir.path(), "bad.pulses", "ions 2\nV 5 pi 0 0-1 0\n");
    let out = ionforge(&["gate", "--script", script.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(ionforge(&["gate"]).status.code() == Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("trap.json");
    let out = ionforge(&["trap", "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let direct = ionforge(&["trap"]);
    assert_eq!(std::fs::read(&target).unwrap(), direct.stdout);
}

#[test]
fn env_config_is_used_and_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let env_cfg = write(dir.path(), "env.cfg", "[chain]\nn_ions = 3\n");
    let flag_cfg = write(dir.path(), "flag.cfg", "[chain]\nn_ions = 4\n");
    let run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_ionforge"))
            .args(args)
            .env("IONFORGE_CONFIG", &env_cfg)
            .output()
            .unwrap();
        json(&out)
    };
    assert_eq!(value(&run(&["chain"]), "chain", "n_ions").as_i64(), Some(3));
    let v = run(&["chain", "--config", flag_cfg.to_str().unwrap()]);
    assert_eq!(value(&v, "chain", "n_ions").as_i64(), Some(4));
}

#[test]
fn csv_mirrors_json_sections() {
    let cfg = reference_cfg();
    let j = json(&ionforge(&["report", "--config", &cfg]));
    let csv = ionforge(&["report", "--config", &cfg, "--format", "csv"]);
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut counts: Vec<(String, usize)> = Vec::new();
    for line in text.lines() {
        if let Some(name) = line.strip_prefix("# ") {
            counts.push((name.to_string(), 0));
        } else if !line.is_empty() && line != "quantity,value" {
            counts.last_mut().unwrap().1 += 1;
        }
    }
    let sections = j["sections"].as_object().unwrap();
    assert_eq!(counts.len(), sections.len());
    for (name, n) in counts {
        assert_eq!(sections[&name].as_object().unwrap().len(), n, "{name}");
    }
}

#[test]
fn reference_config_round_trips() {
    let text = std::fs::read_to_string(data("reference_design.cfg")).unwrap();
    let cfg = parse_config(&text).unwrap();
    let canonical = serialize_config(&cfg);
    assert_eq!(parse_config(&canonical).unwrap(), cfg);
    assert_eq!(serialize_config(&parse_config(&canonical).unwrap()), canonical);
}

#[test]
fn config_gate_script_resolves_next_to_config() {
    let v = json(&ionforge(&["gate", "--config", &reference_cfg()]));
    assert_eq!(v["title"], "gate demo");
    assert!((value(&v, "gate", "fidelity_vs_expected").as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(*value(&v, "gate", "phonon_restored"), Value::Bool(true));
}

#[test]
fn empty_script_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let script = write(dir.path(), "empty.pulses", "ions 2\ninit 1+\n");
    let v = json(&ionforge(&["gate", "--script", script.to_str().unwrap()]));
    assert!((value(&v, "gate", "fidelity_vs_input").as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(value(&v, "gate", "pulses").as_i64(), Some(0));
}

// dense composition oracle for two ions, phonons 0..=n_max

type CMat = DMatrix<Complex64>;

fn dense_pulse(p: &PulseSpec, n_max: usize) -> CMat {
    let level = |l: Level| match l {
        Level::Zero => 0,
        Level::One => 1,
        Level::Aux => 2,
    };
    let (lo, up) = p.transition.levels();
    let mut raise = CMat::zeros(3, 3);
    raise[(level(up), level(lo))] = Complex64::from_polar(1.0, -p.phi());
    let d = n_max + 1;
    let mut a = CMat::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let phonon = match p.sideband {
        Sideband::Carrier => CMat::identity(d, d),
        Sideband::Red => a,
        Sideband::Blue => a.adjoint(),
    };
    let id3 = CMat::identity(3, 3);
    let ion_op = if p.ion == 0 { raise.kronecker(&id3) } else { id3.kronecker(&raise) };
    let term = ion_op.kronecker(&phonon);
    ((&term + term.adjoint()) * Complex64::new(0.0, -0.5 * p.theta)).exp()
}

/// `|1a;n=2>` → state index with phonons least significant.
fn label_index(label: &str, n_max: usize) -> usize {
    let inner = label.trim_start_matches('|').trim_end_matches('>');
    let (levels, n) = inner.split_once(";n=").unwrap();
    let ions = levels.chars().fold(0, |acc, ch| acc * 3 + "01a".find(ch).unwrap());
    ions * (n_max + 1) + n.parse::<usize>().unwrap()
}

#[test]
fn perturbed_gate_demo_matches_composition_oracle() {
    let n_max = 3;
    let dir = tempfile::tempdir().unwrap();
    let script = write(
        dir.path(),
        "cnot.pulses",
        "ions 2\nnmax 3\ninit 10\nexpect 11\narea_error 1e-3\n\
         V 1 pi/2 pi/2 0-1 0\nU 0 pi 0 0-1 -1\nU 1 2pi 0 0-aux -1\nU 0 pi 0 0-1 -1\nV 1 pi/2 3pi/2 0-1 0\n",
    );
    let v = json(&ionforge(&["gate", "--script", script.to_str().unwrap()]));

    let u = cnot_sequence(0, 1)
        .iter()
        .map(|p| pulse_area_perturbation(p, 1e-3).unwrap())
        .fold(CMat::identity(36, 36), |acc, p| dense_pulse(&p, n_max) * acc);
    let input = label_index("|10;n=0>", n_max);
    let mut engine = vec![Complex64::new(0.0, 0.0); 36];
    for row in v["tables"]["amplitudes"]["rows"].as_array().unwrap() {
        let i = label_index(row[0].as_str().unwrap(), n_max);
        engine[i] = Complex64::new(row[1].as_f64().unwrap(), row[2].as_f64().unwrap());
    }
    for (i, a) in engine.iter().enumerate() {
        // the table drops amplitudes below 1e-12 and prints 12 significant digits
        assert!((u[(i, input)] - a).norm() < 1e-10, "{i}: {} vs {a}", u[(i, input)]);
    }
    let target = label_index("|11;n=0>", n_max);
    let fid = value(&v, "gate", "fidelity_vs_expected").as_f64().unwrap();
    assert!((fid - u[(target, input)].norm_sqr()).abs() < 1e-10);
    assert!(fid < 1.0 && fid > 1.0 - 1e-4);
    // the ideal gate sits at unit fidelity on this input, so the area error is what moved it
    let ideal = cnot_sequence(0, 1)
        .iter()
        .fold(CMat::identity(36, 36), |acc, p| dense_pulse(p, n_max) * acc);
    assert!((ideal[(target, input)].norm() - 1.0).abs() < 1e-12);
}
