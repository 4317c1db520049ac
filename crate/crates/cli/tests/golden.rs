//! Byte-for-byte regression against checked-in outputs.
//!
//! Regenerate with `IONFORGE_BLESS=1 cargo test -p ionforge --test golden`.

use std::path::{Path, PathBuf};
use std::process::Command;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn check(golden: &str, args: &[&str]) {
    let cfg = root().join("../../data/reference_design.cfg");
    let out = Command::new(env!("CARGO_BIN_EXE_ionforge"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .env_remove("IONFORGE_CONFIG")
        .output()
        .expect("spawn ionforge");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = root().join("tests/golden").join(golden);
    if std::env::var_os("IONFORGE_BLESS").is_some() {
        std::fs::write(&path, &out.stdout).unwrap();
        return;
    }
    let expected = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    if out.stdout != expected {
        let got = String::from_utf8_lossy(&out.stdout);
        let want = String::from_utf8_lossy(&expected);
        let line = got.lines().zip(want.lines()).position(|(a, b)| a != b).map_or(0, |i| i + 1);
        panic!("{golden} differs from the golden output (first differing line {line})");
    }
}

#[test]
fn design_report_json() {
    check("report.json", &["report"]);
}

#[test]
fn design_report_csv() {
    check("report.csv", &["report", "--format", "csv"]);
}

#[test]
fn cnot_gate_json() {
    check("gate_cnot_10.json", &["gate"]);
}

#[test]
fn readout_csv() {
    check("readout.csv", &["readout", "--format", "csv"]);
}
