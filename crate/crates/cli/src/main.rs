//! `ionforge` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or script error, 3 physics
//! precondition error, 4 numerical non-convergence.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ionforge_core::config::{parse_config, OutputFormat, RunConfig};
use ionforge_core::exec::Execution;
use ionforge_core::harness;
use ionforge_core::report::{emit, Report};
use ionforge_core::Error;

const CONFIG_ENV: &str = "IONFORGE_CONFIG";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "ionforge", version, about = "Design calculations for a linear-trap ion quantum computer")]
struct Cli {
    /// Config file (flat key = value). Falls back to $IONFORGE_CONFIG.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output format; overrides the config `format` key.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// RNG seed; overrides the config `seed` key.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Run data-parallel loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mathieu q, secular frequencies and string-phase check.
    Trap,
    /// Equilibrium positions, axial modes and Lamb-Dicke factor.
    Chain,
    /// Run a pulse script through the state-vector engine.
    Gate {
        /// Pulse script; overrides the config `gate.script` key.
        #[arg(long, value_name = "PATH")]
        script: Option<PathBuf>,
    },
    /// Addressing crosstalk, spot counts and pulse-area budget.
    Optics,
    /// Doppler limit, sideband spectrum and cooling rate.
    Cooling,
    /// Monte Carlo fluorescence readout and imaging resolution.
    Readout,
    /// Aggregate design report with feasibility verdict.
    Report,
}

fn read_text(path: &Path, what: &str) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::ConfigValue {
            key: what.into(),
            message: format!("cannot read {}: {e}", path.display()),
        }
    })
}

fn load_config(cli: &Cli) -> Result<(RunConfig, Option<PathBuf>), Error> {
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    let mut cfg = match &path {
        Some(p) => parse_config(&read_text(p, "config")?)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(f) = cli.format {
        cfg.format = match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        };
    }
    Ok((cfg, path))
}

fn run(cli: &Cli) -> Result<Vec<u8>, Error> {
    let (cfg, cfg_path) = load_config(cli)?;
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let report: Report = match &cli.command {
        Command::Trap => harness::trap_report(&cfg)?,
        Command::Chain => harness::chain_report(&cfg)?,
        Command::Optics => harness::optics_report(&cfg)?,
        Command::Cooling => harness::cooling_report(&cfg)?,
        Command::Readout => harness::readout_report(&cfg, exec)?,
        Command::Report => harness::run_design_report(&cfg, exec)?.report,
        Command::Gate { script } => {
            // config-relative script paths resolve against the config's directory
            let path = match (script, &cfg.gate.script) {
                (Some(p), _) => p.clone(),
                (None, Some(s)) => {
                    let base = cfg_path.as_deref().and_then(Path::parent).unwrap_or(Path::new(""));
                    base.join(s)
                }
                (None, None) => {
                    return Err(Error::ConfigValue {
                        key: "gate.script".into(),
                        message: "no pulse script given (--script or gate.script)".into(),
                    })
                }
            };
            harness::run_gate_demo(&cfg, &read_text(&path, "gate.script")?)?.report
        }
    };
    Ok(emit(&report, cfg.format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let bytes = match run(&cli) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.kind().exit_code() as u8);
        }
    };
    let written = match &cli.out {
        Some(p) => std::fs::write(p, &bytes).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => std::io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|e| format!("cannot write stdout: {e}")),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
