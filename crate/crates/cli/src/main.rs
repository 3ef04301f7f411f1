use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qthermo_cli::config::parse_document;
use qthermo_cli::output::to_json;
use qthermo_cli::{audit_csv, parse_config, parse_vary, run_command, sweep, tolerance_scale_from_env};
use qthermo_core::ScenarioConfig;

/// Heat and work decomposition for the spin-precession and
/// spontaneous-emission scenarios.
#[derive(Parser)]
#[command(name = "qthermo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write series.csv, audit.json, manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one configuration per value of a key, in parallel.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `key=v1,v2,...`
        #[arg(long)]
        vary: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check an existing series.csv against its configuration.
    Audit {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
}

const PASS: u8 = 0;
const AUDIT_FAILED: u8 = 1;
const ERROR: u8 = 2;

fn load(path: &Path, scale: f64) -> Result<ScenarioConfig, String> {
    let mut cfg = parse_config(path).map_err(|e| format!("{}: {e}", path.display()))?;
    cfg.tolerances.scale_all(scale);
    Ok(cfg)
}

fn status(passed: bool) -> u8 {
    if passed {
        PASS
    } else {
        AUDIT_FAILED
    }
}

fn execute(command: Command) -> Result<u8, String> {
    let scale = tolerance_scale_from_env()?;
    match command {
        Command::Run { config, out } => {
            let cfg = load(&config, scale)?;
            let manifest = run_command(&cfg, &out).map_err(|e| e.to_string())?;
            for name in &manifest.audit.failed {
                eprintln!("audit FAIL: {name}");
            }
            Ok(status(manifest.audit.passed))
        }
        Command::Sweep { config, vary, out } => {
            let (key, values) = parse_vary(&vary).map_err(|e| e.to_string())?;
            let text = fs::read_to_string(&config)
                .map_err(|e| format!("{}: {e}", config.display()))?;
            let base = parse_document(&text).map_err(|e| format!("{}: {e}", config.display()))?;
            let summary = sweep(&base, &key, &values, &out, scale).map_err(|e| e.to_string())?;
            for run in &summary.runs {
                match &run.error {
                    Some(e) => eprintln!("{}: error: {e}", run.dir),
                    None if !run.passed => eprintln!("{}: audit FAIL", run.dir),
                    None => {}
                }
            }
            if summary.any_error() {
                return Ok(ERROR);
            }
            Ok(status(summary.all_passed()))
        }
        Command::Audit { series, config } => {
            let cfg = load(&config, scale)?;
            let text = fs::read_to_string(&series)
                .map_err(|e| format!("{}: {e}", series.display()))?;
            let report = audit_csv(&text, &cfg).map_err(|e| e.to_string())?;
            print!("{}", to_json(&report));
            Ok(status(report.passed()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(ERROR)
        }
    }
}
