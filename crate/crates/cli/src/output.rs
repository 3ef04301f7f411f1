//! Series, audit and manifest files for one run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qthermo_core::scenarios::ScenarioError;
use qthermo_core::thermo::Column;
use qthermo_core::{audit, run_scenario, IdentityReport, ScenarioConfig, ScenarioParams, TimeSeries};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::config_echo;

pub const SERIES_FILE: &str = "series.csv";
pub const AUDIT_FILE: &str = "audit.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_owned(),
        source,
    }
}

pub fn csv_header() -> String {
    Column::ALL.map(Column::name).join(",")
}

/// 17 significant digits in scientific notation, `\n` line endings.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn series_csv(series: &TimeSeries) -> String {
    let mut out = csv_header();
    out.push('\n');
    for i in 0..series.len() {
        for (j, column) in Column::ALL.into_iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{}", format_value(series.value(column, i))).unwrap();
        }
        out.push('\n');
    }
    out
}

/// SHA-256 of the compact, key-sorted configuration echo.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    let text = serde_json::to_string(&config_echo(cfg)).expect("JSON value serializes");
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Software {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub t0: f64,
    pub t_max: f64,
    pub dt: f64,
    pub count: usize,
    pub t_last: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputPaths {
    pub series: String,
    pub audit: String,
    pub manifest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditSummary {
    pub passed: bool,
    pub failed: Vec<String>,
    pub tolerance_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub software: Software,
    pub config: Value,
    pub config_hash: String,
    pub grid: GridSummary,
    /// Scenario-specific derived quantities, e.g. the Rabi frequency.
    pub derived: Value,
    pub outputs: OutputPaths,
    pub audit: AuditSummary,
}

impl RunManifest {
    fn new(cfg: &ScenarioConfig, report: &IdentityReport) -> Self {
        let derived = match &cfg.params {
            ScenarioParams::Spin(p) => serde_json::json!({ "Omega": p.rabi_frequency() }),
            ScenarioParams::Emission(p) => serde_json::json!({ "half_life": std::f64::consts::LN_2 / p.gamma() }),
        };
        let grid = &cfg.grid;
        Self {
            software: Software {
                name: "qthermo",
                version: env!("CARGO_PKG_VERSION"),
            },
            config: config_echo(cfg),
            config_hash: config_hash(cfg),
            grid: GridSummary {
                t0: grid.t0(),
                t_max: grid.t_max(),
                dt: grid.dt(),
                count: grid.count(),
                t_last: grid.time(grid.count() - 1),
            },
            derived,
            outputs: OutputPaths {
                series: SERIES_FILE.into(),
                audit: AUDIT_FILE.into(),
                manifest: MANIFEST_FILE.into(),
            },
            audit: AuditSummary {
                passed: report.passed(),
                failed: report.failures().map(|e| e.name.clone()).collect(),
                tolerance_scale: cfg.tolerances.multiplier(),
            },
        }
    }
}

/// Runs `cfg` and writes the series, audit and (last) the manifest into
/// `out_dir`. Audit failures are reported in the manifest, not as errors.
pub fn run_command(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunManifest, RunError> {
    let series = run_scenario(cfg)?;
    let report = audit(&series, cfg);
    fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;

    let write = |name: &str, contents: String| {
        let path = out_dir.join(name);
        fs::write(&path, contents).map_err(io_error(&path))
    };
    write(SERIES_FILE, series_csv(&series))?;
    write(AUDIT_FILE, to_json(&report))?;
    let manifest = RunManifest::new(cfg, &report);
    write(MANIFEST_FILE, to_json(&manifest))?;
    Ok(manifest)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}
