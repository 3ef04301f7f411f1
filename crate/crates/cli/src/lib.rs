//! Configuration parsing, run output and sweeps for the `qthermo` binary.

pub mod config;
pub mod csv_audit;
pub mod output;
pub mod sweep;

pub use config::{config_echo, parse_config, parse_config_str, ConfigError};
pub use csv_audit::{audit_csv, CsvAuditError};
pub use output::{run_command, series_csv, RunError, RunManifest};
pub use sweep::{parse_vary, sweep, SweepSummary};

/// Environment variable multiplying every audit tolerance.
pub const TOL_SCALE_VAR: &str = "QTHERMO_TOL_SCALE";

/// Reads [`TOL_SCALE_VAR`]; unset means 1.
pub fn tolerance_scale_from_env() -> Result<f64, String> {
    match std::env::var(TOL_SCALE_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(1.0),
        Err(e) => Err(format!("{TOL_SCALE_VAR}: {e}")),
        Ok(raw) => match raw.trim().parse::<f64>() {
            Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
            _ => Err(format!("{TOL_SCALE_VAR} must be a positive number, got `{raw}`")),
        },
    }
}
