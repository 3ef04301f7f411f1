//! Parameter sweeps: one run directory per value, executed in parallel.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::config::{config_from_value, ConfigError, KEYS};
use crate::output::{run_command, to_json, RunError};

pub const SWEEP_FILE: &str = "sweep.json";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("--vary must look like key=v1,v2,...")]
    Syntax,
    #[error("cannot vary `{0}`")]
    Key(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// `key=v1,v2,...` split into the key and raw values.
pub fn parse_vary(spec: &str) -> Result<(String, Vec<String>), SweepError> {
    let (key, values) = spec.split_once('=').ok_or(SweepError::Syntax)?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_owned()).collect();
    if key.is_empty() || values.iter().any(String::is_empty) {
        return Err(SweepError::Syntax);
    }
    if !KEYS.contains(&key) || matches!(key, "rho0" | "tolerances") {
        return Err(SweepError::Key(key.to_owned()));
    }
    Ok((key.to_owned(), values))
}

fn json_scalar(raw: &str) -> Value {
    match raw.parse::<f64>() {
        Ok(x) if x.is_finite() => serde_json::json!(x),
        _ => Value::String(raw.to_owned()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub value: String,
    pub dir: String,
    pub config_hash: Option<String>,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub key: String,
    pub runs: Vec<SweepEntry>,
}

impl SweepSummary {
    pub fn all_passed(&self) -> bool {
        self.runs.iter().all(|r| r.passed)
    }

    pub fn any_error(&self) -> bool {
        self.runs.iter().any(|r| r.error.is_some())
    }
}

/// Every configuration is validated before any run starts.
pub fn sweep(
    base: &Value,
    key: &str,
    values: &[String],
    out_dir: &Path,
    tolerance_scale: f64,
) -> Result<SweepSummary, SweepError> {
    let configs = values
        .iter()
        .map(|raw| {
            let mut doc = base.clone();
            let map = doc.as_object_mut().ok_or_else(|| ConfigError::ValidationError {
                field: "config".into(),
                reason: "top level must be an object".into(),
            })?;
            map.insert(key.to_owned(), json_scalar(raw));
            let mut cfg = config_from_value(&doc)?;
            cfg.tolerances.scale_all(tolerance_scale);
            Ok((raw, cfg))
        })
        .collect::<Result<Vec<_>, SweepError>>()?;

    let runs: Vec<SweepEntry> = configs
        .par_iter()
        .map(|(raw, cfg)| {
            let dir_name = format!("{key}={raw}");
            let result: Result<_, RunError> = run_command(cfg, &out_dir.join(&dir_name));
            match result {
                Ok(manifest) => SweepEntry {
                    value: (*raw).clone(),
                    dir: dir_name,
                    config_hash: Some(manifest.config_hash),
                    passed: manifest.audit.passed,
                    error: None,
                },
                Err(e) => SweepEntry {
                    value: (*raw).clone(),
                    dir: dir_name,
                    config_hash: None,
                    passed: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let summary = SweepSummary {
        key: key.to_owned(),
        runs,
    };
    let path = out_dir.join(SWEEP_FILE);
    fs::create_dir_all(out_dir)
        .and_then(|_| fs::write(&path, to_json(&summary)))
        .map_err(|source| SweepError::Io { path, source })?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vary_syntax() {
        assert_eq!(
            parse_vary("gamma=0.5,1,2").unwrap(),
            ("gamma".into(), vec!["0.5".into(), "1".into(), "2".into()])
        );
        assert!(matches!(parse_vary("gamma"), Err(SweepError::Syntax)));
        assert!(matches!(parse_vary("gamma=1,,2"), Err(SweepError::Syntax)));
        assert!(matches!(parse_vary("bogus=1"), Err(SweepError::Key(_))));
    }

    #[test]
    fn scalars_keep_strings() {
        assert_eq!(json_scalar("2"), serde_json::json!(2.0));
        assert_eq!(json_scalar("simpson"), Value::String("simpson".into()));
    }
}
