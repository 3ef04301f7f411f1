//! JSON run configuration.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use qthermo_core::dynamics::DynamicsError;
use qthermo_core::{
    validate_density, Basis, CMatrix, Complex64, DensityMatrix, DerivativeMode, EmissionParams,
    HermitianOperator, Quadrature, ScenarioConfig, ScenarioKind, ScenarioParams,
    SpinPrecessionParams, TimeGrid, Tolerances,
};
use serde_json::{json, Map, Value};
use thiserror::Error;

pub const KEYS: &[&str] = &[
    "kind",
    "hbar",
    "kB",
    "omega0",
    "omega",
    "alpha",
    "gamma",
    "Ee",
    "Eg",
    "rho0",
    "t0",
    "t_max",
    "dt",
    "derivative_mode",
    "fd_step",
    "integrator",
    "tolerances",
];

const SPIN_ONLY: &[&str] = &["omega0", "omega", "alpha"];
const EMISSION_ONLY: &[&str] = &["gamma", "Ee", "Eg"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid `{field}`: {reason}")]
    ValidationError { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::ValidationError {
        field: field.to_owned(),
        reason: reason.into(),
    }
}

fn from_dynamics(err: DynamicsError, grid_field: &str) -> ConfigError {
    match err {
        DynamicsError::InvalidParameter { field, reason } => invalid(field, reason),
        DynamicsError::InvalidGrid(reason) => invalid(grid_field, reason),
        other => invalid("rho0", other.to_string()),
    }
}

struct Fields<'a>(&'a Map<String, Value>);

impl Fields<'_> {
    fn number(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| invalid(key, "must be a finite number")),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&str>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_str()
                .map(Some)
                .ok_or_else(|| invalid(key, "must be a string")),
        }
    }
}

fn parse_rho0(value: &Value, basis: Basis) -> Result<DensityMatrix, ConfigError> {
    let dim = basis.len();
    let shape = || invalid("rho0", format!("must be {dim} rows of {dim} [re, im] pairs"));
    let rows = value.as_array().filter(|r| r.len() == dim).ok_or_else(shape)?;
    let mut m = CMatrix::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().filter(|r| r.len() == dim).ok_or_else(shape)?;
        for (j, entry) in row.iter().enumerate() {
            let pair = entry.as_array().filter(|p| p.len() == 2).ok_or_else(shape)?;
            let re = pair[0].as_f64().ok_or_else(shape)?;
            let im = pair[1].as_f64().ok_or_else(shape)?;
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    let op = HermitianOperator::new(m, basis).map_err(|e| invalid("rho0", e.to_string()))?;
    validate_density(op).map_err(|e| invalid("rho0", e.to_string()))
}

/// `[[ [re, im], ... ], ...]`, the inverse of the `rho0` parser.
pub fn rho_to_json(rho: &HermitianOperator) -> Value {
    let n = rho.dim();
    Value::Array(
        (0..n)
            .map(|i| {
                Value::Array(
                    (0..n)
                        .map(|j| {
                            let z = rho.get(i, j);
                            json!([z.re, z.im])
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Validates a parsed JSON document and fills in defaults.
pub fn config_from_value(value: &Value) -> Result<ScenarioConfig, ConfigError> {
    let map = value
        .as_object()
        .ok_or_else(|| invalid("config", "top level must be an object"))?;
    for key in map.keys() {
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
    }
    let f = Fields(map);
    let kind_name = f.string("kind")?.ok_or_else(|| invalid("kind", "required"))?;
    let kind = ScenarioKind::from_name(kind_name).ok_or_else(|| {
        invalid(
            "kind",
            "must be \"spin_precession\" or \"spontaneous_emission\"",
        )
    })?;
    let foreign = match kind {
        ScenarioKind::SpinPrecession => EMISSION_ONLY,
        ScenarioKind::SpontaneousEmission => SPIN_ONLY,
    };
    if let Some(key) = foreign.iter().find(|k| map.contains_key(**k)) {
        return Err(invalid(key, format!("not used by {kind}")));
    }

    let hbar = f.number("hbar", 1.0)?;
    let kb = f.number("kB", 1.0)?;
    if !(kb > 0.0) {
        return Err(invalid("kB", "must be > 0"));
    }
    let (params, default_t_max) = match kind {
        ScenarioKind::SpinPrecession => {
            let rho0 = match map.get("rho0") {
                Some(v) => parse_rho0(v, Basis::excited_ground())?,
                None => SpinPrecessionParams::default_scenario().rho0().clone(),
            };
            let p = SpinPrecessionParams::new(
                f.number("omega0", 1.0)?,
                f.number("omega", 1.0)?,
                f.number("alpha", FRAC_PI_2)?,
                hbar,
                rho0,
            )
            .map_err(|e| from_dynamics(e, "t_max"))?;
            (ScenarioParams::Spin(p), 4.0 * PI)
        }
        ScenarioKind::SpontaneousEmission => {
            let rho0 = match map.get("rho0") {
                Some(v) => parse_rho0(v, Basis::ground_excited())?,
                None => EmissionParams::default_scenario().rho0().clone(),
            };
            let gamma = f.number("gamma", 1.0)?;
            let p = EmissionParams::new(
                f.number("Ee", 1.0)?,
                f.number("Eg", 0.0)?,
                gamma,
                hbar,
                rho0,
            )
            .map_err(|e| from_dynamics(e, "t_max"))?;
            (ScenarioParams::Emission(p), 5.0 / gamma)
        }
    };

    let t0 = f.number("t0", 0.0)?;
    let t_max = f.number("t_max", t0 + default_t_max)?;
    let dt = f.number("dt", 1e-3)?;
    let grid = TimeGrid::new(t0, t_max, dt).map_err(|e| {
        let field = if dt <= 0.0 { "dt" } else { "t_max" };
        from_dynamics(e, field)
    })?;

    let fd_step = f.number("fd_step", DerivativeMode::DEFAULT_FD_STEP)?;
    let derivative_mode = match f.string("derivative_mode")? {
        None | Some("analytic") => {
            if map.contains_key("fd_step") {
                return Err(invalid("fd_step", "only used with derivative_mode \"finite_difference\""));
            }
            DerivativeMode::Analytic
        }
        Some("finite_difference") => {
            if !(fd_step > 0.0) {
                return Err(invalid("fd_step", "must be > 0"));
            }
            DerivativeMode::FiniteDifference { h: fd_step }
        }
        Some(_) => {
            return Err(invalid(
                "derivative_mode",
                "must be \"analytic\" or \"finite_difference\"",
            ))
        }
    };
    let integrator = match f.string("integrator")? {
        None | Some("trapezoid") => Quadrature::Trapezoid,
        Some("simpson") => Quadrature::Simpson,
        Some(_) => return Err(invalid("integrator", "must be \"trapezoid\" or \"simpson\"")),
    };

    let mut tolerances = Tolerances::default();
    if let Some(v) = map.get("tolerances") {
        let overrides = v
            .as_object()
            .ok_or_else(|| invalid("tolerances", "must be an object"))?;
        for (name, tol) in overrides {
            let field = format!("tolerances.{name}");
            if !Tolerances::is_known(name) {
                return Err(ConfigError::UnknownKey(field));
            }
            let tol = tol
                .as_f64()
                .filter(|t| *t >= 0.0 && t.is_finite())
                .ok_or_else(|| invalid(&field, "must be a finite number >= 0"))?;
            tolerances.set(name, tol);
        }
    }

    Ok(ScenarioConfig {
        params,
        grid,
        kb,
        tolerances,
        derivative_mode,
        integrator,
    })
}

/// JSON text to a document, without validation.
pub fn parse_document(text: &str) -> Result<Value, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::ParseError {
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    config_from_value(&parse_document(text)?)
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    parse_config_str(&std::fs::read_to_string(path)?)
}

/// Fully defaulted configuration as JSON. Parsing the echo gives back the
/// same configuration.
pub fn config_echo(cfg: &ScenarioConfig) -> Value {
    let mut m = Map::new();
    m.insert("kind".into(), json!(cfg.kind().name()));
    m.insert("hbar".into(), json!(cfg.params.hbar()));
    m.insert("kB".into(), json!(cfg.kb));
    match &cfg.params {
        ScenarioParams::Spin(p) => {
            m.insert("omega0".into(), json!(p.omega0()));
            m.insert("omega".into(), json!(p.omega()));
            m.insert("alpha".into(), json!(p.alpha()));
            m.insert("rho0".into(), rho_to_json(p.rho0()));
        }
        ScenarioParams::Emission(p) => {
            m.insert("gamma".into(), json!(p.gamma()));
            m.insert("Ee".into(), json!(p.e_excited()));
            m.insert("Eg".into(), json!(p.e_ground()));
            m.insert("rho0".into(), rho_to_json(p.rho0()));
        }
    }
    m.insert("t0".into(), json!(cfg.grid.t0()));
    m.insert("t_max".into(), json!(cfg.grid.t_max()));
    m.insert("dt".into(), json!(cfg.grid.dt()));
    match cfg.derivative_mode {
        DerivativeMode::Analytic => {
            m.insert("derivative_mode".into(), json!("analytic"));
        }
        DerivativeMode::FiniteDifference { h } => {
            m.insert("derivative_mode".into(), json!("finite_difference"));
            m.insert("fd_step".into(), json!(h));
        }
    }
    let integrator = match cfg.integrator {
        Quadrature::Trapezoid => "trapezoid",
        Quadrature::Simpson => "simpson",
    };
    m.insert("integrator".into(), json!(integrator));
    let defaults = Tolerances::default();
    let overrides: Map<String, Value> = cfg
        .tolerances
        .iter()
        .filter(|(name, v)| defaults.get(name) * cfg.tolerances.multiplier() != *v)
        .map(|(name, v)| (name.to_owned(), json!(v / cfg.tolerances.multiplier())))
        .collect();
    if !overrides.is_empty() {
        m.insert("tolerances".into(), Value::Object(overrides));
    }
    Value::Object(m)
}
