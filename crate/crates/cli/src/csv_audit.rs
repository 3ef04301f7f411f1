//! Identity checks on a previously written `series.csv`.
//!
//! The CSV carries cumulative columns and closure residuals only, so this
//! audit covers the identities that can be evaluated from those columns,
//! plus a regeneration check against a fresh run of the configuration.

use qthermo_core::scenarios::{IdentityEntry, IdentityReport, IdentityStatus, ScenarioError};
use qthermo_core::thermo::Column;
use qthermo_core::{run_scenario, ScenarioConfig, ScenarioKind};
use thiserror::Error;

use crate::output::{csv_header, format_value};

#[derive(Debug, Error)]
pub enum CsvAuditError {
    #[error("series header does not match the expected schema")]
    Header,
    #[error("line {line}: {reason}")]
    Row { line: usize, reason: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Parsed CSV as one vector per column, in [`Column::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    columns: Vec<Vec<f64>>,
}

impl SeriesTable {
    pub fn parse(text: &str) -> Result<Self, CsvAuditError> {
        let mut lines = text.lines();
        if lines.next() != Some(csv_header().as_str()) {
            return Err(CsvAuditError::Header);
        }
        let mut columns = vec![Vec::new(); Column::ALL.len()];
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != columns.len() {
                return Err(CsvAuditError::Row {
                    line: line_no,
                    reason: format!("expected {} fields, found {}", columns.len(), fields.len()),
                });
            }
            for (col, field) in columns.iter_mut().zip(fields) {
                let x = field.parse::<f64>().map_err(|e| CsvAuditError::Row {
                    line: line_no,
                    reason: format!("`{field}`: {e}"),
                })?;
                col.push(x);
            }
        }
        Ok(Self { columns })
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, column: Column) -> &[f64] {
        let idx = Column::ALL.iter().position(|c| *c == column).unwrap();
        &self.columns[idx]
    }
}

fn entry(name: &str, tolerance: f64, t: &[f64], residuals: impl Iterator<Item = f64>) -> IdentityEntry {
    let mut max = 0.0f64;
    let mut worst_t = None;
    let mut count = 0;
    let mut invalid = false;
    for (i, r) in residuals.enumerate() {
        count += 1;
        if !r.is_finite() {
            invalid = true;
            worst_t.get_or_insert(t[i]);
        } else if !invalid && (worst_t.is_none() || r > max) {
            max = max.max(r);
            worst_t = Some(t[i]);
        }
    }
    let status = if count == 0 {
        IdentityStatus::NotApplicable
    } else if invalid || max > tolerance {
        IdentityStatus::Fail
    } else {
        IdentityStatus::Pass
    };
    IdentityEntry {
        name: name.to_owned(),
        status,
        max_residual: (!invalid && count > 0).then_some(max),
        worst_t,
        tolerance,
        points_checked: count,
    }
}

/// Audits `text` against `cfg`. Energy tolerances are multiplied by the
/// energy spread of the configured Hamiltonian.
pub fn audit_csv(text: &str, cfg: &ScenarioConfig) -> Result<IdentityReport, CsvAuditError> {
    let table = SeriesTable::parse(text)?;
    let fresh = run_scenario(cfg)?;
    let scale = fresh.records().iter().fold(1.0f64, |acc, r| acc.max(r.scale));
    let tol = |name: &str| cfg.tolerances.get(name) * scale;
    let t = table.column(Column::T);
    let col = |c| table.column(c);
    let n = table.len();

    let mut identities = vec![
        entry("first_law", tol("first_law"), t, col(Column::ResFirstLaw).iter().copied()),
        entry("power_closure", tol("power_closure"), t, col(Column::ResPower).iter().copied()),
        entry("heat_closure", tol("heat_closure"), t, col(Column::ResHeat).iter().copied()),
        entry(
            "energy_balance",
            tol("energy_balance"),
            t,
            (0..n).map(|i| {
                let u = col(Column::U);
                (u[i] - u[0] - (col(Column::W)[i] + col(Column::Q)[i])).abs()
            }),
        ),
        entry(
            "ref16_heat",
            tol("ref16_heat"),
            t,
            (0..n).map(|i| {
                (col(Column::Q)[i] - (col(Column::QRef16)[i] + col(Column::Qc)[i])).abs()
            }),
        ),
        entry(
            "ref16_work",
            tol("ref16_work"),
            t,
            (0..n).map(|i| {
                (col(Column::W)[i] - (col(Column::WRef16)[i] - col(Column::Qc)[i])).abs()
            }),
        ),
    ];
    let zero_work: Box<dyn Iterator<Item = f64>> = match cfg.kind() {
        ScenarioKind::SpontaneousEmission => Box::new(col(Column::W).iter().map(|w| w.abs())),
        ScenarioKind::SpinPrecession => Box::new(std::iter::empty()),
    };
    identities.push(entry("emission_zero_work", tol("emission_zero_work"), t, zero_work));

    // Every cell must equal the fresh run after formatting.
    let regeneration = if fresh.len() == n {
        let residuals: Vec<f64> = (0..n)
            .map(|i| {
                Column::ALL
                    .iter()
                    .map(|&c| {
                        let expected: f64 = format_value(fresh.value(c, i)).parse().unwrap();
                        let got = col(c)[i];
                        if expected.to_bits() == got.to_bits() {
                            0.0
                        } else {
                            (expected - got).abs().max(f64::MIN_POSITIVE)
                        }
                    })
                    .fold(0.0f64, f64::max)
            })
            .collect();
        entry("regeneration", 0.0, t, residuals.into_iter())
    } else {
        IdentityEntry {
            name: "regeneration".into(),
            status: IdentityStatus::Fail,
            max_residual: None,
            worst_t: None,
            tolerance: 0.0,
            points_checked: 0,
        }
    };
    identities.push(regeneration);

    let passed = identities.iter().all(|e| e.status != IdentityStatus::Fail);
    Ok(IdentityReport { identities, passed })
}
