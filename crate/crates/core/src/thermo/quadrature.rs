//! Cumulative quadrature of rate columns on a uniform grid.

use serde::{Deserialize, Serialize};

use super::{ThermoError, ThermoRates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    #[default]
    Trapezoid,
    Simpson,
}

/// Running integral `∫_{t0}^{t_i} f dt` at every grid point.
///
/// Simpson uses composite Simpson on even indices and a one-interval
/// three-point rule on odd indices; grids with fewer than three points fall
/// back to the trapezoid rule.
pub fn cumulative(values: &[f64], dt: f64, rule: Quadrature) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if rule == Quadrature::Trapezoid || n < 3 {
        for i in 1..n {
            out[i] = out[i - 1] + 0.5 * dt * (values[i - 1] + values[i]);
        }
        return out;
    }
    let f = values;
    for i in 1..n {
        out[i] = if i % 2 == 0 {
            out[i - 2] + dt / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i])
        } else if i + 1 < n {
            out[i - 1] + dt / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1])
        } else {
            out[i - 1] + dt / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i])
        };
    }
    out
}

/// Output columns, in CSV order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Column {
    T,
    U,
    S,
    Wd,
    Wc,
    Qd,
    Qc,
    W,
    Q,
    QRef16,
    WRef16,
    ResPower,
    ResHeat,
    ResFirstLaw,
}

impl Column {
    pub const ALL: [Column; 14] = [
        Column::T,
        Column::U,
        Column::S,
        Column::Wd,
        Column::Wc,
        Column::Qd,
        Column::Qc,
        Column::W,
        Column::Q,
        Column::QRef16,
        Column::WRef16,
        Column::ResPower,
        Column::ResHeat,
        Column::ResFirstLaw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::T => "t",
            Column::U => "U",
            Column::S => "S",
            Column::Wd => "W_d",
            Column::Wc => "W_c",
            Column::Qd => "Q_d",
            Column::Qc => "Q_c",
            Column::W => "W",
            Column::Q => "Q",
            Column::QRef16 => "Q_ref16",
            Column::WRef16 => "W_ref16",
            Column::ResPower => "res_power",
            Column::ResHeat => "res_heat",
            Column::ResFirstLaw => "res_first_law",
        }
    }

    pub fn from_name(name: &str) -> Option<Column> {
        Column::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Rate whose running integral this column is, if any.
    fn rate(self, r: &ThermoRates) -> Option<f64> {
        Some(match self {
            Column::Wd => r.w_d_rate,
            Column::Wc => r.w_c_rate,
            Column::Qd => r.q_d_rate,
            Column::Qc => r.q_c_rate,
            Column::W => r.w_d_rate + r.w_c_rate,
            Column::Q => r.q_d_rate + r.q_c_rate,
            Column::QRef16 => r.ref16_q_rate,
            Column::WRef16 => r.ref16_w_rate,
            _ => return None,
        })
    }
}

/// Running integrals of the rate columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cumulative {
    pub w_d: Vec<f64>,
    pub w_c: Vec<f64>,
    pub q_d: Vec<f64>,
    pub q_c: Vec<f64>,
    pub w: Vec<f64>,
    pub q: Vec<f64>,
    pub q_ref16: Vec<f64>,
    pub w_ref16: Vec<f64>,
}

/// Per-point rates plus cumulative heat and work on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    records: Vec<ThermoRates>,
    cumulative: Cumulative,
    dt: f64,
    rule: Quadrature,
}

fn uniform_step(records: &[ThermoRates]) -> Result<f64, ThermoError> {
    if records.len() < 2 {
        return Ok(0.0);
    }
    let dt = records[1].t - records[0].t;
    if !(dt > 0.0) {
        return Err(ThermoError::NonUniformGrid { index: 1 });
    }
    for (i, pair) in records.windows(2).enumerate() {
        let step = pair[1].t - pair[0].t;
        let slack = 1e-9 * dt + 4.0 * f64::EPSILON * pair[1].t.abs();
        if (step - dt).abs() > slack {
            return Err(ThermoError::NonUniformGrid { index: i + 1 });
        }
    }
    Ok(dt)
}

/// Integrates every rate column over the grid carried by `records`.
pub fn integrate(records: Vec<ThermoRates>, rule: Quadrature) -> Result<TimeSeries, ThermoError> {
    let dt = uniform_step(&records)?;
    let run = |col: Column| {
        let rates: Vec<f64> = records.iter().map(|r| col.rate(r).unwrap()).collect();
        cumulative(&rates, dt, rule)
    };
    let cumulative = Cumulative {
        w_d: run(Column::Wd),
        w_c: run(Column::Wc),
        q_d: run(Column::Qd),
        q_c: run(Column::Qc),
        w: run(Column::W),
        q: run(Column::Q),
        q_ref16: run(Column::QRef16),
        w_ref16: run(Column::WRef16),
    };
    Ok(TimeSeries {
        records,
        cumulative,
        dt,
        rule,
    })
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[ThermoRates] {
        &self.records
    }

    pub fn records_mut(&mut self) -> &mut [ThermoRates] {
        &mut self.records
    }

    pub fn cumulative(&self) -> &Cumulative {
        &self.cumulative
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn rule(&self) -> Quadrature {
        self.rule
    }

    pub fn value(&self, column: Column, i: usize) -> f64 {
        let r = &self.records[i];
        let c = &self.cumulative;
        match column {
            Column::T => r.t,
            Column::U => r.internal_energy,
            Column::S => r.entropy,
            Column::Wd => c.w_d[i],
            Column::Wc => c.w_c[i],
            Column::Qd => c.q_d[i],
            Column::Qc => c.q_c[i],
            Column::W => c.w[i],
            Column::Q => c.q[i],
            Column::QRef16 => c.q_ref16[i],
            Column::WRef16 => c.w_ref16[i],
            Column::ResPower => r.residual_power,
            Column::ResHeat => r.residual_heat,
            Column::ResFirstLaw => r.residual_first_law,
        }
    }

    pub fn column(&self, column: Column) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(column, i)).collect()
    }

    /// Linear interpolation of `column` at time `t` (clamped to the grid).
    pub fn value_at(&self, column: Column, t: f64) -> f64 {
        let n = self.len();
        assert!(n > 0, "empty series");
        if n == 1 || t <= self.records[0].t {
            return self.value(column, 0);
        }
        let x = (t - self.records[0].t) / self.dt;
        let i = (x.floor() as usize).min(n - 2);
        let frac = (x - i as f64).clamp(0.0, 1.0);
        let a = self.value(column, i);
        let b = self.value(column, i + 1);
        a + frac * (b - a)
    }

    /// Integrates `column`'s rate with both rules and returns the largest
    /// difference, an estimate of the error of the less accurate rule.
    pub fn quadrature_error_estimate(&self, column: Column) -> Option<f64> {
        let rates: Vec<f64> = self
            .records
            .iter()
            .map(|r| column.rate(r))
            .collect::<Option<_>>()?;
        let trap = cumulative(&rates, self.dt, Quadrature::Trapezoid);
        let simp = cumulative(&rates, self.dt, Quadrature::Simpson);
        Some(
            trap.iter()
                .zip(&simp)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs())),
        )
    }
}
