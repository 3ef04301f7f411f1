use std::f64::consts::LN_2;

use qthermo_core::scenarios::{IdentityStatus, ScenarioError};
use qthermo_core::thermo::Column;
use qthermo_core::{
    audit, run_scenario, DerivativeMode, EmissionParams, Quadrature, ScenarioConfig,
    ScenarioParams, TimeGrid,
};

fn report_failures(cfg: &ScenarioConfig) -> Vec<String> {
    let series = run_scenario(cfg).unwrap();
    audit(&series, cfg)
        .failures()
        .map(|e| format!("{} {:?} tol {:e}", e.name, e.max_residual, e.tolerance))
        .collect()
}

#[test]
fn default_spin_audit_passes() {
    let failures = report_failures(&ScenarioConfig::spin_default());
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn default_emission_audit_passes() {
    let failures = report_failures(&ScenarioConfig::emission_default());
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn spin_appendix_zeros() {
    let cfg = ScenarioConfig::spin_default();
    let report = audit(&run_scenario(&cfg).unwrap(), &cfg);
    for name in [
        "appendix_b_Pk_dot",
        "appendix_b_Qd",
        "appendix_b_Qc",
        "appendix_b_entropy_rate",
    ] {
        let e = report.get(name).unwrap();
        assert_eq!(e.status, IdentityStatus::Pass);
        assert!(e.max_residual.unwrap() < 1e-8, "{name}");
    }
}

#[test]
fn emission_heat_at_half_life() {
    let cfg = ScenarioConfig::emission_default();
    let series = run_scenario(&cfg).unwrap();
    // U(t) - U(0) = (e^{-t} - 1)/2 for the default energies.
    let q = series.value_at(Column::Q, LN_2);
    assert!((q + 0.25).abs() < 1e-6, "Q = {q}");
    for i in (0..series.len()).step_by(97) {
        let t = series.value(Column::T, i);
        let oracle = 0.5 * ((-t).exp() - 1.0);
        assert!((series.value(Column::Q, i) - oracle).abs() < 1e-6);
    }
}

#[test]
fn runs_are_bit_identical() {
    let cfg = ScenarioConfig::emission_default().with_grid(TimeGrid::new(0.0, 1.0, 1e-3).unwrap());
    assert_eq!(run_scenario(&cfg).unwrap(), run_scenario(&cfg).unwrap());
}

#[test]
fn halving_dt_stays_within_quadrature_error() {
    let coarse = ScenarioConfig::emission_default();
    let fine = coarse
        .clone()
        .with_grid(TimeGrid::new(0.0, 5.0, 5e-4).unwrap());
    let a = run_scenario(&coarse).unwrap();
    let b = run_scenario(&fine).unwrap();
    for column in [
        Column::Wd,
        Column::Wc,
        Column::Qd,
        Column::Qc,
        Column::W,
        Column::Q,
        Column::QRef16,
        Column::WRef16,
    ] {
        let estimate = a.quadrature_error_estimate(column).unwrap();
        let change = (0..a.len())
            .map(|i| (a.value(column, i) - b.value(column, 2 * i)).abs())
            .fold(0.0f64, f64::max);
        assert!(
            change <= 4.0 * estimate + 1e-15,
            "{column:?}: change {change:e}, estimate {estimate:e}"
        );
    }
}

#[test]
fn finite_difference_agrees_on_every_rate_column() {
    for base in [ScenarioConfig::spin_default(), ScenarioConfig::emission_default()] {
        let analytic = base.clone().with_grid(TimeGrid::new(0.0, 2.0, 1e-3).unwrap());
        let mut fd = analytic.clone();
        fd.derivative_mode = DerivativeMode::FiniteDifference {
            h: DerivativeMode::DEFAULT_FD_STEP,
        };
        let a = run_scenario(&analytic).unwrap();
        let b = run_scenario(&fd).unwrap();
        for column in Column::ALL {
            let diff = (0..a.len())
                .map(|i| (a.value(column, i) - b.value(column, i)).abs())
                .fold(0.0f64, f64::max);
            assert!(diff < 1e-6, "{:?} {column:?} {diff:e}", base.kind());
        }
        for (x, y) in a.records().iter().zip(b.records()) {
            assert!(x.max_rate_difference(y) < 1e-6);
        }
    }
}

#[test]
fn simpson_integrator_matches_energy_change() {
    let mut cfg = ScenarioConfig::emission_default();
    cfg.integrator = Quadrature::Simpson;
    let s = run_scenario(&cfg).unwrap();
    let last = s.len() - 1;
    let du = s.value(Column::U, last) - s.value(Column::U, 0);
    assert!((s.value(Column::Q, last) - du).abs() < 1e-12);
}

#[test]
fn emission_from_excited_state_uses_damping_map() {
    let rho0 = qthermo_core::DensityMatrix::pure(
        &[qthermo_core::Complex64::new(0.0, 0.0), qthermo_core::Complex64::new(1.0, 0.0)],
        qthermo_core::Basis::ground_excited(),
    )
    .unwrap();
    let p = EmissionParams::new(1.0, 0.0, 1.0, 1.0, rho0).unwrap();
    let cfg = ScenarioConfig::new(
        ScenarioParams::Emission(p),
        TimeGrid::new(0.0, 3.0, 1e-3).unwrap(),
    );
    let s = run_scenario(&cfg).unwrap();
    let last = s.len() - 1;
    assert!((s.value(Column::Q, last) - ((-3.0f64).exp() - 1.0)).abs() < 1e-6);
    // Populations only: no coherence heat.
    assert!(s.column(Column::Qc).iter().all(|v| v.abs() < 1e-12));
    assert!(audit(&s, &cfg).passed());
}

#[test]
fn tampered_heat_is_flagged() {
    let cfg = ScenarioConfig::emission_default().with_grid(TimeGrid::new(0.0, 1.0, 1e-3).unwrap());
    let mut series = run_scenario(&cfg).unwrap();
    for r in series.records_mut() {
        r.q_c_rate = 0.0;
    }
    let report = audit(&series, &cfg);
    assert!(!report.passed());
    for name in ["first_law", "heat_closure", "energy_basis_heat", "ref16_work"] {
        assert_eq!(report.get(name).unwrap().status, IdentityStatus::Fail, "{name}");
    }
}

#[test]
fn tightened_tolerance_fails_audit() {
    let mut cfg = ScenarioConfig::spin_default().with_grid(TimeGrid::new(0.0, 1.0, 1e-3).unwrap());
    cfg.tolerances.scale_all(1e-30);
    let series = run_scenario(&cfg).unwrap();
    assert!(!audit(&series, &cfg).passed());
}

#[test]
fn invalid_fd_step_reports_time() {
    let mut cfg = ScenarioConfig::emission_default().with_grid(TimeGrid::new(0.5, 1.0, 1e-3).unwrap());
    cfg.derivative_mode = DerivativeMode::FiniteDifference { h: 0.0 };
    match run_scenario(&cfg) {
        Err(e @ ScenarioError::Dynamics { .. }) => assert_eq!(e.time(), Some(0.5)),
        other => panic!("unexpected {other:?}"),
    }
}
