use super::{DerivativeMode, ScenarioConfig, ScenarioError, ScenarioParams};
use crate::dynamics::{
    damped_state, emission_hamiltonian, emission_point, finite_difference, spin_hamiltonian,
    spin_point, spin_propagator, DynamicsError, EmissionParams, SpinPrecessionParams,
    TrajectoryPoint,
};
use crate::hermitian::{
    eigh, track_continuity, HermitianOperator, SpectralDecomposition, SpectrumSource,
};
use crate::thermo::{integrate, AnalysisOptions, PointAnalysis, ThermoRates, TimeSeries};

fn spin_point_fd(p: &SpinPrecessionParams, t: f64, h: f64) -> Result<TrajectoryPoint, DynamicsError> {
    let state = |s: f64| -> HermitianOperator {
        spin_propagator(p, s)
            .and_then(|u| Ok(u.evolve(p.rho0())?))
            .expect("propagator of validated parameters is unitary")
            .into_operator()
    };
    let rho = spin_propagator(p, t)?.evolve(p.rho0())?;
    let rho_dot = finite_difference(state, t, h)?;
    let h_dot = finite_difference(|s| spin_hamiltonian(p, s), t, h)?;
    TrajectoryPoint::new(t, rho, spin_hamiltonian(p, t), rho_dot, h_dot)
}

fn emission_point_fd(p: &EmissionParams, t: f64, h: f64) -> Result<TrajectoryPoint, DynamicsError> {
    let exact = emission_point(p, t)?;
    let rho_dot = finite_difference(|s| damped_state(p.rho0(), p.gamma(), s), t, h)?;
    let h_dot = finite_difference(|_| emission_hamiltonian(p), t, h)?;
    TrajectoryPoint::new(t, exact.rho, exact.hamiltonian, rho_dot, h_dot)
}

fn point_at(cfg: &ScenarioConfig, t: f64) -> Result<TrajectoryPoint, DynamicsError> {
    match (&cfg.params, cfg.derivative_mode) {
        (ScenarioParams::Spin(p), DerivativeMode::Analytic) => spin_point(p, t),
        (ScenarioParams::Spin(p), DerivativeMode::FiniteDifference { h }) => spin_point_fd(p, t, h),
        (ScenarioParams::Emission(p), DerivativeMode::Analytic) => emission_point(p, t),
        (ScenarioParams::Emission(p), DerivativeMode::FiniteDifference { h }) => {
            emission_point_fd(p, t, h)
        }
    }
}

/// Trajectory points on every grid time of `cfg`.
pub fn trajectory(cfg: &ScenarioConfig) -> Result<Vec<TrajectoryPoint>, ScenarioError> {
    cfg.grid
        .times()
        .map(|t| point_at(cfg, t).map_err(|source| ScenarioError::Dynamics { t, source }))
        .collect()
}

fn continue_from(
    prev: Option<&SpectralDecomposition>,
    fresh: SpectralDecomposition,
) -> SpectralDecomposition {
    match prev {
        Some(prev) => track_continuity(prev, &fresh).unwrap_or(fresh),
        None => fresh,
    }
}

/// Rates at every point, with both eigenbases carried continuously along
/// the trajectory.
pub fn analyze_trajectory(
    points: &[TrajectoryPoint],
    cfg: &ScenarioConfig,
) -> Result<Vec<ThermoRates>, ScenarioError> {
    let opts = AnalysisOptions {
        kb: cfg.kb,
        ..AnalysisOptions::default()
    };
    let mut prev: Option<(SpectralDecomposition, SpectralDecomposition)> = None;
    let mut out = Vec::with_capacity(points.len());
    for point in points {
        let wrap = |source| ScenarioError::Thermo { t: point.t, source };
        let energy = eigh(&point.hamiltonian)
            .map_err(|e| wrap(e.into()))?
            .with_source(SpectrumSource::Hamiltonian);
        let state = eigh(&point.rho)
            .map_err(|e| wrap(e.into()))?
            .with_source(SpectrumSource::Density);
        let energy = continue_from(prev.as_ref().map(|p| &p.0), energy);
        let state = continue_from(prev.as_ref().map(|p| &p.1), state);
        let analysis = PointAnalysis::with_spectra(point, energy.clone(), state.clone(), opts)
            .map_err(wrap)?;
        out.push(analysis.rates().map_err(wrap)?);
        prev = Some((energy, state));
    }
    Ok(out)
}

/// Full time series for `cfg`: per-point rates and cumulative integrals.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<TimeSeries, ScenarioError> {
    let points = trajectory(cfg)?;
    let records = analyze_trajectory(&points, cfg)?;
    integrate(records, cfg.integrator).map_err(ScenarioError::Series)
}
