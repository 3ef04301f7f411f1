//! The two worked systems wired end to end, plus the identity audit.

mod audit;
mod run;

use std::fmt;

use thiserror::Error;

use crate::dynamics::{DynamicsError, EmissionParams, SpinPrecessionParams, TimeGrid};
use crate::thermo::{Quadrature, ThermoError};
use crate::tolerance::Tolerances;

pub use audit::{audit, IdentityEntry, IdentityReport, IdentityStatus};
pub use run::{analyze_trajectory, run_scenario, trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    SpinPrecession,
    SpontaneousEmission,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::SpinPrecession => "spin_precession",
            ScenarioKind::SpontaneousEmission => "spontaneous_emission",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "spin_precession" => Some(ScenarioKind::SpinPrecession),
            "spontaneous_emission" => Some(ScenarioKind::SpontaneousEmission),
            _ => None,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioParams {
    Spin(SpinPrecessionParams),
    Emission(EmissionParams),
}

impl ScenarioParams {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            ScenarioParams::Spin(_) => ScenarioKind::SpinPrecession,
            ScenarioParams::Emission(_) => ScenarioKind::SpontaneousEmission,
        }
    }

    pub fn hbar(&self) -> f64 {
        match self {
            ScenarioParams::Spin(p) => p.hbar(),
            ScenarioParams::Emission(p) => p.hbar(),
        }
    }

    pub fn energy_scale(&self) -> f64 {
        match self {
            ScenarioParams::Spin(p) => p.energy_scale(),
            ScenarioParams::Emission(p) => p.energy_scale(),
        }
    }
}

/// How `ρ̇` and `Ḣ` are obtained along the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DerivativeMode {
    #[default]
    Analytic,
    /// Central differences of the closed-form `ρ(t)` and `H(t)` with step `h`.
    FiniteDifference { h: f64 },
}

impl DerivativeMode {
    pub const DEFAULT_FD_STEP: f64 = 1e-5;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: ScenarioParams,
    pub grid: TimeGrid,
    pub kb: f64,
    pub tolerances: Tolerances,
    pub derivative_mode: DerivativeMode,
    pub integrator: Quadrature,
}

impl ScenarioConfig {
    pub fn new(params: ScenarioParams, grid: TimeGrid) -> Self {
        Self {
            params,
            grid,
            kb: 1.0,
            tolerances: Tolerances::default(),
            derivative_mode: DerivativeMode::Analytic,
            integrator: Quadrature::Trapezoid,
        }
    }

    /// `ω₀ = ω = 1`, `α = π/2`, `ρ₀ = |e⟩⟨e|`, `t ∈ [0, 4π]`, `dt = 1e-3`.
    pub fn spin_default() -> Self {
        let grid = TimeGrid::new(0.0, 4.0 * std::f64::consts::PI, 1e-3).expect("valid grid");
        Self::new(
            ScenarioParams::Spin(SpinPrecessionParams::default_scenario()),
            grid,
        )
    }

    /// `E_e = 1`, `E_g = 0`, `γ = 1`, `t ∈ [0, 5/γ]`, `dt = 1e-3`.
    pub fn emission_default() -> Self {
        let grid = TimeGrid::new(0.0, 5.0, 1e-3).expect("valid grid");
        Self::new(
            ScenarioParams::Emission(EmissionParams::default_scenario()),
            grid,
        )
    }

    pub fn default_for(kind: ScenarioKind) -> Self {
        match kind {
            ScenarioKind::SpinPrecession => Self::spin_default(),
            ScenarioKind::SpontaneousEmission => Self::emission_default(),
        }
    }

    pub fn kind(&self) -> ScenarioKind {
        self.params.kind()
    }

    pub fn with_grid(mut self, grid: TimeGrid) -> Self {
        self.grid = grid;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("at t = {t}: {source}")]
    Dynamics {
        t: f64,
        #[source]
        source: DynamicsError,
    },
    #[error("at t = {t}: {source}")]
    Thermo {
        t: f64,
        #[source]
        source: ThermoError,
    },
    #[error(transparent)]
    Series(ThermoError),
}

impl ScenarioError {
    /// Time stamp of the failing grid point, if the error is tied to one.
    pub fn time(&self) -> Option<f64> {
        match self {
            ScenarioError::Dynamics { t, .. } | ScenarioError::Thermo { t, .. } => Some(*t),
            ScenarioError::Series(_) => None,
        }
    }
}
