//! Trajectory generators: states, Hamiltonians and their time derivatives.

mod emission;
mod spin;

use num_complex::Complex64;
use thiserror::Error;

use crate::hermitian::{CMatrix, DensityMatrix, HermitianOperator, LinalgError};
use crate::tolerance::TOL_TRACELESS;

pub use emission::{
    amplitude_damping_dissipator, damped_state, damped_state_dot, emission_hamiltonian,
    emission_point, emission_state, emission_state_dot, kraus_amplitude_damping, lindblad_rk4,
    to_interaction_frame, EmissionParams, LindbladModel,
};
pub use spin::{
    evolve_closed, evolve_closed_rk4, spin_hamiltonian, spin_hamiltonian_dot, spin_point,
    spin_propagator, SpinPrecessionParams,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("closed-form emission state requires rho0 = 1/2 [[1,1],[1,1]]; use the amplitude-damping map for other initial states")]
    UnsupportedInitialState,
    #[error("step too large: dt * gamma = {dt_gamma} exceeds 0.1")]
    StepTooLarge { dt_gamma: f64 },
    #[error("rho_dot is not traceless: |Tr rho_dot| = {residual:e}")]
    NotTraceless { residual: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Uniform time grid `t_i = t0 + i dt`, `i = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t_max: f64,
    dt: f64,
    count: usize,
}

impl TimeGrid {
    /// `count = floor((t_max - t0)/dt) + 1`, with the quotient nudged by 1e-9
    /// so that grids like `[0, 5]` at `dt = 1e-3` include the end point.
    pub fn new(t0: f64, t_max: f64, dt: f64) -> Result<Self, DynamicsError> {
        if !(t0.is_finite() && t_max.is_finite() && dt.is_finite()) {
            return Err(DynamicsError::InvalidGrid("non-finite bound".into()));
        }
        if dt <= 0.0 {
            return Err(DynamicsError::InvalidGrid("dt must be > 0".into()));
        }
        if t_max < t0 {
            return Err(DynamicsError::InvalidGrid("t_max must be >= t0".into()));
        }
        let steps = ((t_max - t0) / dt + 1e-9).floor();
        if steps > 1e8 {
            return Err(DynamicsError::InvalidGrid(format!(
                "{steps} steps exceeds the 1e8 limit"
            )));
        }
        Ok(Self {
            t0,
            t_max,
            dt,
            count: steps as usize + 1,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.time(i))
    }
}

/// State, Hamiltonian and both time derivatives at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub rho: DensityMatrix,
    pub hamiltonian: HermitianOperator,
    pub rho_dot: HermitianOperator,
    pub h_dot: HermitianOperator,
}

impl TrajectoryPoint {
    pub fn new(
        t: f64,
        rho: DensityMatrix,
        hamiltonian: HermitianOperator,
        rho_dot: HermitianOperator,
        h_dot: HermitianOperator,
    ) -> Result<Self, DynamicsError> {
        rho.ensure_same_basis(&hamiltonian)?;
        rho.ensure_same_basis(&rho_dot)?;
        rho.ensure_same_basis(&h_dot)?;
        let residual = rho_dot.trace().abs();
        if residual > TOL_TRACELESS {
            return Err(DynamicsError::NotTraceless { residual });
        }
        Ok(Self {
            t,
            rho,
            hamiltonian,
            rho_dot,
            h_dot,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }
}

/// Central difference `(f(t+h) - f(t-h)) / 2h`, symmetrized to be Hermitian.
pub fn finite_difference<F>(f: F, t: f64, h: f64) -> Result<HermitianOperator, DynamicsError>
where
    F: Fn(f64) -> HermitianOperator,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(DynamicsError::InvalidParameter {
            field: "fd_step",
            reason: "must be > 0".into(),
        });
    }
    let ahead = f(t + h);
    let behind = f(t - h);
    ahead.ensure_same_basis(&behind)?;
    let diff = (ahead.entries() - behind.entries()) * Complex64::new(0.5 / h, 0.0);
    Ok(HermitianOperator::symmetrized(diff, ahead.basis().clone()))
}

/// One classic fourth-order Runge–Kutta step of `ẏ = f(t, y)`.
pub(crate) fn rk4_step<F>(f: &F, t: f64, y: &CMatrix, dt: f64) -> CMatrix
where
    F: Fn(f64, &CMatrix) -> CMatrix,
{
    let half = 0.5 * dt;
    let k1 = f(t, y);
    let k2 = f(t + half, &(y + &k1 * Complex64::new(half, 0.0)));
    let k3 = f(t + half, &(y + &k2 * Complex64::new(half, 0.0)));
    let k4 = f(t + dt, &(y + &k3 * Complex64::new(dt, 0.0)));
    let sum = k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4;
    y + sum * Complex64::new(dt / 6.0, 0.0)
}

/// `-(i/ħ)[H, ρ]`.
pub(crate) fn von_neumann_rhs(h: &CMatrix, rho: &CMatrix, hbar: f64) -> CMatrix {
    (h * rho - rho * h) * Complex64::new(0.0, -1.0 / hbar)
}

fn positive(field: &'static str, value: f64) -> Result<(), DynamicsError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(DynamicsError::InvalidParameter {
            field,
            reason: "must be > 0".into(),
        })
    }
}

fn finite(field: &'static str, value: f64) -> Result<(), DynamicsError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(DynamicsError::InvalidParameter {
            field,
            reason: "must be finite".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::Basis;

    #[test]
    fn grid_counts() {
        let g = TimeGrid::new(0.0, 5.0, 1e-3).unwrap();
        assert_eq!(g.count(), 5001);
        assert!((g.time(5000) - 5.0).abs() < 1e-12);
        let g = TimeGrid::new(0.0, 4.0 * std::f64::consts::PI, 1e-3).unwrap();
        assert_eq!(g.count(), 12567);
        assert_eq!(TimeGrid::new(1.0, 1.0, 0.1).unwrap().count(), 1);
        assert!(TimeGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(TimeGrid::new(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn constant_function_has_zero_derivative() {
        let op = HermitianOperator::from_real_diagonal(&[1.0, 2.0], Basis::indexed(2)).unwrap();
        let d = finite_difference(|_| op.clone(), 0.3, 1e-4).unwrap();
        assert_eq!(d.max_abs(), 0.0);
        assert!(finite_difference(|_| op.clone(), 0.3, 0.0).is_err());
    }

    #[test]
    fn point_requires_common_basis_and_traceless_rho_dot() {
        let b = Basis::indexed(2);
        let rho = DensityMatrix::maximally_mixed(b.clone());
        let h = HermitianOperator::identity(b.clone());
        let z = HermitianOperator::zero(b.clone());
        assert!(TrajectoryPoint::new(0.0, rho.clone(), h.clone(), z.clone(), z.clone()).is_ok());
        assert!(matches!(
            TrajectoryPoint::new(0.0, rho.clone(), h.clone(), h.clone(), z.clone()),
            Err(DynamicsError::NotTraceless { .. })
        ));
        let other = HermitianOperator::zero(Basis::ground_excited());
        assert!(TrajectoryPoint::new(0.0, rho, h, z, other).is_err());
    }
}
