//! Spin-1/2 precessing in a magnetic field that rotates about z.
//!
//! Basis order is `(|e⟩, |g⟩)` with `|e⟩ = (1, 0)ᵀ`. The Hamiltonian is
//!
//! ```text
//! H(t) = (ħω₀/2) [ cos α             sin α e^{-iωt} ]
//!                [ sin α e^{+iωt}   -cos α          ]
//! ```
//!
//! which is the sense of rotation for which the closed-form propagator below
//! solves `iħ U̇ = H U` and `|n₊⟩ = cos(α/2)|e⟩ + e^{iωt} sin(α/2)|g⟩` is the
//! upper eigenvector.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{finite, positive, rk4_step, von_neumann_rhs, DynamicsError, TimeGrid, TrajectoryPoint};
use crate::hermitian::{validate_density, Basis, CMatrix, DensityMatrix, HermitianOperator, UnitaryOperator};

#[derive(Debug, Clone, PartialEq)]
pub struct SpinPrecessionParams {
    omega0: f64,
    omega: f64,
    alpha: f64,
    hbar: f64,
    rho0: DensityMatrix,
}

impl SpinPrecessionParams {
    pub fn new(
        omega0: f64,
        omega: f64,
        alpha: f64,
        hbar: f64,
        rho0: DensityMatrix,
    ) -> Result<Self, DynamicsError> {
        positive("omega0", omega0)?;
        finite("omega", omega)?;
        positive("hbar", hbar)?;
        if !(0.0..=PI).contains(&alpha) {
            return Err(DynamicsError::InvalidParameter {
                field: "alpha",
                reason: "must lie in [0, pi]".into(),
            });
        }
        if rho0.basis() != &Basis::excited_ground() {
            return Err(DynamicsError::InvalidParameter {
                field: "rho0",
                reason: format!("basis must be (e,g), got ({})", rho0.basis()),
            });
        }
        let p = Self {
            omega0,
            omega,
            alpha,
            hbar,
            rho0,
        };
        if !(p.rabi_frequency() > 0.0) {
            return Err(DynamicsError::InvalidParameter {
                field: "omega",
                reason: "generalized Rabi frequency vanishes".into(),
            });
        }
        Ok(p)
    }

    /// `ω₀ = ω = 1`, `α = π/2`, `ħ = 1`, `ρ₀ = |e⟩⟨e|`.
    pub fn default_scenario() -> Self {
        let rho0 = DensityMatrix::pure(
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            Basis::excited_ground(),
        )
        .expect("|e><e| is a valid state");
        Self::new(1.0, 1.0, PI / 2.0, 1.0, rho0).expect("default spin parameters are valid")
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn rho0(&self) -> &DensityMatrix {
        &self.rho0
    }

    /// `Ω = √((ω₀ cos α − ω)² + ω₀² sin² α)`.
    pub fn rabi_frequency(&self) -> f64 {
        let detuning = self.omega0 * self.alpha.cos() - self.omega;
        let drive = self.omega0 * self.alpha.sin();
        detuning.hypot(drive)
    }

    /// Energy scale `ħω₀`.
    pub fn energy_scale(&self) -> f64 {
        self.hbar * self.omega0
    }
}

pub fn spin_hamiltonian(p: &SpinPrecessionParams, t: f64) -> HermitianOperator {
    let amp = 0.5 * p.hbar * p.omega0;
    let (s, c) = p.alpha.sin_cos();
    let rot = Complex64::from_polar(1.0, p.omega * t);
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(amp * c, 0.0),
            rot.conj() * (amp * s),
            rot * (amp * s),
            Complex64::new(-amp * c, 0.0),
        ],
    );
    HermitianOperator::symmetrized(m, Basis::excited_ground())
}

/// Analytic `∂H/∂t`.
pub fn spin_hamiltonian_dot(p: &SpinPrecessionParams, t: f64) -> HermitianOperator {
    let amp = 0.5 * p.hbar * p.omega0 * p.alpha.sin() * p.omega;
    let rot = Complex64::from_polar(1.0, p.omega * t);
    let i = Complex64::i();
    let zero = Complex64::new(0.0, 0.0);
    let m = CMatrix::from_row_slice(2, 2, &[zero, -i * rot.conj() * amp, i * rot * amp, zero]);
    HermitianOperator::symmetrized(m, Basis::excited_ground())
}

/// Closed-form evolution operator from time 0 to `t`.
pub fn spin_propagator(p: &SpinPrecessionParams, t: f64) -> Result<UnitaryOperator, DynamicsError> {
    let big = p.rabi_frequency();
    let detuning = (p.omega0 * p.alpha.cos() - p.omega) / big;
    let drive = p.omega0 * p.alpha.sin() / big;
    let (s, c) = (0.5 * big * t).sin_cos();
    let i = Complex64::i();
    let back = Complex64::from_polar(1.0, -0.5 * p.omega * t);
    let fwd = back.conj();
    let u11 = (c - i * detuning * s) * back;
    let u22 = (c + i * detuning * s) * fwd;
    let u12 = -i * drive * s * back;
    let u21 = -i * drive * s * fwd;
    let m = CMatrix::from_row_slice(2, 2, &[u11, u12, u21, u22]);
    Ok(UnitaryOperator::new(m, Basis::excited_ground())?)
}

pub fn spin_point(p: &SpinPrecessionParams, t: f64) -> Result<TrajectoryPoint, DynamicsError> {
    let u = spin_propagator(p, t)?;
    let rho = u.evolve(&p.rho0)?;
    let h = spin_hamiltonian(p, t);
    let rho_dot = HermitianOperator::symmetrized(
        von_neumann_rhs(h.entries(), rho.entries(), p.hbar),
        Basis::excited_ground(),
    );
    let h_dot = spin_hamiltonian_dot(p, t);
    TrajectoryPoint::new(t, rho, h, rho_dot, h_dot)
}

/// `ρ(t) = U(t) ρ₀ U(t)†` on every grid point, with `ρ̇ = -(i/ħ)[H, ρ]`.
pub fn evolve_closed(
    p: &SpinPrecessionParams,
    grid: &TimeGrid,
) -> Result<Vec<TrajectoryPoint>, DynamicsError> {
    grid.times().map(|t| spin_point(p, t)).collect()
}

/// Fixed-step RK4 integration of the Liouville–von Neumann equation, started
/// from the closed-form state at `grid.t0()`. Independent of the propagator
/// everywhere else.
pub fn evolve_closed_rk4(
    p: &SpinPrecessionParams,
    grid: &TimeGrid,
) -> Result<Vec<DensityMatrix>, DynamicsError> {
    let rhs = |t: f64, rho: &CMatrix| von_neumann_rhs(spin_hamiltonian(p, t).entries(), rho, p.hbar);
    let mut rho = spin_propagator(p, grid.t0())?
        .evolve(&p.rho0)?
        .entries()
        .clone();
    let mut out = Vec::with_capacity(grid.count());
    for i in 0..grid.count() {
        let state = HermitianOperator::symmetrized(rho.clone(), Basis::excited_ground());
        out.push(validate_density(state)?);
        rho = rk4_step(&rhs, grid.time(i), &rho, grid.dt());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{eigh, CMatrix};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn excited() -> DensityMatrix {
        DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)], Basis::excited_ground()).unwrap()
    }

    fn params(omega0: f64, omega: f64, alpha: f64) -> SpinPrecessionParams {
        SpinPrecessionParams::new(omega0, omega, alpha, 1.0, excited()).unwrap()
    }

    #[test]
    fn untilted_field_is_diagonal() {
        let p = params(1.7, 0.4, 0.0);
        let h = spin_hamiltonian(&p, 2.3);
        let expected = CMatrix::from_row_slice(2, 2, &[c(0.85, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.85, 0.0)]);
        assert!((h.entries() - expected).norm() < 1e-15);
    }

    #[test]
    fn transverse_field_at_t0_is_sigma_x() {
        let p = params(2.0, 0.7, PI / 2.0);
        let h = spin_hamiltonian(&p, 0.0);
        assert!((h.get(0, 1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((h.get(1, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(h.get(0, 0).norm() < 1e-15);
    }

    #[test]
    fn eigenvalues_are_plus_minus_half_hbar_omega0() {
        let p = SpinPrecessionParams::new(1.3, 0.6, 0.9, 2.0, excited()).unwrap();
        for t in [0.0, 0.4, 3.1, 10.0] {
            let spec = eigh(&spin_hamiltonian(&p, t)).unwrap();
            assert!((spec.values()[0] - 1.3).abs() < 1e-13);
            assert!((spec.values()[1] + 1.3).abs() < 1e-13);
        }
    }

    #[test]
    fn upper_eigenvector_matches_closed_form() {
        let p = params(1.3, 0.6, 0.9);
        for t in [0.0, 0.8, 2.5] {
            let h = spin_hamiltonian(&p, t);
            let (s, cs) = (p.alpha / 2.0).sin_cos();
            let n_plus = nalgebra::DVector::from_column_slice(&[
                c(cs, 0.0),
                Complex64::from_polar(s, p.omega * t),
            ]);
            let hn = h.entries() * &n_plus;
            let expected = &n_plus * c(0.5 * p.omega0, 0.0);
            assert!((hn - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn propagator_is_identity_at_zero_and_unitary() {
        let p = params(1.3, 0.6, 0.9);
        let u0 = spin_propagator(&p, 0.0).unwrap();
        assert!((u0.entries() - CMatrix::identity(2, 2)).norm() < 1e-15);
        for k in 0..200 {
            let u = spin_propagator(&p, 0.05 * k as f64).unwrap();
            assert!(u.unitarity_residual() < 1e-14);
        }
    }

    #[test]
    fn static_field_propagator_is_phase_diagonal() {
        // alpha = 0, omega0 > omega: exp(-i H t) with H = diag(1, -1) omega0/2.
        let p = params(1.5, 0.4, 0.0);
        for t in [0.3, 1.7, 6.0] {
            let u = spin_propagator(&p, t).unwrap();
            let expected = CMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::from_polar(1.0, -0.75 * t),
                    c(0.0, 0.0),
                    c(0.0, 0.0),
                    Complex64::from_polar(1.0, 0.75 * t),
                ],
            );
            assert!((u.entries() - expected).norm() < 1e-14, "t = {t}");
        }
    }

    #[test]
    fn propagator_solves_schrodinger_with_second_order_residual() {
        let p = params(1.3, 0.6, 0.9);
        let t = 0.7;
        let residual = |h: f64| {
            let du = (spin_propagator(&p, t + h).unwrap().entries()
                - spin_propagator(&p, t - h).unwrap().entries())
                * c(0.0, 0.5 / h);
            let hu = spin_hamiltonian(&p, t).entries() * spin_propagator(&p, t).unwrap().entries();
            (du - hu).norm()
        };
        let r1 = residual(1e-2);
        let r2 = residual(5e-3);
        assert!(r1 < 1e-4);
        let ratio = r1 / r2;
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn invalid_parameters() {
        let rho0 = excited();
        assert!(SpinPrecessionParams::new(0.0, 1.0, 0.5, 1.0, rho0.clone()).is_err());
        assert!(SpinPrecessionParams::new(1.0, 1.0, 4.0, 1.0, rho0.clone()).is_err());
        // omega = omega0, alpha = 0 makes Omega = 0.
        assert!(SpinPrecessionParams::new(1.0, 1.0, 0.0, 1.0, rho0).is_err());
        let wrong_basis = DensityMatrix::maximally_mixed(Basis::ground_excited());
        assert!(SpinPrecessionParams::new(1.0, 1.0, 0.5, 1.0, wrong_basis).is_err());
    }

    #[test]
    fn rabi_frequency_default_is_sqrt_two() {
        let p = SpinPrecessionParams::default_scenario();
        assert!((p.rabi_frequency() - 2f64.sqrt()).abs() < 1e-15);
    }
}
