//! Spontaneous emission of a two-level atom, basis order `(|g⟩, |e⟩)`.
//!
//! The closed-form state is written with the free phase of `H₂` removed
//! (interaction frame). Populations are frame independent; to compare a
//! Schrödinger-frame Lindblad trajectory with it use [`to_interaction_frame`].

use num_complex::Complex64;

use super::{finite, positive, rk4_step, von_neumann_rhs, DynamicsError, TimeGrid, TrajectoryPoint};
use crate::hermitian::{
    eigh, max_abs, validate_density, Basis, CMatrix, DensityMatrix, HermitianOperator, LinalgError,
};

const G: usize = 0;
const E: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EmissionParams {
    e_excited: f64,
    e_ground: f64,
    gamma: f64,
    hbar: f64,
    rho0: DensityMatrix,
}

fn half_ones() -> DensityMatrix {
    let half = Complex64::new(0.5, 0.0);
    DensityMatrix::from_operator_unchecked(HermitianOperator::symmetrized(
        CMatrix::from_element(2, 2, half),
        Basis::ground_excited(),
    ))
}

impl EmissionParams {
    pub fn new(
        e_excited: f64,
        e_ground: f64,
        gamma: f64,
        hbar: f64,
        rho0: DensityMatrix,
    ) -> Result<Self, DynamicsError> {
        finite("Ee", e_excited)?;
        finite("Eg", e_ground)?;
        positive("gamma", gamma)?;
        positive("hbar", hbar)?;
        if e_excited <= e_ground {
            return Err(DynamicsError::InvalidParameter {
                field: "Ee",
                reason: "must exceed Eg".into(),
            });
        }
        if rho0.basis() != &Basis::ground_excited() {
            return Err(DynamicsError::InvalidParameter {
                field: "rho0",
                reason: format!("basis must be (g,e), got ({})", rho0.basis()),
            });
        }
        Ok(Self {
            e_excited,
            e_ground,
            gamma,
            hbar,
            rho0,
        })
    }

    /// `E_e = 1`, `E_g = 0`, `γ = 1`, `ħ = 1`, `ρ₀ = ½[[1,1],[1,1]]`.
    pub fn default_scenario() -> Self {
        Self::new(1.0, 0.0, 1.0, 1.0, half_ones()).expect("default emission parameters are valid")
    }

    pub fn e_excited(&self) -> f64 {
        self.e_excited
    }

    pub fn e_ground(&self) -> f64 {
        self.e_ground
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn rho0(&self) -> &DensityMatrix {
        &self.rho0
    }

    /// Whether `ρ₀` is the superposition state the closed form assumes.
    pub fn starts_in_superposition(&self) -> bool {
        max_abs(&(self.rho0.entries() - half_ones().entries())) <= 1e-12
    }

    /// Energy scale `E_e − E_g`.
    pub fn energy_scale(&self) -> f64 {
        self.e_excited - self.e_ground
    }
}

/// `H₂ = E_g |g⟩⟨g| + E_e |e⟩⟨e|`.
pub fn emission_hamiltonian(p: &EmissionParams) -> HermitianOperator {
    HermitianOperator::from_real_diagonal(&[p.e_ground, p.e_excited], Basis::ground_excited())
        .expect("diagonal operator is Hermitian")
}

fn two_by_two(gg: f64, ge: Complex64, ee: f64) -> HermitianOperator {
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(gg, 0.0), ge, ge.conj(), Complex64::new(ee, 0.0)],
    );
    HermitianOperator::symmetrized(m, Basis::ground_excited())
}

/// `ρ(t) = ½ [[2 − e^{−γt}, e^{−γt/2}], [e^{−γt/2}, e^{−γt}]]`.
pub fn emission_state(p: &EmissionParams, t: f64) -> Result<DensityMatrix, DynamicsError> {
    if !p.starts_in_superposition() {
        return Err(DynamicsError::UnsupportedInitialState);
    }
    let y = (-p.gamma * t).exp();
    let rho = two_by_two(1.0 - 0.5 * y, Complex64::new(0.5 * y.sqrt(), 0.0), 0.5 * y);
    Ok(validate_density(rho)?)
}

/// Analytic time derivative of [`emission_state`].
pub fn emission_state_dot(p: &EmissionParams, t: f64) -> Result<HermitianOperator, DynamicsError> {
    if !p.starts_in_superposition() {
        return Err(DynamicsError::UnsupportedInitialState);
    }
    let g = p.gamma;
    let y = (-g * t).exp();
    Ok(two_by_two(0.5 * g * y, Complex64::new(-0.25 * g * y.sqrt(), 0.0), -0.5 * g * y))
}

/// Amplitude damping of an arbitrary `ρ₀` written entry by entry:
/// `ρ_ee → ρ₀_ee e^{−γt}`, `ρ_ge → ρ₀_ge e^{−γt/2}`. Defined for any real
/// `t` (no validation), which lets central differences straddle `t = 0`.
pub fn damped_state(rho0: &HermitianOperator, gamma: f64, t: f64) -> HermitianOperator {
    let y = (-gamma * t).exp();
    let ee = rho0.get(E, E).re * y;
    two_by_two(rho0.trace() - ee, rho0.get(G, E) * y.sqrt(), ee)
}

pub fn damped_state_dot(rho0: &HermitianOperator, gamma: f64, t: f64) -> HermitianOperator {
    let y = (-gamma * t).exp();
    let ee_dot = -gamma * rho0.get(E, E).re * y;
    two_by_two(-ee_dot, rho0.get(G, E) * (-0.5 * gamma * y.sqrt()), ee_dot)
}

/// Applies `K₀ = |g⟩⟨g| + √(1−p)|e⟩⟨e|` and `K₁ = √p |g⟩⟨e|`.
pub fn kraus_amplitude_damping(
    rho: &DensityMatrix,
    p_decay: f64,
) -> Result<DensityMatrix, DynamicsError> {
    if rho.basis() != &Basis::ground_excited() {
        return Err(LinalgError::BasisMismatch {
            left: Basis::ground_excited(),
            right: rho.basis().clone(),
        }
        .into());
    }
    if !(0.0..=1.0).contains(&p_decay) {
        return Err(DynamicsError::InvalidParameter {
            field: "p_decay",
            reason: "must lie in [0, 1]".into(),
        });
    }
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let k0 = CMatrix::from_row_slice(2, 2, &[one, zero, zero, Complex64::new((1.0 - p_decay).sqrt(), 0.0)]);
    let k1 = CMatrix::from_row_slice(2, 2, &[zero, Complex64::new(p_decay.sqrt(), 0.0), zero, zero]);
    let r = rho.entries();
    let out = &k0 * r * k0.adjoint() + &k1 * r * k1.adjoint();
    Ok(validate_density(HermitianOperator::symmetrized(out, Basis::ground_excited()))?)
}

/// Amplitude-damping Lindblad generator in the lab frame.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    hamiltonian: HermitianOperator,
    jumps: Vec<(CMatrix, f64)>,
    hbar: f64,
}

impl LindbladModel {
    /// `ρ̇ = −(i/ħ)[H, ρ] + Σ γ_j (L_j ρ L_j† − ½{L_j†L_j, ρ})`.
    pub fn new(hamiltonian: HermitianOperator, jumps: Vec<(CMatrix, f64)>, hbar: f64) -> Self {
        Self {
            hamiltonian,
            jumps,
            hbar,
        }
    }

    /// `H₂` with the single jump `σ₋ = |g⟩⟨e|` at rate `γ`.
    pub fn amplitude_damping(hamiltonian: HermitianOperator, gamma: f64, hbar: f64) -> Self {
        let mut lower = CMatrix::zeros(2, 2);
        lower[(G, E)] = Complex64::new(1.0, 0.0);
        Self::new(hamiltonian, vec![(lower, gamma)], hbar)
    }

    pub fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let mut out = von_neumann_rhs(self.hamiltonian.entries(), rho, self.hbar);
        for (l, rate) in &self.jumps {
            let ld = l.adjoint();
            let ldl = &ld * l;
            let term = l * rho * &ld - (&ldl * rho + rho * &ldl) * Complex64::new(0.5, 0.0);
            out += term * Complex64::new(*rate, 0.0);
        }
        out
    }

    /// Fixed-step RK4 from `rho_start` at `grid.t0()`. No renormalisation is
    /// applied; trace drift shows up in [`TrajectoryPoint::rho`].
    pub fn integrate(
        &self,
        rho_start: &DensityMatrix,
        grid: &TimeGrid,
    ) -> Result<Vec<TrajectoryPoint>, DynamicsError> {
        let basis = rho_start.basis().clone();
        let f = |_t: f64, y: &CMatrix| self.rhs(y);
        let mut y = rho_start.entries().clone();
        let h_dot = HermitianOperator::zero(basis.clone());
        let mut out = Vec::with_capacity(grid.count());
        for i in 0..grid.count() {
            let rho = validate_density(HermitianOperator::symmetrized(y.clone(), basis.clone()))?;
            let rho_dot = HermitianOperator::symmetrized(self.rhs(&y), basis.clone());
            out.push(TrajectoryPoint::new(
                grid.time(i),
                rho,
                self.hamiltonian.clone(),
                rho_dot,
                h_dot.clone(),
            )?);
            y = rk4_step(&f, grid.time(i), &y, grid.dt());
        }
        Ok(out)
    }
}

/// RK4 on the amplitude-damping master equation from `p.rho0()` at
/// `grid.t0()`. Requires `dt γ ≤ 0.1`.
pub fn lindblad_rk4(p: &EmissionParams, grid: &TimeGrid) -> Result<Vec<TrajectoryPoint>, DynamicsError> {
    let dt_gamma = grid.dt() * p.gamma;
    if dt_gamma > 0.1 {
        return Err(DynamicsError::StepTooLarge { dt_gamma });
    }
    LindbladModel::amplitude_damping(emission_hamiltonian(p), p.gamma, p.hbar).integrate(&p.rho0, grid)
}

/// `e^{iHt/ħ} M e^{−iHt/ħ}` for a time-independent `H`.
pub fn to_interaction_frame(
    m: &HermitianOperator,
    hamiltonian: &HermitianOperator,
    t: f64,
    hbar: f64,
) -> Result<HermitianOperator, DynamicsError> {
    m.ensure_same_basis(hamiltonian)?;
    let spec = eigh(hamiltonian)?;
    let n = spec.dim();
    let phases = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, spec.values()[i] * t / hbar)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let u = spec.vectors() * phases * spec.vectors().adjoint();
    let out = &u * m.entries() * u.adjoint();
    Ok(HermitianOperator::symmetrized(out, m.basis().clone()))
}

/// Emission trajectory point. Uses the closed form for the superposition
/// start state and the entrywise damping map otherwise.
pub fn emission_point(p: &EmissionParams, t: f64) -> Result<TrajectoryPoint, DynamicsError> {
    let (rho, rho_dot) = if p.starts_in_superposition() {
        (emission_state(p, t)?, emission_state_dot(p, t)?)
    } else {
        (
            validate_density(damped_state(&p.rho0, p.gamma, t))?,
            damped_state_dot(&p.rho0, p.gamma, t),
        )
    };
    let h = emission_hamiltonian(p);
    let h_dot = HermitianOperator::zero(Basis::ground_excited());
    TrajectoryPoint::new(t, rho, h, rho_dot, h_dot)
}

/// Dissipator alone, `γ(σ₋ρσ₊ − ½{σ₊σ₋, ρ})`.
pub fn amplitude_damping_dissipator(rho: &HermitianOperator, gamma: f64) -> HermitianOperator {
    let zero_h = HermitianOperator::zero(rho.basis().clone());
    let model = LindbladModel::amplitude_damping(zero_h, gamma, 1.0);
    HermitianOperator::symmetrized(model.rhs(rho.entries()), rho.basis().clone())
}
