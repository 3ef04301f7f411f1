//! Internal energy, power, heat flux and their eigenbasis decompositions.
//!
//! With `H = Σ E_n |n⟩⟨n|`, `ρ = Σ P_k |k⟩⟨k|` and `c_nk = ⟨n|k⟩`:
//!
//! ```text
//! Ẇ = Σ P_k Ė_n |c_nk|²  +  Σ P_k E_n (⟨k|ṅ⟩ c_nk + c.c.)   = Ẇ_d + Ẇ_c
//! Q̇ = Σ Ṗ_k E_n |c_nk|²  +  Σ P_k E_n (⟨k̇|n⟩ c_nk + c.c.)   = Q̇_d + Q̇_c
//! ```
//!
//! Eigenvector derivatives come from first-order perturbation theory,
//! `⟨n′|ṅ⟩ = ⟨n′|Ḣ|n⟩ / (E_n − E_n′)` and `⟨k′|k̇⟩ = ⟨k′|ρ̇|k⟩ / (P_k − P_k′)`
//! for distinct indices. The diagonal components are pure phases whose
//! contributions cancel against their conjugates, so they are dropped.

mod analysis;
mod quadrature;

use thiserror::Error;

use crate::dynamics::TrajectoryPoint;
use crate::hermitian::{max_abs, CMatrix, HermitianOperator, LinalgError, SpectralDecomposition};
use crate::tolerance::IMAG_RESIDUE;

pub use analysis::{AnalysisOptions, CoherenceMatrix, PointAnalysis, ThermoRates};
pub use quadrature::{cumulative, integrate, Column, Cumulative, Quadrature, TimeSeries};

/// Which spectrum a degeneracy was found in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Hamiltonian,
    Density,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermoError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(
        "degenerate {kind:?} spectrum: indices ({i}, {j}) gap {gap:e} with coupling {coupling:e}"
    )]
    DegenerateSpectrum {
        kind: SpectrumKind,
        i: usize,
        j: usize,
        gap: f64,
        coupling: f64,
    },
    #[error("entropy rate is singular: eigenvalue {index} is {value:e} while moving at {rate:e}")]
    SingularState { index: usize, value: f64, rate: f64 },
    #[error("trace has imaginary part {imag:e}")]
    ComplexTrace { imag: f64 },
    #[error("time grid is not uniform at record {index}")]
    NonUniformGrid { index: usize },
}

/// `Tr[A B]`, required to be real up to roundoff.
pub(crate) fn real_trace(a: &CMatrix, b: &CMatrix) -> Result<f64, ThermoError> {
    let n = a.nrows();
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    let bound = IMAG_RESIDUE * (1.0 + n as f64 * max_abs(a) * max_abs(b));
    if acc.im.abs() > bound {
        return Err(ThermoError::ComplexTrace { imag: acc.im });
    }
    Ok(acc.re)
}

/// `U = Tr[ρ H]`.
pub fn internal_energy(rho: &HermitianOperator, h: &HermitianOperator) -> Result<f64, ThermoError> {
    rho.ensure_same_basis(h)?;
    real_trace(rho.entries(), h.entries())
}

/// `Ẇ = Tr[ρ Ḣ]`.
pub fn power_total(rho: &HermitianOperator, h_dot: &HermitianOperator) -> Result<f64, ThermoError> {
    rho.ensure_same_basis(h_dot)?;
    real_trace(rho.entries(), h_dot.entries())
}

/// `Q̇ = Tr[ρ̇ H]`.
pub fn heat_total(rho_dot: &HermitianOperator, h: &HermitianOperator) -> Result<f64, ThermoError> {
    rho_dot.ensure_same_basis(h)?;
    real_trace(rho_dot.entries(), h.entries())
}

/// `c_nk = ⟨n|k⟩`, rows indexed by Hamiltonian eigenvectors.
pub fn coherence_matrix(
    energy: &SpectralDecomposition,
    state: &SpectralDecomposition,
) -> Result<CoherenceMatrix, ThermoError> {
    CoherenceMatrix::new(energy, state)
}

/// `(Ẇ_d, Ẇ_c)` with default options.
pub fn decompose_power(point: &TrajectoryPoint) -> Result<(f64, f64), ThermoError> {
    PointAnalysis::new(point, AnalysisOptions::default())?.decompose_power()
}

/// `(Q̇_d, Q̇_c)` with default options.
pub fn decompose_heat(point: &TrajectoryPoint) -> Result<(f64, f64), ThermoError> {
    PointAnalysis::new(point, AnalysisOptions::default())?.decompose_heat()
}

/// Energy-representation power and heat flux.
pub fn energy_basis_rates(point: &TrajectoryPoint) -> Result<(f64, f64), ThermoError> {
    PointAnalysis::new(point, AnalysisOptions::default())?.energy_basis_rates()
}

/// `Ṡ = −kB Σ Ṗ_k ln P_k`.
pub fn entropy_rate(point: &TrajectoryPoint, kb: f64) -> Result<f64, ThermoError> {
    let opts = AnalysisOptions {
        kb,
        ..AnalysisOptions::default()
    };
    PointAnalysis::new(point, opts)?.entropy_rate()
}

/// Rates of the occupation-based heat and work, `(𝒬̇, 𝒲̇)`.
pub fn ref16_rates(point: &TrajectoryPoint) -> Result<(f64, f64), ThermoError> {
    PointAnalysis::new(point, AnalysisOptions::default())?.ref16_rates()
}

/// `Σ P_k E_n d|c_nk|²/dt`.
pub fn coherence_energy_rate(point: &TrajectoryPoint) -> Result<f64, ThermoError> {
    PointAnalysis::new(point, AnalysisOptions::default())?.coherence_energy_rate()
}
