//! Dense complex Hermitian operators, density matrices and unitaries.

mod jacobi;
mod spectral;

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::tolerance::{TOL_HERM, TOL_PSD, TOL_TRACE, TOL_UNITARY};

pub use jacobi::eigh;
pub use spectral::{track_continuity, Gauge, SpectralDecomposition, SpectrumSource};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("basis has {labels} labels but operator dimension is {dim}")]
    LabelCount { labels: usize, dim: usize },
    #[error("operator has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("operator is not Hermitian: max |M - M†| = {residual:e}")]
    NotHermitian { residual: f64 },
    #[error("trace is not one: |Tr ρ - 1| = {residual:e}")]
    TraceNotOne { residual: f64 },
    #[error("operator is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("operator is not unitary: max |U†U - I| = {residual:e}")]
    NotUnitary { residual: f64 },
    #[error("Jacobi iteration did not converge within {max_sweeps} sweeps")]
    NoConvergence { max_sweeps: usize },
    #[error("ambiguous eigenvector match for column {column}: overlaps {best:.9} and {second:.9}")]
    AmbiguousMatch { column: usize, best: f64, second: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("basis mismatch: [{left}] vs [{right}]")]
    BasisMismatch { left: Basis, right: Basis },
}

/// Ordered basis labels shared by operators acting on the same space.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Basis(Arc<[String]>);

impl Basis {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(labels.into_iter().map(Into::into).collect())
    }

    /// Labels `"0"`, `"1"`, ... for generic spaces.
    pub fn indexed(dim: usize) -> Self {
        Self::new((0..dim).map(|i| i.to_string()))
    }

    /// `(|e⟩, |g⟩)`, with `|e⟩ = (1, 0)ᵀ`.
    pub fn excited_ground() -> Self {
        Self::new(["e", "g"])
    }

    /// `(|g⟩, |e⟩)`.
    pub fn ground_excited() -> Self {
        Self::new(["g", "e"])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(","))
    }
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Basis[{self}]")
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn hermitian_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_shape(entries: &CMatrix, basis: &Basis) -> Result<(), LinalgError> {
    let (rows, cols) = entries.shape();
    if rows != cols {
        return Err(LinalgError::NotSquare { rows, cols });
    }
    if basis.len() != rows {
        return Err(LinalgError::LabelCount {
            labels: basis.len(),
            dim: rows,
        });
    }
    for i in 0..rows {
        for j in 0..cols {
            let z = entries[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(LinalgError::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Finite-dimensional Hermitian matrix with basis labels.
///
/// Entries are stored exactly Hermitian: construction checks the input
/// against [`TOL_HERM`] and then symmetrizes it.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
    basis: Basis,
}

impl HermitianOperator {
    pub fn new(entries: CMatrix, basis: Basis) -> Result<Self, LinalgError> {
        check_shape(&entries, &basis)?;
        let residual = hermitian_residual(&entries);
        if residual > TOL_HERM * max_abs(&entries).max(1.0) {
            return Err(LinalgError::NotHermitian { residual });
        }
        Ok(Self::symmetrized(entries, basis))
    }

    /// Builds `(M + M†)/2` without a Hermiticity check. Shape must match `basis`.
    pub fn symmetrized(entries: CMatrix, basis: Basis) -> Self {
        assert_eq!(entries.nrows(), basis.len(), "operator/basis dimension");
        assert_eq!(entries.ncols(), basis.len(), "operator/basis dimension");
        let entries = (&entries + entries.adjoint()) * Complex64::new(0.5, 0.0);
        Self { entries, basis }
    }

    pub fn from_real_diagonal(diagonal: &[f64], basis: Basis) -> Result<Self, LinalgError> {
        let n = diagonal.len();
        let entries = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diagonal[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(entries, basis)
    }

    pub fn zero(basis: Basis) -> Self {
        let n = basis.len();
        Self {
            entries: CMatrix::zeros(n, n),
            basis,
        }
    }

    pub fn identity(basis: Basis) -> Self {
        let n = basis.len();
        Self {
            entries: CMatrix::identity(n, n),
            basis,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// Entry addressed by basis labels, e.g. `op.at("e", "g")`.
    pub fn at(&self, row: &str, col: &str) -> Option<Complex64> {
        Some(self.entries[(self.basis.index_of(row)?, self.basis.index_of(col)?)])
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.entries)
    }

    /// Real scalar multiple, keeping the basis.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: &self.entries * Complex64::new(factor, 0.0),
            basis: self.basis.clone(),
        }
    }

    pub fn ensure_same_basis(&self, other: &HermitianOperator) -> Result<(), LinalgError> {
        if self.basis != other.basis {
            return Err(LinalgError::BasisMismatch {
                left: self.basis.clone(),
                right: other.basis.clone(),
            });
        }
        Ok(())
    }

    /// Max-entry distance to another operator on the same basis.
    pub fn distance(&self, other: &HermitianOperator) -> Result<f64, LinalgError> {
        self.ensure_same_basis(other)?;
        Ok(max_abs(&(&self.entries - &other.entries)))
    }
}

/// A Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(HermitianOperator);

impl Deref for DensityMatrix {
    type Target = HermitianOperator;

    fn deref(&self) -> &HermitianOperator {
        &self.0
    }
}

impl DensityMatrix {
    /// `|ψ⟩⟨ψ|` for a normalised copy of `psi`.
    pub fn pure(psi: &[Complex64], basis: Basis) -> Result<Self, LinalgError> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        let v = v.unscale(norm);
        let entries = &v * v.adjoint();
        validate_density(HermitianOperator::new(entries, basis)?)
    }

    pub fn maximally_mixed(basis: Basis) -> Self {
        let n = basis.len() as f64;
        Self(HermitianOperator::identity(basis).scaled(1.0 / n))
    }

    /// Wraps an operator already known to be a valid state.
    pub(crate) fn from_operator_unchecked(op: HermitianOperator) -> Self {
        Self(op)
    }

    pub fn as_operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn into_operator(self) -> HermitianOperator {
        self.0
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (self.entries() * self.entries()).trace().re
    }
}

/// Accepts `m` as a density matrix iff it has unit trace and no eigenvalue
/// below `-TOL_PSD`. Hermiticity is enforced by [`HermitianOperator`].
pub fn validate_density(m: HermitianOperator) -> Result<DensityMatrix, LinalgError> {
    let residual = (m.trace() - 1.0).abs();
    if residual > TOL_TRACE {
        return Err(LinalgError::TraceNotOne { residual });
    }
    let spectrum = eigh(&m)?;
    let min_eigenvalue = spectrum.values().iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -TOL_PSD {
        return Err(LinalgError::NotPositive { min_eigenvalue });
    }
    Ok(DensityMatrix(m))
}

/// Unitary matrix with basis labels.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    entries: CMatrix,
    basis: Basis,
}

impl UnitaryOperator {
    pub fn new(entries: CMatrix, basis: Basis) -> Result<Self, LinalgError> {
        check_shape(&entries, &basis)?;
        let n = entries.nrows();
        let residual = max_abs(&(entries.adjoint() * &entries - CMatrix::identity(n, n)));
        if residual > TOL_UNITARY {
            return Err(LinalgError::NotUnitary { residual });
        }
        Ok(Self { entries, basis })
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// `U M U†`.
    pub fn conjugate(&self, m: &HermitianOperator) -> Result<HermitianOperator, LinalgError> {
        if m.basis() != &self.basis {
            return Err(LinalgError::BasisMismatch {
                left: self.basis.clone(),
                right: m.basis().clone(),
            });
        }
        let out = &self.entries * m.entries() * self.entries.adjoint();
        Ok(HermitianOperator::symmetrized(out, self.basis.clone()))
    }

    /// `U ρ U†` as a density matrix; unitarity keeps trace and spectrum.
    pub fn evolve(&self, rho: &DensityMatrix) -> Result<DensityMatrix, LinalgError> {
        Ok(DensityMatrix(self.conjugate(rho)?))
    }

    pub fn unitarity_residual(&self) -> f64 {
        let n = self.entries.nrows();
        max_abs(&(self.entries.adjoint() * &self.entries - CMatrix::identity(n, n)))
    }
}

/// `S = -kB Σ P_k ln P_k` with `0 ln 0 = 0`; eigenvalues are clamped to `[0, 1]`.
pub fn von_neumann_entropy(rho: &DensityMatrix, kb: f64) -> Result<f64, LinalgError> {
    let spectrum = eigh(rho)?;
    Ok(kb * entropy_of_probabilities(spectrum.values()))
}

pub(crate) fn entropy_of_probabilities(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|p| p.clamp(0.0, 1.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}
