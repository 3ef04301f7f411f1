use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::jacobi::jacobi_diagonalize;
use super::{max_abs, Basis, CMatrix, HermitianOperator, LinalgError};
use crate::tolerance::{AMBIGUITY_GAP, CLUSTER_TOL};

/// Which operator a decomposition came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumSource {
    Hamiltonian,
    Density,
    Generic,
}

/// Phase convention currently carried by the eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gauge {
    /// Largest-magnitude component real and non-negative.
    LargestComponent,
    /// Phases and order aligned to a previous decomposition.
    Continuity,
    /// Arbitrary caller-supplied phases.
    Custom,
}

/// Eigenvalues and orthonormal eigenvector columns of a Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    values: Vec<f64>,
    vectors: CMatrix,
    basis: Basis,
    source: SpectrumSource,
    gauge: Gauge,
}

impl SpectralDecomposition {
    pub(crate) fn from_parts(
        values: Vec<f64>,
        vectors: CMatrix,
        basis: Basis,
        source: SpectrumSource,
        gauge: Gauge,
    ) -> Self {
        Self {
            values,
            vectors,
            basis,
            source,
            gauge,
        }
    }

    pub fn with_source(mut self, source: SpectrumSource) -> Self {
        self.source = source;
        self
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvectors as columns, in the same order as [`values`](Self::values).
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> DVector<Complex64> {
        self.vectors.column(i).into_owned()
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn source(&self) -> SpectrumSource {
        self.source
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    /// `|v_i⟩⟨v_i|`.
    pub fn projector(&self, i: usize) -> CMatrix {
        let v = self.vectors.column(i);
        v * v.adjoint()
    }

    /// `Σ λ_i |v_i⟩⟨v_i|`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            out += self.projector(i) * Complex64::new(self.values[i], 0.0);
        }
        out
    }

    pub fn reconstruction_residual(&self, source: &HermitianOperator) -> f64 {
        max_abs(&(self.reconstruct() - source.entries()))
    }

    /// `max |⟨v_i|v_j⟩ - δ_ij|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.vectors.adjoint() * &self.vectors - CMatrix::identity(n, n)))
    }

    /// Makes the largest-magnitude component of every column real and
    /// non-negative. Ties within 1e-12 go to the lowest index.
    pub fn fix_gauge(&mut self) {
        let n = self.dim();
        for col in 0..n {
            let largest = (0..n)
                .map(|r| self.vectors[(r, col)].norm())
                .fold(0.0f64, f64::max);
            if largest == 0.0 {
                continue;
            }
            let pivot = (0..n)
                .find(|&r| self.vectors[(r, col)].norm() >= largest * (1.0 - 1e-12))
                .unwrap_or(0);
            let z = self.vectors[(pivot, col)];
            let phase = z.conj() / z.norm();
            for r in 0..n {
                self.vectors[(r, col)] *= phase;
            }
            self.vectors[(pivot, col)].im = 0.0;
        }
        self.gauge = Gauge::LargestComponent;
    }

    /// Copy with column `i` multiplied by `e^{i phases[i]}`.
    pub fn rephased(&self, phases: &[f64]) -> Self {
        assert_eq!(phases.len(), self.dim(), "one phase per eigenvector");
        let mut out = self.clone();
        for (col, &phi) in phases.iter().enumerate() {
            let u = Complex64::from_polar(1.0, phi);
            for r in 0..self.dim() {
                out.vectors[(r, col)] *= u;
            }
        }
        out.gauge = Gauge::Custom;
        out
    }

    /// Copy with columns reordered: output column `j` is input column `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.dim();
        assert_eq!(perm.len(), n, "permutation length");
        Self {
            values: perm.iter().map(|&i| self.values[i]).collect(),
            vectors: CMatrix::from_fn(n, n, |r, c| self.vectors[(r, perm[c])]),
            basis: self.basis.clone(),
            source: self.source,
            gauge: self.gauge,
        }
    }
}

fn clusters(values: &[f64]) -> Vec<Vec<usize>> {
    let scale = values.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let tol = CLUSTER_TOL * scale;
    let mut label: Vec<Option<usize>> = vec![None; values.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..values.len() {
        if label[i].is_some() {
            continue;
        }
        let id = groups.len();
        let mut members = vec![i];
        label[i] = Some(id);
        let mut cursor = 0;
        while cursor < members.len() {
            let m = members[cursor];
            for j in 0..values.len() {
                if label[j].is_none() && (values[j] - values[m]).abs() < tol {
                    label[j] = Some(id);
                    members.push(j);
                }
            }
            cursor += 1;
        }
        members.sort_unstable();
        groups.push(members);
    }
    groups
}

/// Unitary polar factor `M (M†M)^{-1/2}`, or `None` when `M` is rank deficient.
fn polar_unitary(m: &CMatrix) -> Option<CMatrix> {
    let k = m.nrows();
    if k == 1 {
        let z = m[(0, 0)];
        return (z.norm() > 1e-150).then(|| CMatrix::from_element(1, 1, z / z.norm()));
    }
    let gram = m.adjoint() * m;
    let (values, vectors) = jacobi_diagonalize(&gram).ok()?;
    if values.iter().any(|&s| s < 1e-24) {
        return None;
    }
    let inv_sqrt = CMatrix::from_diagonal(&DVector::from_iterator(
        k,
        values.iter().map(|&s| Complex64::new(1.0 / s.sqrt(), 0.0)),
    ));
    Some(m * (&vectors * inv_sqrt * vectors.adjoint()))
}

/// Reorders and re-phases `curr` so that it continues `prev` smoothly.
///
/// Each column of `prev` is matched to the unused column of `curr` with the
/// largest overlap magnitude. Vectors are then rotated within each cluster of
/// (near-)equal eigenvalues so that the overlap block `⟨prev|curr⟩` is
/// Hermitian positive semidefinite; for a non-degenerate eigenvalue this just
/// makes `⟨v_prev|v_curr⟩` real and non-negative. Projectors onto each
/// eigenspace are unchanged.
pub fn track_continuity(
    prev: &SpectralDecomposition,
    curr: &SpectralDecomposition,
) -> Result<SpectralDecomposition, LinalgError> {
    let n = prev.dim();
    if curr.dim() != n {
        return Err(LinalgError::DimensionMismatch {
            left: n,
            right: curr.dim(),
        });
    }
    if prev.basis != curr.basis {
        return Err(LinalgError::BasisMismatch {
            left: prev.basis.clone(),
            right: curr.basis.clone(),
        });
    }
    let overlaps = prev.vectors.adjoint() * &curr.vectors;
    let value_scale = curr.values.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));

    let mut used = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    for i in 0..n {
        let mut ranked: Vec<(usize, f64)> = (0..n)
            .filter(|&j| !used[j])
            .map(|j| (j, overlaps[(i, j)].norm()))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        let (best, best_overlap) = ranked[0];
        if let Some(&(second, second_overlap)) = ranked.get(1) {
            let degenerate =
                (curr.values[best] - curr.values[second]).abs() < CLUSTER_TOL * value_scale;
            if best_overlap - second_overlap < AMBIGUITY_GAP && !degenerate {
                return Err(LinalgError::AmbiguousMatch {
                    column: i,
                    best: best_overlap,
                    second: second_overlap,
                });
            }
        }
        used[best] = true;
        perm.push(best);
    }

    let mut out = curr.permuted(&perm);
    for group in clusters(&out.values) {
        let k = group.len();
        let block = CMatrix::from_fn(n, k, |r, c| out.vectors[(r, group[c])]);
        let prev_block = CMatrix::from_fn(n, k, |r, c| prev.vectors[(r, group[c])]);
        let m = block.adjoint() * &prev_block;
        if let Some(rotation) = polar_unitary(&m) {
            let rotated = &block * rotation;
            for (c, &col) in group.iter().enumerate() {
                for r in 0..n {
                    out.vectors[(r, col)] = rotated[(r, c)];
                }
            }
        }
    }
    out.gauge = Gauge::Continuity;
    Ok(out)
}
