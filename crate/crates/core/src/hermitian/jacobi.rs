//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary, then applies the real symmetric Jacobi rotation that zeroes it.
//! The combined 2x2 unitary acting on columns `(p, q)` is
//!
//! ```text
//!     G = [  c            s          ]
//!         [ -s e^{-iφ}    c e^{-iφ}  ]      a_pq = |a_pq| e^{iφ}
//! ```
//!
//! and the update is `A ← G† A G`, `V ← V G`.

use num_complex::Complex64;

use super::spectral::{Gauge, SpectralDecomposition, SpectrumSource};
use super::{CMatrix, HermitianOperator, LinalgError};
use crate::tolerance::{JACOBI_MAX_SWEEPS, JACOBI_REL_OFF};

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

struct Rotation {
    g_pp: Complex64,
    g_pq: Complex64,
    g_qp: Complex64,
    g_qq: Complex64,
}

impl Rotation {
    fn for_pivot(a: &CMatrix, p: usize, q: usize) -> Option<Self> {
        let apq = a[(p, q)];
        let mag = apq.norm();
        if mag == 0.0 {
            return None;
        }
        let phase_conj = (apq / mag).conj();
        let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
        let t = if theta.abs() > 1e150 {
            0.5 / theta
        } else {
            let sign = if theta < 0.0 { -1.0 } else { 1.0 };
            sign / (theta.abs() + (theta * theta + 1.0).sqrt())
        };
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        Some(Self {
            g_pp: Complex64::new(c, 0.0),
            g_pq: Complex64::new(s, 0.0),
            g_qp: phase_conj * -s,
            g_qq: phase_conj * c,
        })
    }

    /// `M ← M G` restricted to columns `p, q`.
    fn apply_right(&self, m: &mut CMatrix, p: usize, q: usize) {
        for k in 0..m.nrows() {
            let mp = m[(k, p)];
            let mq = m[(k, q)];
            m[(k, p)] = mp * self.g_pp + mq * self.g_qp;
            m[(k, q)] = mp * self.g_pq + mq * self.g_qq;
        }
    }

    /// `M ← G† M` restricted to rows `p, q`.
    fn apply_left_adjoint(&self, m: &mut CMatrix, p: usize, q: usize) {
        for k in 0..m.ncols() {
            let mp = m[(p, k)];
            let mq = m[(q, k)];
            m[(p, k)] = self.g_pp.conj() * mp + self.g_qp.conj() * mq;
            m[(q, k)] = self.g_pq.conj() * mp + self.g_qq.conj() * mq;
        }
    }
}

/// Diagonalises a Hermitian matrix in place. Returns unsorted eigenvalues and
/// the matrix whose columns are the eigenvectors.
pub(crate) fn jacobi_diagonalize(input: &CMatrix) -> Result<(Vec<f64>, CMatrix), LinalgError> {
    let n = input.nrows();
    let mut a = input.clone();
    let mut v = CMatrix::identity(n, n);
    let threshold = JACOBI_REL_OFF * a.norm();

    let mut converged = off_diagonal_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                if let Some(rot) = Rotation::for_pivot(&a, p, q) {
                    rot.apply_right(&mut a, p, q);
                    rot.apply_left_adjoint(&mut a, p, q);
                    rot.apply_right(&mut v, p, q);
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    a[(p, p)].im = 0.0;
                    a[(q, q)].im = 0.0;
                }
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a) <= threshold;
    }
    if !converged {
        return Err(LinalgError::NoConvergence {
            max_sweeps: JACOBI_MAX_SWEEPS,
        });
    }
    let values = (0..n).map(|i| a[(i, i)].re).collect();
    Ok((values, v))
}

/// Eigendecomposition with eigenvalues in descending order and each
/// eigenvector gauge-fixed so its largest-magnitude component is real and
/// non-negative.
pub fn eigh(m: &HermitianOperator) -> Result<SpectralDecomposition, LinalgError> {
    let (values, vectors) = jacobi_diagonalize(m.entries())?;
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = CMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    let mut spec = SpectralDecomposition::from_parts(
        sorted_values,
        sorted_vectors,
        m.basis().clone(),
        SpectrumSource::Generic,
        Gauge::LargestComponent,
    );
    spec.fix_gauge();
    Ok(spec)
}
