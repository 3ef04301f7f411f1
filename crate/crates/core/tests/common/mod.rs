#![allow(dead_code)]

use qthermo_core::{
    validate_density, Basis, CMatrix, Complex64, DensityMatrix, HermitianOperator,
    TrajectoryPoint,
};
use rand::Rng;

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize, amplitude: f64) -> CMatrix {
    let a = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    (&a + a.adjoint()) * Complex64::new(0.5 * amplitude, 0.0)
}

/// Full-rank density matrix `A A† / Tr[A A†]`.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> DensityMatrix {
    let a = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    let op = HermitianOperator::symmetrized(m / Complex64::new(tr, 0.0), Basis::indexed(dim));
    validate_density(op).unwrap()
}

pub fn traceless(mut m: CMatrix) -> CMatrix {
    let n = m.nrows();
    let shift = m.trace() / Complex64::new(n as f64, 0.0);
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    m
}

/// Random `ρ`, `H`, traceless `ρ̇` and `Ḣ` with no relation between them.
pub fn random_point<R: Rng>(rng: &mut R, dim: usize) -> TrajectoryPoint {
    let basis = Basis::indexed(dim);
    let rho = random_density(rng, dim);
    let amplitude = rng.gen_range(0.5..3.0);
    let h = HermitianOperator::symmetrized(random_hermitian(rng, dim, amplitude), basis.clone());
    let rho_dot = HermitianOperator::symmetrized(traceless(random_hermitian(rng, dim, 0.3)), basis.clone());
    let h_dot = HermitianOperator::symmetrized(random_hermitian(rng, dim, 1.0), basis);
    TrajectoryPoint::new(0.0, rho, h, rho_dot, h_dot).unwrap()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}
