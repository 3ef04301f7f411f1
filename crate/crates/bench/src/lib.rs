//! Deterministic inputs for the benchmarks.

use qthermo_core::{
    validate_density, Basis, CMatrix, Complex64, HermitianOperator, TrajectoryPoint,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> HermitianOperator {
    let a = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    HermitianOperator::symmetrized((&a + a.adjoint()) * Complex64::new(0.5, 0.0), Basis::indexed(dim))
}

/// Full-rank `ρ`, random `H`, traceless `ρ̇` and `Ḣ`.
pub fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> TrajectoryPoint {
    let basis = Basis::indexed(dim);
    let a = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let m = &a * a.adjoint();
    let tr = m.trace();
    let rho = validate_density(HermitianOperator::symmetrized(m / tr, basis)).unwrap();
    let h = random_hermitian(rng, dim);
    let mut rho_dot = random_hermitian(rng, dim).into_entries();
    let shift = rho_dot.trace() / Complex64::new(dim as f64, 0.0);
    for i in 0..dim {
        rho_dot[(i, i)] -= shift;
    }
    let rho_dot = HermitianOperator::symmetrized(rho_dot, Basis::indexed(dim));
    let h_dot = random_hermitian(rng, dim);
    TrajectoryPoint::new(0.0, rho, h, rho_dot, h_dot).unwrap()
}
