//! Named numerical tolerances.
//!
//! Linear-algebra thresholds are fixed constants. Identity tolerances used
//! by the scenario audit live in [`Tolerances`] and can be overridden per
//! run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Hermiticity check, scaled by `max(1, max|entry|)`.
pub const TOL_HERM: f64 = 1e-12;
/// Unit-trace check for density matrices.
pub const TOL_TRACE: f64 = 1e-10;
/// Smallest admissible eigenvalue of a density matrix is `-TOL_PSD`.
pub const TOL_PSD: f64 = 1e-10;
/// Unitarity and orthonormality checks.
pub const TOL_UNITARY: f64 = 1e-10;
/// Traceless check for `ρ̇`.
pub const TOL_TRACELESS: f64 = 1e-10;

/// Jacobi stops once the off-diagonal Frobenius norm is below this times `‖M‖_F`.
pub const JACOBI_REL_OFF: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 64;

/// Two candidate overlaps closer than this make a continuity match ambiguous.
pub const AMBIGUITY_GAP: f64 = 1e-6;
/// Eigenvalues closer than this (relative to `max(1, |λ|max)`) form a cluster
/// during continuity tracking.
pub const CLUSTER_TOL: f64 = 1e-9;

/// Gap below which a pair of eigenvalues counts as degenerate (times scale).
pub const EPS_DEG: f64 = 1e-9;
/// Coupling magnitude above which a degenerate pair is an error (times scale).
pub const EPS_NUM: f64 = 1e-9;

/// Allowed imaginary residue of a trace that must be real (times scale).
pub const IMAG_RESIDUE: f64 = 1e-12;

/// Entropy rate: eigenvalues at or below this are treated as zero.
pub const SINGULAR_P: f64 = 1e-14;
/// Entropy rate: a vanishing eigenvalue moving faster than this is singular.
pub const SINGULAR_PDOT: f64 = 1e-12;

/// Every identity the audit evaluates, with its default tolerance.
///
/// Tolerances marked "scaled" are multiplied by the run's energy scale
/// `max(1, E_max - E_min)`.
pub const IDENTITY_DEFAULTS: &[(&str, f64)] = &[
    ("first_law", 1e-8),
    ("first_law_numeric", 1e-7),
    ("energy_balance", 1e-6),
    ("power_closure", 1e-9),
    ("heat_closure", 1e-9),
    ("energy_basis_power", 1e-9),
    ("energy_basis_heat", 1e-9),
    ("trace_basis_equivalence", 1e-10),
    ("gauge_invariance", 1e-10),
    ("coherence_energy", 1e-9),
    ("adiabatic_heat", 1e-9),
    ("ref16_heat", 1e-6),
    ("ref16_work", 1e-6),
    ("appendix_b_Pk_dot", 1e-8),
    ("appendix_b_Qd", 1e-8),
    ("appendix_b_Qc", 1e-8),
    ("appendix_b_entropy_rate", 1e-8),
    ("emission_zero_work", 1e-9),
];

/// Per-identity audit tolerances plus a global multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    values: BTreeMap<String, f64>,
    multiplier: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            values: IDENTITY_DEFAULTS
                .iter()
                .map(|(k, v)| ((*k).to_owned(), *v))
                .collect(),
            multiplier: 1.0,
        }
    }
}

impl Tolerances {
    pub fn is_known(name: &str) -> bool {
        IDENTITY_DEFAULTS.iter().any(|(k, _)| *k == name)
    }

    /// Overrides one identity tolerance. Returns `false` for unknown names.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        match self.values.get_mut(name) {
            Some(slot) => {
                *slot = value;
                true
            }
            None => false,
        }
    }

    /// Multiplies every tolerance by `factor` (stacks with earlier calls).
    pub fn scale_all(&mut self, factor: f64) {
        self.multiplier *= factor;
    }

    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    /// Effective tolerance for `name`; panics on names not in [`IDENTITY_DEFAULTS`].
    pub fn get(&self, name: &str) -> f64 {
        let base = self
            .values
            .get(name)
            .unwrap_or_else(|| panic!("unknown identity tolerance `{name}`"));
        base * self.multiplier
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.values
            .iter()
            .map(move |(k, v)| (k.as_str(), v * self.multiplier))
    }
}
