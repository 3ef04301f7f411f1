//! Finite-time quantum thermodynamics with the heat flux and power split
//! into diagonal and coherence contributions.
//!
//! The power `Tr[ρ Ḣ]` and heat flux `Tr[ρ̇ H]` are expanded in the
//! instantaneous eigenbases `{|n⟩}` of the Hamiltonian and `{|k⟩}` of the
//! density operator. Terms carried by eigenvalue motion (`Ė_n`, `Ṗ_k`) are
//! the diagonal parts; terms carried by eigenvector motion (`|ṅ⟩`, `|k̇⟩`)
//! through the overlaps `c_nk = ⟨n|k⟩` are the coherence parts.
//!
//! Modules:
//!
//! * [`hermitian`] dense complex Hermitian algebra, a cyclic Jacobi
//!   eigensolver, gauge fixing and eigenpair continuity.
//! * [`dynamics`] trajectory generators for a spin precessing in a rotating
//!   field and for spontaneous emission (closed form, Kraus map, RK4
//!   Lindblad integration).
//! * [`thermo`] internal energy, power, heat flux, their decompositions,
//!   entropy rate and cumulative quadrature.
//! * [`scenarios`] the two worked systems wired end to end plus an identity
//!   audit.

pub mod dynamics;
pub mod hermitian;
pub mod scenarios;
pub mod thermo;
pub mod tolerance;

pub use dynamics::{EmissionParams, SpinPrecessionParams, TimeGrid, TrajectoryPoint};
pub use hermitian::{
    eigh, track_continuity, validate_density, von_neumann_entropy, Basis, CMatrix, DensityMatrix,
    HermitianOperator, SpectralDecomposition, UnitaryOperator,
};
pub use num_complex::Complex64;
pub use scenarios::{
    audit, run_scenario, DerivativeMode, IdentityReport, ScenarioConfig, ScenarioKind,
    ScenarioParams,
};
pub use thermo::{
    integrate, CoherenceMatrix, PointAnalysis, Quadrature, ThermoRates, TimeSeries,
};
pub use tolerance::Tolerances;
