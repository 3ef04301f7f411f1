use num_complex::Complex64;

use super::{real_trace, SpectrumKind, ThermoError};
use crate::dynamics::TrajectoryPoint;
use crate::hermitian::{
    eigh, entropy_of_probabilities, max_abs, CMatrix, Gauge, LinalgError, SpectralDecomposition,
    SpectrumSource,
};
use crate::tolerance::{EPS_DEG, EPS_NUM, SINGULAR_P, SINGULAR_PDOT};

/// Overlaps `c_nk = ⟨n|k⟩` between the Hamiltonian and density eigenbases.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMatrix {
    entries: CMatrix,
    gauge_tag: (Gauge, Gauge),
}

impl CoherenceMatrix {
    pub fn new(
        energy: &SpectralDecomposition,
        state: &SpectralDecomposition,
    ) -> Result<Self, ThermoError> {
        if energy.dim() != state.dim() {
            return Err(LinalgError::DimensionMismatch {
                left: energy.dim(),
                right: state.dim(),
            }
            .into());
        }
        Ok(Self {
            entries: energy.vectors().adjoint() * state.vectors(),
            gauge_tag: (energy.gauge(), state.gauge()),
        })
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        self.entries[(n, k)]
    }

    /// Gauges of the (Hamiltonian, density) eigenvectors used.
    pub fn gauge_tag(&self) -> (Gauge, Gauge) {
        self.gauge_tag
    }

    /// `|c_nk|²`, a doubly stochastic matrix.
    pub fn weights(&self) -> nalgebra::DMatrix<f64> {
        self.entries.map(|z| z.norm_sqr())
    }

    pub fn unitarity_residual(&self) -> f64 {
        let n = self.entries.nrows();
        max_abs(&(self.entries.adjoint() * &self.entries - CMatrix::identity(n, n)))
    }
}

/// Thresholds and constants for per-point analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub kb: f64,
    /// Degeneracy gap, relative to the energy scale for `H` and absolute for `ρ`.
    pub eps_deg: f64,
    /// Coupling above which a degenerate pair is an error (same scaling).
    pub eps_num: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            kb: 1.0,
            eps_deg: EPS_DEG,
            eps_num: EPS_NUM,
        }
    }
}

/// Every rate reported for one time point, plus closure residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoRates {
    pub t: f64,
    /// `U = Tr[ρH]`.
    pub internal_energy: f64,
    /// `S = −kB Σ P ln P`.
    pub entropy: f64,
    /// `Tr[ρḢ]`.
    pub power: f64,
    /// `Tr[ρ̇H]`.
    pub heat: f64,
    /// `dU/dt = Tr[ρḢ] + Tr[ρ̇H]`.
    pub du_dt: f64,
    pub w_d_rate: f64,
    pub w_c_rate: f64,
    pub q_d_rate: f64,
    pub q_c_rate: f64,
    /// `None` where a vanishing eigenvalue of `ρ` is moving.
    pub entropy_rate: Option<f64>,
    pub ref16_q_rate: f64,
    pub ref16_w_rate: f64,
    /// Power and heat from the energy-representation formulas.
    pub eq10_power: f64,
    pub eq11_heat: f64,
    pub coherence_energy_rate: f64,
    /// `max_k |Ṗ_k|`.
    pub max_p_dot: f64,
    /// Disagreement between traces expanded in the `ρ` and the `H` eigenbasis.
    pub trace_basis_residual: f64,
    pub residual_power: f64,
    pub residual_heat: f64,
    pub residual_first_law: f64,
    /// `max(1, E_max − E_min)`.
    pub scale: f64,
}

impl ThermoRates {
    /// Largest difference over the decomposed rates. The entropy rate is
    /// compared only when both sides define it.
    pub fn max_rate_difference(&self, other: &ThermoRates) -> f64 {
        let pairs = [
            (self.w_d_rate, other.w_d_rate),
            (self.w_c_rate, other.w_c_rate),
            (self.q_d_rate, other.q_d_rate),
            (self.q_c_rate, other.q_c_rate),
            (self.ref16_q_rate, other.ref16_q_rate),
            (self.ref16_w_rate, other.ref16_w_rate),
            (self.eq10_power, other.eq10_power),
            (self.eq11_heat, other.eq11_heat),
            (self.coherence_energy_rate, other.coherence_energy_rate),
            (self.max_p_dot, other.max_p_dot),
        ];
        let worst = pairs.iter().fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        match (self.entropy_rate, other.entropy_rate) {
            (Some(a), Some(b)) => worst.max((a - b).abs()),
            _ => worst,
        }
    }
}

/// Both spectra and all basis-transformed operators for one point.
#[derive(Debug, Clone)]
pub struct PointAnalysis<'a> {
    point: &'a TrajectoryPoint,
    opts: AnalysisOptions,
    energy: SpectralDecomposition,
    state: SpectralDecomposition,
    coherence: CoherenceMatrix,
    scale: f64,
    /// `⟨n|Ḣ|n′⟩`, `⟨n|ρ|n′⟩`, `⟨n|ρ̇|n′⟩`.
    h_dot_nb: CMatrix,
    rho_nb: CMatrix,
    rho_dot_nb: CMatrix,
    /// `⟨k|ρ̇|k′⟩`, `⟨k|H|k′⟩`, `⟨k|Ḣ|k′⟩`.
    rho_dot_kb: CMatrix,
    h_kb: CMatrix,
    h_dot_kb: CMatrix,
    /// `⟨n′|ṅ⟩` and `⟨k′|k̇⟩`, diagonal zeroed.
    n_dot: Result<CMatrix, ThermoError>,
    k_dot: Result<CMatrix, ThermoError>,
}

fn sandwich(v: &CMatrix, m: &CMatrix) -> CMatrix {
    v.adjoint() * m * v
}

fn perturbative_derivative(
    values: &[f64],
    coupling: &CMatrix,
    gap_tol: f64,
    coupling_tol: f64,
    kind: SpectrumKind,
) -> Result<CMatrix, ThermoError> {
    let n = values.len();
    let mut out = CMatrix::zeros(n, n);
    for b in 0..n {
        for a in 0..n {
            if a == b {
                continue;
            }
            let gap = values[b] - values[a];
            let c = coupling[(a, b)];
            if gap.abs() < gap_tol {
                if c.norm() > coupling_tol {
                    return Err(ThermoError::DegenerateSpectrum {
                        kind,
                        i: a,
                        j: b,
                        gap,
                        coupling: c.norm(),
                    });
                }
                continue;
            }
            out[(a, b)] = c / gap;
        }
    }
    Ok(out)
}

impl<'a> PointAnalysis<'a> {
    /// Diagonalises `H` and `ρ` at the point.
    pub fn new(point: &'a TrajectoryPoint, opts: AnalysisOptions) -> Result<Self, ThermoError> {
        let energy = eigh(&point.hamiltonian)?.with_source(SpectrumSource::Hamiltonian);
        let state = eigh(&point.rho)?.with_source(SpectrumSource::Density);
        Self::with_spectra(point, energy, state, opts)
    }

    /// Uses caller-supplied eigendecompositions (e.g. continuity-tracked or
    /// re-phased). They must decompose the point's `H` and `ρ`.
    pub fn with_spectra(
        point: &'a TrajectoryPoint,
        energy: SpectralDecomposition,
        state: SpectralDecomposition,
        opts: AnalysisOptions,
    ) -> Result<Self, ThermoError> {
        let dim = point.dim();
        for spec in [&energy, &state] {
            if spec.dim() != dim {
                return Err(LinalgError::DimensionMismatch {
                    left: dim,
                    right: spec.dim(),
                }
                .into());
            }
            if spec.basis() != point.rho.basis() {
                return Err(LinalgError::BasisMismatch {
                    left: point.rho.basis().clone(),
                    right: spec.basis().clone(),
                }
                .into());
            }
        }
        let coherence = CoherenceMatrix::new(&energy, &state)?;
        let e = energy.values();
        let scale = if dim == 0 {
            1.0
        } else {
            let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
            (hi - lo).max(1.0)
        };

        let vn = energy.vectors();
        let vk = state.vectors();
        let h_dot_nb = sandwich(vn, point.h_dot.entries());
        let rho_nb = sandwich(vn, point.rho.entries());
        let rho_dot_nb = sandwich(vn, point.rho_dot.entries());
        let rho_dot_kb = sandwich(vk, point.rho_dot.entries());
        let h_kb = sandwich(vk, point.hamiltonian.entries());
        let h_dot_kb = sandwich(vk, point.h_dot.entries());

        let n_dot = perturbative_derivative(
            energy.values(),
            &h_dot_nb,
            opts.eps_deg * scale,
            opts.eps_num * scale,
            SpectrumKind::Hamiltonian,
        );
        let k_dot = perturbative_derivative(
            state.values(),
            &rho_dot_kb,
            opts.eps_deg,
            opts.eps_num,
            SpectrumKind::Density,
        );

        Ok(Self {
            point,
            opts,
            energy,
            state,
            coherence,
            scale,
            h_dot_nb,
            rho_nb,
            rho_dot_nb,
            rho_dot_kb,
            h_kb,
            h_dot_kb,
            n_dot,
            k_dot,
        })
    }

    pub fn point(&self) -> &TrajectoryPoint {
        self.point
    }

    pub fn energy(&self) -> &SpectralDecomposition {
        &self.energy
    }

    pub fn state(&self) -> &SpectralDecomposition {
        &self.state
    }

    pub fn coherence(&self) -> &CoherenceMatrix {
        &self.coherence
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn n_dot(&self) -> Result<&CMatrix, ThermoError> {
        self.n_dot.as_ref().map_err(Clone::clone)
    }

    fn k_dot(&self) -> Result<&CMatrix, ThermoError> {
        self.k_dot.as_ref().map_err(Clone::clone)
    }

    fn dim(&self) -> usize {
        self.energy.dim()
    }

    /// `Ė_n = ⟨n|Ḣ|n⟩`.
    pub fn energy_rates(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.h_dot_nb[(n, n)].re).collect()
    }

    /// `Ṗ_k = ⟨k|ρ̇|k⟩`.
    pub fn occupation_rates(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.rho_dot_kb[(k, k)].re).collect()
    }

    pub fn internal_energy(&self) -> Result<f64, ThermoError> {
        real_trace(self.point.rho.entries(), self.point.hamiltonian.entries())
    }

    pub fn power_total(&self) -> Result<f64, ThermoError> {
        real_trace(self.point.rho.entries(), self.point.h_dot.entries())
    }

    pub fn heat_total(&self) -> Result<f64, ThermoError> {
        real_trace(self.point.rho_dot.entries(), self.point.hamiltonian.entries())
    }

    /// `(Ẇ_d, Ẇ_c)`.
    pub fn decompose_power(&self) -> Result<(f64, f64), ThermoError> {
        let n_dot = self.n_dot()?;
        let c = self.coherence.entries();
        let e = self.energy.values();
        let p = self.state.values();
        let e_dot = self.energy_rates();
        // ⟨k|ṅ⟩, indexed [k, n].
        let k_ndot = c.adjoint() * n_dot;
        let mut diagonal = 0.0;
        let mut coherent = 0.0;
        for n in 0..self.dim() {
            for k in 0..self.dim() {
                let cnk = c[(n, k)];
                diagonal += p[k] * e_dot[n] * cnk.norm_sqr();
                coherent += p[k] * e[n] * 2.0 * (k_ndot[(k, n)] * cnk).re;
            }
        }
        Ok((diagonal, coherent))
    }

    /// `(Q̇_d, Q̇_c)`.
    pub fn decompose_heat(&self) -> Result<(f64, f64), ThermoError> {
        let k_dot = self.k_dot()?;
        let c = self.coherence.entries();
        let e = self.energy.values();
        let p = self.state.values();
        let p_dot = self.occupation_rates();
        // ⟨n|k̇⟩, indexed [n, k].
        let n_kdot = c * k_dot;
        let mut diagonal = 0.0;
        let mut coherent = 0.0;
        for n in 0..self.dim() {
            for k in 0..self.dim() {
                let cnk = c[(n, k)];
                diagonal += p_dot[k] * e[n] * cnk.norm_sqr();
                coherent += p[k] * e[n] * 2.0 * (n_kdot[(n, k)].conj() * cnk).re;
            }
        }
        Ok((diagonal, coherent))
    }

    /// Power and heat in the energy representation,
    /// `Ẇ = Σ ρ_nn Ė_n + Σ_{n≠n′} ρ_nn′⟨n′|Ḣ|n⟩` and
    /// `Q̇ = Σ (dρ_nn/dt) E_n − Σ_{n≠n′} ρ_nn′⟨n′|Ḣ|n⟩`, where `dρ_nn/dt`
    /// is the derivative of `⟨n|ρ|n⟩` along the moving eigenbasis.
    pub fn energy_basis_rates(&self) -> Result<(f64, f64), ThermoError> {
        let n_dot = self.n_dot()?;
        let e = self.energy.values();
        let e_dot = self.energy_rates();
        let d = self.dim();
        let mut populations = 0.0;
        let mut transitions = 0.0;
        let mut moving_populations = 0.0;
        for n in 0..d {
            populations += self.rho_nb[(n, n)].re * e_dot[n];
            let mut rho_ndot = Complex64::new(0.0, 0.0);
            for m in 0..d {
                rho_ndot += self.rho_nb[(n, m)] * n_dot[(m, n)];
                if m != n {
                    transitions += (self.rho_nb[(n, m)] * self.h_dot_nb[(m, n)]).re;
                }
            }
            let drho_nn = self.rho_dot_nb[(n, n)].re + 2.0 * rho_ndot.re;
            moving_populations += drho_nn * e[n];
        }
        Ok((populations + transitions, moving_populations - transitions))
    }

    /// `Ṡ = −kB Σ Ṗ_k ln P_k`; eigenvalues at or below `SINGULAR_P` that are
    /// not moving contribute zero.
    pub fn entropy_rate(&self) -> Result<f64, ThermoError> {
        let mut acc = 0.0;
        for (k, (&p, p_dot)) in self
            .state
            .values()
            .iter()
            .zip(self.occupation_rates())
            .enumerate()
        {
            if p <= SINGULAR_P {
                if p_dot.abs() > SINGULAR_PDOT {
                    return Err(ThermoError::SingularState {
                        index: k,
                        value: p,
                        rate: p_dot,
                    });
                }
                continue;
            }
            acc -= p_dot * p.ln();
        }
        Ok(self.opts.kb * acc)
    }

    pub fn entropy(&self) -> f64 {
        self.opts.kb * entropy_of_probabilities(self.state.values())
    }

    /// `d c_nk / dt = ⟨ṅ|k⟩ + ⟨n|k̇⟩`.
    fn coherence_dot(&self) -> Result<CMatrix, ThermoError> {
        let c = self.coherence.entries();
        Ok(self.n_dot()?.adjoint() * c + c * self.k_dot()?)
    }

    fn weight_rates(&self) -> Result<nalgebra::DMatrix<f64>, ThermoError> {
        let c = self.coherence.entries();
        let c_dot = self.coherence_dot()?;
        Ok(c.zip_map(&c_dot, |z, dz| 2.0 * (z.conj() * dz).re))
    }

    /// `(𝒬̇, 𝒲̇) = (Σ E_n |c_nk|² Ṗ_k, Σ P_k d(E_n |c_nk|²)/dt)`.
    pub fn ref16_rates(&self) -> Result<(f64, f64), ThermoError> {
        let weights_dot = self.weight_rates()?;
        let weights = self.coherence.weights();
        let e = self.energy.values();
        let e_dot = self.energy_rates();
        let p = self.state.values();
        let p_dot = self.occupation_rates();
        let heat: f64 = (0..self.dim()).map(|k| p_dot[k] * self.h_kb[(k, k)].re).sum();
        let mut work = 0.0;
        for n in 0..self.dim() {
            for k in 0..self.dim() {
                work += p[k] * (e_dot[n] * weights[(n, k)] + e[n] * weights_dot[(n, k)]);
            }
        }
        Ok((heat, work))
    }

    /// `Σ P_k E_n d|c_nk|²/dt`, the rate of change of the coherence energy.
    pub fn coherence_energy_rate(&self) -> Result<f64, ThermoError> {
        let weights_dot = self.weight_rates()?;
        let e = self.energy.values();
        let p = self.state.values();
        let mut acc = 0.0;
        for n in 0..self.dim() {
            for k in 0..self.dim() {
                acc += p[k] * e[n] * weights_dot[(n, k)];
            }
        }
        Ok(acc)
    }

    /// Difference between `Tr[ρḢ]`, `Tr[ρ̇H]` expanded in the `ρ` eigenbasis
    /// and in the `H` eigenbasis.
    pub fn trace_basis_residual(&self) -> f64 {
        let d = self.dim();
        let p = self.state.values();
        let e = self.energy.values();
        let power_k: f64 = (0..d).map(|k| p[k] * self.h_dot_kb[(k, k)].re).sum();
        let heat_n: f64 = (0..d).map(|n| e[n] * self.rho_dot_nb[(n, n)].re).sum();
        let mut power_n = 0.0;
        let mut heat_k = 0.0;
        for a in 0..d {
            for b in 0..d {
                power_n += (self.rho_nb[(a, b)] * self.h_dot_nb[(b, a)]).re;
                heat_k += (self.rho_dot_kb[(a, b)] * self.h_kb[(b, a)]).re;
            }
        }
        (power_k - power_n).abs().max((heat_k - heat_n).abs())
    }

    /// All rates and residuals for the point.
    pub fn rates(&self) -> Result<ThermoRates, ThermoError> {
        let internal_energy = self.internal_energy()?;
        let power = self.power_total()?;
        let heat = self.heat_total()?;
        let du_dt = power + heat;
        let (w_d_rate, w_c_rate) = self.decompose_power()?;
        let (q_d_rate, q_c_rate) = self.decompose_heat()?;
        let entropy_rate = match self.entropy_rate() {
            Ok(v) => Some(v),
            Err(ThermoError::SingularState { .. }) => None,
            Err(e) => return Err(e),
        };
        let (ref16_q_rate, ref16_w_rate) = self.ref16_rates()?;
        let (eq10_power, eq11_heat) = self.energy_basis_rates()?;
        let coherence_energy_rate = self.coherence_energy_rate()?;
        let max_p_dot = self
            .occupation_rates()
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        Ok(ThermoRates {
            t: self.point.t,
            internal_energy,
            entropy: self.entropy(),
            power,
            heat,
            du_dt,
            w_d_rate,
            w_c_rate,
            q_d_rate,
            q_c_rate,
            entropy_rate,
            ref16_q_rate,
            ref16_w_rate,
            eq10_power,
            eq11_heat,
            coherence_energy_rate,
            max_p_dot,
            trace_basis_residual: self.trace_basis_residual(),
            residual_power: (w_d_rate + w_c_rate - power).abs(),
            residual_heat: (q_d_rate + q_c_rate - heat).abs(),
            residual_first_law: (du_dt - (w_d_rate + w_c_rate + q_d_rate + q_c_rate)).abs(),
            scale: self.scale,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{emission_point, spin_point, EmissionParams, SpinPrecessionParams};
    use crate::hermitian::{Basis, DensityMatrix, HermitianOperator};

    #[test]
    fn emission_at_start() {
        let p = EmissionParams::default_scenario();
        let point = emission_point(&p, 0.0).unwrap();
        let a = PointAnalysis::new(&point, AnalysisOptions::default()).unwrap();
        assert!((a.internal_energy().unwrap() - 0.5).abs() < 1e-15);
        assert!((a.heat_total().unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(a.power_total().unwrap(), 0.0);
        for w in a.coherence().weights().iter() {
            assert!((w - 0.5).abs() < 1e-14);
        }
        assert_eq!(a.decompose_power().unwrap(), (0.0, 0.0));
        let (q_d, q_c) = a.decompose_heat().unwrap();
        assert!((q_d + q_c + 0.5).abs() < 1e-14);
        // Pure state with a moving empty level.
        assert!(matches!(a.entropy_rate(), Err(ThermoError::SingularState { .. })));
        assert!(a.rates().unwrap().entropy_rate.is_none());
    }

    #[test]
    fn commuting_aligned_operators_give_identity_overlaps() {
        let b = Basis::indexed(3);
        let h = HermitianOperator::from_real_diagonal(&[3.0, 1.0, -2.0], b.clone()).unwrap();
        let rho = HermitianOperator::from_real_diagonal(&[0.6, 0.3, 0.1], b.clone()).unwrap();
        let rho = crate::hermitian::validate_density(rho).unwrap();
        let z = HermitianOperator::zero(b);
        let point = TrajectoryPoint::new(0.0, rho, h, z.clone(), z).unwrap();
        let a = PointAnalysis::new(&point, AnalysisOptions::default()).unwrap();
        let id = CMatrix::identity(3, 3);
        assert!(max_abs(&(a.coherence().entries() - id)) < 1e-15);
        assert_eq!(a.coherence().gauge_tag(), (Gauge::LargestComponent, Gauge::LargestComponent));
    }

    #[test]
    fn spin_precession_point() {
        let p = SpinPrecessionParams::default_scenario();
        let point = spin_point(&p, 0.9).unwrap();
        let r = PointAnalysis::new(&point, AnalysisOptions::default())
            .unwrap()
            .rates()
            .unwrap();
        assert_eq!(r.w_d_rate, 0.0);
        assert!((r.w_c_rate - r.power).abs() < 1e-14);
        assert!(r.q_d_rate.abs() < 1e-14 && r.q_c_rate.abs() < 1e-14);
        assert!(r.entropy_rate.unwrap().abs() < 1e-14);
        assert!((r.coherence_energy_rate - r.w_c_rate).abs() < 1e-14);
    }

    #[test]
    fn degenerate_hamiltonian_with_coupling_is_rejected() {
        let b = Basis::indexed(2);
        let h = HermitianOperator::identity(b.clone());
        let mut h_dot = CMatrix::zeros(2, 2);
        h_dot[(0, 1)] = Complex64::new(0.3, 0.0);
        h_dot[(1, 0)] = Complex64::new(0.3, 0.0);
        let h_dot = HermitianOperator::new(h_dot, b.clone()).unwrap();
        let rho = DensityMatrix::pure(&[Complex64::new(0.8, 0.0), Complex64::new(0.6, 0.0)], b.clone()).unwrap();
        let point = TrajectoryPoint::new(0.0, rho, h, HermitianOperator::zero(b), h_dot).unwrap();
        let a = PointAnalysis::new(&point, AnalysisOptions::default()).unwrap();
        assert!(matches!(
            a.decompose_power(),
            Err(ThermoError::DegenerateSpectrum { kind: SpectrumKind::Hamiltonian, .. })
        ));
        // Heat does not need Hamiltonian eigenvector derivatives.
        assert!(a.decompose_heat().is_ok());
    }

    #[test]
    fn degenerate_pair_without_coupling_contributes_zero() {
        let b = Basis::indexed(2);
        let rho = DensityMatrix::maximally_mixed(b.clone());
        let h = HermitianOperator::from_real_diagonal(&[1.0, -1.0], b.clone()).unwrap();
        let z = HermitianOperator::zero(b);
        let point = TrajectoryPoint::new(0.0, rho, h, z.clone(), z).unwrap();
        let r = PointAnalysis::new(&point, AnalysisOptions::default())
            .unwrap()
            .rates()
            .unwrap();
        assert_eq!((r.q_d_rate, r.q_c_rate), (0.0, 0.0));
        assert_eq!(r.entropy_rate, Some(0.0));
    }
}
