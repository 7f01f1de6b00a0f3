//! Scalar cost metrics: measurement counts, sector-projected commutator
//! norms, spectral ranges and descriptors, Trotter steps and gate counts.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QresError, Result};
use crate::fermion_frag::FermionFragmentSet;
use crate::linalg::{extremal_eigenvalues, spectral_norm, SectorBasis, SparseOperator};
use crate::pauli::{variance, PauliPolynomial};
use crate::pauli_frag::{GateCount, PauliFragmentSet};
use crate::states::{SymmetrySector, WaveVector};

/// Partitioning or decomposition method a report refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FcSi,
    AcSi,
    Lr,
    LrF3,
    LrLcu,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::FcSi => "fc-si",
            Method::AcSi => "ac-si",
            Method::Lr => "lr",
            Method::LrF3 => "lr-f3",
            Method::LrLcu => "lr-lcu",
        }
    }
}

/// Gate counts averaged over fragments.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct GateAverages {
    pub one_qubit: f64,
    pub two_qubit: f64,
    pub depth: f64,
}

impl GateAverages {
    fn of(counts: &[GateCount]) -> Self {
        if counts.is_empty() {
            return GateAverages::default();
        }
        let n = counts.len() as f64;
        GateAverages {
            one_qubit: counts.iter().map(|c| c.one_qubit as f64).sum::<f64>() / n,
            two_qubit: counts.iter().map(|c| c.two_qubit as f64).sum::<f64>() / n,
            depth: counts.iter().map(|c| c.depth as f64).sum::<f64>() / n,
        }
    }
}

/// `(C, S_L, β)` of a fragment set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Descriptors {
    pub c: f64,
    pub s_l: f64,
    pub beta: f64,
}

/// First-order Trotter step estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrotterEstimate {
    pub n_steps: u64,
    /// Evolution time `π / (3 ‖H‖_Δ)`.
    pub tau: f64,
    /// Error bound `κ_Q τ / N_s` at the chosen step count.
    pub error_bound: f64,
}

/// One analysis cell. Absent fields were not computed for this method.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CostReport {
    pub method: Option<Method>,
    pub molecule: String,
    pub geometry: String,
    pub m_eps: Option<f64>,
    pub epsilon: Option<f64>,
    pub kappa_q: Option<f64>,
    pub lambda: Option<f64>,
    pub n_unitaries: Option<usize>,
    pub n_fragments: Option<usize>,
    pub half_spectral_range: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[serde(rename = "S_L")]
    pub s_l: Option<f64>,
    pub beta: Option<f64>,
    pub gate_counts: Option<GateAverages>,
    pub trotter: Option<TrotterEstimate>,
    pub shift: Option<crate::fermion_frag::SymmetryShift>,
    pub units: BTreeMap<&'static str, &'static str>,
}

impl CostReport {
    pub fn new(method: Method, molecule: &str, geometry: &str) -> Self {
        let units = [
            ("m_eps", "measurements"),
            ("epsilon", "hartree"),
            ("kappa_q", "hartree^2"),
            ("lambda", "hartree"),
            ("n_unitaries", "count"),
            ("n_fragments", "count"),
            ("half_spectral_range", "hartree"),
            ("C", "hartree"),
            ("S_L", "dimensionless"),
            ("beta", "hartree^2"),
            ("gate_counts", "gates per fragment"),
            ("trotter.n_steps", "count"),
            ("trotter.tau", "hartree^-1"),
            ("trotter.error_bound", "hartree"),
            ("shift", "hartree"),
        ]
        .into_iter()
        .collect();
        CostReport {
            method: Some(method),
            molecule: molecule.to_string(),
            geometry: geometry.to_string(),
            units,
            ..Default::default()
        }
    }

    pub fn set_descriptors(&mut self, d: Descriptors) {
        self.c = Some(d.c);
        self.s_l = Some(d.s_l);
        self.beta = Some(d.beta);
    }

    /// Checks the algebraic relations between the filled-in fields.
    pub fn check(&self) -> Result<()> {
        if let (Some(c), Some(s), Some(b)) = (self.c, self.s_l, self.beta) {
            if (b - 0.5 * c * c * s).abs() > 1e-9 * b.abs().max(1.0) {
                return Err(QresError::Consistency(format!("beta {b} differs from C^2 S_L / 2")));
            }
            let bound = self.n_fragments.map_or(1.0, |n| 1.0 - 1.0 / n.max(1) as f64);
            if !(-1e-12..=bound + 1e-12).contains(&s) {
                return Err(QresError::Consistency(format!("S_L = {s} outside [0, {bound}]")));
            }
        }
        if let (Some(l), Some(h)) = (self.lambda, self.half_spectral_range) {
            if l < h - 1e-9 {
                return Err(QresError::Consistency(format!("lambda {l} below half spectral range {h}")));
            }
        }
        Ok(())
    }
}

/// `M = ε⁻² [Σ_α sqrt(Var_proxy(H_α))]²`.
pub fn measurement_count(fragments: &[PauliPolynomial], proxy: &WaveVector, epsilon: f64) -> Result<f64> {
    if epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(QresError::Argument(format!("epsilon must be positive, got {epsilon}")));
    }
    let sigmas: Vec<f64> =
        fragments.par_iter().map(|f| variance(f, proxy).map(f64::sqrt)).collect::<Result<_>>()?;
    let total: f64 = sigmas.iter().sum();
    Ok(total * total / (epsilon * epsilon))
}

/// Sector basis for fragment-level quantities. Fragments must commute with
/// the Pauli generators; they need not conserve electron number, in which
/// case operators are compressed onto the sector (`P A P`).
fn sector_operators(fragments: &[PauliPolynomial], sector: &SymmetrySector) -> Result<SectorBasis> {
    let n = fragments.first().map(PauliPolynomial::n_qubits).unwrap_or(0);
    for f in fragments {
        if f.n_qubits() != n {
            return Err(QresError::Dimension("fragments act on different qubit counts".into()));
        }
        sector.check_generators(f)?;
    }
    sector.basis(n)
}

/// `κ_Q = Σ_{α<β} ‖P [H_α, H_β] P‖` over unordered fragment pairs, with `P`
/// the sector projector.
pub fn kappa_q(fragments: &[PauliPolynomial], sector: &SymmetrySector) -> Result<f64> {
    if fragments.is_empty() {
        return Err(QresError::Argument("no fragments".into()));
    }
    let basis = sector_operators(fragments, sector)?;
    let pairs: Vec<(usize, usize)> =
        (0..fragments.len()).flat_map(|a| (a + 1..fragments.len()).map(move |b| (a, b))).collect();
    let norms: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let comm = fragments[a].commutator(&fragments[b])?;
            if comm.is_empty() {
                return Ok(0.0);
            }
            spectral_norm(SparseOperator::from_complex(&comm, &basis), true)
        })
        .collect::<Result<_>>()?;
    Ok(norms.iter().sum())
}

/// κ over the full Hilbert space.
pub fn kappa_full(fragments: &[PauliPolynomial]) -> Result<f64> {
    kappa_q(fragments, &SymmetrySector::default())
}

/// Spectral range `E_max - E_min` of each fragment within the sector.
pub fn fragment_ranges(fragments: &[PauliPolynomial], sector: &SymmetrySector) -> Result<Vec<f64>> {
    let basis = sector_operators(fragments, sector)?;
    fragments
        .par_iter()
        .map(|f| {
            let f = f.without_constant();
            if f.is_empty() {
                return Ok(0.0);
            }
            let (lo, hi) = extremal_eigenvalues(&SparseOperator::from_polynomial(&f, &basis))?;
            Ok(hi - lo)
        })
        .collect()
}

/// `C = Σ ΔE_k`, `S_L = 1 - Σ ω_k²`, `β = Σ_{i>j} ΔE_i ΔE_j` with
/// `ΔE_k` the half spectral range of fragment `k` in the sector.
pub fn spectral_descriptors(fragments: &[PauliPolynomial], sector: &SymmetrySector) -> Result<Descriptors> {
    let half: Vec<f64> = fragment_ranges(fragments, sector)?.into_iter().map(|r| 0.5 * r).collect();
    Ok(descriptors_from_ranges(&half))
}

pub fn descriptors_from_ranges(ranges: &[f64]) -> Descriptors {
    let c: f64 = ranges.iter().sum();
    if c <= 0.0 {
        return Descriptors { c, s_l: 0.0, beta: 0.0 };
    }
    let s_l = 1.0 - ranges.iter().map(|r| (r / c).powi(2)).sum::<f64>();
    Descriptors { c, s_l, beta: 0.5 * c * c * s_l }
}

/// `(E_max - E_min) / 2`, over the full space unless a sector is given.
pub fn half_spectral_range(h: &PauliPolynomial, sector: Option<&SymmetrySector>) -> Result<f64> {
    let basis = match sector {
        Some(s) => {
            s.check_commutes(h)?;
            s.basis(h.n_qubits())?
        }
        None => SectorBasis::full(h.n_qubits()),
    };
    let (lo, hi) = extremal_eigenvalues(&SparseOperator::from_polynomial(h, &basis))?;
    Ok(0.5 * (hi - lo))
}

/// `N_s = ceil(κ_Q / (ε p₀))` with `τ = π / (3 ‖H‖_Δ)`.
///
/// `spectral_range` is `‖H‖_Δ = E_max - E_0`. A vanishing `κ_Q` needs a
/// single step.
pub fn trotter_steps(kappa_q: f64, epsilon: f64, p0: f64, spectral_range: f64) -> Result<TrotterEstimate> {
    if kappa_q < 0.0 || epsilon <= 0.0 || spectral_range <= 0.0 || !(p0 > 0.0 && p0 <= 1.0) {
        return Err(QresError::Argument(format!(
            "invalid Trotter inputs: kappa {kappa_q}, epsilon {epsilon}, p0 {p0}, range {spectral_range}"
        )));
    }
    let tau = std::f64::consts::PI / (3.0 * spectral_range);
    let n_steps = ((kappa_q / (epsilon * p0)).ceil() as u64).max(1);
    Ok(TrotterEstimate { n_steps, tau, error_bound: kappa_q * tau / n_steps as f64 })
}

/// Average Clifford diagonalizer cost of a Pauli fragment set.
pub fn pauli_circuit_cost(set: &PauliFragmentSet) -> Result<GateAverages> {
    let counts: Vec<GateCount> = set
        .fragments
        .iter()
        .map(|f| {
            f.diagonalizer
                .as_ref()
                .map(|c| c.gate_count())
                .ok_or_else(|| QresError::State("fragment has no diagonalizer".into()))
        })
        .collect::<Result<_>>()?;
    Ok(GateAverages::of(&counts))
}

/// Gate count of one Givens network: each rotation on `(p, q)` is
/// two-qubit, one-qubit on each, two-qubit.
pub fn givens_gate_count(n: usize, rotations: &[crate::fermion_frag::GivensRotation]) -> GateCount {
    let gates: Vec<Vec<usize>> = rotations
        .iter()
        .flat_map(|g| [vec![g.p, g.q], vec![g.p], vec![g.q], vec![g.p, g.q]])
        .collect();
    GateCount::of_layers(n, gates.iter().map(Vec::as_slice))
}

/// Average orbital-rotation cost of a fermionic fragment set.
pub fn givens_circuit_cost(set: &FermionFragmentSet) -> Result<GateAverages> {
    let counts: Vec<GateCount> = set
        .fragments
        .iter()
        .map(|f| Ok(givens_gate_count(set.n_spin_orbitals, &f.givens()?.rotations)))
        .collect::<Result<_>>()?;
    Ok(GateAverages::of(&counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliProduct;
    use crate::pauli_frag::{sorted_insertion, FragmentKind};
    use num_complex::Complex64;

    fn poly(terms: &[(&str, f64)]) -> PauliPolynomial {
        let n = terms[0].0.len();
        PauliPolynomial::from_terms(n, terms.iter().map(|(l, c)| (PauliProduct::parse(l).unwrap().key(), *c)))
    }

    #[test]
    fn single_fragment_count() {
        let h = poly(&[("X", 1.0)]);
        let psi = WaveVector::basis_state(1, 0);
        // Var(X) on |0> is 1
        assert!((measurement_count(std::slice::from_ref(&h), &psi, 0.1).unwrap() - 100.0).abs() < 1e-9);
        assert!(matches!(measurement_count(std::slice::from_ref(&h), &psi, 0.0), Err(QresError::Argument(_))));
        let bad = WaveVector::from_dense(1, &[Complex64::new(2.0, 0.0), Complex64::default()]);
        assert!(matches!(measurement_count(&[h], &bad, 0.1), Err(QresError::Normalization(_))));
    }

    #[test]
    fn two_fragment_count_matches_allocation() {
        // Var = 1 and 4 on |0>
        let a = poly(&[("XI", 1.0)]);
        let b = poly(&[("IX", 2.0)]);
        let psi = WaveVector::basis_state(2, 0);
        let m = measurement_count(&[a, b], &psi, 1.0).unwrap();
        assert!((m - 9.0).abs() < 1e-12);
        // best integer split of m shots: error Σ v_i/m_i; shots needed for ε = 1
        // approach (Σ σ_i)² as the total grows
        let shots = 9000usize;
        let best = (1..shots).map(|m1| 1.0 / m1 as f64 + 4.0 / (shots - m1) as f64).fold(f64::INFINITY, f64::min);
        assert!((best * shots as f64 - 9.0).abs() < 1e-3);
    }

    #[test]
    fn commuting_fragments_have_zero_kappa() {
        let f = vec![poly(&[("ZZ", 1.0)]), poly(&[("ZI", 0.5)]), poly(&[("IZ", 0.3)])];
        assert_eq!(kappa_full(&f).unwrap(), 0.0);
    }

    #[test]
    fn kappa_of_x_and_z() {
        // ‖[X, Z]‖ = ‖-2iY‖ = 2
        let f = vec![poly(&[("X", 1.0)]), poly(&[("Z", 1.0)])];
        assert!((kappa_full(&f).unwrap() - 2.0).abs() < 1e-12);
        let d = spectral_descriptors(&f, &SymmetrySector::default()).unwrap();
        assert!((d.c - 2.0).abs() < 1e-12 && (d.s_l - 0.5).abs() < 1e-12 && (d.beta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sector_generator_must_commute() {
        let f = vec![poly(&[("XI", 1.0)]), poly(&[("ZZ", 1.0)])];
        let sector = SymmetrySector::of_reference(vec![PauliProduct::parse("ZI").unwrap()], 0, None).unwrap();
        assert!(matches!(kappa_q(&f, &sector), Err(QresError::Symmetry(_))));
    }

    #[test]
    fn equal_ranges_entropy() {
        for n in 1..6 {
            let d = descriptors_from_ranges(&vec![0.7; n]);
            assert!((d.s_l - (1.0 - 1.0 / n as f64)).abs() < 1e-12);
            assert!((d.beta - 0.5 * d.c * d.c * d.s_l).abs() < 1e-12);
        }
    }

    #[test]
    fn half_range_of_z() {
        assert!((half_spectral_range(&poly(&[("Z", 1.0)]), None).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trotter_formula() {
        let t = trotter_steps(1.0, 1e-3, 1.0, 2.0).unwrap();
        assert_eq!(t.n_steps, 1000);
        assert_eq!(trotter_steps(1.0, 1e-3, 0.5, 2.0).unwrap().n_steps, 2000);
        assert!(matches!(trotter_steps(1.0, -1.0, 1.0, 1.0), Err(QresError::Argument(_))));
        assert!(matches!(trotter_steps(1.0, 1e-3, 0.0, 1.0), Err(QresError::Argument(_))));
    }

    #[test]
    fn gate_costs() {
        let h = poly(&[("ZZ", 1.0), ("ZI", 0.5)]);
        let set = sorted_insertion(&h, FragmentKind::Commuting);
        assert!(matches!(pauli_circuit_cost(&set), Err(QresError::State(_))));
        let avg = pauli_circuit_cost(&set.with_diagonalizers().unwrap()).unwrap();
        assert_eq!(avg, GateAverages::default());
        assert_eq!(givens_gate_count(4, &[]), GateCount::default());
    }

    #[test]
    fn report_consistency() {
        let mut r = CostReport::new(Method::FcSi, "h2", "eq");
        r.set_descriptors(descriptors_from_ranges(&[1.0, 2.0]));
        r.n_fragments = Some(2);
        r.check().unwrap();
        r.beta = Some(5.0);
        assert!(r.check().is_err());
    }
}
