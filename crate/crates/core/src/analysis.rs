//! One molecule/geometry cell: loading, cached reference solutions and the
//! per-method cost reports shared by the CLI and the C interface.

use std::path::Path;
use std::sync::OnceLock;

use serde::Serialize;

use crate::costs::{
    givens_circuit_cost, half_spectral_range, kappa_q, measurement_count, pauli_circuit_cost, spectral_descriptors,
    trotter_steps, CostReport, GateAverages, Method,
};
use crate::error::{QresError, Result};
use crate::fermion_frag::{
    apply_symmetry_shift, apply_symmetry_shift_fermionic, f3_repartition, lcu_norm_lr, low_rank_decompose,
    lr_lcu_optimize, optimize_shift_ac, optimize_shift_lr, FermionFragmentSet, FluidResult, SymmetryShift, LR_TOL,
};
use crate::integrals::{assemble_fermionic_hamiltonian, parse_fcidump, FermionicOperator, SpinOrbitalIntegrals};
use crate::pauli::{jordan_wigner, PauliPolynomial};
use crate::pauli_frag::{lcu_norm_ac, sorted_insertion, FragmentKind, PauliFragmentSet};
use crate::states::{cisd_state, eigensolve, hf_index, hf_state, overlap_sum, CisdResult, SymmetrySector, WaveVector};

/// Exact eigenpairs kept for overlap sums.
const EXACT_ROOTS: usize = 10;

/// Hamiltonian of one cell with lazily computed reference solutions.
#[derive(Debug)]
pub struct Cell {
    pub molecule: String,
    pub geometry: String,
    pub integrals: Option<SpinOrbitalIntegrals>,
    pub fermionic: Option<FermionicOperator>,
    pub qubit: PauliPolynomial,
    pub n_electrons: Option<usize>,
    exact: OnceLock<Vec<(f64, WaveVector)>>,
    cisd: OnceLock<CisdResult>,
    low_rank: OnceLock<FermionFragmentSet>,
}

#[derive(serde::Deserialize)]
struct Sidecar {
    molecule: Option<String>,
    geometry: Option<String>,
}

impl Cell {
    pub fn from_integrals(molecule: &str, geometry: &str, ints: SpinOrbitalIntegrals) -> Result<Self> {
        let op = assemble_fermionic_hamiltonian(&ints);
        let qubit = jordan_wigner(&op)?;
        let ne = ints.n_electrons();
        Ok(Cell {
            molecule: molecule.into(),
            geometry: geometry.into(),
            integrals: Some(ints),
            fermionic: Some(op),
            qubit,
            n_electrons: Some(ne),
            exact: OnceLock::new(),
            cisd: OnceLock::new(),
            low_rank: OnceLock::new(),
        })
    }

    /// Qubit-only cell; fermionic methods are unavailable.
    pub fn from_pauli(molecule: &str, geometry: &str, qubit: PauliPolynomial, n_electrons: Option<usize>) -> Self {
        Cell {
            molecule: molecule.into(),
            geometry: geometry.into(),
            integrals: None,
            fermionic: None,
            qubit,
            n_electrons,
            exact: OnceLock::new(),
            cisd: OnceLock::new(),
            low_rank: OnceLock::new(),
        }
    }

    /// Loads an FCIDUMP file, or Pauli text (`coeff label` lines) when the
    /// extension is `.pauli`. Labels come from a sidecar `.json` with
    /// `molecule`/`geometry` keys when present, otherwise from the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("cell").to_string();
        let (mut molecule, mut geometry) = match stem.rsplit_once('_') {
            Some((m, g)) => (m.to_string(), g.to_string()),
            None => (stem.clone(), String::new()),
        };
        if let Ok(meta) = std::fs::read_to_string(path.with_extension("json")) {
            if let Ok(s) = serde_json::from_str::<Sidecar>(&meta) {
                molecule = s.molecule.unwrap_or(molecule);
                geometry = s.geometry.unwrap_or(geometry);
            }
        }
        if path.extension().is_some_and(|e| e == "pauli") {
            return Ok(Self::from_pauli(&molecule, &geometry, PauliPolynomial::parse_text(&text)?, None));
        }
        Self::from_integrals(&molecule, &geometry, parse_fcidump(&text)?)
    }

    pub fn n_qubits(&self) -> usize {
        self.qubit.n_qubits()
    }

    pub fn sector(&self) -> SymmetrySector {
        self.n_electrons.map(SymmetrySector::electrons).unwrap_or_default()
    }

    fn require_electrons(&self) -> Result<usize> {
        self.n_electrons.ok_or_else(|| QresError::Argument("electron count required (use --sector ne=<m>)".into()))
    }

    pub fn fermionic(&self) -> Result<&FermionicOperator> {
        self.fermionic.as_ref().ok_or_else(|| QresError::Argument("fermionic methods need FCIDUMP input".into()))
    }

    pub fn reference(&self) -> Result<WaveVector> {
        hf_state(self.n_qubits(), self.require_electrons()?)
    }

    /// Lowest eigenpairs in the electron-number sector (full space when the
    /// electron count is unknown).
    pub fn exact(&self) -> Result<&[(f64, WaveVector)]> {
        if let Some(e) = self.exact.get() {
            return Ok(e);
        }
        let sector = self.sector();
        let dim = sector.basis(self.n_qubits())?.dim();
        let pairs = eigensolve(&self.qubit, EXACT_ROOTS.min(dim), Some(&sector))?;
        Ok(self.exact.get_or_init(|| pairs))
    }

    pub fn ground_energy(&self) -> Result<f64> {
        Ok(self.exact()?[0].0)
    }

    /// Truncated CISD proxy of the ground state.
    pub fn cisd(&self) -> Result<&CisdResult> {
        if let Some(c) = self.cisd.get() {
            return Ok(c);
        }
        let e0 = self.ground_energy()?;
        let c = cisd_state(&self.qubit, &self.reference()?, Some(e0))?;
        Ok(self.cisd.get_or_init(|| c))
    }

    pub fn fc_si(&self) -> Result<PauliFragmentSet> {
        sorted_insertion(&self.qubit, FragmentKind::Commuting).with_diagonalizers()
    }

    pub fn ac_si(&self) -> PauliFragmentSet {
        sorted_insertion(&self.qubit, FragmentKind::Anticommuting)
    }

    pub fn low_rank(&self) -> Result<&FermionFragmentSet> {
        if let Some(s) = self.low_rank.get() {
            return Ok(s);
        }
        let s = low_rank_decompose(self.fermionic()?, LR_TOL)?;
        Ok(self.low_rank.get_or_init(|| s))
    }

    pub fn lr_f3(&self) -> Result<FluidResult> {
        f3_repartition(self.low_rank()?, &self.cisd()?.state)
    }

    pub fn lr_lcu(&self) -> Result<FluidResult> {
        Ok(lr_lcu_optimize(self.low_rank()?))
    }

    fn report(&self, method: Method) -> CostReport {
        CostReport::new(method, &self.molecule, &self.geometry)
    }

    /// `M(ε)` with the CISD proxy, plus fragment count and gate averages.
    pub fn measure_cost(&self, method: Method, epsilon: f64) -> Result<CostReport> {
        let proxy = &self.cisd()?.state;
        let (polys, gates, nf) = match method {
            Method::FcSi => {
                let set = self.fc_si()?;
                (set.polynomials(), pauli_circuit_cost(&set)?, set.fragments.len())
            }
            Method::LrF3 => {
                let set = self.lr_f3()?.set;
                (set.polynomials()?, givens_circuit_cost(&set)?, set.n_fragments())
            }
            Method::Lr => {
                let set = self.low_rank()?;
                (set.polynomials()?, givens_circuit_cost(set)?, set.n_fragments())
            }
            _ => return Err(QresError::Argument(format!("measure-cost does not support {}", method.label()))),
        };
        let mut r = self.report(method);
        r.epsilon = Some(epsilon);
        r.m_eps = Some(measurement_count(&polys, proxy, epsilon)?);
        r.n_fragments = Some(nf);
        r.gate_counts = Some(gates);
        r.check()?;
        Ok(r)
    }

    /// Fragments whose pairwise commutators define the Trotter cost.
    pub fn trotter_fragments(&self, method: Method) -> Result<(Vec<PauliPolynomial>, GateAverages)> {
        match method {
            Method::FcSi => {
                let set = self.fc_si()?;
                Ok((set.polynomials(), pauli_circuit_cost(&set)?))
            }
            Method::LrLcu => {
                let set = self.lr_lcu()?.set;
                Ok((set.polynomials()?, givens_circuit_cost(&set)?))
            }
            Method::Lr => {
                let set = self.low_rank()?;
                Ok((set.polynomials()?, givens_circuit_cost(set)?))
            }
            _ => Err(QresError::Argument(format!("trotter-cost does not support {}", method.label()))),
        }
    }

    /// Sector shared by all fragments of `method`: the reference's sector of
    /// the fragments' Z-type Pauli symmetries for qubit fragments, the
    /// electron count for fermionic ones.
    pub fn fragment_sector(&self, method: Method, fragments: &[PauliPolynomial]) -> Result<SymmetrySector> {
        match method {
            Method::FcSi | Method::AcSi => {
                SymmetrySector::of_fragments(fragments, hf_index(self.require_electrons()?))
            }
            _ => Ok(self.sector()),
        }
    }

    /// `κ_Q`, spectral descriptors and the first-order step count. `p0`
    /// defaults to the reference-state overlap sum.
    pub fn trotter_cost(&self, method: Method, epsilon: f64, p0: Option<f64>) -> Result<CostReport> {
        let (polys, gates) = self.trotter_fragments(method)?;
        let sector = self.fragment_sector(method, &polys)?;
        let kq = kappa_q(&polys, &sector)?;
        let d = spectral_descriptors(&polys, &sector)?;
        let half = half_spectral_range(&self.qubit, None)?;
        let p0 = match p0 {
            Some(p) => p,
            None => overlap_sum(&self.reference()?, self.exact()?, epsilon)?,
        };
        let mut r = self.report(method);
        r.epsilon = Some(epsilon);
        r.kappa_q = Some(kq);
        r.n_fragments = Some(polys.len());
        r.half_spectral_range = Some(half);
        r.set_descriptors(d);
        r.gate_counts = Some(gates);
        r.trotter = Some(trotter_steps(kq, epsilon, p0, 2.0 * half)?);
        r.check()?;
        Ok(r)
    }

    /// LCU 1-norm, unitary/fragment counts and `ΔE/2`, optionally after the
    /// optimal electron-number shift.
    pub fn lcu_cost(&self, method: Method, shift: bool) -> Result<CostReport> {
        let mut r = self.report(method);
        let mut applied = SymmetryShift::default();
        match method {
            Method::AcSi => {
                if shift {
                    applied = optimize_shift_ac(&self.qubit)?.shift;
                }
                let h = apply_symmetry_shift(&self.qubit, &applied)?;
                let (lambda, nu) = lcu_norm_ac(&sorted_insertion(&h, FragmentKind::Anticommuting))?;
                r.lambda = Some(lambda);
                r.n_unitaries = Some(nu);
                r.half_spectral_range = Some(half_spectral_range(&h, None)?);
            }
            Method::Lr | Method::LrLcu => {
                let op = self.fermionic()?;
                if shift {
                    applied = optimize_shift_lr(op, LR_TOL)?.shift;
                }
                let shifted = apply_symmetry_shift_fermionic(op, &applied);
                let set = low_rank_decompose(&shifted, LR_TOL)?;
                let (lambda, nf) = if method == Method::LrLcu {
                    let res = lr_lcu_optimize(&set);
                    (res.after, res.set.n_fragments())
                } else {
                    lcu_norm_lr(&set)
                };
                r.lambda = Some(lambda);
                r.n_fragments = Some(nf);
                r.half_spectral_range = Some(half_spectral_range(&jordan_wigner(&shifted)?, None)?);
            }
            _ => return Err(QresError::Argument(format!("lcu-cost does not support {}", method.label()))),
        }
        if shift {
            r.shift = Some(applied);
        }
        r.check()?;
        Ok(r)
    }

    /// Fragment statistics of a partitioning, optionally of the Hamiltonian
    /// after the method's optimal electron-number shift.
    pub fn partition(&self, method: Method, shift: bool) -> Result<PartitionReport> {
        let mut frags = Vec::new();
        let mut applied = None;
        let reconstruction;
        match method {
            Method::FcSi | Method::AcSi => {
                let mut h = self.qubit.clone();
                if shift {
                    let s = optimize_shift_ac(&self.qubit)?.shift;
                    h = apply_symmetry_shift(&self.qubit, &s)?;
                    applied = Some(s);
                }
                let set = if method == Method::FcSi {
                    sorted_insertion(&h, FragmentKind::Commuting).with_diagonalizers()?
                } else {
                    sorted_insertion(&h, FragmentKind::Anticommuting)
                };
                for f in &set.fragments {
                    let g = f.diagonalizer.as_ref().map(|c| c.gate_count());
                    frags.push(FragmentStats {
                        size: f.members.len(),
                        l1_norm: f.members.iter().map(|(_, c)| c.abs()).sum(),
                        l2_norm: f.l2_norm(),
                        givens_rotations: None,
                        one_qubit: g.map(|g| g.one_qubit),
                        two_qubit: g.map(|g| g.two_qubit),
                        depth: g.map(|g| g.depth),
                    });
                }
                reconstruction = set.reconstruct().minus(&h)?.one_norm();
            }
            Method::Lr | Method::LrF3 | Method::LrLcu => {
                let (h, set) = if shift {
                    let op = self.fermionic()?;
                    let s = optimize_shift_lr(op, LR_TOL)?.shift;
                    let shifted = apply_symmetry_shift_fermionic(op, &s);
                    applied = Some(s);
                    let lr = low_rank_decompose(&shifted, LR_TOL)?;
                    let set = match method {
                        Method::Lr => lr,
                        Method::LrF3 => f3_repartition(&lr, &self.cisd()?.state)?.set,
                        _ => lr_lcu_optimize(&lr).set,
                    };
                    (jordan_wigner(&shifted)?, set)
                } else {
                    let set = match method {
                        Method::Lr => self.low_rank()?.clone(),
                        Method::LrF3 => self.lr_f3()?.set,
                        _ => self.lr_lcu()?.set,
                    };
                    (self.qubit.clone(), set)
                };
                let polys = set.polynomials()?;
                for (f, p) in set.fragments.iter().zip(&polys) {
                    let net = f.givens()?;
                    let g = crate::costs::givens_gate_count(set.n_spin_orbitals, &net.rotations);
                    let p = p.without_constant();
                    frags.push(FragmentStats {
                        size: p.len(),
                        l1_norm: p.one_norm(),
                        l2_norm: p.terms().map(|(_, c)| c * c).sum::<f64>().sqrt(),
                        givens_rotations: Some(net.rotations.len()),
                        one_qubit: Some(g.one_qubit),
                        two_qubit: Some(g.two_qubit),
                        depth: Some(g.depth),
                    });
                }
                reconstruction = set.reconstruct()?.minus(&h)?.one_norm();
            }
        }
        Ok(PartitionReport {
            method,
            molecule: self.molecule.clone(),
            geometry: self.geometry.clone(),
            n_fragments: frags.len(),
            fragments: frags,
            reconstruction_error: reconstruction,
            shift: applied,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FragmentStats {
    /// Pauli terms in the fragment.
    pub size: usize,
    pub l1_norm: f64,
    pub l2_norm: f64,
    pub givens_rotations: Option<usize>,
    pub one_qubit: Option<usize>,
    pub two_qubit: Option<usize>,
    pub depth: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub method: Method,
    pub molecule: String,
    pub geometry: String,
    pub n_fragments: usize,
    pub fragments: Vec<FragmentStats>,
    /// 1-norm of `Σ fragments - H` in the Pauli basis.
    pub reconstruction_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<SymmetryShift>,
}
