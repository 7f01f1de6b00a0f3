//! Sorted-insertion grouping of Pauli terms and Clifford diagonalizers.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QresError, Result};
use crate::pauli::{PauliKey, PauliPolynomial};

type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FragmentKind {
    Commuting,
    Anticommuting,
}

/// Single Clifford gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Gate {
    H(usize),
    S(usize),
    Cnot(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) => vec![q],
            Gate::Cnot(c, t) => vec![c, t],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot(..))
    }

    /// `U P U†` for a signed Hermitian product `sign * P(key)`.
    pub fn conjugate(&self, key: PauliKey, negative: bool) -> (PauliKey, bool) {
        let PauliKey { mut x, mut z } = key;
        let mut neg = negative;
        match *self {
            Gate::H(q) => {
                let (xq, zq) = (x >> q & 1, z >> q & 1);
                neg ^= xq & zq == 1;
                x = (x & !(1 << q)) | (zq << q);
                z = (z & !(1 << q)) | (xq << q);
            }
            Gate::S(q) => {
                let (xq, zq) = (x >> q & 1, z >> q & 1);
                neg ^= xq & zq == 1;
                z ^= xq << q;
            }
            Gate::Cnot(c, t) => {
                let (xc, zc, xt, zt) = (x >> c & 1, z >> c & 1, x >> t & 1, z >> t & 1);
                neg ^= xc & zt & (xt ^ zc ^ 1) == 1;
                x ^= xc << t;
                z ^= zt << c;
            }
        }
        (PauliKey { x, z }, neg)
    }

    /// Applies the gate to a dense state vector.
    pub fn apply(&self, psi: &mut [C64]) {
        match *self {
            Gate::H(q) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for b in 0..psi.len() {
                    if b >> q & 1 == 0 {
                        let (a0, a1) = (psi[b], psi[b | 1 << q]);
                        psi[b] = (a0 + a1) * s;
                        psi[b | 1 << q] = (a0 - a1) * s;
                    }
                }
            }
            Gate::S(q) => {
                for (b, a) in psi.iter_mut().enumerate() {
                    if b >> q & 1 == 1 {
                        *a *= C64::new(0.0, 1.0);
                    }
                }
            }
            Gate::Cnot(c, t) => {
                for b in 0..psi.len() {
                    if b >> c & 1 == 1 && b >> t & 1 == 0 {
                        psi.swap(b, b | 1 << t);
                    }
                }
            }
        }
    }
}

/// Ordered list of Clifford gates on `n_qubits`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CliffordCircuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

/// One- and two-qubit gate counts and depth of a circuit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct GateCount {
    pub one_qubit: usize,
    pub two_qubit: usize,
    pub depth: usize,
}

impl GateCount {
    /// Greedy earliest-slot schedule over unit-time gates.
    pub fn of_layers<'a>(n_qubits: usize, gates: impl IntoIterator<Item = &'a [usize]>) -> Self {
        let mut busy = vec![0usize; n_qubits];
        let mut out = GateCount::default();
        for qs in gates {
            if qs.len() == 1 {
                out.one_qubit += 1;
            } else {
                out.two_qubit += 1;
            }
            let slot = qs.iter().map(|&q| busy[q]).max().unwrap_or(0) + 1;
            for &q in qs {
                busy[q] = slot;
            }
            out.depth = out.depth.max(slot);
        }
        out
    }
}

impl CliffordCircuit {
    pub fn new(n_qubits: usize) -> Self {
        CliffordCircuit { n_qubits, gates: Vec::new() }
    }

    /// Tableau conjugation `U P U†` of a signed product.
    pub fn conjugate(&self, key: PauliKey, negative: bool) -> (PauliKey, bool) {
        self.gates.iter().fold((key, negative), |(k, n), g| g.conjugate(k, n))
    }

    pub fn apply(&self, psi: &mut [C64]) {
        for g in &self.gates {
            g.apply(psi);
        }
    }

    pub fn gate_count(&self) -> GateCount {
        let qs: Vec<Vec<usize>> = self.gates.iter().map(Gate::qubits).collect();
        GateCount::of_layers(self.n_qubits, qs.iter().map(Vec::as_slice))
    }
}

/// A group of Pauli terms with a shared commutation structure.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliFragment {
    pub n_qubits: usize,
    pub members: Vec<(PauliKey, f64)>,
    pub kind: FragmentKind,
    pub diagonalizer: Option<CliffordCircuit>,
}

impl PauliFragment {
    pub fn polynomial(&self) -> PauliPolynomial {
        PauliPolynomial::from_terms(self.n_qubits, self.members.iter().copied())
    }

    /// `sqrt(Σ c²)`, the normalization making an anticommuting group unitary.
    pub fn l2_norm(&self) -> f64 {
        self.members.iter().map(|(_, c)| c * c).sum::<f64>().sqrt()
    }

    fn accepts(&self, key: PauliKey) -> bool {
        match self.kind {
            FragmentKind::Commuting => self.members.iter().all(|(m, _)| m.commutes_with(key)),
            FragmentKind::Anticommuting => self.members.iter().all(|(m, _)| !m.commutes_with(key)),
        }
    }
}

/// Pauli fragments plus the identity coefficient held aside.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliFragmentSet {
    pub n_qubits: usize,
    pub kind: FragmentKind,
    pub constant: f64,
    pub fragments: Vec<PauliFragment>,
}

impl PauliFragmentSet {
    pub fn polynomials(&self) -> Vec<PauliPolynomial> {
        self.fragments.iter().map(PauliFragment::polynomial).collect()
    }

    /// Sum of all fragments plus the constant.
    pub fn reconstruct(&self) -> PauliPolynomial {
        let mut p = PauliPolynomial::constant(self.n_qubits, self.constant);
        for f in &self.fragments {
            for &(k, c) in &f.members {
                p.add_term(k, c);
            }
        }
        p.simplify();
        p
    }

    /// Synthesizes diagonalizers for every commuting fragment.
    pub fn with_diagonalizers(mut self) -> Result<Self> {
        use rayon::prelude::*;
        let circuits: Result<Vec<_>> = self.fragments.par_iter().map(synthesize_diagonalizer).collect();
        for (f, c) in self.fragments.iter_mut().zip(circuits?) {
            f.diagonalizer = Some(c);
        }
        Ok(self)
    }
}

/// Magnitude bucket used for ordering: equal up to 1e-10 hartree counts as a tie.
fn magnitude_bucket(c: f64) -> i64 {
    (c.abs() * 1e10).round() as i64
}

/// Terms in insertion order: descending |c|, ties by `(z, x)` ascending.
pub fn insertion_order(h: &PauliPolynomial) -> Vec<(PauliKey, f64)> {
    let mut terms: Vec<(PauliKey, f64)> = h.non_identity_terms().collect();
    terms.sort_by(|a, b| magnitude_bucket(b.1).cmp(&magnitude_bucket(a.1)).then(a.0.cmp(&b.0)));
    terms
}

/// Greedy sorted insertion into commuting or anticommuting groups.
pub fn sorted_insertion(h: &PauliPolynomial, kind: FragmentKind) -> PauliFragmentSet {
    let mut fragments: Vec<PauliFragment> = Vec::new();
    for (k, c) in insertion_order(h) {
        match fragments.iter_mut().find(|f| f.accepts(k)) {
            Some(f) => f.members.push((k, c)),
            None => fragments.push(PauliFragment {
                n_qubits: h.n_qubits(),
                members: vec![(k, c)],
                kind,
                diagonalizer: None,
            }),
        }
    }
    PauliFragmentSet { n_qubits: h.n_qubits(), kind, constant: h.constant_term(), fragments }
}

/// Independent rows (as symplectic keys) spanning the members' group.
fn independent_generators(members: &[(PauliKey, f64)], n: usize) -> Vec<PauliKey> {
    let mut basis: Vec<(u128, PauliKey)> = Vec::new();
    for &(k, _) in members {
        let mut v = (k.x as u128) | ((k.z as u128) << n);
        for &(b, _) in &basis {
            let lead = 127 - b.leading_zeros();
            if v >> lead & 1 == 1 {
                v ^= b;
            }
        }
        if v != 0 {
            basis.push((v, k));
            basis.sort_by_key(|b| std::cmp::Reverse(b.0));
        }
    }
    basis.into_iter().map(|(_, k)| k).collect()
}

/// Clifford circuit rotating every member of a commuting fragment to a Z string.
pub fn synthesize_diagonalizer(frag: &PauliFragment) -> Result<CliffordCircuit> {
    let n = frag.n_qubits;
    for (i, (a, _)) in frag.members.iter().enumerate() {
        if frag.members[i + 1..].iter().any(|(b, _)| !a.commutes_with(*b)) {
            return Err(QresError::Kind("fragment members do not all commute".into()));
        }
    }
    let mut circuit = CliffordCircuit::new(n);
    if frag.members.iter().all(|(k, _)| k.x == 0) {
        return Ok(circuit);
    }
    let mut gens = independent_generators(&frag.members, n);
    let mut pivots: Vec<usize> = Vec::new();
    let push = |g: Gate, gens: &mut Vec<PauliKey>, circuit: &mut CliffordCircuit| {
        for k in gens.iter_mut() {
            *k = g.conjugate(*k, false).0;
        }
        circuit.gates.push(g);
    };
    for i in 0..gens.len() {
        // strip support on earlier pivots (each earlier generator is Z_pivot)
        let pivot_mask: u64 = pivots.iter().map(|&p| 1u64 << p).sum();
        let g = PauliKey { x: gens[i].x, z: gens[i].z & !pivot_mask };
        debug_assert_eq!(g.x & pivot_mask, 0);
        let q;
        if g.x != 0 {
            q = g.x.trailing_zeros() as usize;
            if g.z >> q & 1 == 1 {
                push(Gate::S(q), &mut gens, &mut circuit);
            }
            let xs = gens[i].x;
            for r in (0..n).filter(|&r| r != q && xs >> r & 1 == 1) {
                push(Gate::Cnot(q, r), &mut gens, &mut circuit);
            }
            if gens[i].z >> q & 1 == 1 {
                push(Gate::S(q), &mut gens, &mut circuit);
            }
            push(Gate::H(q), &mut gens, &mut circuit);
        } else if g.z != 0 {
            q = g.z.trailing_zeros() as usize;
        } else {
            continue;
        }
        let z = gens[i].z & !pivot_mask;
        for r in (0..n).filter(|&r| r != q && z >> r & 1 == 1) {
            push(Gate::Cnot(r, q), &mut gens, &mut circuit);
        }
        pivots.push(q);
    }
    for &(k, _) in &frag.members {
        if circuit.conjugate(k, false).0.x != 0 {
            return Err(QresError::Consistency("diagonalizer failed to clear X support".into()));
        }
    }
    Ok(circuit)
}

/// LCU 1-norm `Σ_k sqrt(Σ_a c_a²)` and unitary count of an anticommuting grouping.
pub fn lcu_norm_ac(set: &PauliFragmentSet) -> Result<(f64, usize)> {
    if set.kind != FragmentKind::Anticommuting {
        return Err(QresError::Kind("LCU norm requires anticommuting fragments".into()));
    }
    Ok((set.fragments.iter().map(PauliFragment::l2_norm).sum(), set.fragments.len()))
}
