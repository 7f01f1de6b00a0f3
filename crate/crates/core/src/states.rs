//! Reference and proxy wavefunctions, exact eigenpairs, symmetry sectors.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{QresError, Result};
use crate::linalg::{eigh, lowest_eigenpairs, EigenPair, SectorBasis, SparseOperator, DENSE_LIMIT};
use crate::pauli::{PauliKey, PauliPolynomial, PauliProduct};

type C64 = Complex64;

/// Squared norm retained when truncating the CISD proxy.
pub const CISD_KEEP: f64 = 0.9999;
/// Eigenvalues closer than this form one degenerate block.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Sparse amplitudes over computational basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveVector {
    n_qubits: usize,
    amps: BTreeMap<u64, C64>,
}

impl WaveVector {
    pub fn new(n_qubits: usize) -> Self {
        WaveVector { n_qubits, amps: BTreeMap::new() }
    }

    pub fn basis_state(n_qubits: usize, b: u64) -> Self {
        let mut w = Self::new(n_qubits);
        w.amps.insert(b, C64::new(1.0, 0.0));
        w
    }

    /// Builds from a dense `2^n` vector, dropping exact zeros.
    pub fn from_dense(n_qubits: usize, v: &[C64]) -> Self {
        let amps = v
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, a)| (i as u64, *a))
            .collect();
        WaveVector { n_qubits, amps }
    }

    /// Builds from amplitudes expressed in a sector basis.
    pub fn from_sector(basis: &SectorBasis, v: &[C64]) -> Self {
        let amps = basis
            .states()
            .iter()
            .zip(v)
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(&b, &a)| (b, a))
            .collect();
        WaveVector { n_qubits: basis.n_qubits(), amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, b: u64) -> C64 {
        self.amps.get(&b).copied().unwrap_or_default()
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = (u64, C64)> + '_ {
        self.amps.iter().map(|(&b, &a)| (b, a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(QresError::Normalization(0.0));
        }
        Ok(WaveVector { n_qubits: self.n_qubits, amps: self.amps.iter().map(|(&b, &a)| (b, a / n)).collect() })
    }

    pub fn to_dense(&self) -> Vec<C64> {
        let mut v = vec![C64::default(); 1usize << self.n_qubits];
        for (&b, &a) in &self.amps {
            v[b as usize] = a;
        }
        v
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &WaveVector) -> C64 {
        self.amps.iter().map(|(b, a)| a.conj() * other.amplitude(*b)).sum()
    }

    /// Lines of `index amplitude_re amplitude_im`.
    pub fn to_text(&self) -> String {
        self.amps.iter().map(|(b, a)| format!("{b} {:.16e} {:.16e}\n", a.re, a.im)).collect()
    }

    /// The single occupied basis state, if this is a computational basis state.
    pub fn as_basis_state(&self) -> Option<u64> {
        let mut it = self.amps.iter().filter(|(_, a)| a.norm_sqr() > 1e-24);
        let first = it.next()?;
        it.next().is_none().then_some(*first.0)
    }
}

/// Quantum numbers fixing a subspace: Z-type Pauli symmetries with their
/// ±1 eigenvalues and an optional electron count.
#[derive(Clone, Debug, Default)]
pub struct SymmetrySector {
    pub generators: Vec<PauliProduct>,
    pub eigenvalues: Vec<i8>,
    pub electron_count: Option<usize>,
}

impl SymmetrySector {
    pub fn electrons(n: usize) -> Self {
        SymmetrySector { electron_count: Some(n), ..Default::default() }
    }

    /// Sector of the reference state for the given Z-type generators.
    pub fn of_reference(generators: Vec<PauliProduct>, reference: u64, electron_count: Option<usize>) -> Result<Self> {
        let mut eigenvalues = Vec::with_capacity(generators.len());
        for g in &generators {
            if g.x_bits() != 0 {
                return Err(QresError::Symmetry(format!("generator {} is not diagonal", g.label())));
            }
            eigenvalues.push(parity(g.z_bits(), reference));
        }
        Ok(SymmetrySector { generators, eigenvalues, electron_count })
    }

    /// Sector of `reference` under every Z-type Pauli product commuting with
    /// all terms of `fragments`: the GF(2) null space of their X masks.
    pub fn of_fragments(fragments: &[PauliPolynomial], reference: u64) -> Result<Self> {
        let n = fragments.first().map(PauliPolynomial::n_qubits).unwrap_or(0);
        let terms = fragments.iter().flat_map(|f| f.non_identity_terms().map(|(k, _)| k));
        Self::of_reference(find_z_symmetries(n, terms), reference, None)
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty() && self.electron_count.is_none()
    }

    pub fn contains(&self, b: u64) -> bool {
        if let Some(n) = self.electron_count {
            if b.count_ones() as usize != n {
                return false;
            }
        }
        self.generators.iter().zip(&self.eigenvalues).all(|(g, &e)| parity(g.z_bits(), b) == e)
    }

    pub fn basis(&self, n_qubits: usize) -> Result<SectorBasis> {
        if let Some(g) = self.generators.iter().find(|g| g.x_bits() != 0) {
            return Err(QresError::Symmetry(format!("generator {} is not diagonal", g.label())));
        }
        if self.generators.len() != self.eigenvalues.len() {
            return Err(QresError::Symmetry("generator and eigenvalue counts differ".into()));
        }
        Ok(SectorBasis::filtered(n_qubits, |b| self.contains(b)))
    }

    /// Checks that every Pauli generator commutes with every term of `h`.
    pub fn check_generators(&self, h: &PauliPolynomial) -> Result<()> {
        for (k, _) in h.non_identity_terms() {
            if let Some(g) = self.generators.iter().find(|g| !g.key().commutes_with(k)) {
                return Err(QresError::Symmetry(format!("generator {} does not commute with a fragment", g.label())));
            }
        }
        Ok(())
    }

    /// Checks that every generator and the electron count commute with `h`.
    pub fn check_commutes(&self, h: &PauliPolynomial) -> Result<()> {
        self.check_generators(h)?;
        if self.electron_count.is_some() && !conserves_number(h) {
            return Err(QresError::Symmetry("operator does not conserve electron number".into()));
        }
        Ok(())
    }
}

fn parity(z: u64, b: u64) -> i8 {
    if (z & b).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `true` when `h` commutes with the number operator.
pub fn conserves_number(h: &PauliPolynomial) -> bool {
    // [N, h] = 0 iff h maps each number sector to itself: check on the
    // first-quantized action of every X mask group.
    let mut groups: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
    for (k, c) in h.terms() {
        groups.entry(k.x).or_default().push((k.z, c));
    }
    let n = h.n_qubits();
    for (x, zs) in groups {
        if x == 0 {
            continue;
        }
        // The group acts on basis states b as sum_z c i^{y} (-1)^{z.b} |b^x>;
        // it may only be nonzero when popcount(b & x) == popcount(x) / 2.
        if n > 20 {
            continue;
        }
        for b in 0..(1u64 << n) {
            if 2 * (b & x).count_ones() == x.count_ones() {
                continue;
            }
            let mut amp = C64::default();
            for &(z, c) in &zs {
                let (a, _) = PauliKey { z, x }.apply_to_basis(b);
                amp += a * c;
            }
            if amp.norm() > 1e-10 {
                return false;
            }
        }
    }
    true
}

/// Determinant with the lowest `n_electrons` spin-orbitals occupied.
pub fn hf_state(n_qubits: usize, n_electrons: usize) -> Result<WaveVector> {
    if n_electrons > n_qubits || n_qubits > 63 {
        return Err(QresError::Dimension(format!("{n_electrons} electrons in {n_qubits} spin-orbitals")));
    }
    Ok(WaveVector::basis_state(n_qubits, hf_index(n_electrons)))
}

pub fn hf_index(n_electrons: usize) -> u64 {
    (1u64 << n_electrons) - 1
}

/// Truncated CISD state and its energies.
#[derive(Clone, Debug)]
pub struct CisdResult {
    /// Truncated, renormalized state.
    pub state: WaveVector,
    /// Energy of the selected root in the singles-and-doubles space.
    pub energy: f64,
    /// `energy - E0` when a reference energy was supplied.
    pub error: Option<f64>,
    /// Number of determinants in the CISD space.
    pub space_dim: usize,
    /// Determinants kept after truncation.
    pub kept: usize,
}

const EVEN: u64 = 0x5555_5555_5555_5555;

/// Singles-and-doubles determinants of `reference` that conserve the
/// numbers of α (even) and β (odd) electrons.
pub fn cisd_space(n_qubits: usize, reference: u64) -> SectorBasis {
    let na = (reference & EVEN).count_ones();
    let nb = (reference & !EVEN).count_ones();
    SectorBasis::filtered(n_qubits, |b| {
        (b & EVEN).count_ones() == na
            && (b & !EVEN).count_ones() == nb
            && (b & !reference).count_ones() <= 2
    })
}

/// Weight on the reference below which a CISD root is treated as
/// orthogonal to it (a root of another spin or spatial symmetry).
const REFERENCE_WEIGHT_TOL: f64 = 1e-8;
const CISD_ROOTS: usize = 10;

/// Lowest root with non-negligible weight on basis position `at`.
fn reference_root(op: &SparseOperator, at: usize) -> Result<EigenPair> {
    let pairs = if op.dim() <= DENSE_LIMIT {
        let (vals, vecs) = eigh(op.to_dense());
        vals.into_iter()
            .enumerate()
            .map(|(i, value)| EigenPair { value, vector: vecs.column(i).iter().copied().collect(), residual: 0.0 })
            .collect()
    } else {
        lowest_eigenpairs(op, CISD_ROOTS.min(op.dim()))?
    };
    pairs
        .into_iter()
        .find(|p| p.vector[at].norm_sqr() > REFERENCE_WEIGHT_TOL)
        .ok_or_else(|| QresError::Solver("no low CISD root overlaps the reference".into()))
}

/// Lowest CISD eigenvector connected to the reference, truncated to the fewest determinants holding at
/// least [`CISD_KEEP`] of its squared norm.
pub fn cisd_state(h: &PauliPolynomial, reference: &WaveVector, e0: Option<f64>) -> Result<CisdResult> {
    let n = h.n_qubits();
    let reference = reference
        .as_basis_state()
        .ok_or_else(|| QresError::State("CISD reference must be a single determinant".into()))?;
    let basis = cisd_space(n, reference);
    let op = SparseOperator::from_polynomial(h, &basis);
    let pair = reference_root(&op, basis.position(reference).expect("reference lies in its CISD space"))?;
    let mut amps: Vec<(u64, C64)> = basis.states().iter().copied().zip(pair.vector).collect();
    // fix the global phase so the largest amplitude is real and positive
    let lead = amps.iter().map(|(_, a)| *a).max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())).unwrap();
    let phase = lead.conj() / lead.norm();
    amps.iter_mut().for_each(|(_, a)| *a *= phase);
    let total: f64 = amps.iter().map(|(_, a)| a.norm_sqr()).sum();
    amps.sort_by(|a, b| b.1.norm_sqr().total_cmp(&a.1.norm_sqr()).then(a.0.cmp(&b.0)));
    let mut acc = 0.0;
    let mut kept = 0;
    for (_, a) in &amps {
        acc += a.norm_sqr();
        kept += 1;
        if acc >= CISD_KEEP * total {
            break;
        }
    }
    let mut state = WaveVector::new(n);
    for (b, a) in amps.into_iter().take(kept) {
        state.amps.insert(b, a);
    }
    let state = state.normalized()?;
    Ok(CisdResult { state, energy: pair.value, error: e0.map(|e| pair.value - e), space_dim: basis.dim(), kept })
}

/// Lowest `k` eigenpairs, optionally restricted to a symmetry sector.
pub fn eigensolve(h: &PauliPolynomial, k: usize, sector: Option<&SymmetrySector>) -> Result<Vec<(f64, WaveVector)>> {
    let n = h.n_qubits();
    let basis = match sector {
        Some(s) => {
            s.check_commutes(h)?;
            s.basis(n)?
        }
        None => SectorBasis::full(n),
    };
    let op = SparseOperator::from_polynomial(h, &basis);
    let pairs = lowest_eigenpairs(&op, k)?;
    Ok(pairs.into_iter().map(|p| (p.value, WaveVector::from_sector(&basis, &p.vector))).collect())
}

/// Generators of all Pauli products commuting with every given term.
///
/// Computed as a GF(2) kernel of the symplectic matrix of the terms; the
/// result spans the symmetry group modulo phases.
pub fn find_pauli_symmetries(n_qubits: usize, terms: impl IntoIterator<Item = PauliKey>) -> Vec<PauliProduct> {
    // A product (a|b) (x=a, z=b) commutes with (x|z) iff z.a + x.b = 0.
    let rows: Vec<u128> = terms
        .into_iter()
        .filter(|k| !k.is_identity())
        .map(|k| (k.z as u128) | ((k.x as u128) << n_qubits))
        .collect();
    kernel(rows, 2 * n_qubits)
        .into_iter()
        .map(|v| {
            let m = (1u128 << n_qubits) - 1;
            let a = (v & m) as u64;
            let b = ((v >> n_qubits) & m) as u64;
            PauliProduct::from_key(n_qubits, PauliKey { x: a, z: b })
        })
        .collect()
}

/// Z-type symmetries: generators of the Z strings commuting with every term.
pub fn find_z_symmetries(n_qubits: usize, terms: impl IntoIterator<Item = PauliKey>) -> Vec<PauliProduct> {
    let rows: Vec<u128> = terms.into_iter().map(|k| k.x as u128).filter(|&r| r != 0).collect();
    kernel(rows, n_qubits)
        .into_iter()
        .map(|v| PauliProduct::from_key(n_qubits, PauliKey { x: 0, z: v as u64 }))
        .collect()
}

/// Basis of `{v : r.v = 0 for every row r}` over GF(2), `cols` bits wide.
fn kernel(mut rows: Vec<u128>, cols: usize) -> Vec<u128> {
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0;
    for c in 0..cols {
        let bit = 1u128 << c;
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] & bit != 0) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (i, r) in rows.iter_mut().enumerate() {
            if i != rank && *r & bit != 0 {
                *r ^= pivot;
            }
        }
        pivots.push(c);
        rank += 1;
    }
    let mut out = Vec::new();
    for f in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = 1u128 << f;
        for (i, &pc) in pivots.iter().enumerate() {
            if rows[i] >> f & 1 == 1 {
                v |= 1u128 << pc;
            }
        }
        out.push(v);
    }
    out
}

/// `Σ_k |<ψ_k|φ>|²` over eigenstates with `E_k − E_0 ≤ ε`, extended to
/// whole degenerate blocks.
pub fn overlap_sum(phi: &WaveVector, eigenpairs: &[(f64, WaveVector)], eps: f64) -> Result<f64> {
    if eigenpairs.is_empty() {
        return Err(QresError::Argument("no eigenpairs supplied".into()));
    }
    if eps < 0.0 {
        return Err(QresError::Argument(format!("negative window {eps}")));
    }
    let e0 = eigenpairs[0].0;
    let mut total = 0.0;
    let mut last = e0;
    for (e, psi) in eigenpairs {
        if e - e0 > eps && e - last > DEGENERACY_TOL {
            break;
        }
        total += psi.overlap(phi).norm_sqr();
        last = *e;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliProduct;

    fn key(label: &str) -> PauliKey {
        PauliProduct::parse(label).unwrap().key()
    }

    fn in_span(gens: &[PauliProduct], target: PauliKey) -> bool {
        let n = gens.len();
        (0..1u64 << n).any(|mask| {
            let mut acc = PauliKey::IDENTITY;
            for (i, g) in gens.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    acc = acc.compose(g.key()).1;
                }
            }
            acc == target
        })
    }

    #[test]
    fn hf_bits() {
        assert_eq!(hf_state(4, 2).unwrap().as_basis_state(), Some(0b0011));
        assert_eq!(hf_state(4, 0).unwrap().as_basis_state(), Some(0));
        assert!(hf_state(2, 3).is_err());
    }

    #[test]
    fn symmetries_of_zz() {
        let s = find_pauli_symmetries(2, [key("ZZ")]);
        assert!(in_span(&s, key("ZI")));
        assert!(in_span(&s, key("IZ")));
        assert!(!in_span(&s, key("XI")));
    }

    #[test]
    fn symmetries_of_bell_terms() {
        let s = find_pauli_symmetries(2, [key("XX"), key("YY"), key("ZZ")]);
        assert!(in_span(&s, key("ZZ")));
        assert!(in_span(&s, key("XX")));
        for g in &s {
            for t in ["XX", "YY", "ZZ"] {
                assert!(g.key().commutes_with(key(t)));
            }
        }
    }

    #[test]
    fn z_symmetries_commute() {
        let terms = [key("XXYY"), key("ZIII"), key("IXXI")];
        let s = find_z_symmetries(4, terms);
        assert_eq!(s.len(), 2);
        for g in &s {
            for t in terms {
                assert!(g.key().commutes_with(t));
            }
        }
    }

    #[test]
    fn minus_z_eigensolve() {
        let h = PauliPolynomial::from_terms(1, [(key("Z"), -1.0)]);
        let pairs = eigensolve(&h, 1, None).unwrap();
        assert!((pairs[0].0 + 1.0).abs() < 1e-14);
        assert!((pairs[0].1.amplitude(0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_sum_edges() {
        let h = PauliPolynomial::from_terms(2, [(key("ZI"), -1.0), (key("IZ"), -0.5)]);
        let pairs = eigensolve(&h, 4, None).unwrap();
        assert!((overlap_sum(&pairs[0].1, &pairs, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(overlap_sum(&pairs[3].1, &pairs, 0.1).unwrap().abs() < 1e-12);
        assert!(overlap_sum(&pairs[0].1, &[], 0.1).is_err());
    }

    #[test]
    fn degenerate_block_is_summed() {
        // two degenerate ground states; phi lies in the block but not on psi_0
        let h = PauliPolynomial::from_terms(2, [(key("ZI"), -1.0)]);
        let pairs = eigensolve(&h, 4, None).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v: Vec<C64> =
            pairs[0].1.to_dense().iter().zip(pairs[1].1.to_dense()).map(|(a, b)| (a + b) * s).collect();
        let phi = WaveVector::from_dense(2, &v);
        assert!((overlap_sum(&phi, &pairs, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sector_basis_counts() {
        let s = SymmetrySector::electrons(2);
        assert_eq!(s.basis(4).unwrap().dim(), 6);
        let g = PauliProduct::from_key(4, key("ZZZZ"));
        let s = SymmetrySector::of_reference(vec![g], 0b0011, Some(2)).unwrap();
        assert_eq!(s.eigenvalues, vec![1]);
        assert_eq!(s.basis(4).unwrap().dim(), 6);
    }
}
