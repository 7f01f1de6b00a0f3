//! Sector-restricted sparse operators and Hermitian eigensolvers.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{QresError, Result};
use crate::pauli::{ComplexPauliSum, PauliKey, PauliPolynomial};

pub type C64 = Complex64;

/// Dimensions up to this size are diagonalized densely.
pub const DENSE_LIMIT: usize = 400;
/// Residual tolerance for iterative eigenpairs.
pub const RESIDUAL_TOL: f64 = 1e-8;
const MAX_RESTARTS: usize = 5;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Ordered set of computational basis states spanning a subspace.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    n_qubits: usize,
    states: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl SectorBasis {
    pub fn full(n_qubits: usize) -> Self {
        Self::from_states(n_qubits, (0..1u64 << n_qubits).collect())
    }

    pub fn from_states(n_qubits: usize, states: Vec<u64>) -> Self {
        let index = states.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        SectorBasis { n_qubits, states, index }
    }

    /// States passing `keep`, in increasing index order.
    pub fn filtered(n_qubits: usize, keep: impl Fn(u64) -> bool) -> Self {
        Self::from_states(n_qubits, (0..1u64 << n_qubits).filter(|&b| keep(b)).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    pub fn dim(&self) -> usize {
        self.states.len()
    }
    pub fn states(&self) -> &[u64] {
        &self.states
    }
    pub fn position(&self, b: u64) -> Option<usize> {
        self.index.get(&b).copied()
    }

    /// Embeds a sector vector into the full `2^n` space.
    pub fn embed(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; 1usize << self.n_qubits];
        for (&b, &a) in self.states.iter().zip(v) {
            out[b as usize] = a;
        }
        out
    }

    /// Restricts a full-space vector to the sector.
    pub fn restrict(&self, full: &[C64]) -> Vec<C64> {
        self.states.iter().map(|&b| full[b as usize]).collect()
    }
}

/// Compressed sparse columns, `P O P` restricted to a [`SectorBasis`].
#[derive(Clone, Debug)]
pub struct SparseOperator {
    dim: usize,
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    vals: Vec<C64>,
}

/// Groups terms by their X mask: `x -> [(z, c * i^{|x&z|})]`.
fn group_terms(terms: impl Iterator<Item = (PauliKey, C64)>) -> Vec<(u64, Vec<(u64, C64)>)> {
    let mut groups: HashMap<u64, Vec<(u64, C64)>> = HashMap::new();
    for (k, c) in terms {
        let y = k.y_count();
        let ip = match y % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        groups.entry(k.x).or_default().push((k.z, c * ip));
    }
    let mut out: Vec<_> = groups.into_iter().collect();
    out.sort_by_key(|(x, _)| *x);
    out
}

impl SparseOperator {
    pub fn from_polynomial(h: &PauliPolynomial, basis: &SectorBasis) -> Self {
        Self::from_terms(h.terms().map(|(k, c)| (k, C64::new(c, 0.0))), basis)
    }

    pub fn from_complex(h: &ComplexPauliSum, basis: &SectorBasis) -> Self {
        Self::from_terms(h.terms(), basis)
    }

    pub fn from_terms(terms: impl Iterator<Item = (PauliKey, C64)>, basis: &SectorBasis) -> Self {
        let groups = group_terms(terms);
        let cols: Vec<Vec<(usize, C64)>> = basis
            .states
            .par_iter()
            .map(|&b| {
                let mut col = Vec::new();
                for (x, zs) in &groups {
                    let Some(row) = basis.position(b ^ x) else { continue };
                    let mut amp = ZERO;
                    for (z, c) in zs {
                        if (z & b).count_ones() % 2 == 0 {
                            amp += c;
                        } else {
                            amp -= c;
                        }
                    }
                    if amp.norm_sqr() > 0.0 {
                        col.push((row, amp));
                    }
                }
                col
            })
            .collect();
        let mut col_ptr = Vec::with_capacity(cols.len() + 1);
        col_ptr.push(0);
        let mut rows = Vec::new();
        let mut vals = Vec::new();
        for col in cols {
            for (r, v) in col {
                rows.push(r);
                vals.push(v);
            }
            col_ptr.push(rows.len());
        }
        SparseOperator { dim: basis.dim(), col_ptr, rows, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scaled(mut self, s: C64) -> Self {
        self.vals.iter_mut().for_each(|v| *v *= s);
        self
    }

    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = ZERO);
        for (c, xc) in x.iter().enumerate() {
            if xc.re == 0.0 && xc.im == 0.0 {
                continue;
            }
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.rows[k]] += self.vals[k] * xc;
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for c in 0..self.dim {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                m[(self.rows[k], c)] += self.vals[k];
            }
        }
        m
    }

    /// Largest deviation from Hermiticity, `max |A_ij - conj(A_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.to_dense();
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((d[(i, j)] - d[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// Ascending eigenvalues and column eigenvectors of a dense Hermitian matrix.
pub fn eigh(m: DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    if m.iter().all(|v| v.im == 0.0) {
        let (values, vectors) = eigh_real(m.map(|v| v.re));
        return (values, vectors.map(|v| C64::new(v, 0.0)));
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Ascending eigenvalues of a dense real symmetric matrix.
pub fn eigh_real(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [C64], against: &[Vec<C64>]) {
    for _ in 0..2 {
        for u in against {
            let c = dot(u, v);
            v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= c * ui);
        }
    }
}

/// One eigenpair produced by [`lowest_eigenpairs`].
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<C64>,
    pub residual: f64,
}

/// Lowest `k` eigenpairs of the Hermitian operator.
///
/// Small problems are diagonalized densely; larger ones use Lanczos with full
/// reorthogonalization, locking converged vectors one at a time.
pub fn lowest_eigenpairs(op: &SparseOperator, k: usize) -> Result<Vec<EigenPair>> {
    if k == 0 {
        return Err(QresError::Argument("k must be at least 1".into()));
    }
    let dim = op.dim();
    if dim == 0 {
        return Err(QresError::Solver("empty subspace".into()));
    }
    let k = k.min(dim);
    if dim <= DENSE_LIMIT {
        let (vals, vecs) = eigh(op.to_dense());
        return Ok((0..k)
            .map(|i| {
                let vector: Vec<C64> = vecs.column(i).iter().copied().collect();
                let residual = residual(op, vals[i], &vector);
                EigenPair { value: vals[i], vector, residual }
            })
            .collect());
    }
    let mut locked: Vec<Vec<C64>> = Vec::new();
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..k {
        let pair = lanczos_lowest(op, &locked, &mut rng)?;
        locked.push(pair.vector.clone());
        out.push(pair);
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(out)
}

fn residual(op: &SparseOperator, value: f64, v: &[C64]) -> f64 {
    let mut w = vec![ZERO; v.len()];
    op.apply(v, &mut w);
    w.iter().zip(v).map(|(a, b)| (a - b * value).norm_sqr()).sum::<f64>().sqrt()
}

fn lanczos_lowest(op: &SparseOperator, locked: &[Vec<C64>], rng: &mut ChaCha8Rng) -> Result<EigenPair> {
    let dim = op.dim();
    let available = dim - locked.len();
    let mut start: Vec<C64> = (0..dim).map(|_| C64::new(rng.random::<f64>() - 0.5, 0.0)).collect();
    let mut m = available.min(100);
    let mut best: Option<EigenPair> = None;
    for attempt in 0..=MAX_RESTARTS {
        for _ in 0..8 {
            orthogonalize(&mut start, locked);
            let nrm = norm(&start);
            if nrm < 1e-14 {
                return Err(QresError::Solver("Lanczos start vector collapsed".into()));
            }
            start.iter_mut().for_each(|v| *v /= nrm);
            let pair = lanczos_run(op, locked, &start, m);
            let done = pair.residual <= RESIDUAL_TOL;
            start = pair.vector.clone();
            if best.as_ref().is_none_or(|b| pair.residual < b.residual) {
                best = Some(pair);
            }
            if done {
                return Ok(best.unwrap());
            }
        }
        m = available.min(m * 3 / 2 + 20);
        let _ = attempt;
    }
    let b = best.unwrap();
    Err(QresError::Solver(format!(
        "Lanczos did not converge after {MAX_RESTARTS} restarts: eigenvalue {:.12}, residual {:.3e}",
        b.value, b.residual
    )))
}

fn lanczos_run(op: &SparseOperator, locked: &[Vec<C64>], start: &[C64], m: usize) -> EigenPair {
    let dim = op.dim();
    let mut basis: Vec<Vec<C64>> = vec![start.to_vec()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![ZERO; dim];
    for j in 0..m {
        op.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        if j + 1 == m || b < 1e-12 {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let size = alpha.len();
    let t = DMatrix::from_fn(size, size, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let (vals, vecs) = eigh_real(t);
    let mut vector = vec![ZERO; dim];
    for (i, v) in basis.iter().enumerate().take(size) {
        let c = vecs[(i, 0)];
        vector.iter_mut().zip(v).for_each(|(x, y)| *x += y * c);
    }
    let nrm = norm(&vector);
    vector.iter_mut().for_each(|x| *x /= nrm);
    let value = vals[0];
    let residual = residual(op, value, &vector);
    EigenPair { value, vector, residual }
}

/// Smallest and largest eigenvalue.
pub fn extremal_eigenvalues(op: &SparseOperator) -> Result<(f64, f64)> {
    if op.dim() <= DENSE_LIMIT {
        let (vals, _) = eigh(op.to_dense());
        return Ok((vals[0], *vals.last().unwrap()));
    }
    let lo = lowest_eigenpairs(op, 1)?[0].value;
    let neg = op.clone().scaled(C64::new(-1.0, 0.0));
    let hi = -lowest_eigenpairs(&neg, 1)?[0].value;
    Ok((lo, hi))
}

/// Spectral norm of an operator that is Hermitian or anti-Hermitian
/// (pass `anti_hermitian = true` for commutators of Hermitian operators).
pub fn spectral_norm(op: SparseOperator, anti_hermitian: bool) -> Result<f64> {
    let op = if anti_hermitian { op.scaled(C64::new(0.0, 1.0)) } else { op };
    if op.vals.is_empty() {
        return Ok(0.0);
    }
    let (lo, hi) = extremal_eigenvalues(&op)?;
    Ok(lo.abs().max(hi.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliProduct;

    fn random_poly(n: usize, terms: usize, seed: u64) -> PauliPolynomial {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = PauliPolynomial::new(n);
        for _ in 0..terms {
            let x = rng.random::<u64>() & ((1 << n) - 1);
            let z = rng.random::<u64>() & ((1 << n) - 1);
            p.add_term(PauliKey { x, z }, rng.random::<f64>() - 0.5);
        }
        p.simplify();
        p
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let h = random_poly(9, 60, 3);
        let basis = SectorBasis::full(9);
        let op = SparseOperator::from_polynomial(&h, &basis);
        assert!(op.dim() > DENSE_LIMIT);
        let pairs = lowest_eigenpairs(&op, 3).unwrap();
        let (dense, _) = eigh(op.to_dense());
        for (p, d) in pairs.iter().zip(&dense) {
            assert!((p.value - d).abs() < 1e-9, "{} vs {}", p.value, d);
            assert!(p.residual <= RESIDUAL_TOL);
        }
    }

    #[test]
    fn minus_z_ground_state() {
        let h = PauliPolynomial::from_terms(1, [(PauliProduct::parse("Z").unwrap().key(), -1.0)]);
        let op = SparseOperator::from_polynomial(&h, &SectorBasis::full(1));
        let pairs = lowest_eigenpairs(&op, 1).unwrap();
        assert!((pairs[0].value + 1.0).abs() < 1e-14);
        assert!((pairs[0].vector[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_matches_dense_apply() {
        let h = random_poly(5, 20, 9);
        let basis = SectorBasis::full(5);
        let op = SparseOperator::from_polynomial(&h, &basis);
        let x: Vec<C64> = (0..32).map(|i| C64::new(i as f64 * 0.1, -0.05 * i as f64)).collect();
        let mut y = vec![ZERO; 32];
        op.apply(&x, &mut y);
        let z = h.apply_dense(&x);
        for (a, b) in y.iter().zip(&z) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(op.hermiticity_defect() < 1e-14);
    }
}
