//! Low-rank fermionic fragments, fluid repartitioning, LCU-optimized
//! fragments, Givens networks and electron-number symmetry shifts.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QresError, Result};
use crate::integrals::FermionicOperator;
use crate::linalg::{eigh_real, SectorBasis, SparseOperator};
use crate::optimize::{bfgs, coordinate_search, nelder_mead, BfgsOptions};
use crate::pauli::{jordan_wigner, number_operator, PauliPolynomial};
use crate::pauli_frag::{lcu_norm_ac, sorted_insertion, FragmentKind};
use crate::states::{conserves_number, WaveVector};

type C64 = Complex64;

/// Default truncation of supermatrix eigenvalues (hartree).
pub const LR_TOL: f64 = 1e-6;
const ORTHO_TOL: f64 = 1e-10;
/// Weight of `Σ|λ_pq|` in the LCU 1-norm of a two-body fragment.
pub const TWO_BODY_LCU_WEIGHT: f64 = 0.125;

/// `G(p, q, θ)`: identity except `[[c, -s], [s, c]]` on rows/columns `p, q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GivensRotation {
    pub p: usize,
    pub q: usize,
    pub angle: f64,
}

impl GivensRotation {
    pub fn matrix(&self, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::identity(n, n);
        let (s, c) = self.angle.sin_cos();
        m[(self.p, self.p)] = c;
        m[(self.p, self.q)] = -s;
        m[(self.q, self.p)] = s;
        m[(self.q, self.q)] = c;
        m
    }
}

/// `U = G_1 G_2 ... G_k diag(signs)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GivensNetwork {
    pub n: usize,
    pub rotations: Vec<GivensRotation>,
    pub signs: Vec<f64>,
}

impl GivensNetwork {
    pub fn reassemble(&self) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.n, self.n);
        for g in &self.rotations {
            m *= g.matrix(self.n);
        }
        for (j, s) in self.signs.iter().enumerate() {
            m.column_mut(j).scale_mut(*s);
        }
        m
    }
}

fn orthogonality_defect(u: &DMatrix<f64>) -> f64 {
    let n = u.nrows();
    (u.transpose() * u - DMatrix::<f64>::identity(n, n)).abs().max()
}

/// Decomposes an orthogonal matrix into at most `N(N-1)/2` Givens rotations
/// and a diagonal of signs.
pub fn givens_decompose(u: &DMatrix<f64>) -> Result<GivensNetwork> {
    if !u.is_square() {
        return Err(QresError::Dimension(format!("{}x{} rotation", u.nrows(), u.ncols())));
    }
    let defect = orthogonality_defect(u);
    if defect > ORTHO_TOL {
        return Err(QresError::Orthogonality(defect));
    }
    let n = u.nrows();
    let mut w = u.clone();
    let mut rotations = Vec::new();
    for j in 0..n {
        for i in j + 1..n {
            let (a, b) = (w[(j, j)], w[(i, j)]);
            if b.abs() < 1e-15 {
                continue;
            }
            let g = GivensRotation { p: j, q: i, angle: b.atan2(a) };
            let (s, c) = g.angle.sin_cos();
            for k in 0..n {
                let (rj, ri) = (w[(j, k)], w[(i, k)]);
                w[(j, k)] = c * rj + s * ri;
                w[(i, k)] = -s * rj + c * ri;
            }
            rotations.push(g);
        }
    }
    let signs = (0..n).map(|j| w[(j, j)].signum()).collect();
    Ok(GivensNetwork { n, rotations, signs })
}

/// `U (Σ λ_p n_p + Σ λ_pq n_p n_q + c) U†` with `U` rotating the orbitals
/// onto the columns of `rotation`.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionFragment {
    pub rotation: DMatrix<f64>,
    pub diag_one_body: Vec<f64>,
    pub diag_two_body: DMatrix<f64>,
    pub constant: f64,
}

impl FermionFragment {
    pub fn n(&self) -> usize {
        self.rotation.nrows()
    }

    pub fn is_one_body(&self) -> bool {
        self.diag_two_body.iter().all(|v| *v == 0.0)
    }

    /// Rotated one-body matrix `U diag(d) Uᵀ`.
    pub fn rotate(&self, d: &[f64]) -> DMatrix<f64> {
        let u = &self.rotation;
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| (0..n).map(|p| d[p] * u[(i, p)] * u[(j, p)]).sum())
    }

    /// Fragment as a fermionic operator in the original orbital basis.
    pub fn fermionic_operator(&self) -> FermionicOperator {
        let n = self.n();
        let u = &self.rotation;
        let mut op = FermionicOperator::zero(n);
        let t = self.rotate(&self.diag_one_body);
        op.one_body.copy_from_slice(t.transpose().as_slice());
        op.constant = self.constant;
        if self.is_one_body() {
            return op;
        }
        // v_ijkl = Σ_pq λ_pq U_ip U_jp U_kq U_lq, built as Σ_q (Σ_p λ_pq P_p) ⊗ P_q
        let projectors: Vec<DMatrix<f64>> = (0..n).map(|p| u.column(p) * u.column(p).transpose()).collect();
        for q in 0..n {
            let mut left = DMatrix::<f64>::zeros(n, n);
            for (p, proj) in projectors.iter().enumerate() {
                let l = self.diag_two_body[(p, q)];
                if l != 0.0 {
                    left += proj * l;
                }
            }
            let right = &projectors[q];
            for i in 0..n {
                for j in 0..n {
                    let a = left[(i, j)];
                    if a == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        for l in 0..n {
                            op.two_body[((i * n + j) * n + k) * n + l] += a * right[(k, l)];
                        }
                    }
                }
            }
        }
        op
    }

    pub fn to_pauli(&self) -> Result<PauliPolynomial> {
        jordan_wigner(&self.fermionic_operator())
    }

    pub fn givens(&self) -> Result<GivensNetwork> {
        givens_decompose(&self.rotation)
    }

    /// Coefficients of the linear `n_p` terms after expanding `n_p n_p = n_p`
    /// and symmetrizing: `λ_p + Σ_q λ_pq`.
    fn linear_weights(&self) -> Vec<f64> {
        (0..self.n()).map(|p| self.diag_one_body[p] + self.diag_two_body.row(p).sum()).collect()
    }
}

/// Fermion fragments; fragment 0 is the one-body fragment.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionFragmentSet {
    pub n_spin_orbitals: usize,
    pub constant: f64,
    pub fragments: Vec<FermionFragment>,
}

impl FermionFragmentSet {
    pub fn n_fragments(&self) -> usize {
        self.fragments.len()
    }

    /// Fragment operators as Pauli polynomials (their own constants included).
    pub fn polynomials(&self) -> Result<Vec<PauliPolynomial>> {
        self.fragments.par_iter().map(FermionFragment::to_pauli).collect()
    }

    /// Σ fragments + constant.
    pub fn reconstruct(&self) -> Result<PauliPolynomial> {
        let mut total = PauliPolynomial::constant(self.n_spin_orbitals, self.constant);
        for p in self.polynomials()? {
            total = total.plus(&p)?;
        }
        Ok(total)
    }

    pub fn check_orthogonal(&self) -> Result<()> {
        for f in &self.fragments {
            let d = orthogonality_defect(&f.rotation);
            if d > ORTHO_TOL {
                return Err(QresError::Orthogonality(d));
            }
        }
        Ok(())
    }

    /// Replaces fragment 0 by the diagonalization of `matrix`.
    fn set_one_body(&mut self, matrix: &DMatrix<f64>, constant: f64) {
        let (values, rotation) = eigh_spin_blocked(matrix);
        let n = self.n_spin_orbitals;
        self.fragments[0] =
            FermionFragment { rotation, diag_one_body: values, diag_two_body: DMatrix::zeros(n, n), constant };
    }

    fn one_body_matrix(&self) -> DMatrix<f64> {
        let f = &self.fragments[0];
        f.rotate(&f.diag_one_body)
    }
}

/// Eigen-decomposition of a symmetric matrix that keeps spin-orbitals of
/// different spin apart whenever the matrix does not couple them.
fn eigh_spin_blocked(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let coupled = (0..n).any(|i| (0..n).any(|j| (i + j) % 2 == 1 && sym[(i, j)].abs() > 1e-12));
    if coupled || n % 2 == 1 {
        let (v, u) = eigh_real(sym);
        return (v, u);
    }
    let half = n / 2;
    let mut values = vec![0.0; n];
    let mut rotation = DMatrix::zeros(n, n);
    for spin in 0..2 {
        let block = DMatrix::from_fn(half, half, |i, j| sym[(2 * i + spin, 2 * j + spin)]);
        let (v, u) = eigh_real(block);
        for k in 0..half {
            values[2 * k + spin] = v[k];
            for i in 0..half {
                rotation[(2 * i + spin, 2 * k + spin)] = u[(i, k)];
            }
        }
    }
    (values, rotation)
}

/// Low-rank decomposition of the two-body tensor.
///
/// The `(pq),(rs)` supermatrix of `v` is diagonalized; every eigenvector
/// with `|w| ≥ tol` becomes a fragment `w (Σ_pq L_pq E_pq)²`, brought to
/// diagonal form by the eigenvectors of `L`. For restricted integrals this
/// reproduces the spatial-orbital decomposition expanded over spin.
pub fn low_rank_decompose(op: &FermionicOperator, tol: f64) -> Result<FermionFragmentSet> {
    let n = op.n_spin_orbitals;
    let m = n * n;
    let s = DMatrix::from_fn(m, m, |a, b| op.two_body[a * m + b]);
    let asym = (&s - s.transpose()).abs().max();
    if asym > 1e-8 {
        return Err(QresError::Consistency(format!("two-body supermatrix not symmetric ({asym:.3e})")));
    }
    let (w, vecs) = eigh_real((&s + s.transpose()) * 0.5);
    let keep: Vec<usize> = (0..m).filter(|&i| w[i].abs() >= tol).collect();
    let mut two_body: Vec<(usize, FermionFragment)> = keep
        .par_iter()
        .map(|&i| {
            let l = DMatrix::from_fn(n, n, |p, q| vecs[(p * n + q, i)]);
            let (eps, rotation) = eigh_spin_blocked(&l);
            let lam = DMatrix::from_fn(n, n, |p, q| w[i] * eps[p] * eps[q]);
            (i, FermionFragment { rotation, diag_one_body: vec![0.0; n], diag_two_body: lam, constant: 0.0 })
        })
        .collect();
    // largest |w| first
    two_body.sort_by(|a, b| w[b.0].abs().total_cmp(&w[a.0].abs()));
    let t = DMatrix::from_fn(n, n, |p, q| op.t(p, q));
    let mut set = FermionFragmentSet {
        n_spin_orbitals: n,
        constant: op.constant,
        fragments: vec![FermionFragment {
            rotation: DMatrix::identity(n, n),
            diag_one_body: vec![0.0; n],
            diag_two_body: DMatrix::zeros(n, n),
            constant: 0.0,
        }],
    };
    set.set_one_body(&t, 0.0);
    set.fragments.extend(two_body.into_iter().map(|(_, f)| f));
    Ok(set)
}

/// LCU 1-norm and fragment count of a fermionic fragment set.
///
/// Every `n_p` is written as `(1 + r_p)/2` with the reflection `r_p`; all
/// linear pieces are collected into one one-body operator whose eigenvalues
/// `λ'_p` contribute `Σ|λ'_p|/2`, and each two-body fragment contributes
/// `Σ_pq |λ_pq|` weighted by [`TWO_BODY_LCU_WEIGHT`]. Constants are dropped.
pub fn lcu_norm_lr(set: &FermionFragmentSet) -> (f64, usize) {
    let n = set.n_spin_orbitals;
    let mut linear = DMatrix::<f64>::zeros(n, n);
    let mut two = 0.0;
    for f in &set.fragments {
        linear += f.rotate(&f.linear_weights());
        two += f.diag_two_body.iter().map(|v| v.abs()).sum::<f64>();
    }
    let (eig, _) = eigh_real((&linear + linear.transpose()) * 0.5);
    let one: f64 = eig.iter().map(|v| v.abs()).sum::<f64>() / 2.0;
    (one + TWO_BODY_LCU_WEIGHT * two, set.fragments.len())
}

/// Rewrites every two-body fragment as `¼ Σ_pq λ_pq r_p r_q` (plus a
/// constant) and moves all linear pieces into the one-body fragment.
pub fn r_form(set: &FermionFragmentSet) -> FermionFragmentSet {
    let mut out = set.clone();
    let mut one = set.one_body_matrix();
    let mut shift = 0.0;
    for f in out.fragments.iter_mut().skip(1) {
        one += f.rotate(&f.linear_weights());
        let n = f.n();
        f.diag_one_body = (0..n).map(|p| -f.diag_two_body.row(p).sum()).collect();
        f.constant = 0.25 * f.diag_two_body.sum();
        shift += f.constant;
    }
    let c0 = set.fragments[0].constant;
    out.set_one_body(&one, c0);
    out.constant -= shift;
    out
}

/// Result of a fluid-coefficient optimization.
#[derive(Clone, Debug)]
pub struct FluidResult {
    pub set: FermionFragmentSet,
    pub before: f64,
    pub after: f64,
    pub converged: bool,
}

/// Moves `c_p^(α) n_p^(α)` out of the two-body diagonal of every fragment
/// into the one-body fragment; the operator sum is unchanged.
fn transfer(set: &FermionFragmentSet, c: &[f64]) -> FermionFragmentSet {
    let n = set.n_spin_orbitals;
    let mut out = set.clone();
    let mut one = set.one_body_matrix();
    for (a, f) in out.fragments.iter_mut().skip(1).enumerate() {
        let ca = &c[a * n..(a + 1) * n];
        for (d, x) in f.diag_one_body.iter_mut().zip(ca) {
            *d -= x;
        }
        one += f.rotate(ca);
    }
    let c0 = set.fragments[0].constant;
    out.set_one_body(&one, c0);
    out
}

/// Moves `c_p n_p` from each two-body diagonal `λ_pp` into the one-body
/// fragment (valid since `n_p² = n_p`).
fn transfer_diagonal(set: &FermionFragmentSet, c: &[f64]) -> FermionFragmentSet {
    let n = set.n_spin_orbitals;
    let mut out = set.clone();
    let mut one = set.one_body_matrix();
    for (a, f) in out.fragments.iter_mut().skip(1).enumerate() {
        let ca = &c[a * n..(a + 1) * n];
        for (p, x) in ca.iter().enumerate() {
            f.diag_two_body[(p, p)] -= x;
        }
        one += f.rotate(ca);
    }
    let c0 = set.fragments[0].constant;
    out.set_one_body(&one, c0);
    out
}

/// Minimizes the LCU 1-norm over fluid coefficients and returns the
/// fragments in reflection form.
///
/// The objective is piecewise linear, so a derivative-free coordinate
/// search is used.
pub fn lr_lcu_optimize(set: &FermionFragmentSet) -> FluidResult {
    let n = set.n_spin_orbitals;
    let dim = n * (set.fragments.len() - 1);
    let before = lcu_norm_lr(set).0;
    let scale = set
        .fragments
        .iter()
        .flat_map(|f| (0..n).map(move |p| f.diag_two_body[(p, p)].abs()))
        .fold(0.0, f64::max)
        .max(1e-3);
    let min = coordinate_search(|c| lcu_norm_lr(&transfer_diagonal(set, c)).0, &vec![0.0; dim], scale, 1e-12, 100_000);
    let moved = transfer_diagonal(set, &min.x);
    let after = lcu_norm_lr(&moved).0.min(before);
    FluidResult { set: r_form(&moved), before, after, converged: min.converged }
}

/// Sector-restricted vectors and Gram matrix for the measurement objective.
struct VarianceModel {
    /// `[f_0, f_1, n_11..n_1N, f_2, ...]` Gram matrix (covariances).
    cov: DMatrix<f64>,
    n: usize,
    n_two: usize,
}

impl VarianceModel {
    fn new(set: &FermionFragmentSet, proxy: &WaveVector) -> Result<Self> {
        let n = set.n_spin_orbitals;
        let ne = proxy.amplitudes().next().map(|(b, _)| b.count_ones() as usize).unwrap_or(0);
        let sector = SectorBasis::filtered(n, |b| b.count_ones() as usize == ne);
        let psi: Vec<C64> = sector.states().iter().map(|&b| proxy.amplitude(b)).collect();
        let mut ops: Vec<PauliPolynomial> = Vec::new();
        for f in &set.fragments {
            ops.push(f.to_pauli()?);
        }
        let mut vectors: Vec<Vec<C64>> = Vec::new();
        let apply = |p: &PauliPolynomial| -> Vec<C64> {
            let op = SparseOperator::from_polynomial(p, &sector);
            let mut y = vec![C64::default(); sector.dim()];
            op.apply(&psi, &mut y);
            y
        };
        vectors.push(apply(&ops[0]));
        for (f, op) in set.fragments.iter().zip(&ops).skip(1) {
            vectors.push(apply(op));
            for p in 0..n {
                let mut d = vec![0.0; n];
                d[p] = 1.0;
                let num = FermionFragment {
                    rotation: f.rotation.clone(),
                    diag_one_body: d,
                    diag_two_body: DMatrix::zeros(n, n),
                    constant: 0.0,
                };
                vectors.push(apply(&num.to_pauli()?));
            }
        }
        let means: Vec<f64> = vectors.iter().map(|v| dotc(&psi, v).re).collect();
        let k = vectors.len();
        let rows: Vec<Vec<f64>> = (0..k)
            .into_par_iter()
            .map(|i| (0..k).map(|j| dotc(&vectors[i], &vectors[j]).re - means[i] * means[j]).collect())
            .collect();
        let cov = DMatrix::from_fn(k, k, |i, j| rows[i][j]);
        Ok(VarianceModel { cov, n, n_two: set.fragments.len() - 1 })
    }

    fn f_index(&self, a: usize) -> usize {
        1 + a * (self.n + 1)
    }

    /// `Σ_α sqrt(Var_α(c))` and its gradient.
    fn objective(&self, c: &[f64]) -> (f64, Vec<f64>) {
        let n = self.n;
        let cov = &self.cov;
        let mut total = 0.0;
        let mut grad = vec![0.0; c.len()];
        // one-body fragment: f_0 + Σ_αp c n_αp
        let idx = |a: usize, p: usize| self.f_index(a) + 1 + p;
        let mut v0 = cov[(0, 0)];
        let mut dv0 = vec![0.0; c.len()];
        for a in 0..self.n_two {
            for p in 0..n {
                let i = a * n + p;
                let mut s = cov[(0, idx(a, p))];
                for b in 0..self.n_two {
                    for q in 0..n {
                        s += c[b * n + q] * cov[(idx(a, p), idx(b, q))];
                    }
                }
                dv0[i] = 2.0 * s;
                v0 += c[i] * (2.0 * cov[(0, idx(a, p))] + (s - cov[(0, idx(a, p))]));
            }
        }
        let s0 = v0.max(0.0).sqrt();
        total += s0;
        if s0 > 1e-12 {
            for i in 0..c.len() {
                grad[i] += dv0[i] / (2.0 * s0);
            }
        }
        for a in 0..self.n_two {
            let fa = self.f_index(a);
            let ca = &c[a * n..(a + 1) * n];
            let mut v = cov[(fa, fa)];
            let mut dv = vec![0.0; n];
            for p in 0..n {
                let mut s = -cov[(fa, idx(a, p))];
                for q in 0..n {
                    s += ca[q] * cov[(idx(a, p), idx(a, q))];
                }
                dv[p] = 2.0 * s;
                v += ca[p] * (s - cov[(fa, idx(a, p))]);
            }
            let sa = v.max(0.0).sqrt();
            total += sa;
            if sa > 1e-12 {
                for p in 0..n {
                    grad[a * n + p] += dv[p] / (2.0 * sa);
                }
            }
        }
        (total, grad)
    }
}

fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Fluid-fermionic-fragment repartitioning: minimizes `Σ_α sqrt(Var(H_α))`
/// over the proxy by moving `c_p n_p` pieces of every two-body fragment into
/// the one-body fragment, which is then re-diagonalized.
///
/// `before`/`after` hold the objective `Σ_α sqrt(Var)`.
pub fn f3_repartition(set: &FermionFragmentSet, proxy: &WaveVector) -> Result<FluidResult> {
    let n = set.n_spin_orbitals;
    let model = VarianceModel::new(set, proxy)?;
    let dim = n * (set.fragments.len() - 1);
    let x0 = vec![0.0; dim];
    let before = model.objective(&x0).0;
    let min = bfgs(|c| model.objective(c), &x0, BfgsOptions { max_iter: 500, grad_tol: 1e-9 });
    let (x, after) = if min.value <= before { (min.x, min.value) } else { (x0, before) };
    Ok(FluidResult { set: transfer(set, &x), before, after, converged: min.converged })
}

/// Shift operator `s0 + s1 N + s2 N²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SymmetryShift {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
}

impl SymmetryShift {
    pub fn sector_eigenvalue(&self, n_electrons: usize) -> f64 {
        let ne = n_electrons as f64;
        self.s0 + self.s1 * ne + self.s2 * ne * ne
    }

    pub fn polynomial(&self, n_qubits: usize) -> Result<PauliPolynomial> {
        let num = number_operator(n_qubits);
        let sq = num.product(&num)?.into_real(1e-12)?;
        PauliPolynomial::constant(n_qubits, self.s0).plus(&num.scaled(self.s1))?.plus(&sq.scaled(self.s2))
    }
}

/// `H - S` for a qubit Hamiltonian.
pub fn apply_symmetry_shift(h: &PauliPolynomial, shift: &SymmetryShift) -> Result<PauliPolynomial> {
    if !conserves_number(h) {
        return Err(QresError::Symmetry("Hamiltonian does not conserve electron number".into()));
    }
    h.minus(&shift.polynomial(h.n_qubits())?)
}

/// `H - S` at the fermionic level.
pub fn apply_symmetry_shift_fermionic(op: &FermionicOperator, shift: &SymmetryShift) -> FermionicOperator {
    let n = op.n_spin_orbitals;
    let mut out = op.clone();
    out.constant -= shift.s0;
    for p in 0..n {
        out.one_body[p * n + p] -= shift.s1;
        for q in 0..n {
            out.two_body[((p * n + p) * n + q) * n + q] -= shift.s2;
        }
    }
    out
}

const SHIFT_STARTS: [(f64, f64); 4] = [(0.0, 0.0), (-1.0, 0.1), (-2.0, 0.25), (-0.5, 0.05)];

/// Optimized shift and the resulting objective value.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ShiftResult {
    pub shift: SymmetryShift,
    pub before: f64,
    pub after: f64,
}

fn best_shift(mut objective: impl FnMut(f64, f64) -> f64) -> ShiftResult {
    let before = objective(0.0, 0.0);
    let mut best = ShiftResult { shift: SymmetryShift::default(), before, after: before };
    for (a, b) in SHIFT_STARTS {
        let m = nelder_mead(|x| objective(x[0], x[1]), &[a, b], 0.1, 1e-7, 2000);
        if m.value < best.after {
            best.after = m.value;
            best.shift = SymmetryShift { s0: 0.0, s1: m.x[0], s2: m.x[1] };
        }
    }
    best
}

/// Shift minimizing the AC-SI LCU 1-norm of `h`.
pub fn optimize_shift_ac(h: &PauliPolynomial) -> Result<ShiftResult> {
    let n = h.n_qubits();
    let num = number_operator(n);
    let sq = num.product(&num)?.into_real(1e-12)?;
    if !conserves_number(h) {
        return Err(QresError::Symmetry("Hamiltonian does not conserve electron number".into()));
    }
    Ok(best_shift(|s1, s2| {
        let shifted = h.minus(&num.scaled(s1)).and_then(|x| x.minus(&sq.scaled(s2))).expect("equal widths");
        lcu_norm_ac(&sorted_insertion(&shifted, FragmentKind::Anticommuting)).expect("anticommuting").0
    }))
}

/// Shift minimizing the low-rank LCU 1-norm of `op`.
pub fn optimize_shift_lr(op: &FermionicOperator, tol: f64) -> Result<ShiftResult> {
    low_rank_decompose(op, tol)?;
    Ok(best_shift(|s1, s2| {
        let shifted = apply_symmetry_shift_fermionic(op, &SymmetryShift { s0: 0.0, s1, s2 });
        lcu_norm_lr(&low_rank_decompose(&shifted, tol).expect("symmetric supermatrix")).0
    }))
}
