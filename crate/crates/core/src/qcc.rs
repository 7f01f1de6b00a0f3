//! Qubit coupled cluster: entangler pool and ranking, amplitude
//! optimization, iterative Hamiltonian dressing.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{QresError, Result};
use crate::linalg::{SectorBasis, SparseOperator};
use crate::optimize::{bfgs, BfgsOptions};
use crate::pauli::{PauliKey, PauliPolynomial, PauliProduct};
use crate::states::{eigensolve, overlap_sum, SymmetrySector, WaveVector};

type C64 = Complex64;

/// Gradients below this are treated as zero when ranking.
pub const GRADIENT_TOL: f64 = 1e-10;
/// Default number of entanglers per dressing round.
pub const DEFAULT_BATCH: usize = 10;
const RESTART_SPREAD: f64 = 0.1;

/// `|ψ(θ)> = e^{-iθ_K P_K} ... e^{-iθ_1 P_1} |ref>`.
#[derive(Clone, Debug)]
pub struct QccAnsatz {
    pub generators: Vec<PauliProduct>,
    pub amplitudes: Vec<f64>,
    pub reference: WaveVector,
}

impl QccAnsatz {
    pub fn new(reference: WaveVector) -> Self {
        QccAnsatz { generators: Vec::new(), amplitudes: Vec::new(), reference }
    }

    pub fn push(&mut self, p: PauliProduct, theta: f64) {
        self.generators.push(p);
        self.amplitudes.push(theta);
    }

    pub fn state(&self) -> Result<WaveVector> {
        let keys = hermitian_keys(&self.generators)?;
        let mut psi = self.reference.to_dense();
        for (&(k, s), &t) in keys.iter().zip(&self.amplitudes) {
            rotate(&mut psi, k, s * t);
        }
        Ok(WaveVector::from_dense(self.reference.n_qubits(), &psi))
    }
}

/// Keys and real signs of Hermitian generators.
fn hermitian_keys(gens: &[PauliProduct]) -> Result<Vec<(PauliKey, f64)>> {
    gens.iter()
        .map(|g| {
            if !g.is_hermitian() {
                return Err(QresError::Argument(format!("generator {g} is not Hermitian")));
            }
            Ok((g.key(), g.phase_factor().re))
        })
        .collect()
}

fn apply_key(psi: &[C64], k: PauliKey) -> Vec<C64> {
    let mut out = vec![C64::default(); psi.len()];
    for (b, a) in psi.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let (ph, c) = k.apply_to_basis(b as u64);
        out[c as usize] += ph * a;
    }
    out
}

/// `psi <- e^{-iθP} psi`.
fn rotate(psi: &mut [C64], k: PauliKey, theta: f64) {
    let p = apply_key(psi, k);
    let (s, c) = theta.sin_cos();
    let mis = C64::new(0.0, -s);
    for (a, pa) in psi.iter_mut().zip(p) {
        *a = *a * c + mis * pa;
    }
}

fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Ranked entangler with its gradient at `θ = 0` and the curvature proxy
/// `⟨ref|P H P|ref⟩ - ⟨ref|H|ref⟩`.
#[derive(Clone, Debug, Serialize)]
pub struct RankedGenerator {
    pub generator: String,
    #[serde(skip)]
    pub product: PauliProduct,
    pub gradient: f64,
    pub curvature: f64,
}

/// One representative per flip mask of `h`: `Y` on the lowest flipped qubit
/// and `X` on the others.
pub fn dis_pool(h: &PauliPolynomial) -> Vec<PauliProduct> {
    let mut masks: Vec<u64> = h.terms().map(|(k, _)| k.x).filter(|&x| x != 0).collect();
    masks.sort_unstable();
    masks.dedup();
    masks
        .into_iter()
        .map(|x| PauliProduct::from_key(h.n_qubits(), PauliKey { x, z: x & x.wrapping_neg() }))
        .collect()
}

/// `-i ⟨b|[H, P]|b⟩` for a basis state `b`.
pub fn gradient_at_basis(h: &PauliPolynomial, p: PauliKey, b: u64) -> f64 {
    // ⟨b|H P|b⟩ with P|b> = a |b^x>, only terms with the same flip mask contribute
    let (a, flipped) = p.apply_to_basis(b);
    let mut z = C64::default();
    for (k, c) in h.terms() {
        if k.x != p.x {
            continue;
        }
        let (ak, back) = k.apply_to_basis(flipped);
        debug_assert_eq!(back, b);
        z += ak * a * c;
    }
    2.0 * z.im
}

fn diagonal_energy(h: &PauliPolynomial, b: u64) -> f64 {
    h.terms().filter(|(k, _)| k.x == 0).map(|(k, c)| if (k.z & b).count_ones().is_multiple_of(2) { c } else { -c }).sum()
}

/// DIS candidates of `h` ranked by descending `|gradient|`; generators with
/// vanishing gradient follow, ordered by ascending `|curvature|`.
pub fn rank_generators(h: &PauliPolynomial, reference: &WaveVector, pool_size: usize) -> Result<Vec<RankedGenerator>> {
    let b = reference
        .as_basis_state()
        .ok_or_else(|| QresError::State("generator ranking needs a single-determinant reference".into()))?;
    let e_ref = diagonal_energy(h, b);
    let mut ranked: Vec<RankedGenerator> = dis_pool(h)
        .into_iter()
        .map(|p| {
            let gradient = gradient_at_basis(h, p.key(), b);
            let curvature = diagonal_energy(h, b ^ p.x_bits()) - e_ref;
            RankedGenerator { generator: p.label(), product: p, gradient, curvature }
        })
        .collect();
    if ranked.is_empty() {
        return Err(QresError::Pool);
    }
    ranked.sort_by(|a, b| {
        let (ga, gb) = (a.gradient.abs() > GRADIENT_TOL, b.gradient.abs() > GRADIENT_TOL);
        gb.cmp(&ga)
            .then_with(|| {
                if ga {
                    b.gradient.abs().total_cmp(&a.gradient.abs())
                } else {
                    a.curvature.abs().total_cmp(&b.curvature.abs())
                }
            })
            .then_with(|| a.product.key().cmp(&b.product.key()))
    });
    ranked.truncate(pool_size);
    Ok(ranked)
}

/// Energy and analytic gradient of the ansatz on a full-space operator.
fn energy_gradient(op: &SparseOperator, keys: &[(PauliKey, f64)], reference: &[C64], theta: &[f64]) -> (f64, Vec<f64>) {
    let mut psi = reference.to_vec();
    for (&(k, s), &t) in keys.iter().zip(theta) {
        rotate(&mut psi, k, s * t);
    }
    let mut lam = vec![C64::default(); psi.len()];
    op.apply(&psi, &mut lam);
    let energy = dotc(&psi, &lam).re;
    let mut grad = vec![0.0; keys.len()];
    for i in (0..keys.len()).rev() {
        let (k, s) = keys[i];
        let p_phi = apply_key(&psi, k);
        grad[i] = 2.0 * s * dotc(&lam, &p_phi).im;
        rotate(&mut psi, k, -s * theta[i]);
        rotate(&mut lam, k, -s * theta[i]);
    }
    (energy, grad)
}

/// Result of an amplitude optimization.
#[derive(Clone, Debug, Serialize)]
pub struct VqeResult {
    pub theta: Vec<f64>,
    pub energy: f64,
    pub initial_energy: f64,
    pub iterations: usize,
    /// `false` when the iteration cap was hit.
    pub converged: bool,
}

/// Quasi-Newton minimization of `⟨ψ(θ)|H|ψ(θ)⟩` from `θ0`.
pub fn vqe_minimize(h: &PauliPolynomial, ansatz: &QccAnsatz, theta0: &[f64]) -> Result<VqeResult> {
    let op = SparseOperator::from_polynomial(h, &SectorBasis::full(h.n_qubits()));
    vqe_with_operator(&op, ansatz, theta0)
}

fn vqe_with_operator(op: &SparseOperator, ansatz: &QccAnsatz, theta0: &[f64]) -> Result<VqeResult> {
    if theta0.len() != ansatz.generators.len() {
        return Err(QresError::Dimension(format!(
            "{} amplitudes for {} generators",
            theta0.len(),
            ansatz.generators.len()
        )));
    }
    let keys = hermitian_keys(&ansatz.generators)?;
    let reference = ansatz.reference.to_dense();
    let initial_energy = energy_gradient(op, &keys, &reference, theta0).0;
    let m = bfgs(|t| energy_gradient(op, &keys, &reference, t), theta0, BfgsOptions { max_iter: 1000, grad_tol: 1e-6 });
    Ok(VqeResult { theta: m.x, energy: m.value, initial_energy, iterations: m.iterations, converged: m.converged })
}

/// `e^{iθP} H e^{-iθP}`: terms commuting with `P` are kept, anticommuting
/// terms `K` become `cos 2θ K + i sin 2θ P K`.
pub fn iqcc_dress(h: &PauliPolynomial, p: &PauliProduct, theta: f64) -> Result<PauliPolynomial> {
    let (key, sign) = hermitian_keys(std::slice::from_ref(p))?[0];
    let theta = sign * theta;
    let (s2, c2) = (2.0 * theta).sin_cos();
    let mut out = PauliPolynomial::new(h.n_qubits());
    for (k, c) in h.terms() {
        if key.commutes_with(k) {
            out.add_term(k, c);
            continue;
        }
        out.add_term(k, c * c2);
        let (e, pk) = key.compose(k);
        // i * i^e is real for anticommuting pairs
        let phase = match (e + 1) % 4 {
            0 => 1.0,
            2 => -1.0,
            _ => unreachable!("product of anticommuting Hermitian Paulis is anti-Hermitian"),
        };
        out.add_term(pk, phase * c * s2);
    }
    out.simplify();
    Ok(out)
}

/// QCC run settings.
#[derive(Clone, Debug, Serialize)]
pub struct QccConfig {
    /// Cumulative entangler counts to report.
    pub schedule: Vec<usize>,
    /// Entanglers per dressing round.
    pub batch: usize,
    /// Random restarts when a round ends above `epsilon`.
    pub restarts: usize,
    pub seed: u64,
    /// Energy window (hartree) for restarts and the overlap sum.
    pub epsilon: f64,
}

impl Default for QccConfig {
    fn default() -> Self {
        QccConfig { schedule: vec![10, 20, 50], batch: DEFAULT_BATCH, restarts: 3, seed: 0, epsilon: 1.5e-3 }
    }
}

/// One row of a QCC table.
#[derive(Clone, Debug, Serialize)]
pub struct QccRow {
    pub n_ent: usize,
    pub energy: f64,
    pub exact_energy: f64,
    pub error: f64,
    pub overlap_sum: f64,
    pub converged: bool,
}

/// Iterative QCC over a cumulative entangler schedule.
///
/// Each round ranks the DIS pool of the dressed Hamiltonian at the
/// reference, optimizes the amplitudes of the top entanglers and dresses
/// the Hamiltonian with them. At every schedule point all selected
/// amplitudes are then reoptimized jointly on the bare Hamiltonian, warm
/// started from the round optima, and the dressing is rebuilt from them.
pub fn qcc_run(h: &PauliPolynomial, n_electrons: usize, config: &QccConfig) -> Result<Vec<QccRow>> {
    let n = h.n_qubits();
    let reference = crate::states::hf_state(n, n_electrons)?;
    let sector = SymmetrySector::electrons(n_electrons);
    let dim = sector.basis(n)?.dim();
    let eigenpairs = eigensolve(h, dim.min(10), Some(&sector))?;
    let e0 = eigenpairs[0].0;
    let full = SectorBasis::full(n);
    let bare = SparseOperator::from_polynomial(h, &full);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut schedule = config.schedule.clone();
    schedule.sort_unstable();
    schedule.dedup();
    let mut dressed = h.clone();
    let mut rounds: Vec<QccAnsatz> = Vec::new();
    let mut used = 0;
    let mut converged = true;
    let mut rows = Vec::new();
    let mut energy = crate::pauli::expectation(h, &reference)?;
    let mut exhausted = false;
    for &target in &schedule {
        let mut grew = false;
        while used < target && !exhausted {
            let take = config.batch.max(1).min(target - used);
            let ranked = match rank_generators(&dressed, &reference, take) {
                Ok(r) => r,
                Err(QresError::Pool) => {
                    exhausted = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            let mut ansatz = QccAnsatz::new(reference.clone());
            for r in &ranked {
                ansatz.push(r.product, 0.0);
            }
            let op = SparseOperator::from_polynomial(&dressed, &full);
            let best = restarted_vqe(&op, &ansatz, &vec![0.0; ranked.len()], e0, config, &mut rng)?;
            converged &= best.converged;
            ansatz.amplitudes = best.theta.clone();
            dressed = dress_round(&dressed, &ansatz)?;
            energy = energy.min(best.energy);
            used += ranked.len();
            rounds.push(ansatz);
            grew = true;
        }
        let joint = combined(&rounds, &reference);
        if grew {
            let best = restarted_vqe(&bare, &joint, &joint.amplitudes, e0, config, &mut rng)?;
            converged &= best.converged;
            if best.energy < energy {
                energy = best.energy;
                // rounds are stored last-applied first in the joint ansatz
                let mut theta = best.theta.as_slice();
                for round in rounds.iter_mut().rev() {
                    let (head, tail) = theta.split_at(round.generators.len());
                    round.amplitudes = head.to_vec();
                    theta = tail;
                }
                dressed = h.clone();
                for round in &rounds {
                    dressed = dress_round(&dressed, round)?;
                }
            }
        }
        let state = combined(&rounds, &reference).state()?;
        rows.push(QccRow {
            n_ent: target,
            energy,
            exact_energy: e0,
            error: energy - e0,
            overlap_sum: overlap_sum(&state, &eigenpairs, config.epsilon)?,
            converged,
        });
    }
    Ok(rows)
}

/// `U† H U` for the ansatz unitary `U`, so that `⟨ref|result|ref⟩` is the
/// ansatz energy: the first-applied generator dresses last.
pub fn dress_round(h: &PauliPolynomial, ansatz: &QccAnsatz) -> Result<PauliPolynomial> {
    let mut out = h.clone();
    for (g, &t) in ansatz.generators.iter().zip(&ansatz.amplitudes).rev() {
        out = iqcc_dress(&out, g, t)?;
    }
    Ok(out)
}

/// One ansatz equivalent to the dressing rounds: later rounds act first.
fn combined(rounds: &[QccAnsatz], reference: &WaveVector) -> QccAnsatz {
    let mut out = QccAnsatz::new(reference.clone());
    for round in rounds.iter().rev() {
        for (g, &t) in round.generators.iter().zip(&round.amplitudes) {
            out.push(*g, t);
        }
    }
    out
}

/// VQE from `theta0`, with random restarts when the result stays more than
/// `epsilon` above `e0`.
fn restarted_vqe(
    op: &SparseOperator,
    ansatz: &QccAnsatz,
    theta0: &[f64],
    e0: f64,
    config: &QccConfig,
    rng: &mut ChaCha8Rng,
) -> Result<VqeResult> {
    let mut best = vqe_with_operator(op, ansatz, theta0)?;
    if best.energy - e0 > config.epsilon {
        for _ in 0..config.restarts {
            let t0: Vec<f64> = best.theta.iter().map(|t| t + rng.random_range(-RESTART_SPREAD..RESTART_SPREAD)).collect();
            let r = vqe_with_operator(op, ansatz, &t0)?;
            if r.energy < best.energy {
                best = r;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;
    use crate::pauli::expectation;
    use nalgebra::DMatrix;

    fn poly(terms: &[(&str, f64)]) -> PauliPolynomial {
        let n = terms[0].0.len();
        PauliPolynomial::from_terms(n, terms.iter().map(|(l, c)| (PauliProduct::parse(l).unwrap().key(), *c)))
    }

    fn random_poly(n: usize, terms: usize, rng: &mut ChaCha8Rng) -> PauliPolynomial {
        let mask = (1u64 << n) - 1;
        let mut p = PauliPolynomial::new(n);
        for _ in 0..terms {
            p.add_term(PauliKey { x: rng.random::<u64>() & mask, z: rng.random::<u64>() & mask }, rng.random::<f64>() - 0.5);
        }
        p.simplify();
        p
    }

    fn dense(p: &PauliPolynomial) -> DMatrix<C64> {
        let op = SparseOperator::from_polynomial(p, &SectorBasis::full(p.n_qubits()));
        op.to_dense()
    }

    #[test]
    fn diagonal_hamiltonian_has_empty_pool() {
        let h = poly(&[("Z", 1.0)]);
        assert!(matches!(rank_generators(&h, &WaveVector::basis_state(1, 0), 5), Err(QresError::Pool)));
    }

    #[test]
    fn x_gradient_on_zero() {
        let h = poly(&[("X", 1.0)]);
        let r = rank_generators(&h, &WaveVector::basis_state(1, 0), 5).unwrap();
        assert_eq!(r[0].generator, "Y");
        assert!((r[0].gradient - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_generators_keep_reference_energy() {
        let h = poly(&[("ZZ", 0.7), ("XX", 0.2)]);
        let a = QccAnsatz::new(WaveVector::basis_state(2, 1));
        let r = vqe_minimize(&h, &a, &[]).unwrap();
        assert!((r.energy - expectation(&h, &WaveVector::basis_state(2, 1)).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn single_generator_closed_form() {
        // E(θ) = a + b cos 2θ + c sin 2θ with minimum a - sqrt(b² + c²)
        let h = poly(&[("ZI", 0.4), ("IZ", -0.3), ("XX", 0.25), ("YY", -0.1), ("II", 0.05)]);
        let mut a = QccAnsatz::new(WaveVector::basis_state(2, 0));
        a.push(PauliProduct::parse("XY").unwrap(), 0.0);
        let e = |t: f64| {
            let mut b = a.clone();
            b.amplitudes = vec![t];
            expectation(&h, &b.state().unwrap()).unwrap()
        };
        let (e0, e1, e2) = (e(0.0), e(std::f64::consts::FRAC_PI_2), e(std::f64::consts::FRAC_PI_4));
        let (aa, bb) = ((e0 + e1) / 2.0, (e0 - e1) / 2.0);
        let cc = e2 - aa;
        let exact = aa - (bb * bb + cc * cc).sqrt();
        let r = vqe_minimize(&h, &a, &[0.0]).unwrap();
        assert!((r.energy - exact).abs() < 1e-8, "{} vs {}", r.energy, exact);
    }

    #[test]
    fn analytic_gradient_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_poly(4, 20, &mut rng);
        let mut a = QccAnsatz::new(WaveVector::basis_state(4, 3));
        for _ in 0..4 {
            let k = PauliKey { x: rng.random::<u64>() & 15 | 1, z: rng.random::<u64>() & 15 };
            a.push(PauliProduct::from_key(4, k), 0.0);
        }
        let theta = [0.3, -0.2, 0.7, 0.1];
        let op = SparseOperator::from_polynomial(&h, &SectorBasis::full(4));
        let keys = hermitian_keys(&a.generators).unwrap();
        let reference = a.reference.to_dense();
        let (_, g) = energy_gradient(&op, &keys, &reference, &theta);
        for i in 0..4 {
            let mut tp = theta;
            tp[i] += 1e-5;
            let mut tm = theta;
            tm[i] -= 1e-5;
            let fd = (energy_gradient(&op, &keys, &reference, &tp).0 - energy_gradient(&op, &keys, &reference, &tm).0) / 2e-5;
            assert!((fd - g[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn dressing_matches_dense_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let h = random_poly(4, 15, &mut rng);
            let p = PauliProduct::from_key(4, PauliKey { x: rng.random::<u64>() & 15, z: rng.random::<u64>() & 15 });
            let theta = rng.random::<f64>() * 2.0 - 1.0;
            let dressed = dense(&iqcc_dress(&h, &p, theta).unwrap());
            let pm = dense(&PauliPolynomial::from_terms(4, [(p.key(), 1.0)]));
            let id = DMatrix::<C64>::identity(16, 16);
            let u = &id * C64::new(theta.cos(), 0.0) - &pm * C64::new(0.0, theta.sin());
            let expect = u.adjoint() * dense(&h) * &u;
            let err = dressed.iter().zip(expect.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10);
            // spectrum preserved
            let (a, _) = eigh(dressed);
            let (b, _) = eigh(dense(&h));
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
        }
        let h = poly(&[("ZZ", 1.0)]);
        assert_eq!(iqcc_dress(&h, &PauliProduct::parse("ZI").unwrap(), 0.4).unwrap(), h);
        let h2 = poly(&[("XZ", 1.0)]);
        assert_eq!(iqcc_dress(&h2, &PauliProduct::parse("ZI").unwrap(), 0.0).unwrap(), h2);
    }

    #[test]
    fn dressing_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = random_poly(4, 20, &mut rng);
        let p = PauliProduct::from_key(4, PauliKey { x: 0b0110, z: 0b0010 });
        let reference = WaveVector::basis_state(4, 0b0011);
        for theta in [0.1, -0.8, 1.3] {
            let mut a = QccAnsatz::new(reference.clone());
            a.push(p, theta);
            let lhs = expectation(&iqcc_dress(&h, &p, theta).unwrap(), &reference).unwrap();
            let rhs = expectation(&h, &a.state().unwrap()).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn round_dressing_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_poly(4, 30, &mut rng);
        let reference = WaveVector::basis_state(4, 0b0011);
        let mut a = QccAnsatz::new(reference.clone());
        // mutually anticommuting generators make the order matter
        a.push(PauliProduct::parse("YXII").unwrap(), 0.3);
        a.push(PauliProduct::parse("XYII").unwrap(), -0.7);
        a.push(PauliProduct::parse("IYXZ").unwrap(), 1.1);
        let lhs = expectation(&dress_round(&h, &a).unwrap(), &reference).unwrap();
        let rhs = expectation(&h, &a.state().unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
    }
}
