use num_complex::Complex64;

use super::polynomial::{ComplexPauliSum, PauliPolynomial};
use super::product::PauliKey;
use crate::error::Result;
use crate::integrals::FermionicOperator;

const HERMITICITY_TOL: f64 = 1e-10;

/// `a_p` (or `a+_p`) under Jordan-Wigner, occupied = bit 1:
/// `a_p = Z_0 ... Z_{p-1} (X_p + i Y_p) / 2`.
pub fn ladder(n_qubits: usize, p: usize, dagger: bool) -> ComplexPauliSum {
    let tail = (1u64 << p) - 1;
    let bit = 1u64 << p;
    let mut out = ComplexPauliSum::new(n_qubits);
    out.add(PauliKey { z: tail, x: bit }, Complex64::new(0.5, 0.0));
    let y = if dagger { -0.5 } else { 0.5 };
    out.add(PauliKey { z: tail | bit, x: bit }, Complex64::new(0.0, y));
    out
}

/// `E_pq = a+_p a_q` for every pair, indexed `p * n + q`.
pub fn excitation_table(n: usize) -> Vec<ComplexPauliSum> {
    let up: Vec<_> = (0..n).map(|p| ladder(n, p, true)).collect();
    let down: Vec<_> = (0..n).map(|p| ladder(n, p, false)).collect();
    let mut table = Vec::with_capacity(n * n);
    for u in &up {
        for d in &down {
            let mut e = u.product(d);
            e.simplify();
            table.push(e);
        }
    }
    table
}

/// Maps `sum t E + sum v E E + c` to a real Pauli polynomial.
pub fn jordan_wigner(op: &FermionicOperator) -> Result<PauliPolynomial> {
    let n = op.n_spin_orbitals;
    let table = excitation_table(n);
    let mut acc = ComplexPauliSum::new(n);
    acc.add(PauliKey::IDENTITY, Complex64::new(op.constant, 0.0));
    for p in 0..n {
        for q in 0..n {
            let t = op.t(p, q);
            if t != 0.0 {
                acc.add_scaled(&table[p * n + q], Complex64::new(t, 0.0));
            }
            let mut inner = ComplexPauliSum::new(n);
            for r in 0..n {
                for s in 0..n {
                    let v = op.v(p, q, r, s);
                    if v != 0.0 {
                        inner.add_scaled(&table[r * n + s], Complex64::new(v, 0.0));
                    }
                }
            }
            if !inner.is_empty() {
                acc.add_scaled(&table[p * n + q].product(&inner), Complex64::new(1.0, 0.0));
            }
        }
    }
    acc.into_real(HERMITICITY_TOL)
}

/// Electron-number operator `N/2 - 1/2 sum_p Z_p`.
pub fn number_operator(n_qubits: usize) -> PauliPolynomial {
    let mut p = PauliPolynomial::new(n_qubits);
    p.add_term(PauliKey::IDENTITY, n_qubits as f64 / 2.0);
    for q in 0..n_qubits {
        p.add_term(PauliKey { z: 1 << q, x: 0 }, -0.5);
    }
    p.simplify();
    p
}
