//! Pauli products in symplectic form, real Pauli polynomials and the
//! Jordan-Wigner mapping.

mod jordan_wigner;
mod polynomial;
mod product;

pub use jordan_wigner::{excitation_table, jordan_wigner, ladder, number_operator};
pub use polynomial::{ComplexPauliSum, PauliPolynomial, SIMPLIFY_TOL};
pub use product::{PauliKey, PauliProduct, MAX_QUBITS};

use crate::error::{QresError, Result};
use crate::states::WaveVector;

/// Normalization tolerance accepted by expectation values.
pub const NORM_TOL: f64 = 1e-10;

/// `<psi|H|psi>`.
pub fn expectation(h: &PauliPolynomial, psi: &WaveVector) -> Result<f64> {
    check_state(h, psi)?;
    let v = psi.to_dense();
    let hv = h.apply_dense(&v);
    Ok(v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum())
}

/// `<psi|H^2|psi> - <psi|H|psi>^2`, evaluated as `‖(H - <H>) psi‖²` without
/// the identity term to avoid cancellation.
pub fn variance(h: &PauliPolynomial, psi: &WaveVector) -> Result<f64> {
    check_state(h, psi)?;
    let h = h.without_constant();
    let v = psi.to_dense();
    let hv = h.apply_dense(&v);
    let mean: f64 = v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum();
    Ok(hv.iter().zip(&v).map(|(a, b)| (a - b * mean).norm_sqr()).sum())
}

fn check_state(h: &PauliPolynomial, psi: &WaveVector) -> Result<()> {
    if h.n_qubits() != psi.n_qubits() {
        return Err(QresError::Dimension(format!(
            "operator on {} qubits, state on {}",
            h.n_qubits(),
            psi.n_qubits()
        )));
    }
    let n2 = psi.norm_sqr();
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(QresError::Normalization(n2));
    }
    Ok(())
}
