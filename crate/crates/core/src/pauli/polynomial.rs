use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use super::product::{i_pow, mask, PauliKey, PauliProduct};
use crate::error::{QresError, Result};

/// Coefficients below this magnitude are dropped on simplification (hartree).
pub const SIMPLIFY_TOL: f64 = 1e-12;

/// Real linear combination of Hermitian Pauli products.
///
/// Keys are phase-free; any phase produced by algebra is folded into the
/// coefficient before insertion.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliPolynomial {
    n_qubits: usize,
    terms: BTreeMap<PauliKey, f64>,
}

impl PauliPolynomial {
    pub fn new(n_qubits: usize) -> Self {
        PauliPolynomial { n_qubits, terms: BTreeMap::new() }
    }

    pub fn constant(n_qubits: usize, value: f64) -> Self {
        let mut p = Self::new(n_qubits);
        p.add_term(PauliKey::IDENTITY, value);
        p.simplify();
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (PauliKey, f64)>>(n_qubits: usize, terms: I) -> Self {
        let mut p = Self::new(n_qubits);
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p.simplify();
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Accumulates `c * P(key)`; does not simplify.
    pub fn add_term(&mut self, key: PauliKey, c: f64) {
        debug_assert!(key.x & !mask(self.n_qubits) == 0 && key.z & !mask(self.n_qubits) == 0);
        *self.terms.entry(key).or_insert(0.0) += c;
    }

    pub fn add_product(&mut self, p: &PauliProduct, c: f64) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(QresError::Dimension("product/polynomial qubit mismatch".into()));
        }
        let ph = p.phase_factor();
        if ph.im != 0.0 {
            return Err(QresError::Consistency("non-Hermitian phase in real polynomial".into()));
        }
        self.add_term(p.key(), c * ph.re);
        Ok(())
    }

    pub fn simplify(&mut self) {
        self.terms.retain(|_, c| c.abs() >= SIMPLIFY_TOL);
    }

    pub fn coefficient(&self, key: PauliKey) -> f64 {
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    /// Coefficient of the identity term.
    pub fn constant_term(&self) -> f64 {
        self.coefficient(PauliKey::IDENTITY)
    }

    pub fn terms(&self) -> impl Iterator<Item = (PauliKey, f64)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, *c))
    }

    /// Terms other than the identity.
    pub fn non_identity_terms(&self) -> impl Iterator<Item = (PauliKey, f64)> + '_ {
        self.terms().filter(|(k, _)| !k.is_identity())
    }

    pub fn without_constant(&self) -> Self {
        let mut p = self.clone();
        p.terms.remove(&PauliKey::IDENTITY);
        p
    }

    pub fn one_norm(&self) -> f64 {
        self.non_identity_terms().map(|(_, c)| c.abs()).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut p = self.clone();
        p.terms.values_mut().for_each(|c| *c *= s);
        p.simplify();
        p
    }

    pub fn plus(&self, other: &PauliPolynomial) -> Result<Self> {
        self.check(other)?;
        let mut p = self.clone();
        for (k, c) in other.terms() {
            p.add_term(k, c);
        }
        p.simplify();
        Ok(p)
    }

    pub fn minus(&self, other: &PauliPolynomial) -> Result<Self> {
        self.plus(&other.scaled(-1.0))
    }

    fn check(&self, other: &PauliPolynomial) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(QresError::Dimension(format!(
                "qubit count mismatch: {} vs {}",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(())
    }

    /// Full operator product; the result is generally not Hermitian.
    pub fn product(&self, other: &PauliPolynomial) -> Result<ComplexPauliSum> {
        self.check(other)?;
        let mut out = ComplexPauliSum::new(self.n_qubits);
        for (ka, ca) in self.terms() {
            for (kb, cb) in other.terms() {
                let (k, key) = ka.compose(kb);
                out.add(key, i_pow(k) * (ca * cb));
            }
        }
        Ok(out)
    }

    /// `[self, other]`; anti-Hermitian, returned as a complex sum.
    pub fn commutator(&self, other: &PauliPolynomial) -> Result<ComplexPauliSum> {
        self.check(other)?;
        let mut out = ComplexPauliSum::new(self.n_qubits);
        for (ka, ca) in self.terms() {
            for (kb, cb) in other.terms() {
                if ka.commutes_with(kb) {
                    continue;
                }
                let (k, key) = ka.compose(kb);
                // anticommuting pair: [A, B] = 2AB
                out.add(key, i_pow(k) * (2.0 * ca * cb));
            }
        }
        out.simplify();
        Ok(out)
    }

    /// True when every term commutes with `p`.
    pub fn termwise_commutes_with(&self, key: PauliKey) -> bool {
        self.terms.keys().all(|k| k.commutes_with(key))
    }

    /// `y = H x` on the full `2^n` space.
    pub fn apply_dense(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        self.apply_dense_into(x, &mut y);
        y
    }

    pub fn apply_dense_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), 1usize << self.n_qubits);
        for (k, c) in self.terms() {
            let base = i_pow(k.y_count()) * c;
            for (b, xb) in x.iter().enumerate() {
                if xb.re == 0.0 && xb.im == 0.0 {
                    continue;
                }
                let b = b as u64;
                let sign = if (k.z & b).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                y[(b ^ k.x) as usize] += base * sign * xb;
            }
        }
    }

    /// Line-oriented text form: `coeff pauli-string` per term.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, c) in self.terms() {
            let label = PauliProduct::from_key(self.n_qubits, k).label();
            let _ = writeln!(s, "{c:.16e} {label}");
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut n_qubits = None;
        let mut terms = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(c), Some(label), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(QresError::Parse(format!("line {}: expected 'coeff pauli'", lineno + 1)));
            };
            let c: f64 = c
                .parse()
                .map_err(|_| QresError::Parse(format!("line {}: bad coefficient '{c}'", lineno + 1)))?;
            let p = PauliProduct::parse(label)?;
            match n_qubits {
                None => n_qubits = Some(p.n_qubits()),
                Some(n) if n != p.n_qubits() => {
                    return Err(QresError::Dimension(format!("line {}: inconsistent width", lineno + 1)))
                }
                _ => {}
            }
            terms.push((p.key(), c));
        }
        let n = n_qubits.ok_or_else(|| QresError::Parse("empty Pauli polynomial".into()))?;
        Ok(Self::from_terms(n, terms))
    }
}

/// Complex-coefficient Pauli sum used for intermediate algebra.
#[derive(Clone, Debug, Default)]
pub struct ComplexPauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliKey, Complex64>,
}

impl ComplexPauliSum {
    pub fn new(n_qubits: usize) -> Self {
        ComplexPauliSum { n_qubits, terms: BTreeMap::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn add(&mut self, key: PauliKey, c: Complex64) {
        *self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn add_scaled(&mut self, other: &ComplexPauliSum, s: Complex64) {
        for (k, c) in &other.terms {
            self.add(*k, c * s);
        }
    }

    pub fn simplify(&mut self) {
        self.terms.retain(|_, c| c.norm() >= SIMPLIFY_TOL);
    }

    pub fn terms(&self) -> impl Iterator<Item = (PauliKey, Complex64)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn product(&self, other: &ComplexPauliSum) -> ComplexPauliSum {
        let mut out = ComplexPauliSum::new(self.n_qubits);
        for (ka, ca) in self.terms() {
            for (kb, cb) in other.terms() {
                let (k, key) = ka.compose(kb);
                out.add(key, i_pow(k) * ca * cb);
            }
        }
        out
    }

    /// Converts to a real polynomial, failing if any imaginary part exceeds `tol`.
    pub fn into_real(mut self, tol: f64) -> Result<PauliPolynomial> {
        self.simplify();
        let mut p = PauliPolynomial::new(self.n_qubits);
        for (k, c) in self.terms {
            if c.im.abs() > tol {
                return Err(QresError::Consistency(format!(
                    "operator is not Hermitian: imaginary coefficient {:.3e}",
                    c.im
                )));
            }
            p.add_term(k, c.re);
        }
        p.simplify();
        Ok(p)
    }

    pub fn apply_dense(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        for (k, c) in self.terms() {
            let base = i_pow(k.y_count()) * c;
            for (b, xb) in x.iter().enumerate() {
                let b = b as u64;
                let sign = if (k.z & b).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                y[(b ^ k.x) as usize] += base * sign * xb;
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(label: &str) -> PauliKey {
        PauliProduct::parse(label).unwrap().key()
    }

    #[test]
    fn text_round_trip() {
        let p = PauliPolynomial::from_terms(4, [(key("XIZY"), 0.5), (key("IIII"), -1.25)]);
        let q = PauliPolynomial::parse_text(&p.to_text()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn simplification_drops_tiny_terms() {
        let p = PauliPolynomial::from_terms(1, [(key("Z"), 1e-13), (key("X"), 1.0)]);
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn commutator_of_x_and_z() {
        let x = PauliPolynomial::from_terms(1, [(key("X"), 1.0)]);
        let z = PauliPolynomial::from_terms(1, [(key("Z"), 1.0)]);
        // [X, Z] = -2iY
        let c = x.commutator(&z).unwrap();
        let terms: Vec<_> = c.terms().collect();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].0, key("Y"));
        assert!((terms[0].1 - Complex64::new(0.0, -2.0)).norm() < 1e-14);
    }

    #[test]
    fn inconsistent_widths_rejected() {
        assert!(PauliPolynomial::parse_text("1.0 XX\n2.0 X\n").is_err());
    }
}
