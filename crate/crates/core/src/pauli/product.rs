use std::fmt;

use num_complex::Complex64;

use crate::error::{QresError, Result};

/// Maximum number of qubits a [`PauliProduct`] can address.
pub const MAX_QUBITS: usize = 64;

/// Unsigned symplectic label of a Pauli product, ordered by `(z, x)`.
///
/// The derived ordering compares `z` first and then `x`, which is the
/// deterministic tie-break used when sorting terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliKey {
    pub z: u64,
    pub x: u64,
}

impl PauliKey {
    pub const IDENTITY: PauliKey = PauliKey { z: 0, x: 0 };

    pub fn is_identity(self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of Y factors.
    pub fn y_count(self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Number of non-identity factors.
    pub fn weight(self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Symplectic inner product; `true` when the two products commute.
    pub fn commutes_with(self, other: PauliKey) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Action of the Hermitian product on a computational basis state:
    /// `P|b> = amplitude * |b ^ x>`.
    #[inline]
    pub fn apply_to_basis(self, b: u64) -> (Complex64, u64) {
        // P = i^{|x&z|} X^x Z^z
        let sign = if (self.z & b).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        (i_pow(self.y_count()) * sign, b ^ self.x)
    }

    /// Product of the two Hermitian canonical operators: returns `(k, key)` with
    /// `P_a P_b = i^k P_key`.
    #[inline]
    pub fn compose(self, other: PauliKey) -> (u32, PauliKey) {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let e = self.y_count() + other.y_count() + 2 * (self.z & other.x).count_ones() + 4 * 64
            - (x & z).count_ones();
        (e % 4, PauliKey { z, x })
    }
}

#[inline]
pub(crate) fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// A phased tensor product of single-qubit Paulis, `i^phase * P(x, z)`.
///
/// `P(x, z)` is the Hermitian product carrying `X` where only `x` is set,
/// `Z` where only `z` is set and `Y` where both are set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliProduct {
    n_qubits: usize,
    key: PauliKey,
    phase: u8,
}

impl PauliProduct {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS);
        PauliProduct { n_qubits, key: PauliKey::IDENTITY, phase: 0 }
    }

    pub fn new(n_qubits: usize, x_bits: u64, z_bits: u64, phase: u8) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(QresError::Dimension(format!("{n_qubits} qubits exceeds {MAX_QUBITS}")));
        }
        let mask = mask(n_qubits);
        if x_bits & !mask != 0 || z_bits & !mask != 0 {
            return Err(QresError::Dimension("bits set beyond qubit count".into()));
        }
        Ok(PauliProduct { n_qubits, key: PauliKey { z: z_bits, x: x_bits }, phase: phase % 4 })
    }

    pub fn from_key(n_qubits: usize, key: PauliKey) -> Self {
        PauliProduct { n_qubits, key, phase: 0 }
    }

    /// Single-qubit Pauli `op` (one of `I`, `X`, `Y`, `Z`) on `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, op: char) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(QresError::Dimension(format!("qubit {qubit} out of range {n_qubits}")));
        }
        let bit = 1u64 << qubit;
        let (x, z) = match op {
            'I' => (0, 0),
            'X' => (bit, 0),
            'Y' => (bit, bit),
            'Z' => (0, bit),
            _ => return Err(QresError::Parse(format!("unknown Pauli '{op}'"))),
        };
        Self::new(n_qubits, x, z, 0)
    }

    /// Parses a label such as `XIZY`; character `k` acts on qubit `k`.
    pub fn parse(label: &str) -> Result<Self> {
        let n = label.chars().count();
        if n > MAX_QUBITS {
            return Err(QresError::Dimension(format!("{n} qubits exceeds {MAX_QUBITS}")));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (q, c) in label.chars().enumerate() {
            let bit = 1u64 << q;
            match c {
                'I' => {}
                'X' => x |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit
                }
                'Z' => z |= bit,
                _ => return Err(QresError::Parse(format!("unknown Pauli '{c}' in '{label}'"))),
            }
        }
        Self::new(n, x, z, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    pub fn x_bits(&self) -> u64 {
        self.key.x
    }
    pub fn z_bits(&self) -> u64 {
        self.key.z
    }
    pub fn phase(&self) -> u8 {
        self.phase
    }
    pub fn key(&self) -> PauliKey {
        self.key
    }
    pub fn is_identity(&self) -> bool {
        self.key.is_identity()
    }
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }
    pub fn weight(&self) -> u32 {
        self.key.weight()
    }

    /// Complex scalar `i^phase`.
    pub fn phase_factor(&self) -> Complex64 {
        i_pow(self.phase as u32)
    }

    fn check(&self, other: &PauliProduct) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(QresError::Dimension(format!(
                "qubit count mismatch: {} vs {}",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(())
    }

    /// Phase-exact product `self * other`.
    pub fn multiply(&self, other: &PauliProduct) -> Result<PauliProduct> {
        self.check(other)?;
        let (k, key) = self.key.compose(other.key);
        let phase = ((self.phase as u32 + other.phase as u32 + k) % 4) as u8;
        Ok(PauliProduct { n_qubits: self.n_qubits, key, phase })
    }

    pub fn commutes(&self, other: &PauliProduct) -> Result<bool> {
        self.check(other)?;
        Ok(self.key.commutes_with(other.key))
    }

    pub fn anticommutes(&self, other: &PauliProduct) -> Result<bool> {
        self.commutes(other).map(|c| !c)
    }

    /// Label with the phase dropped.
    pub fn label(&self) -> String {
        (0..self.n_qubits)
            .map(|q| {
                let bit = 1u64 << q;
                match (self.key.x & bit != 0, self.key.z & bit != 0) {
                    (false, false) => 'I',
                    (true, false) => 'X',
                    (true, true) => 'Y',
                    (false, true) => 'Z',
                }
            })
            .collect()
    }

    /// Dense `2^n x 2^n` matrix, row-major; only intended for small `n`.
    pub fn dense_matrix(&self) -> Vec<Vec<Complex64>> {
        let dim = 1usize << self.n_qubits;
        let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        let ph = self.phase_factor();
        for b in 0..dim as u64 {
            let (amp, out) = self.key.apply_to_basis(b);
            m[out as usize][b as usize] = amp * ph;
        }
        m
    }
}

impl fmt::Display for PauliProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}{}", self.label())
    }
}

pub(crate) fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}
