//! Molecular integrals in a spin-orbital basis and the FCIDUMP interchange format.
//!
//! Spin-orbitals are interleaved: spatial orbital `p` owns spin-orbitals
//! `2p` (alpha) and `2p + 1` (beta). Two-electron integrals are kept in
//! chemists' notation `(pq|rs)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{QresError, Result};

const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    Restricted,
    Unrestricted,
}

/// One- and two-electron integrals expanded to spin-orbitals.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinOrbitalIntegrals {
    n_spin_orbitals: usize,
    n_electrons: usize,
    ms2: i64,
    reference_kind: ReferenceKind,
    /// `h[p * n + q]`, hartree.
    h: Vec<f64>,
    /// `(pq|rs)` at `((p * n + q) * n + r) * n + s`, hartree.
    g: Vec<f64>,
    e_core: f64,
}

impl SpinOrbitalIntegrals {
    /// Builds from restricted spatial integrals; `eri` is the full `(pq|rs)` tensor.
    pub fn from_restricted(
        n_orbitals: usize,
        n_electrons: usize,
        ms2: i64,
        h_spatial: &[f64],
        eri_spatial: &[f64],
        e_core: f64,
    ) -> Result<Self> {
        let m = n_orbitals;
        if h_spatial.len() != m * m || eri_spatial.len() != m.pow(4) {
            return Err(QresError::Dimension("spatial tensor sizes do not match NORB".into()));
        }
        let blocks = SpinBlocks {
            h_alpha: h_spatial.to_vec(),
            h_beta: h_spatial.to_vec(),
            aa: eri_spatial.to_vec(),
            bb: eri_spatial.to_vec(),
            ab: eri_spatial.to_vec(),
        };
        Self::from_blocks(m, n_electrons, ms2, ReferenceKind::Restricted, &blocks, e_core)
    }

    fn from_blocks(
        m: usize,
        n_electrons: usize,
        ms2: i64,
        kind: ReferenceKind,
        b: &SpinBlocks,
        e_core: f64,
    ) -> Result<Self> {
        let n = 2 * m;
        if n_electrons == 0 || n_electrons > n {
            return Err(QresError::Consistency(format!(
                "electron count {n_electrons} outside (0, {n}]"
            )));
        }
        let mut h = vec![0.0; n * n];
        let mut g = vec![0.0; n.pow(4)];
        let sidx = |p: usize, q: usize, r: usize, s: usize| ((p * m + q) * m + r) * m + s;
        for p in 0..m {
            for q in 0..m {
                h[(2 * p) * n + 2 * q] = b.h_alpha[p * m + q];
                h[(2 * p + 1) * n + 2 * q + 1] = b.h_beta[p * m + q];
                for r in 0..m {
                    for s in 0..m {
                        let gi = |a: usize, bq: usize, c: usize, d: usize| ((a * n + bq) * n + c) * n + d;
                        g[gi(2 * p, 2 * q, 2 * r, 2 * s)] = b.aa[sidx(p, q, r, s)];
                        g[gi(2 * p + 1, 2 * q + 1, 2 * r + 1, 2 * s + 1)] = b.bb[sidx(p, q, r, s)];
                        g[gi(2 * p, 2 * q, 2 * r + 1, 2 * s + 1)] = b.ab[sidx(p, q, r, s)];
                        g[gi(2 * r + 1, 2 * s + 1, 2 * p, 2 * q)] = b.ab[sidx(p, q, r, s)];
                    }
                }
            }
        }
        let ints = SpinOrbitalIntegrals {
            n_spin_orbitals: n,
            n_electrons,
            ms2,
            reference_kind: kind,
            h,
            g,
            e_core,
        };
        ints.validate()?;
        Ok(ints)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_spin_orbitals;
        for p in 0..n {
            for q in 0..n {
                if (self.h(p, q) - self.h(q, p)).abs() > SYMMETRY_TOL {
                    return Err(QresError::Consistency(format!("h not symmetric at ({p},{q})")));
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.g(p, q, r, s);
                        let perms = [self.g(q, p, r, s), self.g(p, q, s, r), self.g(r, s, p, q)];
                        if perms.iter().any(|w| (v - w).abs() > SYMMETRY_TOL) {
                            return Err(QresError::Consistency(format!(
                                "two-electron integrals lack permutational symmetry at ({p}{q}|{r}{s})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_spin_orbitals(&self) -> usize {
        self.n_spin_orbitals
    }
    pub fn n_orbitals(&self) -> usize {
        self.n_spin_orbitals / 2
    }
    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }
    pub fn ms2(&self) -> i64 {
        self.ms2
    }
    pub fn reference_kind(&self) -> ReferenceKind {
        self.reference_kind
    }
    pub fn e_core(&self) -> f64 {
        self.e_core
    }

    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.h[p * self.n_spin_orbitals + q]
    }

    /// Chemists' `(pq|rs)` over spin-orbitals.
    #[inline]
    pub fn g(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_spin_orbitals;
        self.g[((p * n + q) * n + r) * n + s]
    }

    pub fn h_tensor(&self) -> &[f64] {
        &self.h
    }

    pub fn g_tensor(&self) -> &[f64] {
        &self.g
    }

    /// Occupation numbers of the alpha/beta spin channels for the reference.
    pub fn spin_occupations(&self) -> (usize, usize) {
        let ne = self.n_electrons as i64;
        let na = ((ne + self.ms2) / 2) as usize;
        (na, self.n_electrons - na)
    }

    /// Spatial one-electron matrix of one spin channel (`0` alpha, `1` beta).
    pub fn spatial_h(&self, spin: usize) -> Vec<f64> {
        let m = self.n_orbitals();
        let mut out = vec![0.0; m * m];
        for p in 0..m {
            for q in 0..m {
                out[p * m + q] = self.h(2 * p + spin, 2 * q + spin);
            }
        }
        out
    }

    /// Spatial `(pq|rs)` block with `pq` in spin channel `s1` and `rs` in `s2`.
    pub fn spatial_g(&self, s1: usize, s2: usize) -> Vec<f64> {
        let m = self.n_orbitals();
        let mut out = vec![0.0; m.pow(4)];
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        out[((p * m + q) * m + r) * m + s] =
                            self.g(2 * p + s1, 2 * q + s1, 2 * r + s2, 2 * s + s2);
                    }
                }
            }
        }
        out
    }

    /// Returns a copy whose two-electron tensor is replaced; used by tests and tools.
    pub fn with_two_body(&self, g: Vec<f64>) -> Result<Self> {
        if g.len() != self.g.len() {
            return Err(QresError::Dimension("two-body tensor size mismatch".into()));
        }
        let out = SpinOrbitalIntegrals { g, ..self.clone() };
        out.validate()?;
        Ok(out)
    }
}

struct SpinBlocks {
    h_alpha: Vec<f64>,
    h_beta: Vec<f64>,
    aa: Vec<f64>,
    bb: Vec<f64>,
    ab: Vec<f64>,
}

#[derive(Debug, Default)]
struct Header {
    norb: Option<usize>,
    nelec: Option<usize>,
    ms2: i64,
    uhf: bool,
}

fn parse_header(text: &str) -> Result<(Header, usize)> {
    // returns the header and the byte offset where the integral lines start
    let upper = text.to_ascii_uppercase();
    let start = upper
        .find("&FCI")
        .ok_or_else(|| QresError::Parse("missing &FCI namelist".into()))?;
    let rest = &upper[start + 4..];
    let (end_rel, end_len) = match (rest.find("&END"), rest.find('/')) {
        (Some(a), Some(b)) if b < a => (b, 1),
        (Some(a), _) => (a, 4),
        (None, Some(b)) => (b, 1),
        (None, None) => return Err(QresError::Parse("unterminated namelist header".into())),
    };
    let body = &rest[..end_rel];
    let mut header = Header::default();
    let mut current: Option<String> = None;
    for token in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let (key, value) = match token.split_once('=') {
            Some((k, v)) => {
                current = Some(k.trim().to_string());
                (k.trim().to_string(), v.trim())
            }
            None => match &current {
                Some(k) => (k.clone(), token),
                None => return Err(QresError::Parse(format!("stray header token '{token}'"))),
            },
        };
        if value.is_empty() {
            continue;
        }
        let int = |v: &str| {
            v.parse::<i64>()
                .map_err(|_| QresError::Parse(format!("bad integer '{v}' for {key}")))
        };
        match key.as_str() {
            "NORB" => header.norb = Some(int(value)?.try_into().map_err(|_| bad_count("NORB"))?),
            "NELEC" => header.nelec = Some(int(value)?.try_into().map_err(|_| bad_count("NELEC"))?),
            "MS2" => header.ms2 = int(value)?,
            "UHF" => header.uhf = matches!(value, ".TRUE." | "T" | "TRUE" | ".T." | "1"),
            "IUHF" => header.uhf = int(value)? != 0,
            // ORBSYM, ISYM and anything else are accepted and ignored
            _ => {}
        }
    }
    Ok((header, start + 4 + end_rel + end_len))
}

fn bad_count(key: &str) -> QresError {
    QresError::Parse(format!("{key} must be non-negative"))
}

/// Tracks assigned tensor slots so conflicting duplicate entries are detected.
struct SlotWriter {
    m: usize,
    data: Vec<f64>,
    seen: HashMap<usize, f64>,
}

impl SlotWriter {
    fn new(m: usize, size: usize) -> Self {
        SlotWriter { m, data: vec![0.0; size], seen: HashMap::new() }
    }

    fn set(&mut self, idx: usize, v: f64) -> Result<()> {
        if let Some(old) = self.seen.insert(idx, v) {
            if (old - v).abs() > SYMMETRY_TOL {
                return Err(QresError::Consistency(format!(
                    "conflicting duplicate integral entries: {old} vs {v}"
                )));
            }
        }
        self.data[idx] = v;
        Ok(())
    }

    fn set_eri(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64, eight_fold: bool) -> Result<()> {
        let m = self.m;
        let at = |a: usize, b: usize, c: usize, d: usize| ((a * m + b) * m + c) * m + d;
        let mut slots = vec![at(i, j, k, l), at(j, i, k, l), at(i, j, l, k), at(j, i, l, k)];
        if eight_fold {
            slots.extend([at(k, l, i, j), at(l, k, i, j), at(k, l, j, i), at(l, k, j, i)]);
        }
        slots.sort_unstable();
        slots.dedup();
        for s in slots {
            self.set(s, v)?;
        }
        Ok(())
    }

    fn set_h(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        let m = self.m;
        self.set(i * m + j, v)?;
        if i != j {
            self.set(j * m + i, v)?;
        }
        Ok(())
    }
}

/// Parses FCIDUMP text into spin-orbital integrals.
pub fn parse_fcidump(text: &str) -> Result<SpinOrbitalIntegrals> {
    let (header, body_start) = parse_header(text)?;
    let m = header.norb.ok_or_else(|| QresError::Parse("header lacks NORB".into()))?;
    let nelec = header.nelec.ok_or_else(|| QresError::Parse("header lacks NELEC".into()))?;
    if m == 0 || 2 * m > crate::pauli::MAX_QUBITS {
        return Err(QresError::Parse(format!("unsupported NORB={m}")));
    }

    let mut eri = [
        SlotWriter::new(m, m.pow(4)),
        SlotWriter::new(m, m.pow(4)),
        SlotWriter::new(m, m.pow(4)),
    ];
    let mut hs = [SlotWriter::new(m, m * m), SlotWriter::new(m, m * m)];
    let mut e_core = 0.0;
    let mut block = 0usize;

    for (lineno, raw) in text[body_start..].lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(QresError::Parse(format!("integral line {}: expected 5 fields", lineno + 1)));
        }
        let value: f64 = fields[0]
            .replace(['D', 'd'], "e")
            .parse()
            .map_err(|_| QresError::Parse(format!("integral line {}: bad value '{}'", lineno + 1, fields[0])))?;
        let mut idx = [0usize; 4];
        for (slot, f) in idx.iter_mut().zip(&fields[1..]) {
            let v: i64 = f
                .parse()
                .map_err(|_| QresError::Parse(format!("integral line {}: bad index '{f}'", lineno + 1)))?;
            if v < 0 || v as usize > m {
                return Err(QresError::Index(format!(
                    "integral line {}: index {v} outside 1..={m}",
                    lineno + 1
                )));
            }
            *slot = v as usize;
        }
        let [i, j, k, l] = idx;
        if i == 0 && j == 0 && k == 0 && l == 0 {
            if header.uhf && block < 5 {
                block += 1;
            } else {
                e_core = value;
            }
            continue;
        }
        if i > 0 && j > 0 && k > 0 && l > 0 {
            let target = if header.uhf { block } else { 0 };
            if target > 2 {
                return Err(QresError::Parse(format!(
                    "integral line {}: two-electron entry in one-electron block",
                    lineno + 1
                )));
            }
            eri[target].set_eri(i - 1, j - 1, k - 1, l - 1, value, target != 2)?;
        } else if i > 0 && j > 0 && k == 0 && l == 0 {
            let target = if header.uhf {
                match block {
                    3 => 0,
                    4 => 1,
                    _ => {
                        return Err(QresError::Parse(format!(
                            "integral line {}: one-electron entry in two-electron block",
                            lineno + 1
                        )))
                    }
                }
            } else {
                0
            };
            hs[target].set_h(i - 1, j - 1, value)?;
        } else if i > 0 && j == 0 && k == 0 && l == 0 {
            // orbital energy, not needed
        } else {
            return Err(QresError::Parse(format!("integral line {}: malformed index pattern", lineno + 1)));
        }
    }

    let [aa, bb, ab] = eri;
    let [ha, hb] = hs;
    if header.uhf {
        let blocks = SpinBlocks { h_alpha: ha.data, h_beta: hb.data, aa: aa.data, bb: bb.data, ab: ab.data };
        SpinOrbitalIntegrals::from_blocks(m, nelec, header.ms2, ReferenceKind::Unrestricted, &blocks, e_core)
    } else {
        SpinOrbitalIntegrals::from_restricted(m, nelec, header.ms2, &ha.data, &aa.data, e_core)
    }
}

/// Serializes integrals back to FCIDUMP text (unique entries only).
pub fn write_fcidump(ints: &SpinOrbitalIntegrals) -> String {
    let m = ints.n_orbitals();
    let uhf = ints.reference_kind == ReferenceKind::Unrestricted;
    let mut s = String::new();
    let _ = writeln!(s, " &FCI NORB={m},NELEC={},MS2={},", ints.n_electrons, ints.ms2);
    let _ = writeln!(s, "  ORBSYM={}", "1,".repeat(m));
    let _ = writeln!(s, "  ISYM=1,");
    if uhf {
        let _ = writeln!(s, "  UHF=.TRUE.");
    }
    let _ = writeln!(s, " &END");
    let line = |s: &mut String, v: f64, i: usize, j: usize, k: usize, l: usize| {
        let _ = writeln!(s, "{v:23.16e} {i:4} {j:4} {k:4} {l:4}");
    };
    let pair = |i: usize, j: usize| i * (i + 1) / 2 + j;
    let eri_block = |s: &mut String, t: &[f64], eight: bool| {
        for i in 0..m {
            for j in 0..=i {
                for k in 0..m {
                    for l in 0..=k {
                        if eight && pair(i, j) < pair(k, l) {
                            continue;
                        }
                        let v = t[((i * m + j) * m + k) * m + l];
                        if v != 0.0 {
                            line(s, v, i + 1, j + 1, k + 1, l + 1);
                        }
                    }
                }
            }
        }
    };
    let h_block = |s: &mut String, h: &[f64]| {
        for i in 0..m {
            for j in 0..=i {
                let v = h[i * m + j];
                if v != 0.0 {
                    line(s, v, i + 1, j + 1, 0, 0);
                }
            }
        }
    };
    if uhf {
        eri_block(&mut s, &ints.spatial_g(0, 0), true);
        line(&mut s, 0.0, 0, 0, 0, 0);
        eri_block(&mut s, &ints.spatial_g(1, 1), true);
        line(&mut s, 0.0, 0, 0, 0, 0);
        eri_block(&mut s, &ints.spatial_g(0, 1), false);
        line(&mut s, 0.0, 0, 0, 0, 0);
        h_block(&mut s, &ints.spatial_h(0));
        line(&mut s, 0.0, 0, 0, 0, 0);
        h_block(&mut s, &ints.spatial_h(1));
        line(&mut s, 0.0, 0, 0, 0, 0);
    } else {
        eri_block(&mut s, &ints.spatial_g(0, 0), true);
        h_block(&mut s, &ints.spatial_h(0));
    }
    line(&mut s, ints.e_core, 0, 0, 0, 0);
    s
}

/// Second-quantized operator `sum t_pq E_pq + sum v_pqrs E_pq E_rs + c`
/// over spin-orbitals, with `E_pq = a+_p a_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionicOperator {
    pub n_spin_orbitals: usize,
    pub one_body: Vec<f64>,
    pub two_body: Vec<f64>,
    pub constant: f64,
}

impl FermionicOperator {
    pub fn zero(n: usize) -> Self {
        FermionicOperator { n_spin_orbitals: n, one_body: vec![0.0; n * n], two_body: vec![0.0; n.pow(4)], constant: 0.0 }
    }

    #[inline]
    pub fn t(&self, p: usize, q: usize) -> f64 {
        self.one_body[p * self.n_spin_orbitals + q]
    }

    #[inline]
    pub fn v(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_spin_orbitals;
        self.two_body[((p * n + q) * n + r) * n + s]
    }
}

/// Electronic Hamiltonian in the `E_pq E_rs` form:
/// `t_pq = h_pq - 1/2 sum_r (pr|rq)` and `v_pqrs = 1/2 (pq|rs)`.
pub fn assemble_fermionic_hamiltonian(ints: &SpinOrbitalIntegrals) -> FermionicOperator {
    let n = ints.n_spin_orbitals;
    let mut op = FermionicOperator::zero(n);
    for p in 0..n {
        for q in 0..n {
            let exchange: f64 = (0..n).map(|r| ints.g(p, r, r, q)).sum();
            op.one_body[p * n + q] = ints.h(p, q) - 0.5 * exchange;
        }
    }
    for (dst, src) in op.two_body.iter_mut().zip(ints.g_tensor()) {
        *dst = 0.5 * src;
    }
    op.constant = ints.e_core;
    op
}
