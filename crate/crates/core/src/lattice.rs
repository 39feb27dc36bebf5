//! Multi-index arithmetic on the box `K_d = {k : 0 <= k_j <= d}`.
//!
//! Boxes are enumerated lexicographically with the first coordinate most
//! significant, so the zero index is always at position 0 and the position of
//! `k` is its base-`(d+1)` numeral.

use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64;

use crate::error::{MomentError, Result};

/// Exponent vector of the monomial `z_1^{k_1} ... z_n^{k_n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// Total degree `|k|`.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn max_entry(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn to_signed(&self) -> SignedIndex {
        SignedIndex(self.0.iter().map(|&e| e as i64).collect())
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Integer index in `Z^n`, split as `k = k_plus - k_minus`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedIndex(Vec<i64>);

impl SignedIndex {
    pub fn new(entries: Vec<i64>) -> Self {
        SignedIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        SignedIndex(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn neg(&self) -> SignedIndex {
        SignedIndex(self.0.iter().map(|&e| -e).collect())
    }

    pub fn positive_part(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|&e| e.max(0) as usize).collect())
    }

    pub fn negative_part(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|&e| (-e).max(0) as usize).collect())
    }

    /// `sum_j |k_j|`, the exponent of the polytorus radius in `z^k`.
    pub fn abs_degree(&self) -> usize {
        self.0.iter().map(|e| e.unsigned_abs() as usize).sum()
    }

    /// True when the first nonzero coordinate is positive, or `k = 0`.
    /// Exactly one of `k`, `-k` satisfies this for `k != 0`.
    pub fn is_canonical(&self) -> bool {
        match self.0.iter().find(|&&e| e != 0) {
            Some(&e) => e > 0,
            None => true,
        }
    }

    /// Inner product `k . theta`.
    pub fn dot(&self, theta: &[f64]) -> f64 {
        self.0.iter().zip(theta).map(|(&k, &t)| k as f64 * t).sum()
    }
}

impl fmt::Display for SignedIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// A problem instance: dimension, index set containing zero, and the
/// prescribed complex moments aligned with the indices.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSpec {
    n: usize,
    indices: Vec<MultiIndex>,
    values: Vec<Complex64>,
}

impl MomentSpec {
    /// Validates and normalizes the entries so that the zero index comes first.
    pub fn new(n: usize, entries: Vec<(MultiIndex, Complex64)>) -> Result<Self> {
        if n == 0 {
            return Err(MomentError::InvalidSpec("dimension n must be positive".into()));
        }
        let mut seen = HashSet::with_capacity(entries.len());
        let mut zero = None;
        let mut rest = Vec::with_capacity(entries.len());
        for (k, v) in entries {
            if k.dim() != n {
                return Err(MomentError::InvalidSpec(format!(
                    "index {k} has length {} but n = {n}",
                    k.dim()
                )));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(MomentError::InvalidSpec(format!("value at {k} is not finite")));
            }
            if !seen.insert(k.clone()) {
                return Err(MomentError::InvalidSpec(format!("duplicate index {k}")));
            }
            if k.is_zero() {
                zero = Some((k, v));
            } else {
                rest.push((k, v));
            }
        }
        let zero = zero.ok_or_else(|| {
            MomentError::InvalidSpec("index set must contain the zero index".into())
        })?;
        let (mut indices, mut values) = (vec![zero.0], vec![zero.1]);
        for (k, v) in rest {
            indices.push(k);
            values.push(v);
        }
        Ok(MomentSpec { n, indices, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The mass moment `s_0`.
    pub fn s0(&self) -> Complex64 {
        self.values[0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.indices.iter().zip(self.values.iter())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max(1, max_k |s_k|)`, the scale used in pass/fail decisions.
    pub fn scale(&self) -> f64 {
        self.max_abs().max(1.0)
    }

    /// Smallest admissible box degree, at least 1.
    pub fn min_degree(&self) -> usize {
        self.indices.iter().map(MultiIndex::max_entry).max().unwrap_or(0).max(1)
    }

    /// Spec with values `s_k * factor^{|k|}`; moments of the pushforward under
    /// `z -> factor * z`.
    pub fn dilate(&self, factor: f64) -> MomentSpec {
        let values = self
            .iter()
            .map(|(k, v)| v * factor.powi(k.degree() as i32))
            .collect();
        MomentSpec { n: self.n, indices: self.indices.clone(), values }
    }
}

/// A spec re-indexed over the full box `K_d`, zero outside the original set.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSpec {
    pub n: usize,
    pub d: usize,
    pub boxed: Vec<MultiIndex>,
    pub values: Vec<Complex64>,
}

impl EmbeddedSpec {
    pub fn len(&self) -> usize {
        self.boxed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxed.is_empty()
    }

    pub fn position(&self, k: &MultiIndex) -> Option<usize> {
        box_position(k, self.d)
    }

    pub fn value(&self, k: &MultiIndex) -> Option<Complex64> {
        self.position(k).map(|p| self.values[p])
    }

    pub fn s0(&self) -> Complex64 {
        self.values[0]
    }
}

/// All of `K_d` in lexicographic order, zero index first.
pub fn box_indices(n: usize, d: usize) -> Result<Vec<MultiIndex>> {
    if n == 0 || d == 0 {
        return Err(MomentError::InvalidArgument(format!(
            "box requires n >= 1 and d >= 1 (got n = {n}, d = {d})"
        )));
    }
    Ok(odometer(n, d))
}

// Same enumeration without the d >= 1 restriction; used for table sections.
pub(crate) fn odometer(n: usize, d: usize) -> Vec<MultiIndex> {
    let total = (d + 1).pow(n as u32);
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![0usize; n];
    for _ in 0..total {
        out.push(MultiIndex(cur.clone()));
        for j in (0..n).rev() {
            if cur[j] < d {
                cur[j] += 1;
                break;
            }
            cur[j] = 0;
        }
    }
    out
}

/// Position of `k` in `box_indices(n, d)`, or `None` when outside the box.
pub fn box_position(k: &MultiIndex, d: usize) -> Option<usize> {
    let mut pos = 0usize;
    for &e in k.entries() {
        if e > d {
            return None;
        }
        pos = pos * (d + 1) + e;
    }
    Some(pos)
}

/// The band `K_{d;j} = {k in K_d : k_j <= d - 1}`, coordinate `j` 1-based.
pub fn band(n: usize, d: usize, j: usize) -> Result<Vec<MultiIndex>> {
    if j == 0 || j > n {
        return Err(MomentError::InvalidArgument(format!(
            "coordinate {j} out of range 1..={n}"
        )));
    }
    Ok(box_indices(n, d)?
        .into_iter()
        .filter(|k| k.0[j - 1] < d)
        .collect())
}

/// `W_j k`: increments coordinate `j` (1-based).
pub fn shift(k: &MultiIndex, j: usize) -> MultiIndex {
    let mut out = k.clone();
    out.0[j - 1] += 1;
    out
}

/// Embeds the spec into the minimal box `K_d`, zero-filling new indices.
pub fn embed(spec: &MomentSpec) -> EmbeddedSpec {
    embed_with_degree(spec, spec.min_degree()).expect("minimal degree always admissible")
}

/// Embeds into `K_d` for an explicit `d`, which must cover every index of the spec.
pub fn embed_with_degree(spec: &MomentSpec, d: usize) -> Result<EmbeddedSpec> {
    let need = spec.min_degree();
    if d < need {
        return Err(MomentError::InvalidArgument(format!(
            "box degree {d} is smaller than the largest exponent {need}"
        )));
    }
    let boxed = box_indices(spec.n(), d)?;
    let mut values = vec![Complex64::new(0.0, 0.0); boxed.len()];
    for (k, v) in spec.iter() {
        let p = box_position(k, d).expect("index inside box");
        values[p] = *v;
    }
    Ok(EmbeddedSpec { n: spec.n(), d, boxed, values })
}
