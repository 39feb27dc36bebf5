//! Fourier data `c_k = ((B*)^{k_-} B^{k_+} x_0, x_0)` of the measure on the
//! polytorus induced by the regular unitary dilation of the contracted tuple,
//! and positivity checks on its Toeplitz sections.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{MomentError, Result};
use crate::lattice::{box_position, odometer, MultiIndex, SignedIndex};
use crate::linalg::{self, CMatrix, PsdCheck};
use crate::operator::OperatorTuple;

/// Hermitian-symmetric table over the signed box `[-m, m]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTable {
    pub n: usize,
    pub m: usize,
    /// Radius `C` of the polytorus the table lives on.
    pub scale: f64,
    entries: Vec<Complex64>,
}

impl FourierTable {
    /// Builds a table from a closure evaluated on canonical indices; the
    /// conjugate half is filled by symmetry.
    pub fn from_fn<F>(n: usize, m: usize, scale: f64, f: F) -> Self
    where
        F: Fn(&SignedIndex) -> Complex64 + Sync,
    {
        let side = 2 * m + 1;
        let total = side.pow(n as u32);
        let keys: Vec<SignedIndex> = (0..total).map(|p| signed_at(p, n, m)).collect();
        let canonical: Vec<Option<Complex64>> = keys
            .par_iter()
            .map(|k| if k.is_canonical() { Some(f(k)) } else { None })
            .collect();
        let mut entries = vec![Complex64::new(0.0, 0.0); total];
        for (p, k) in keys.iter().enumerate() {
            entries[p] = match canonical[p] {
                Some(v) if k.is_zero() => Complex64::new(v.re, 0.0),
                Some(v) => v,
                None => canonical[signed_position(&k.neg(), m)].expect("mirror is canonical").conj(),
            };
        }
        FourierTable { n, m, scale, entries }
    }

    pub fn get(&self, k: &SignedIndex) -> Option<Complex64> {
        if k.dim() != self.n || k.entries().iter().any(|e| e.unsigned_abs() as usize > self.m) {
            return None;
        }
        Some(self.entries[signed_position(k, self.m)])
    }

    pub fn c0(&self) -> f64 {
        self.entries[signed_position(&SignedIndex::zero(self.n), self.m)].re
    }

    /// Canonical half of the box: `0` plus one index of each conjugate pair,
    /// in lexicographic order.
    pub fn half_box(&self) -> Vec<SignedIndex> {
        half_box(self.n, self.m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (SignedIndex, Complex64)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(move |(p, v)| (signed_at(p, self.n, self.m), *v))
    }
}

pub(crate) fn half_box(n: usize, m: usize) -> Vec<SignedIndex> {
    let side = 2 * m + 1;
    (0..side.pow(n as u32))
        .map(|p| signed_at(p, n, m))
        .filter(SignedIndex::is_canonical)
        .collect()
}

fn signed_at(mut p: usize, n: usize, m: usize) -> SignedIndex {
    let side = 2 * m + 1;
    let mut e = vec![0i64; n];
    for j in (0..n).rev() {
        e[j] = (p % side) as i64 - m as i64;
        p /= side;
    }
    SignedIndex::new(e)
}

fn signed_position(k: &SignedIndex, m: usize) -> usize {
    let side = 2 * m + 1;
    k.entries()
        .iter()
        .fold(0usize, |acc, &e| acc * side + (e + m as i64) as usize)
}

/// Fourier table of radius `m` for the tuple, `c_k = (B^{k_+} x_0, B^{k_-} x_0)`.
pub fn fourier_table(tuple: &OperatorTuple, m: usize) -> Result<FourierTable> {
    if m < tuple.d {
        return Err(MomentError::InvalidArgument(format!(
            "table radius {m} below box degree {}",
            tuple.d
        )));
    }
    // Cache B^k x_0 over the nonnegative box; (B*^{k-} B^{k+} x, x) = (B^{k+} x, B^{k-} x).
    let powers = forward_powers(tuple, m);
    Ok(FourierTable::from_fn(tuple.n, m, tuple.c, |k| {
        let plus = &powers[box_position(&k.positive_part(), m).unwrap()];
        let minus = &powers[box_position(&k.negative_part(), m).unwrap()];
        minus.dotc(plus)
    }))
}

fn forward_powers(tuple: &OperatorTuple, m: usize) -> Vec<DVector<Complex64>> {
    let indices = odometer(tuple.n, m);
    let mut out: Vec<DVector<Complex64>> = Vec::with_capacity(indices.len());
    for k in &indices {
        // odometer order visits k - e_j before k for the last nonzero coordinate j
        let v = match k.entries().iter().rposition(|&e| e > 0) {
            None => tuple.x0.clone(),
            Some(j) => {
                let mut prev = k.entries().to_vec();
                prev[j] -= 1;
                let p = box_position(&MultiIndex::new(prev), m).unwrap();
                tuple.contraction(j) * &out[p]
            }
        };
        out.push(v);
    }
    out
}

/// Toeplitz section `M[p,q] = c_{p-q}` for `p, q` in `box(n, m)`.
pub fn pd_section(table: &FourierTable, m: usize) -> Result<CMatrix> {
    if m > table.m {
        return Err(MomentError::InvalidArgument(format!(
            "section radius {m} exceeds table radius {}",
            table.m
        )));
    }
    let idx = odometer(table.n, m);
    let dim = idx.len();
    Ok(CMatrix::from_fn(dim, dim, |p, q| {
        let diff: Vec<i64> = idx[p]
            .entries()
            .iter()
            .zip(idx[q].entries())
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect();
        table.get(&SignedIndex::new(diff)).expect("difference inside table")
    }))
}

/// See [`linalg::psd_check`].
pub fn psd_check(m: &CMatrix, tol: f64) -> PsdCheck {
    linalg::psd_check(m, tol)
}

/// Smallest eigenvalue estimate of a section, by bisection.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    linalg::min_eigenvalue(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{embed, MomentSpec};
    use crate::operator::{build_tuple, DEFAULT_MARGIN};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tuple_for(n: usize, entries: Vec<(Vec<usize>, Complex64)>) -> OperatorTuple {
        let spec = MomentSpec::new(n, entries.into_iter().map(|(k, v)| (MultiIndex::new(k), v)).collect()).unwrap();
        build_tuple(&embed(&spec), DEFAULT_MARGIN).unwrap()
    }

    #[test]
    fn simple_table() {
        let t = tuple_for(1, vec![(vec![0], c(1.0, 0.0)), (vec![1], c(0.0, 0.0))]);
        let table = fourier_table(&t, 1).unwrap();
        let got: Vec<Complex64> = (-1..=1).map(|e| table.get(&SignedIndex::new(vec![e])).unwrap()).collect();
        for (g, e) in got.iter().zip([c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]) {
            assert!((g - e).norm() < 1e-15);
        }
        let sec = pd_section(&table, 1).unwrap();
        assert!((sec - CMatrix::identity(2, 2)).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let t = tuple_for(
            2,
            vec![
                (vec![0, 0], c(2.0, 0.0)),
                (vec![1, 0], c(0.5, 0.5)),
                (vec![0, 2], c(-1.0, 0.3)),
                (vec![1, 1], c(0.2, -0.4)),
            ],
        );
        let table = fourier_table(&t, 3).unwrap();
        for (k, v) in table.iter() {
            assert!((v - t.apply_power(&k)).norm() < 1e-13, "{k}");
            assert_eq!(table.get(&k.neg()).unwrap(), v.conj());
        }
        assert!((table.c0() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn zero_tail_section_is_diagonal() {
        let t = tuple_for(2, vec![(vec![0, 0], c(3.0, 0.0))]);
        let table = fourier_table(&t, 2).unwrap();
        let sec = pd_section(&table, 2).unwrap();
        for i in 0..sec.nrows() {
            for j in 0..sec.ncols() {
                let expect = if i == j { 3.0 } else { 0.0 };
                assert!((sec[(i, j)] - c(expect, 0.0)).norm() < 1e-13);
            }
        }
        assert!(psd_check(&sec, 1e-8 * 3.0).psd);
    }

    #[test]
    fn radius_checks() {
        let t = tuple_for(1, vec![(vec![0], c(1.0, 0.0)), (vec![2], c(0.1, 0.0))]);
        assert!(fourier_table(&t, 1).is_err());
        let table = fourier_table(&t, 2).unwrap();
        assert!(pd_section(&table, 3).is_err());
    }

    #[test]
    fn half_box_counts() {
        assert_eq!(half_box(1, 2).len(), 3);
        assert_eq!(half_box(2, 2).len(), 13);
        assert!(half_box(2, 1).iter().all(SignedIndex::is_canonical));
    }
}
