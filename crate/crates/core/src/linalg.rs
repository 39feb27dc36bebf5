//! Small dense linear algebra on Hermitian matrices: pivoted Cholesky
//! positivity checks, bisection for the smallest eigenvalue, inverse
//! iteration for a null vector.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Outcome of a pivoted Cholesky attempt on `M + tol * I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCheck {
    pub psd: bool,
    /// Smallest pivot seen on success, or the first non-positive pivot on failure.
    pub witness: f64,
}

/// Largest deviation from Hermitian symmetry, `max |M[i,j] - conj(M[j,i])|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// True iff `M + tol * I` admits a pivoted Cholesky factorization with
/// strictly positive pivots.
pub fn psd_check(m: &CMatrix, tol: f64) -> PsdCheck {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "psd_check needs a square matrix");
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re + tol, 0.0);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut smallest = f64::INFINITY;
    for k in 0..n {
        // pivot on the largest remaining diagonal
        let (p, _) = (k..n)
            .map(|i| (i, a[(perm[i], perm[i])].re))
            .fold((k, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        perm.swap(k, p);
        let pk = perm[k];
        let pivot = a[(pk, pk)].re;
        if !(pivot > 0.0) {
            return PsdCheck { psd: false, witness: pivot };
        }
        smallest = smallest.min(pivot);
        let root = pivot.sqrt();
        for i in (k + 1)..n {
            let pi = perm[i];
            a[(pi, pk)] /= root;
        }
        for i in (k + 1)..n {
            let pi = perm[i];
            let lik = a[(pi, pk)];
            for j in (k + 1)..=i {
                let pj = perm[j];
                let ljk = a[(pj, pk)];
                let upd = lik * ljk.conj();
                a[(pi, pj)] -= upd;
                if i != j {
                    a[(pj, pi)] = a[(pi, pj)].conj();
                }
            }
        }
    }
    PsdCheck { psd: true, witness: if n == 0 { 0.0 } else { smallest } }
}

/// Unpivoted Cholesky `M = L L*` with a real positive diagonal. On failure
/// returns the index and value of the first non-positive pivot.
pub fn cholesky(m: &CMatrix) -> std::result::Result<CMatrix, (usize, f64)> {
    let n = m.nrows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = m[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if !(diag > 0.0) {
            return Err((j, diag));
        }
        let root = diag.sqrt();
        l[(j, j)] = Complex64::new(root, 0.0);
        for i in (j + 1)..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / root;
        }
    }
    Ok(l)
}

/// Solves `L L* x = b` for a Cholesky factor `L`.
pub fn cholesky_solve(l: &CMatrix, b: &DVector<Complex64>) -> DVector<Complex64> {
    let n = l.nrows();
    let mut y = b.clone();
    for i in 0..n {
        let mut v = y[i];
        for k in 0..i {
            v -= l[(i, k)] * y[k];
        }
        y[i] = v / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in (i + 1)..n {
            v -= l[(k, i)].conj() * y[k];
        }
        y[i] = v / l[(i, i)];
    }
    y
}

fn shifted(m: &CMatrix, lambda: f64) -> CMatrix {
    let mut out = m.clone();
    for i in 0..m.nrows() {
        out[(i, i)] -= Complex64::new(lambda, 0.0);
    }
    out
}

/// Resolution of the eigenvalue bisection.
pub const EIGEN_RESOLUTION: f64 = 1e-12;

/// Smallest eigenvalue of a Hermitian matrix by bisection on `lambda` with
/// `psd_check(M - lambda * I, 0)`. Returns a lower bound within
/// `EIGEN_RESOLUTION` of the true value, so `M - result * I` is PSD.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    // Gershgorin interval
    let mut lo = f64::INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum();
        lo = lo.min(m[(i, i)].re - radius);
        hi = hi.min(m[(i, i)].re);
    }
    lo -= EIGEN_RESOLUTION;
    while !psd_check(&shifted(m, lo), 0.0).psd {
        // roundoff can defeat the Gershgorin bound on nearly singular input
        lo -= (hi - lo).abs().max(EIGEN_RESOLUTION);
    }
    while hi - lo > EIGEN_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if psd_check(&shifted(m, mid), 0.0).psd {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Approximate null vector of a PSD matrix by inverse iteration on
/// `M + eps * I`, `eps = 1e-14 * trace`, starting from `e_0`.
pub fn null_vector(m: &CMatrix, iterations: usize) -> Option<Vec<Complex64>> {
    let n = m.nrows();
    let trace: f64 = (0..n).map(|i| m[(i, i)].re).sum();
    let mut eps = (1e-14 * trace.abs()).max(f64::MIN_POSITIVE);
    let chol = loop {
        let a = shifted(m, -eps);
        if let Ok(l) = cholesky(&a) {
            break l;
        }
        eps *= 10.0;
        if eps > trace.abs().max(1.0) {
            return None;
        }
    };
    let mut v = DVector::<Complex64>::zeros(n);
    v[0] = Complex64::new(1.0, 0.0);
    for _ in 0..iterations {
        v = cholesky_solve(&chol, &v);
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return None;
        }
        v /= Complex64::new(norm, 0.0);
    }
    Some(v.iter().copied().collect())
}

/// Frobenius norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cholesky_round_trip() {
        let m = CMatrix::from_row_slice(2, 2, &[c(4.0, 0.0), c(1.0, -2.0), c(1.0, 2.0), c(6.0, 0.0)]);
        let l = cholesky(&m).unwrap();
        assert!((&l * l.adjoint() - &m).iter().all(|z| z.norm() < 1e-14));
        let b = DVector::from_vec(vec![c(1.0, 1.0), c(-2.0, 0.5)]);
        let x = cholesky_solve(&l, &b);
        assert!((&m * x - b).iter().all(|z| z.norm() < 1e-14));
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(cholesky(&bad).unwrap_err().0, 1);
    }

    #[test]
    fn identity_is_psd() {
        let m = CMatrix::identity(3, 3);
        let r = psd_check(&m, 0.0);
        assert!(r.psd);
        assert_eq!(r.witness, 1.0);
    }

    #[test]
    fn indefinite_diagonal_fails() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        let r = psd_check(&m, 1e-9);
        assert!(!r.psd);
        assert!((r.witness + 1.0).abs() < 1e-8);
    }

    #[test]
    fn indefinite_with_positive_diagonal_fails() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0), c(1.0, 0.0)]);
        assert!(!psd_check(&m, 1e-9).psd);
    }

    #[test]
    fn singular_psd_passes_with_tolerance() {
        // rank one: v v^*
        let v = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        let m = CMatrix::from_fn(3, 3, |i, j| v[i] * v[j].conj());
        assert!(psd_check(&m, 1e-12).psd);
        assert!(!psd_check(&m, -1e-6).psd);
    }

    #[test]
    fn min_eigenvalue_of_known_matrix() {
        // eigenvalues 1 and 3
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let lam = min_eigenvalue(&m);
        assert!((lam - 1.0).abs() <= 2.0 * EIGEN_RESOLUTION, "{lam}");
        assert!(lam <= 1.0);
    }

    #[test]
    fn null_vector_of_rank_deficient() {
        let v = [c(1.0, 0.0), c(0.0, 1.0)];
        let m = CMatrix::from_fn(2, 2, |i, j| v[i] * v[j].conj());
        let x = null_vector(&m, 3).unwrap();
        let mx = (0..2).map(|i| (0..2).map(|j| m[(i, j)] * x[j]).sum::<Complex64>().norm()).fold(0.0, f64::max);
        assert!(mx < 1e-10);
    }
}
