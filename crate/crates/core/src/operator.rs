//! The vectors `x_k`, their Gram matrix and the commuting shift tuple.
//!
//! Vectors are `x_0 = a e_0` and `x_k = e_k + (s_k / a) e_0` with `a = sqrt(s_0)`,
//! so `(x_k, x_0) = s_k`. The shift `A_j` sends `x_k` to `x_{W_j k}` on the
//! band `K_{d;j}` and to zero elsewhere. All matrices are expressed in an
//! orthonormal basis of `span{x_k}` obtained from the Cholesky factor of the
//! Gram matrix.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{MomentError, Result};
use crate::lattice::{box_position, shift, EmbeddedSpec, MomentSpec, SignedIndex};
use crate::linalg::{frobenius, CMatrix};

/// Default ratio `C / (sqrt(n) R)`.
pub const DEFAULT_MARGIN: f64 = 1.1;
/// Floor on `R` so that `C` stays positive on degenerate tuples.
pub const NORM_FLOOR: f64 = 1e-12;
/// Relative tolerance on the imaginary part of `s_0`.
pub const MASS_IMAG_TOL: f64 = 1e-12;

/// Real part of `s_0` when it is real within tolerance and positive.
pub(crate) fn real_mass(s0: Complex64) -> Option<f64> {
    if s0.im.abs() <= MASS_IMAG_TOL * s0.norm().max(1.0) && s0.re > 0.0 {
        Some(s0.re)
    } else {
        None
    }
}

/// Gram matrix `G[j,l] = (x_{k_j}, x_{k_l})`, inner product linear in the first slot.
pub fn gram(espec: &EmbeddedSpec) -> Result<CMatrix> {
    let s0 = real_mass(espec.s0()).ok_or_else(|| {
        MomentError::InvalidArgument(format!("s_0 = {} must be real and positive", espec.s0()))
    })?;
    let dim = espec.len();
    let s = &espec.values;
    Ok(DMatrix::from_fn(dim, dim, |j, l| match (j, l) {
        (0, 0) => Complex64::new(s0, 0.0),
        (_, 0) => s[j],
        (0, _) => s[l].conj(),
        _ => {
            let delta = if j == l { 1.0 } else { 0.0 };
            s[j] * s[l].conj() / s0 + delta
        }
    }))
}

/// Lower-triangular `L` with positive diagonal and `L L* = G`.
#[derive(Debug, Clone)]
pub struct GramFactor {
    pub l: CMatrix,
}

impl GramFactor {
    pub fn dim(&self) -> usize {
        self.l.nrows()
    }
}

pub fn orthonormal_factor(g: &CMatrix) -> Result<GramFactor> {
    crate::linalg::cholesky(g)
        .map(|l| GramFactor { l })
        .map_err(|(pivot, value)| MomentError::NotPositiveDefinite { pivot, value })
}

/// The commuting tuple in orthonormal coordinates together with `x_0` and the scale.
#[derive(Debug, Clone)]
pub struct OperatorTuple {
    pub n: usize,
    pub d: usize,
    /// `A~_j`, one per coordinate.
    pub matrices: Vec<CMatrix>,
    /// Coordinates of `x_0`.
    pub x0: DVector<Complex64>,
    /// `max_j ||A~_j||_F`.
    pub r: f64,
    /// `margin * sqrt(n) * max(R, NORM_FLOOR)`.
    pub c: f64,
    contractions: Vec<CMatrix>,
    adjoints: Vec<CMatrix>,
}

impl OperatorTuple {
    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    /// `B_j = A~_j / C`.
    pub fn contraction(&self, j: usize) -> &CMatrix {
        &self.contractions[j]
    }

    /// `max_{i<j} ||A~_i A~_j - A~_j A~_i||_F`.
    pub fn commutator_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let a = &self.matrices[i];
                let b = &self.matrices[j];
                worst = worst.max(frobenius(&(a * b - b * a)));
            }
        }
        worst
    }

    /// `sum_j (||A~_j||_F / C)^2`, an upper bound for `sum_j ||B_j||^2`.
    pub fn contraction_bound(&self) -> f64 {
        self.matrices.iter().map(|a| (frobenius(a) / self.c).powi(2)).sum()
    }

    /// `B^k x_0` for a nonnegative index, coordinates applied in order.
    pub fn forward_power(&self, k: &[usize]) -> DVector<Complex64> {
        let mut v = self.x0.clone();
        for (j, &e) in k.iter().enumerate() {
            for _ in 0..e {
                v = &self.contractions[j] * v;
            }
        }
        v
    }

    /// `((B*)^{k_-} B^{k_+} x_0, x_0)`.
    pub fn apply_power(&self, k: &SignedIndex) -> Complex64 {
        let order: Vec<usize> = (0..self.n).collect();
        self.apply_power_ordered(k, &order)
    }

    /// As `apply_power`, applying the coordinate factors in the given order.
    pub fn apply_power_ordered(&self, k: &SignedIndex, order: &[usize]) -> Complex64 {
        let mut v = self.x0.clone();
        for &j in order {
            let e = k.entries()[j];
            for _ in 0..e.max(0) {
                v = &self.contractions[j] * v;
            }
        }
        for &j in order {
            let e = k.entries()[j];
            for _ in 0..(-e).max(0) {
                v = &self.adjoints[j] * v;
            }
        }
        self.x0.dotc(&v)
    }
}

/// Builds the orthonormalized shift tuple for an embedded spec.
pub fn build_tuple(espec: &EmbeddedSpec, margin: f64) -> Result<OperatorTuple> {
    if !(margin > 1.0) {
        return Err(MomentError::InvalidArgument(format!("margin {margin} must exceed 1")));
    }
    let g = gram(espec)?;
    let factor = orthonormal_factor(&g)?;
    let n = espec.n;
    let d = espec.d;
    let dim = espec.len();

    // With G = L L*, the form (u, v) = beta^* conj(G) alpha on coefficient
    // vectors equals the standard one on y = L^T alpha.
    let lt = factor.l.transpose();
    let mut matrices = Vec::with_capacity(n);
    for j in 1..=n {
        let mut raw = CMatrix::zeros(dim, dim);
        for (col, k) in espec.boxed.iter().enumerate() {
            if k.entries()[j - 1] < d {
                let row = box_position(&shift(k, j), d).expect("band shifts stay in the box");
                raw[(row, col)] = Complex64::new(1.0, 0.0);
            }
        }
        // A~ = L^T raw L^{-T}, computed as (L^{-1} (raw^T L))^T
        let rhs = raw.transpose() * &factor.l;
        let solved = factor
            .l
            .solve_lower_triangular(&rhs)
            .ok_or(MomentError::NotPositiveDefinite { pivot: 0, value: 0.0 })?;
        matrices.push(solved.transpose());
    }
    let x0 = &lt * DVector::from_fn(dim, |i, _| if i == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    let r = matrices.iter().map(frobenius).fold(0.0, f64::max);
    let c = margin * (n as f64).sqrt() * r.max(NORM_FLOOR);
    let contractions: Vec<CMatrix> = matrices.iter().map(|a| a.map(|z| z / c)).collect();
    let adjoints = contractions.iter().map(|b| b.adjoint()).collect();
    Ok(OperatorTuple { n, d, matrices, x0, r, c, contractions, adjoints })
}

/// Largest `|C^{|k|} (B^k x_0, x_0) - s_k|` over the box.
pub fn moment_identity(tuple: &OperatorTuple, espec: &EmbeddedSpec) -> f64 {
    espec
        .boxed
        .iter()
        .zip(&espec.values)
        .map(|(k, s)| {
            let v = tuple.apply_power(&k.to_signed()) * tuple.c.powi(k.degree() as i32);
            (v - s).norm()
        })
        .fold(0.0, f64::max)
}

/// Radius `r` used to pre-scale moments as `s_k / r^{|k|}`:
/// `max_{k != 0} (|s_k| / s_0)^{1/|k|}`, clamped to `[1e-3, 1e3]`, or 1 when
/// every nonzero-index moment vanishes.
pub fn normalization_radius(spec: &MomentSpec) -> f64 {
    let s0 = spec.s0().norm();
    if !(s0 > 0.0) {
        return 1.0;
    }
    let r = spec
        .iter()
        .filter(|(k, v)| !k.is_zero() && v.norm() > 0.0)
        .map(|(k, v)| (v.norm() / s0).powf(1.0 / k.degree() as f64))
        .fold(0.0, f64::max);
    if r > 0.0 {
        r.clamp(1e-3, 1e3)
    } else {
        1.0
    }
}
