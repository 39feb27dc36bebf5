//! Lawson-Hanson active-set solver for `min ||A x - b||_2` subject to `x >= 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{MomentError, Result};

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    pub residual: f64,
}

pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<NnlsSolution> {
    let (rows, cols) = a.shape();
    assert_eq!(rows, b.len(), "nnls: row mismatch");
    let mut x = DVector::<f64>::zeros(cols);
    if cols == 0 {
        return Ok(NnlsSolution { residual: b.norm(), x });
    }
    let col_scale = (0..cols).map(|j| a.column(j).norm()).fold(0.0, f64::max);
    let tol = 1e-13 * col_scale * b.norm().max(f64::MIN_POSITIVE);
    let mut passive = vec![false; cols];
    let max_outer = 3 * cols + 10;

    let mut outer = 0;
    loop {
        let resid = b - a * &x;
        let grad = a.tr_mul(&resid);
        let candidate = (0..cols)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let t = match candidate {
            Some(t) if grad[t] > tol => t,
            _ => break,
        };
        outer += 1;
        if outer > max_outer {
            return Err(MomentError::NnlsStall { iterations: outer });
        }
        passive[t] = true;

        let mut inner = 0;
        loop {
            inner += 1;
            if inner > cols + 5 {
                return Err(MomentError::NnlsStall { iterations: outer });
            }
            let set: Vec<usize> = (0..cols).filter(|&j| passive[j]).collect();
            let z = solve_passive(a, b, &set);
            if z.iter().all(|&v| v > 0.0) {
                for (&j, &v) in set.iter().zip(z.iter()) {
                    x[j] = v;
                }
                break;
            }
            // step back to the boundary of the feasible region
            let mut alpha = 1.0f64;
            for (&j, &v) in set.iter().zip(z.iter()) {
                if v <= 0.0 {
                    let denom = x[j] - v;
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            for (&j, &v) in set.iter().zip(z.iter()) {
                x[j] += alpha * (v - x[j]);
            }
            let mut dropped = false;
            for &j in &set {
                if x[j] <= 1e-15 * col_scale.max(1.0) * x.amax().max(f64::MIN_POSITIVE) || x[j] <= 0.0 {
                    x[j] = 0.0;
                    passive[j] = false;
                    dropped = true;
                }
            }
            if !dropped {
                // alpha hit zero on an index already at the boundary; drop the worst
                let worst = set
                    .iter()
                    .zip(z.iter())
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(&j, _)| j)
                    .unwrap();
                x[worst] = 0.0;
                passive[worst] = false;
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    let residual = (b - a * &x).norm();
    Ok(NnlsSolution { x, residual })
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, set: &[usize]) -> DVector<f64> {
    let sub = DMatrix::from_fn(a.nrows(), set.len(), |i, j| a[(i, set[j])]);
    let svd = sub.svd(true, true);
    let eps = 1e-14 * svd.singular_values.max();
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(set.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_optimum_is_feasible() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let s = nnls(&a, &b).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 2.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn active_constraint() {
        // unconstrained solution is (2, -1); optimum under x >= 0 is (1, 0)
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 2.0, 1.0, 0.0]);
        let b = DVector::from_vec(vec![1.0, 0.0, 2.0]);
        let s = nnls(&a, &b).unwrap();
        assert!(s.x.iter().all(|&v| v >= 0.0));
        assert!((s.x[0] - 1.0).abs() < 1e-12 && s.x[1] == 0.0, "{}", s.x);
    }

    #[test]
    fn zero_rhs() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let s = nnls(&a, &DVector::zeros(2)).unwrap();
        assert!(s.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn kkt_conditions_hold() {
        let a = DMatrix::from_fn(6, 10, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let b = DVector::from_fn(6, |i, _| (i as f64) - 2.5);
        let s = nnls(&a, &b).unwrap();
        let grad = a.tr_mul(&(&b - &a * &s.x));
        for j in 0..10 {
            assert!(s.x[j] >= 0.0);
            assert!(grad[j] <= 1e-9);
            if s.x[j] > 0.0 {
                assert!(grad[j].abs() <= 1e-9);
            }
        }
    }
}
