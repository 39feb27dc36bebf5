//! Joint refinement of atom angles and weights by damped Gauss-Newton.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::TorusMeasure;
use crate::dilation::FourierTable;
use crate::error::{MomentError, Result};
use crate::lattice::SignedIndex;

/// Weighted fit problem over the canonical half of a Fourier table.
pub(crate) struct FitProblem {
    pub n: usize,
    pub keys: Vec<SignedIndex>,
    pub targets: Vec<Complex64>,
    pub row_weights: Vec<f64>,
}

impl FitProblem {
    /// Rows weighted by `base^{sum |k_j|}`.
    pub fn new(table: &FourierTable, base: f64) -> Self {
        let keys = table.half_box();
        let targets = keys.iter().map(|k| table.get(k).unwrap()).collect();
        let row_weights = keys.iter().map(|k| base.powi(k.abs_degree() as i32)).collect();
        FitProblem { n: table.n, keys, targets, row_weights }
    }

    pub fn rows(&self) -> usize {
        2 * self.keys.len() - 1
    }

    /// Largest weighted modulus error over the table.
    pub fn max_error(&self, measure: &TorusMeasure) -> f64 {
        self.keys
            .iter()
            .zip(&self.targets)
            .zip(&self.row_weights)
            .map(|((k, c), w)| w * (measure.fourier(k) - c).norm())
            .fold(0.0, f64::max)
    }

    fn residual(&self, angles: &[f64], weights: &[f64]) -> DVector<f64> {
        let mut r = DVector::zeros(self.rows());
        let mut row = 0;
        for ((k, c), w) in self.keys.iter().zip(&self.targets).zip(&self.row_weights) {
            let mut sum = Complex64::new(0.0, 0.0);
            for (i, &wi) in weights.iter().enumerate() {
                let phase = k.dot(&angles[i * self.n..(i + 1) * self.n]);
                sum += Complex64::from_polar(wi, phase);
            }
            let e = (sum - c) * *w;
            r[row] = e.re;
            row += 1;
            if !k.is_zero() {
                r[row] = e.im;
                row += 1;
            }
        }
        r
    }

    fn jacobian(&self, angles: &[f64], weights: &[f64]) -> DMatrix<f64> {
        let atoms = weights.len();
        let n = self.n;
        let params = atoms * (n + 1);
        let mut j = DMatrix::zeros(self.rows(), params);
        let mut row = 0;
        for (k, w) in self.keys.iter().zip(&self.row_weights) {
            for i in 0..atoms {
                let phase = k.dot(&angles[i * n..(i + 1) * n]);
                let (s, c) = phase.sin_cos();
                let wcol = atoms * n + i;
                j[(row, wcol)] = w * c;
                for (t, &kt) in k.entries().iter().enumerate() {
                    j[(row, i * n + t)] = -w * weights[i] * kt as f64 * s;
                }
                if !k.is_zero() {
                    j[(row + 1, wcol)] = w * s;
                    for (t, &kt) in k.entries().iter().enumerate() {
                        j[(row + 1, i * n + t)] = w * weights[i] * kt as f64 * c;
                    }
                }
            }
            row += if k.is_zero() { 1 } else { 2 };
        }
        j
    }
}

/// Outcome of a refinement run.
#[derive(Debug, Clone)]
pub struct Refined {
    pub measure: TorusMeasure,
    pub error: f64,
    pub iterations: usize,
}

/// Levenberg-damped Gauss-Newton on angles and weights until the weighted
/// error drops to `target`. Weights are clamped at zero after every step; an
/// atom that stays at zero weight for three consecutive steps is removed.
pub(crate) fn refine_to(
    measure: &TorusMeasure,
    problem: &FitProblem,
    target: f64,
    max_iters: usize,
) -> Result<Refined> {
    let n = problem.n;
    let mut error = problem.max_error(measure);
    if error <= target {
        return Ok(Refined { measure: measure.clone(), error, iterations: 0 });
    }
    let mut angles: Vec<f64> = measure.angles.iter().flatten().copied().collect();
    let mut weights = measure.weights.clone();
    let mut zero_streak = vec![0usize; weights.len()];
    let mut r = problem.residual(&angles, &weights);
    let mut cost = r.norm_squared();
    let mut damping: Option<f64> = None;

    for iter in 1..=max_iters {
        if weights.is_empty() {
            break;
        }
        let jac = problem.jacobian(&angles, &weights);
        let p = jac.ncols();
        let diag: Vec<f64> = (0..p).map(|c| jac.column(c).norm_squared()).collect();
        let diag_max = diag.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mu = damping.get_or_insert(1e-6);
        let mut accepted = false;
        for _ in 0..30 {
            // least squares on [J; sqrt(mu) D] delta = [-r; 0]
            let mut aug = DMatrix::zeros(jac.nrows() + p, p);
            aug.view_mut((0, 0), (jac.nrows(), p)).copy_from(&jac);
            for c in 0..p {
                aug[(jac.nrows() + c, c)] = (*mu * diag[c].max(1e-12 * diag_max)).sqrt();
            }
            let mut rhs = DVector::zeros(jac.nrows() + p);
            rhs.rows_mut(0, jac.nrows()).copy_from(&(-&r));
            let qr = aug.qr();
            let qtb = qr.q().tr_mul(&rhs);
            let delta = match qr.r().solve_upper_triangular(&qtb) {
                Some(d) if d.iter().all(|v| v.is_finite()) => d,
                _ => {
                    *mu *= 4.0;
                    continue;
                }
            };
            let trial_angles: Vec<f64> = angles.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
            let trial_weights: Vec<f64> = weights
                .iter()
                .zip(delta.iter().skip(angles.len()))
                .map(|(w, d)| (w + d).max(0.0))
                .collect();
            let trial_r = problem.residual(&trial_angles, &trial_weights);
            let trial_cost = trial_r.norm_squared();
            if trial_cost < cost {
                angles = trial_angles;
                weights = trial_weights;
                r = trial_r;
                cost = trial_cost;
                *mu = (*mu / 3.0).max(1e-15);
                accepted = true;
                break;
            }
            *mu *= 4.0;
        }

        for (i, w) in weights.iter().enumerate() {
            zero_streak[i] = if *w == 0.0 { zero_streak[i] + 1 } else { 0 };
        }
        if zero_streak.iter().any(|&z| z >= 3) {
            let keep: Vec<usize> = (0..weights.len()).filter(|&i| zero_streak[i] < 3).collect();
            angles = keep.iter().flat_map(|&i| angles[i * n..(i + 1) * n].to_vec()).collect();
            weights = keep.iter().map(|&i| weights[i]).collect();
            zero_streak = keep.iter().map(|&i| zero_streak[i]).collect();
        }

        let current = TorusMeasure::from_flat(n, &angles, &weights);
        error = problem.max_error(&current);
        if error <= target {
            return Ok(Refined { measure: current, error, iterations: iter });
        }
        if !accepted {
            break;
        }
    }
    Err(MomentError::ConvergenceFailure { residual: error, target })
}
