//! Durand-Kerner simultaneous iteration for all roots of a complex polynomial.

use num_complex::Complex64;

use crate::error::{MomentError, Result};

pub const MAX_ITERATIONS: usize = 2000;

/// Evaluates `sum_i coeffs[i] z^i` by Horner's rule.
pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn eval_derivative(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, (i, &a)| acc * z + a * i as f64)
}

/// Roots of the polynomial with ascending coefficients `coeffs`. Leading
/// coefficients below `1e-14 * max|a_i|` are trimmed first.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let scale = coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(Vec::new());
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let monic: Vec<Complex64> = coeffs[..=deg].iter().map(|a| a / lead).collect();
    if deg == 1 {
        return Ok(vec![-monic[0]]);
    }

    // Cauchy bound sets the starting circle; fixed phase offset breaks symmetry.
    let bound = 1.0 + monic[..deg].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let start_radius = bound.min(2.0).max(0.5);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|i| {
            let phase = 2.0 * std::f64::consts::PI * i as f64 / deg as f64 + 0.4;
            Complex64::from_polar(start_radius, phase)
        })
        .collect();

    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let mut biggest = 0.0f64;
        for i in 0..deg {
            let num = eval(&monic, z[i]);
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            if den.norm() == 0.0 {
                den = Complex64::new(1e-300, 0.0);
            }
            let step = num / den;
            z[i] -= step;
            biggest = biggest.max(step.norm() / z[i].norm().max(1.0));
        }
        if !biggest.is_finite() {
            break;
        }
        if biggest <= 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        // accept when every root is a root to working precision
        converged = z.iter().all(|&zi| {
            let mag: f64 = monic
                .iter()
                .enumerate()
                .map(|(i, a)| a.norm() * zi.norm().powi(i as i32))
                .sum();
            zi.re.is_finite() && zi.im.is_finite() && eval(&monic, zi).norm() <= 1e-10 * mag
        });
    }
    if !converged {
        return Err(MomentError::RootFindingFailure { iterations: MAX_ITERATIONS });
    }
    // Newton polish on the original polynomial
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let d = eval_derivative(&monic, *zi);
            if d.norm() == 0.0 {
                break;
            }
            let step = eval(&monic, *zi) / d;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            *zi -= step;
        }
    }
    Ok(z)
}
