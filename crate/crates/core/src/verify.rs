//! Solvability gate, moment evaluation of atomic measures, residual reports
//! and seeded ground-truth instances.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{MomentError, Result};
use crate::lattice::{box_indices, MomentSpec, MultiIndex};
use crate::synthesis::{synthesize, AtomicMeasure, SolverConfig};

pub const DEFAULT_TOL_IM: f64 = crate::operator::MASS_IMAG_TOL;

/// Outcome of the solvability gate.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// `s_0 > 0`; carries `a = sqrt(s_0)`.
    Solvable(f64),
    /// Every moment vanishes; the zero measure solves it.
    ZeroCase,
    Unsolvable(String),
}

impl Verdict {
    pub fn is_solvable(&self) -> bool {
        !matches!(self, Verdict::Unsolvable(_))
    }
}

/// A problem with a nonnegative solution exists iff `s_0 > 0` or all moments vanish.
pub fn solvability(spec: &MomentSpec, tol_im: f64) -> Verdict {
    if spec.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Verdict::ZeroCase;
    }
    let s0 = spec.s0();
    if s0.im.abs() > tol_im * s0.norm().max(1.0) {
        return Verdict::Unsolvable(format!(
            "s_0 = {s0} is not real; the total mass of a nonnegative measure is real"
        ));
    }
    if s0.re > 0.0 {
        return Verdict::Solvable(s0.re.sqrt());
    }
    Verdict::Unsolvable(format!(
        "s_0 = {} must be positive: a measure with zero mass has all moments zero",
        s0.re
    ))
}

/// `z^k` for a point `z` in `C^n`.
pub fn monomial(z: &[Complex64], k: &MultiIndex) -> Complex64 {
    z.iter()
        .zip(k.entries())
        .fold(Complex64::new(1.0, 0.0), |acc, (zj, &e)| acc * zj.powu(e as u32))
}

/// `sum_i w_i z_i^k` for every `k`.
pub fn measure_moments(measure: &AtomicMeasure, indices: &[MultiIndex]) -> Result<Vec<Complex64>> {
    indices
        .iter()
        .map(|k| {
            if k.dim() != measure.n {
                return Err(MomentError::DimensionMismatch { expected: measure.n, got: k.dim() });
            }
            Ok(measure
                .atoms
                .iter()
                .zip(&measure.weights)
                .map(|(z, &w)| monomial(z, k) * w)
                .sum())
        })
        .collect()
}

/// `max_k |moment(measure, k) - s_k|` over the spec's indices.
pub fn max_residual(spec: &MomentSpec, measure: &AtomicMeasure) -> Result<f64> {
    let moments = measure_moments(measure, spec.indices())?;
    Ok(moments
        .iter()
        .zip(spec.values())
        .map(|(m, s)| (m - s).norm())
        .fold(0.0, f64::max))
}

/// Configuration values echoed in a report.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConfigEcho {
    pub tol: f64,
    pub grid: usize,
    pub margin: f64,
    pub max_refine_iters: usize,
    pub seed: u64,
    pub box_degree: Option<usize>,
    pub m: Option<usize>,
    pub normalize: bool,
}

impl ConfigEcho {
    pub fn new(config: &SolverConfig, n: usize) -> Self {
        ConfigEcho {
            tol: config.tol_for(n),
            grid: config.grid,
            margin: config.margin,
            max_refine_iters: config.max_refine_iters,
            seed: config.seed,
            box_degree: config.box_degree,
            m: config.m,
            normalize: config.normalize_for(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IndexResidual {
    pub k: Vec<usize>,
    pub residual: f64,
}

/// Residual report of a measure against a spec.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Report {
    pub residuals: Vec<IndexResidual>,
    pub max_residual: f64,
    /// `max(1, max_k |s_k|)`; pass/fail compares `max_residual` against `tol * scale`.
    pub scale: f64,
    pub total_mass: f64,
    pub support_radius: f64,
    pub atom_count: usize,
    pub config: ConfigEcho,
}

impl Report {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual <= tol * self.scale
    }

    pub fn summary(&self) -> String {
        format!(
            "atoms {}  mass {:.12e}  support radius {:.12e}  max residual {:.3e} (scale {:.3e})",
            self.atom_count, self.total_mass, self.support_radius, self.max_residual, self.scale
        )
    }
}

pub fn report(spec: &MomentSpec, measure: &AtomicMeasure, config: &SolverConfig) -> Result<Report> {
    let moments = measure_moments(measure, spec.indices())?;
    let residuals: Vec<IndexResidual> = spec
        .iter()
        .zip(&moments)
        .map(|((k, s), m)| IndexResidual { k: k.entries().to_vec(), residual: (m - s).norm() })
        .collect();
    let max_residual = residuals.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(Report {
        residuals,
        max_residual,
        scale: spec.scale(),
        total_mass: measure.mass(),
        support_radius: measure.support_radius(),
        atom_count: measure.len(),
        config: ConfigEcho::new(config, spec.n()),
    })
}

/// Seeded ground truth: `natoms` atoms uniform in the polydisc of the given
/// radius, weights uniform in `(0, 1]`, and the spec of their moments over
/// `box(n, d)`.
pub fn random_instance(
    n: usize,
    d: usize,
    natoms: usize,
    seed: u64,
    radius: f64,
) -> Result<(MomentSpec, AtomicMeasure)> {
    if natoms == 0 {
        return Err(MomentError::InvalidArgument("natoms must be at least 1".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(MomentError::InvalidArgument(format!("radius {radius} must be positive")));
    }
    let indices = box_indices(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut atoms = Vec::with_capacity(natoms);
    let mut weights = Vec::with_capacity(natoms);
    for _ in 0..natoms {
        let z = (0..n)
            .map(|_| {
                let rho = radius * rng.gen::<f64>().sqrt();
                let phi = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
                Complex64::from_polar(rho, phi)
            })
            .collect();
        atoms.push(z);
        weights.push(1.0 - rng.gen::<f64>());
    }
    let measure = AtomicMeasure::new(n, atoms, weights)?;
    let values = measure_moments(&measure, &indices)?;
    let spec = MomentSpec::new(n, indices.into_iter().zip(values).collect())?;
    Ok((spec, measure))
}

/// Represents a linear functional given on monomials, `L(z^k)`, as
/// integration against a nonnegative atomic measure.
pub fn functional_representation(
    n: usize,
    values: Vec<(MultiIndex, Complex64)>,
    config: &SolverConfig,
) -> Result<AtomicMeasure> {
    let spec = MomentSpec::new(n, values)?;
    if let Verdict::Unsolvable(reason) = solvability(&spec, DEFAULT_TOL_IM) {
        return Err(MomentError::Unsolvable(reason));
    }
    synthesize(&spec, config)
}

/// `sum_k alpha_k z^k` integrated against the measure.
pub fn integrate(measure: &AtomicMeasure, poly: &[(MultiIndex, Complex64)]) -> Result<Complex64> {
    let ks: Vec<MultiIndex> = poly.iter().map(|(k, _)| k.clone()).collect();
    let moments = measure_moments(measure, &ks)?;
    Ok(moments.iter().zip(poly).map(|(m, (_, a))| a * m).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn gate_examples() {
        let s = MomentSpec::new(1, vec![(mi(&[0]), c(1.0, 0.0)), (mi(&[1]), c(7.0, -3.0))]).unwrap();
        assert_eq!(solvability(&s, DEFAULT_TOL_IM), Verdict::Solvable(1.0));
        let s = MomentSpec::new(2, vec![(mi(&[0, 0]), c(0.0, 0.0)), (mi(&[1, 1]), c(0.0, 0.0))]).unwrap();
        assert_eq!(solvability(&s, DEFAULT_TOL_IM), Verdict::ZeroCase);
        let s = MomentSpec::new(1, vec![(mi(&[0]), c(0.0, 0.0)), (mi(&[1]), c(1.0, 0.0))]).unwrap();
        assert!(matches!(solvability(&s, DEFAULT_TOL_IM), Verdict::Unsolvable(_)));
        let s = MomentSpec::new(1, vec![(mi(&[0]), c(0.0, 1.0))]).unwrap();
        assert!(matches!(solvability(&s, DEFAULT_TOL_IM), Verdict::Unsolvable(_)));
        let s = MomentSpec::new(1, vec![(mi(&[0]), c(-2.0, 0.0))]).unwrap();
        assert!(matches!(solvability(&s, DEFAULT_TOL_IM), Verdict::Unsolvable(_)));
        // imaginary noise within tolerance is folded away
        let s = MomentSpec::new(1, vec![(mi(&[0]), c(4.0, 1e-15))]).unwrap();
        assert_eq!(solvability(&s, DEFAULT_TOL_IM), Verdict::Solvable(2.0));
    }

    #[test]
    fn moments_examples() {
        let empty = AtomicMeasure::empty(2);
        assert_eq!(measure_moments(&empty, &[mi(&[0, 0]), mi(&[3, 1])]).unwrap(), vec![c(0.0, 0.0); 2]);
        let mu = AtomicMeasure::new(2, vec![vec![c(2.0, 0.0), c(0.0, 1.0)]], vec![3.0]).unwrap();
        let v = measure_moments(&mu, &[mi(&[1, 2])]).unwrap();
        assert!((v[0] - c(-6.0, 0.0)).norm() < 1e-15);
        assert!(measure_moments(&mu, &[mi(&[1])]).is_err());
    }

    #[test]
    fn moments_are_linear_in_the_measure() {
        let a = AtomicMeasure::new(1, vec![vec![c(0.5, 0.5)]], vec![2.0]).unwrap();
        let b = AtomicMeasure::new(1, vec![vec![c(-1.0, 0.2)], vec![c(0.0, 3.0)]], vec![0.5, 1.5]).unwrap();
        let ks: Vec<MultiIndex> = (0..4).map(|e| mi(&[e])).collect();
        let ma = measure_moments(&a, &ks).unwrap();
        let mb = measure_moments(&b, &ks).unwrap();
        let mu = measure_moments(&a.union(&b), &ks).unwrap();
        for i in 0..4 {
            assert!((ma[i] + mb[i] - mu[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_report() {
        let spec = MomentSpec::new(1, vec![(mi(&[0]), c(0.0, 0.0)), (mi(&[2]), c(0.0, 0.0))]).unwrap();
        let r = report(&spec, &AtomicMeasure::empty(1), &SolverConfig::default()).unwrap();
        assert_eq!(r.max_residual, 0.0);
        assert_eq!(r.total_mass, 0.0);
        assert_eq!(r.atom_count, 0);
    }

    #[test]
    fn random_instance_is_ground_truth() {
        let (spec, mu) = random_instance(2, 2, 3, 17, 1.0).unwrap();
        assert!(matches!(solvability(&spec, DEFAULT_TOL_IM), Verdict::Solvable(_)));
        let r = report(&spec, &mu, &SolverConfig::default()).unwrap();
        assert!(r.max_residual <= 1e-14 * spec.scale());
        let (again, _) = random_instance(2, 2, 3, 17, 1.0).unwrap();
        assert_eq!(spec, again);
        assert!(mu.support_radius() <= 1.0);
        assert!(random_instance(2, 2, 0, 17, 1.0).is_err());
    }

    #[test]
    fn functional_point_evaluation() {
        let w = [c(0.3, -0.4), c(0.1, 0.6)];
        let values: Vec<(MultiIndex, Complex64)> = box_indices(2, 1)
            .unwrap()
            .into_iter()
            .map(|k| {
                let v = monomial(&w, &k);
                (k, v)
            })
            .collect();
        let config = SolverConfig::default();
        let mu = functional_representation(2, values.clone(), &config).unwrap();
        let spec = MomentSpec::new(2, values.clone()).unwrap();
        assert!(max_residual(&spec, &mu).unwrap() <= config.tol_for(2) * spec.scale());
        // integral of p = 2 - i z1 + 3 z1 z2
        let poly = vec![(mi(&[0, 0]), c(2.0, 0.0)), (mi(&[1, 0]), c(0.0, -1.0)), (mi(&[1, 1]), c(3.0, 0.0))];
        let exact: Complex64 = poly.iter().map(|(k, a)| a * monomial(&w, k)).sum();
        let alpha: f64 = poly.iter().map(|(_, a)| a.norm()).sum();
        assert!((integrate(&mu, &poly).unwrap() - exact).norm() <= config.tol_for(2) * spec.scale() * alpha);
    }

    #[test]
    fn functional_gate() {
        let config = SolverConfig::default();
        let bad = vec![(mi(&[0]), c(0.0, 0.0)), (mi(&[1]), c(1.0, 0.0))];
        assert!(matches!(functional_representation(1, bad, &config), Err(MomentError::Unsolvable(_))));
        let zero = vec![(mi(&[0]), c(0.0, 0.0)), (mi(&[1]), c(0.0, 0.0))];
        assert!(functional_representation(1, zero, &config).unwrap().is_empty());
    }
}
