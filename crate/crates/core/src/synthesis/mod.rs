//! Atomic measures on the scaled polytorus reproducing a Fourier table.
//!
//! For `n = 1` the table is decomposed exactly (Caratheodory-Fejer/Pisarenko);
//! for `n >= 2` candidate atoms on a grid are weighted by NNLS and then
//! refined jointly in angle and weight.

pub mod nnls;
mod refine;
pub mod roots;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dilation::{fourier_table, FourierTable};
use crate::error::{MomentError, Result};
use crate::lattice::{embed_with_degree, MomentSpec, SignedIndex};
use crate::linalg::{self, CMatrix};
use crate::operator::{build_tuple, normalization_radius, DEFAULT_MARGIN};
use crate::verify::{self, Verdict};

pub use refine::Refined;
use refine::{refine_to, FitProblem};

/// Finitely atomic nonnegative measure on `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    pub n: usize,
    pub atoms: Vec<Vec<Complex64>>,
    pub weights: Vec<f64>,
}

impl AtomicMeasure {
    pub fn empty(n: usize) -> Self {
        AtomicMeasure { n, atoms: Vec::new(), weights: Vec::new() }
    }

    pub fn new(n: usize, atoms: Vec<Vec<Complex64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(MomentError::InvalidArgument(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        for a in &atoms {
            if a.len() != n {
                return Err(MomentError::DimensionMismatch { expected: n, got: a.len() });
            }
            if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(MomentError::InvalidArgument("atom coordinates must be finite".into()));
            }
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(MomentError::InvalidArgument(format!("weight {w} is not a finite nonnegative number")));
        }
        Ok(AtomicMeasure { n, atoms, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `max_i max_j |z_{i,j}|`, zero for the empty measure.
    pub fn support_radius(&self) -> f64 {
        self.atoms
            .iter()
            .flat_map(|a| a.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    /// Union of two measures on the same space.
    pub fn union(&self, other: &AtomicMeasure) -> AtomicMeasure {
        let mut out = self.clone();
        out.atoms.extend(other.atoms.iter().cloned());
        out.weights.extend(other.weights.iter().copied());
        out
    }

    /// Pushforward under `z -> factor * z`.
    pub fn dilate(&self, factor: f64) -> AtomicMeasure {
        AtomicMeasure {
            n: self.n,
            atoms: self
                .atoms
                .iter()
                .map(|a| a.iter().map(|z| z * factor).collect())
                .collect(),
            weights: self.weights.clone(),
        }
    }
}

/// Atoms on the unit torus, stored by angle.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusMeasure {
    pub n: usize,
    pub angles: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl TorusMeasure {
    pub fn empty(n: usize) -> Self {
        TorusMeasure { n, angles: Vec::new(), weights: Vec::new() }
    }

    fn from_flat(n: usize, angles: &[f64], weights: &[f64]) -> Self {
        TorusMeasure {
            n,
            angles: angles.chunks(n).map(|c| c.to_vec()).collect(),
            weights: weights.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `sum_i w_i e^{i k . theta_i}`.
    pub fn fourier(&self, k: &SignedIndex) -> Complex64 {
        self.angles
            .iter()
            .zip(&self.weights)
            .map(|(t, &w)| Complex64::from_polar(w, k.dot(t)))
            .sum()
    }

    /// Drops atoms with weight below `threshold`.
    pub fn pruned(&self, threshold: f64) -> TorusMeasure {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.weights[i] >= threshold && self.weights[i] > 0.0).collect();
        TorusMeasure {
            n: self.n,
            angles: keep.iter().map(|&i| self.angles[i].clone()).collect(),
            weights: keep.iter().map(|&i| self.weights[i]).collect(),
        }
    }

    /// Atoms `z_j = radius * e^{i theta_j}`; every coordinate has modulus `radius`.
    pub fn to_atomic(&self, radius: f64) -> AtomicMeasure {
        AtomicMeasure {
            n: self.n,
            atoms: self
                .angles
                .iter()
                .map(|t| t.iter().map(|&a| Complex64::from_polar(radius, a)).collect())
                .collect(),
            weights: self.weights.clone(),
        }
    }
}

/// Solver knobs. `None` fields resolve to dimension-dependent defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Moment-scale residual target relative to `max(1, max|s_k|)`;
    /// defaults to 1e-8 for `n = 1` and 1e-6 otherwise.
    pub tol: Option<f64>,
    /// Grid points per angular dimension.
    pub grid: usize,
    pub max_refine_iters: usize,
    pub margin: f64,
    /// Fourier table radius, defaults to the box degree.
    pub m: Option<usize>,
    /// Box degree override, defaults to the minimal admissible degree.
    pub box_degree: Option<usize>,
    /// Atoms lighter than `weight_prune * s_0` are dropped.
    pub weight_prune: f64,
    pub seed: u64,
    /// Pre-scale moments before construction; defaults to off for `n = 1`, on otherwise.
    pub normalize: Option<bool>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: None,
            grid: 64,
            max_refine_iters: 200,
            margin: DEFAULT_MARGIN,
            m: None,
            box_degree: None,
            weight_prune: 1e-12,
            seed: 0,
            normalize: None,
        }
    }
}

impl SolverConfig {
    pub fn tol_for(&self, n: usize) -> f64 {
        self.tol.unwrap_or(if n == 1 { 1e-8 } else { 1e-6 })
    }

    pub fn normalize_for(&self, n: usize) -> bool {
        self.normalize.unwrap_or(n >= 2)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(MomentError::InvalidArgument(format!("tol {t} must be positive")));
            }
        }
        if self.grid == 0 {
            return Err(MomentError::InvalidArgument("grid must be positive".into()));
        }
        if !(self.margin > 1.0) {
            return Err(MomentError::InvalidArgument(format!("margin {} must exceed 1", self.margin)));
        }
        if !(self.weight_prune > 0.0) {
            return Err(MomentError::InvalidArgument("weight_prune must be positive".into()));
        }
        if self.m == Some(0) {
            return Err(MomentError::InvalidArgument("table radius must be positive".into()));
        }
        Ok(())
    }
}

/// A synthesized measure together with the construction parameters.
#[derive(Debug, Clone)]
pub struct Solution {
    pub measure: AtomicMeasure,
    /// Box degree `d`.
    pub d: usize,
    /// Fourier table radius.
    pub m: usize,
    /// Contraction scale `C`.
    pub c: f64,
    /// Pre-scaling radius `r` (1 when normalization is off).
    pub r: f64,
    /// Polytorus radius `C * r` carrying every atom.
    pub radius: f64,
}

/// The zero measure, valid only for an all-zero spec.
pub fn solve_zero(spec: &MomentSpec) -> Result<AtomicMeasure> {
    if spec.values().iter().any(|v| *v != Complex64::new(0.0, 0.0)) {
        return Err(MomentError::InvalidArgument("solve_zero requires every moment to vanish".into()));
    }
    Ok(AtomicMeasure::empty(spec.n()))
}

fn toeplitz(c: &[Complex64]) -> CMatrix {
    let m = c.len();
    CMatrix::from_fn(m, m, |p, q| if p >= q { c[p - q] } else { c[q - p].conj() })
}

#[cfg(test)]
fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Phase offset for the equispaced lattice `offset + 2 pi j / (m + 1)` that
/// maximizes the smallest distance to the given angles.
fn equispaced_offset(angles: &[f64], m: usize) -> f64 {
    let h = 2.0 * PI / (m + 1) as f64;
    if angles.is_empty() {
        return h / 2.0;
    }
    let mut reduced: Vec<f64> = angles.iter().map(|a| a.rem_euclid(h)).collect();
    reduced.sort_by(f64::total_cmp);
    let mut best = (f64::NEG_INFINITY, h / 2.0);
    for i in 0..reduced.len() {
        let lo = reduced[i];
        let hi = if i + 1 < reduced.len() { reduced[i + 1] } else { reduced[0] + h };
        let gap = hi - lo;
        if gap > best.0 + 1e-15 {
            best = (gap, (lo + gap / 2.0).rem_euclid(h));
        }
    }
    best.1
}

/// Caratheodory-Fejer/Pisarenko decomposition of `c_0..c_m` into at most
/// `2m + 1` atoms on the unit circle.
pub fn cf_atoms_1d(c: &[Complex64], tol: f64) -> Result<TorusMeasure> {
    if c.is_empty() {
        return Err(MomentError::InvalidArgument("empty coefficient sequence".into()));
    }
    let c0 = c[0].re;
    if c.iter().all(|z| z.norm() == 0.0) {
        return Ok(TorusMeasure::empty(1));
    }
    let m = c.len() - 1;
    let t = toeplitz(c);
    let check = linalg::psd_check(&t, tol);
    if !check.psd {
        return Err(MomentError::NotPsd { witness: check.witness });
    }
    if m == 0 {
        return Ok(TorusMeasure { n: 1, angles: vec![vec![0.0]], weights: vec![c0] });
    }
    let lambda = linalg::min_eigenvalue(&t).clamp(0.0, c0);

    let mut angles = Vec::new();
    let mut weights = Vec::new();
    let spread = c0 - lambda;
    if spread > 1e-14 * c0 {
        let mut reduced = t.clone();
        for i in 0..=m {
            reduced[(i, i)] -= Complex64::new(lambda, 0.0);
        }
        let v = linalg::null_vector(&reduced, 3)
            .ok_or(MomentError::NotPsd { witness: -lambda })?;
        // T' v = 0 means sum_q v_q e^{-i q theta} = 0 at every atom
        let candidates: Vec<f64> = roots::roots(&v)?
            .into_iter()
            .map(|z| (-z.arg()).rem_euclid(2.0 * PI))
            .collect();
        let mut target = c.to_vec();
        target[0] = Complex64::new(spread, 0.0);
        let w = fit_weights_1d(&candidates, &target)?;
        for (a, w) in candidates.into_iter().zip(w) {
            if w > 0.0 {
                angles.push(a);
                weights.push(w);
            }
        }
    }
    if lambda > 0.0 {
        let offset = equispaced_offset(&angles, m);
        let share = lambda / (m + 1) as f64;
        for j in 0..=m {
            angles.push((offset + 2.0 * PI * j as f64 / (m + 1) as f64).rem_euclid(2.0 * PI));
            weights.push(share);
        }
    }
    Ok(TorusMeasure { n: 1, angles: angles.into_iter().map(|a| vec![a]).collect(), weights })
}

// Nonnegative fit of sum_i w_i e^{i k theta_i} = target_k for k = 0..m.
fn fit_weights_1d(angles: &[f64], target: &[Complex64]) -> Result<Vec<f64>> {
    let keys: Vec<SignedIndex> = (0..target.len()).map(|k| SignedIndex::new(vec![k as i64])).collect();
    let cands: Vec<Vec<f64>> = angles.iter().map(|&a| vec![a]).collect();
    let (a, b) = design(&keys, target, &cands, None);
    Ok(nnls::nnls(&a, &b)?.x.iter().copied().collect())
}

// Real design matrix: one row for k = 0, real and imaginary rows otherwise.
fn design(
    keys: &[SignedIndex],
    targets: &[Complex64],
    candidates: &[Vec<f64>],
    row_weights: Option<&[f64]>,
) -> (DMatrix<f64>, DVector<f64>) {
    let rows = 2 * keys.len() - usize::from(keys.iter().any(SignedIndex::is_zero));
    let mut a = DMatrix::zeros(rows, candidates.len());
    let mut b = DVector::zeros(rows);
    let mut row = 0;
    for (i, (k, c)) in keys.iter().zip(targets).enumerate() {
        let w = row_weights.map_or(1.0, |rw| rw[i]);
        for (j, t) in candidates.iter().enumerate() {
            let (s, co) = k.dot(t).sin_cos();
            a[(row, j)] = w * co;
            if !k.is_zero() {
                a[(row + 1, j)] = w * s;
            }
        }
        b[row] = w * c.re;
        if !k.is_zero() {
            b[row + 1] = w * c.im;
            row += 2;
        } else {
            row += 1;
        }
    }
    (a, b)
}

fn nnls_on_candidates(table: &FourierTable, candidates: Vec<Vec<f64>>, prune: f64) -> Result<TorusMeasure> {
    let keys = table.half_box();
    let targets: Vec<Complex64> = keys.iter().map(|k| table.get(k).unwrap()).collect();
    if targets.iter().all(|c| c.norm() == 0.0) {
        return Ok(TorusMeasure::empty(table.n));
    }
    let (a, b) = design(&keys, &targets, &candidates, None);
    let sol = nnls::nnls(&a, &b)?;
    let threshold = prune * table.c0().max(0.0);
    let mut out = TorusMeasure::empty(table.n);
    for (cand, &w) in candidates.into_iter().zip(sol.x.iter()) {
        if w > 0.0 && w >= threshold {
            out.angles.push(cand);
            out.weights.push(w);
        }
    }
    Ok(out)
}

/// Product-grid candidates with NNLS weights. Weights below
/// `prune * c_0` are dropped.
pub fn grid_nnls(table: &FourierTable, grid: usize, prune: f64) -> Result<TorusMeasure> {
    if grid == 0 {
        return Err(MomentError::InvalidArgument("grid must be positive".into()));
    }
    let n = table.n;
    let step = 2.0 * PI / grid as f64;
    let total = grid.pow(n as u32);
    let candidates = (0..total)
        .map(|mut p| {
            let mut t = vec![0.0; n];
            for j in (0..n).rev() {
                t[j] = (p % grid) as f64 * step;
                p /= grid;
            }
            t
        })
        .collect();
    nnls_on_candidates(table, candidates, prune)
}

/// Seeded uniform candidates on the torus with NNLS weights; Lawson-Hanson
/// inserts the candidate most correlated with the current residual at each step.
pub fn random_candidates_nnls(table: &FourierTable, count: usize, seed: u64, prune: f64) -> Result<TorusMeasure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates = (0..count)
        .map(|_| (0..table.n).map(|_| rng.gen::<f64>() * 2.0 * PI).collect())
        .collect();
    nnls_on_candidates(table, candidates, prune)
}

/// Weighted error `max_k C^{|k|} |sum_i w_i e^{ik.theta_i} - c_k|` over the
/// canonical half of the table.
pub fn table_error(measure: &TorusMeasure, table: &FourierTable) -> f64 {
    FitProblem::new(table, table.scale).max_error(measure)
}

/// Refines angles and weights until the moment-scale error
/// `max_k C^{|k|} |...|` is at most `config.tol * max(1, max_k C^{|k|} |c_k|)`.
pub fn refine(measure: &TorusMeasure, table: &FourierTable, config: &SolverConfig) -> Result<TorusMeasure> {
    let problem = FitProblem::new(table, table.scale);
    let scale = problem
        .targets
        .iter()
        .zip(&problem.row_weights)
        .map(|(c, w)| c.norm() * w)
        .fold(1.0, f64::max);
    let target = config.tol_for(table.n) * scale;
    refine_to(measure, &problem, target, config.max_refine_iters).map(|r| r.measure)
}

/// Solves the spec and returns the measure with its construction parameters.
pub fn solve(spec: &MomentSpec, config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    let n = spec.n();
    match verify::solvability(spec, verify::DEFAULT_TOL_IM) {
        Verdict::ZeroCase => {
            let d = config.box_degree.unwrap_or_else(|| spec.min_degree());
            return Ok(Solution { measure: solve_zero(spec)?, d, m: config.m.unwrap_or(d), c: 0.0, r: 1.0, radius: 0.0 });
        }
        Verdict::Unsolvable(reason) => return Err(MomentError::Unsolvable(reason)),
        Verdict::Solvable(_) => {}
    }
    let tol = config.tol_for(n);
    let r = if config.normalize_for(n) { normalization_radius(spec) } else { 1.0 };

    // Fold the imaginary part of s_0 away; the gate has bounded it.
    let mut folded: Vec<_> = spec.iter().map(|(k, v)| (k.clone(), *v)).collect();
    folded[0].1 = Complex64::new(folded[0].1.re, 0.0);
    let working = MomentSpec::new(n, folded)?.dilate(1.0 / r);

    let d = config.box_degree.unwrap_or_else(|| working.min_degree());
    let espec = embed_with_degree(&working, d)?;
    let tuple = build_tuple(&espec, config.margin)?;
    let m = config.m.unwrap_or(d).max(d);
    let table = fourier_table(&tuple, m)?;
    let radius = tuple.c * r;

    // Moment-scale error on the original spec is bounded by the weighted table
    // error with base C r plus the construction roundoff; leave half the budget.
    let problem = FitProblem::new(&table, radius);
    let target = 0.5 * tol * spec.scale();
    let prune = config.weight_prune;
    let s0 = table.c0();

    let initial = if n == 1 {
        let coeffs: Vec<Complex64> = (0..=m).map(|k| table.get(&SignedIndex::new(vec![k as i64])).unwrap()).collect();
        match cf_atoms_1d(&coeffs, 1e-8 * s0) {
            Ok(mu) => mu,
            Err(MomentError::RootFindingFailure { .. }) => grid_nnls(&table, config.grid, prune)?,
            Err(e) => return Err(e),
        }
    } else if n == 2 {
        grid_nnls(&table, config.grid, prune)?
    } else {
        random_candidates_nnls(&table, config.grid * config.grid, config.seed, prune)?
    };
    let refined = refine_to(&initial, &problem, target, config.max_refine_iters)?;
    let torus = refined.measure.pruned(prune * s0);
    let measure = torus.to_atomic(radius);

    let residual = verify::max_residual(spec, &measure)?;
    let limit = tol * spec.scale();
    if residual > limit {
        return Err(MomentError::ConvergenceFailure { residual, target: limit });
    }
    Ok(Solution { measure, d, m, c: tuple.c, r, radius })
}

/// Synthesizes an atomic solution; see [`solve`].
pub fn synthesize(spec: &MomentSpec, config: &SolverConfig) -> Result<AtomicMeasure> {
    solve(spec, config).map(|s| s.measure)
}
