#![allow(dead_code)]

use cmoment::lattice::{box_indices, MomentSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded spec over a random subset of `box(n, d)` containing zero:
/// `s_0` uniform in `[0.5, 10]`, other moments uniform in the disc `|s| <= 10`.
pub fn random_spec(n: usize, d: usize, seed: u64) -> MomentSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for k in box_indices(n, d).unwrap() {
        if k.is_zero() {
            entries.push((k, Complex64::new(rng.gen_range(0.5..=10.0), 0.0)));
        } else if k.max_entry() == d || rng.gen_bool(0.7) {
            let rho = 10.0 * rng.gen::<f64>().sqrt();
            let phi = rng.gen::<f64>() * std::f64::consts::TAU;
            entries.push((k, Complex64::from_polar(rho, phi)));
        }
    }
    MomentSpec::new(n, entries).unwrap()
}
