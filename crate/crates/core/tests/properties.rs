mod common;

use cmoment::dilation::{fourier_table, pd_section, psd_check};
use cmoment::lattice::{embed, MomentSpec, MultiIndex, SignedIndex};
use cmoment::operator::{build_tuple, moment_identity, DEFAULT_MARGIN};
use cmoment::synthesis::{solve, SolverConfig};
use cmoment::verify::{max_residual, random_instance, solvability, Verdict, DEFAULT_TOL_IM};
use num_complex::Complex64;
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=3, 1usize..=2, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tuple_commutes((n, d, seed) in dims()) {
        let s = common::random_spec(n, d, seed);
        let t = build_tuple(&embed(&s), DEFAULT_MARGIN).unwrap();
        let scale = t.matrices.iter().map(|a| cmoment::linalg::frobenius(a).powi(2)).fold(0.0, f64::max);
        prop_assert!(t.commutator_defect() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn moments_are_reproduced((n, d, seed) in dims()) {
        let s = common::random_spec(n, d, seed);
        let e = embed(&s);
        let t = build_tuple(&e, DEFAULT_MARGIN).unwrap();
        prop_assert!(moment_identity(&t, &e) <= 1e-10 * s.scale());
    }

    #[test]
    fn power_order_is_irrelevant((n, d, seed) in dims(), raw in prop::collection::vec(-2i64..=2, 3)) {
        let s = common::random_spec(n, d, seed);
        let t = build_tuple(&embed(&s), DEFAULT_MARGIN).unwrap();
        let k = SignedIndex::new(raw[..n].to_vec());
        let forward: Vec<usize> = (0..n).collect();
        let backward: Vec<usize> = (0..n).rev().collect();
        let a = t.apply_power_ordered(&k, &forward);
        let b = t.apply_power_ordered(&k, &backward);
        prop_assert!((a - b).norm() <= 1e-10 * t.x0.norm_squared().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn toeplitz_sections_are_psd((n, d, seed) in dims()) {
        let s = common::random_spec(n, d, seed);
        let e = embed(&s);
        let t = build_tuple(&e, DEFAULT_MARGIN).unwrap();
        let m = e.d + 1;
        let section = pd_section(&fourier_table(&t, m).unwrap(), m).unwrap();
        prop_assert!(psd_check(&section, 1e-8 * s.s0().re).psd);
    }

    #[test]
    fn gate_is_total(n in 1usize..=3, s0 in (-2.0f64..2.0, -1e-9f64..1e-9), s1 in (-2.0f64..2.0, -2.0f64..2.0)) {
        let mut k1 = vec![0; n];
        k1[n - 1] = 1;
        let spec = MomentSpec::new(n, vec![
            (MultiIndex::zero(n), Complex64::new(s0.0, s0.1)),
            (MultiIndex::new(k1), Complex64::new(s1.0, s1.1)),
        ]).unwrap();
        let verdict = solvability(&spec, DEFAULT_TOL_IM);
        let ok = match verdict {
            Verdict::Solvable(a) => s0.0 > 0.0 && (a * a - s0.0).abs() <= 1e-12 * s0.0.max(1.0),
            Verdict::ZeroCase => spec.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)),
            Verdict::Unsolvable(_) => s0.0 <= 0.0 || s0.1.abs() > DEFAULT_TOL_IM * s0.0.abs().max(1.0),
        };
        prop_assert!(ok);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn synthesis_commutes_with_dilation(d in 1usize..=3, atoms in 1usize..=3, seed in any::<u64>(), r in 0.5f64..2.0) {
        let (spec, _) = random_instance(1, d, atoms, seed, 1.0).unwrap();
        let sol = solve(&spec.dilate(r), &SolverConfig::default()).unwrap();
        let back = sol.measure.dilate(1.0 / r);
        prop_assert!(max_residual(&spec, &back).unwrap() <= 1e-8 * spec.scale());
    }
}
