use std::f64::consts::PI;

use edgeflow::indices::{
    index_i, maslov_index, unitary_spectral_flow, winding_number, LoopConfig, PlaneLoop,
};
use edgeflow::linalg::{c, CMatrix, C64};
use edgeflow::random::haar_unitary;
use edgeflow::{Error, Tolerances};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn haar_loop(label: &str, n: usize, nodes: usize, seed: u64, first: Option<CMatrix>) -> PlaneLoop {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut samples: Vec<CMatrix> = (0..nodes).map(|_| haar_unitary(n, &mut r)).collect();
    if let Some(u) = first {
        samples[0] = u;
    }
    PlaneLoop::from_unitary_samples(label, samples, &Tolerances::default()).unwrap()
}

/// Non-generic draws (a crossing too degenerate to classify) are discarded.
fn regular<T>(r: Result<T, Error>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(Error::NonRegular { .. }) | Err(Error::RefinementExhausted { .. }) => None,
        Err(e) => panic!("unexpected error: {e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn maslov_equals_unitary_flow(seed in any::<u64>(), n in 1usize..=4, nodes in 2usize..=4) {
        let tol = Tolerances::default();
        let cfg = LoopConfig::default();
        let l1 = haar_loop("a", n, nodes, seed, None);
        let l2 = haar_loop("b", n, nodes, seed.wrapping_add(1), None);
        let Some(m) = regular(maslov_index(&l1, &l2, &cfg, &tol)) else { return Ok(()) };
        let w = |t: f64| -> edgeflow::Result<CMatrix> {
            Ok(l2.unitary(t, &tol)?.matrix().adjoint() * l1.unitary(t, &tol)?.matrix())
        };
        let Some(sf) = regular(unitary_spectral_flow(&w, c(1.0, 0.0), &cfg)) else { return Ok(()) };
        prop_assert_eq!(m.value, sf);
        prop_assert_eq!(m.unitary_flow, sf);
    }

    #[test]
    fn maslov_is_antisymmetric(seed in any::<u64>(), n in 1usize..=3) {
        let tol = Tolerances::default();
        let cfg = LoopConfig::default();
        let l1 = haar_loop("a", n, 3, seed, None);
        let l2 = haar_loop("b", n, 3, seed.wrapping_add(7), None);
        let (Some(a), Some(b)) = (regular(maslov_index(&l1, &l2, &cfg, &tol)), regular(maslov_index(&l2, &l1, &cfg, &tol))) else {
            return Ok(());
        };
        prop_assert_eq!(a.value, -b.value);
    }

    #[test]
    fn index_adds_under_concatenation(seed in any::<u64>(), n in 1usize..=3) {
        let tol = Tolerances::default();
        let cfg = LoopConfig::default();
        let base = haar_unitary(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let a = haar_loop("a", n, 3, seed.wrapping_add(1), Some(base.clone()));
        let b = haar_loop("b", n, 4, seed.wrapping_add(2), Some(base));
        let ab = PlaneLoop::concatenate(&a, &b, &tol).unwrap();
        let (Some(ia), Some(ib), Some(iab)) = (
            regular(index_i(&a, &cfg, &tol)),
            regular(index_i(&b, &cfg, &tol)),
            regular(index_i(&ab, &cfg, &tol)),
        ) else {
            return Ok(());
        };
        prop_assert_eq!(iab.value, ia.value + ib.value);
    }

    #[test]
    fn winding_ignores_refinement_and_rotation(
        k in -4i64..=4,
        wobble in 0.0f64..0.6,
        radius in 0.0f64..0.8,
        alpha in 0.0f64..(2.0 * PI),
        m in 64usize..200,
    ) {
        let z = |t: f64| {
            let phase = 2.0 * PI * k as f64 * t + wobble * (2.0 * PI * t).sin();
            C64::from_polar(1.0 + radius * (4.0 * PI * t).cos(), phase)
        };
        let sample = |m: usize, rot: C64| -> Vec<C64> { (0..=m).map(|j| z(j as f64 / m as f64) * rot).collect() };
        let w = winding_number(&sample(m, c(1.0, 0.0)), 0.1).unwrap();
        let fine = winding_number(&sample(2 * m, c(1.0, 0.0)), 0.1).unwrap();
        let rotated = winding_number(&sample(m, C64::from_polar(1.0, alpha)), 0.1).unwrap();
        prop_assert_eq!(w.value, k);
        prop_assert_eq!(fine.value, k);
        prop_assert_eq!(rotated.value, k);
    }
}

#[test]
fn reversal_negates_the_index() {
    let tol = Tolerances::default();
    let cfg = LoopConfig::default();
    let l = PlaneLoop::robin(2);
    let forward = index_i(&l, &cfg, &tol).unwrap();
    let backward = index_i(&l.reversed(), &cfg, &tol).unwrap();
    assert_eq!(forward.value, -2);
    assert_eq!(backward.value, 2);
}
