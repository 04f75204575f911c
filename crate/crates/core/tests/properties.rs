use proptest::prelude::*;
use rand::seq::SliceRandom;
use uw_core::assemblage::steer;
use uw_core::bounds::{fine_grained_bound, omega_two_dichotomic};
use uw_core::quantum::random::{random_qubit_observable, random_state};
use uw_core::quantum::{born_stats, correlation_tensor, state_from_correlation_tensor, Party};
use uw_core::rng::stream_rng;
use uw_core::{Permutation, ProbVec, Quantifier};

const TOL: f64 = 1e-9;

fn probvec(max_len: usize) -> impl Strategy<Value = ProbVec> {
    prop::collection::vec(prop_oneof![3 => 0.001f64..1.0, 1 => Just(0.0)], 1..=max_len).prop_filter_map(
        "all-zero weights",
        |w| ProbVec::from_weights(w).ok(),
    )
}

fn relabeling(dim: usize, seed: u64, terms: usize) -> Vec<(Permutation, f64)> {
    let mut rng = stream_rng(seed, 0);
    let total = (terms * (terms + 1) / 2) as f64;
    (0..terms)
        .map(|k| {
            let mut images: Vec<usize> = (0..dim).collect();
            images.shuffle(&mut rng);
            (Permutation::new(images).unwrap(), (1.0 + k as f64) / total)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn probvec_entries_valid(p in probvec(12)) {
        let sum: f64 = p.entries().iter().sum();
        prop_assert!((sum - 1.0).abs() <= TOL);
        prop_assert!(p.entries().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn majorization_order_extremes(p in probvec(10)) {
        prop_assert!(p.majorized_by(&p));
        prop_assert!(ProbVec::uniform(p.dim()).majorized_by(&p));
        prop_assert!(p.majorized_by(&ProbVec::point_mass(p.dim(), 0)));
    }

    #[test]
    fn mixing_permutations_moves_down(p in probvec(8), seed in any::<u64>(), terms in 1usize..5) {
        let q = p.random_relabel(&relabeling(p.dim(), seed, terms)).unwrap();
        prop_assert!(q.majorized_by(&p));
        for omega in Quantifier::registry() {
            prop_assert!(omega.evaluate(&q) >= omega.evaluate(&p) - TOL, "{omega}");
        }
    }

    #[test]
    fn quantifiers_permutation_invariant(p in probvec(8), seed in any::<u64>()) {
        let (perm, _) = relabeling(p.dim(), seed, 1).remove(0);
        let q = perm.apply(&p);
        for omega in Quantifier::registry() {
            prop_assert!((omega.evaluate(&q) - omega.evaluate(&p)).abs() <= TOL, "{omega}");
        }
    }

    #[test]
    fn tensor_additive_where_flagged(p in probvec(6), q in probvec(6)) {
        let pq = p.tensor(&q);
        for omega in Quantifier::registry().into_iter().filter(Quantifier::tensor_additive) {
            let sum = omega.evaluate(&p) + omega.evaluate(&q);
            prop_assert!((omega.evaluate(&pq) - sum).abs() <= TOL, "{omega}");
        }
    }

    #[test]
    fn tensor_majorization_compatible(p in probvec(4), q in probvec(4), seed in any::<u64>()) {
        let pp = p.random_relabel(&relabeling(p.dim(), seed, 3)).unwrap();
        prop_assert!(pp.tensor(&q).majorized_by(&p.tensor(&q)));
    }

    #[test]
    fn mixing_monotone_where_flagged(len in 1usize..8, seed in any::<u64>(), lambda in 0.0f64..=1.0) {
        let mut rng = stream_rng(seed, 1);
        let p = uw_core::quantum::random::random_distribution(len, &mut rng);
        let q = uw_core::quantum::random::random_distribution(len, &mut rng);
        let mix = ProbVec::mixture(&ProbVec::new(vec![lambda, 1.0 - lambda]).unwrap(), &[p.clone(), q.clone()]).unwrap();
        for omega in Quantifier::registry().into_iter().filter(Quantifier::mixing_monotone) {
            let avg = lambda * omega.evaluate(&p) + (1.0 - lambda) * omega.evaluate(&q);
            prop_assert!(omega.evaluate(&mix) >= avg - TOL, "{omega}");
        }
    }

    #[test]
    fn two_dichotomic_bound_majorizes_samples(seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 2);
        let x = random_qubit_observable(&mut rng);
        let y = random_qubit_observable(&mut rng);
        let bound = omega_two_dichotomic(&x, &y).unwrap();
        for _ in 0..8 {
            let rho = random_state(2, &mut rng);
            let px = born_stats(&rho, &x.to_povm()).unwrap();
            let py = born_stats(&rho, &y.to_povm()).unwrap();
            prop_assert!(px.tensor(&py).majorized_by(&bound.omega));
        }
    }

    #[test]
    fn fine_grained_bound_dominates_samples(seed in any::<u64>(), w in 0.05f64..0.95) {
        let mut rng = stream_rng(seed, 3);
        let meas = vec![random_qubit_observable(&mut rng).to_povm(), random_qubit_observable(&mut rng).to_povm()];
        let priors = ProbVec::new(vec![w, 1.0 - w]).unwrap();
        let b = fine_grained_bound(&meas, &[0, 1], &priors).unwrap();
        for _ in 0..8 {
            let rho = random_state(2, &mut rng);
            let v = w * rho.expectation(meas[0].effect(0)) + (1.0 - w) * rho.expectation(meas[1].effect(1));
            prop_assert!(v <= b.value + TOL);
        }
    }

    #[test]
    fn steered_assemblage_is_consistent(seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 4);
        let rho = random_state(4, &mut rng).with_factors(2, 2).unwrap();
        let meas = vec![random_qubit_observable(&mut rng).to_povm(), random_qubit_observable(&mut rng).to_povm()];
        let asm = steer(&rho, &meas).unwrap();
        prop_assert!(asm.no_signaling_defect() <= 1e-10);
        let rho_b = rho.partial_trace(Party::B).unwrap();
        prop_assert!(asm.reduced_state().approx_eq(rho_b.matrix(), 1e-10));
    }

    #[test]
    fn correlation_tensor_round_trip(seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 5);
        let rho = random_state(4, &mut rng).with_factors(2, 2).unwrap();
        let t = correlation_tensor(&rho).unwrap();
        let back = state_from_correlation_tensor(&t).unwrap();
        prop_assert!(back.matrix().approx_eq(rho.matrix(), 1e-10));
    }
}
