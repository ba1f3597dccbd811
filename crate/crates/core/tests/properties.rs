use std::sync::Arc;

use proptest::prelude::*;

use randattr::attractor::{build_discrete, semi_invariance_defects, BuildParams};
use randattr::cocycle::{cocycle_residual, k_sequence, DiscreteRds};
use randattr::diagnostics::{deviation, hausdorff};
use randattr::nets::{greedy_net, NormTag, PointCloud};
use randattr::systems::ToySystem;
use randattr::StateVector;

fn scalars(xs: &[f64]) -> Vec<StateVector> {
    xs.iter().map(|x| StateVector::scalar(*x)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn toy_cocycle_holds_on_the_grid(seed in 0u64..500, t in 0i64..150, s in 0i64..150, u in -4.0f64..4.0) {
        let sys = ToySystem::sample(seed, (-1.0, 4.0), 0.01, 0.3).unwrap();
        let r = cocycle_residual(&sys, t as f64 * 0.01, s as f64 * 0.01, &StateVector::scalar(u)).unwrap();
        prop_assert!(r <= 1e-12, "{r}");
    }

    #[test]
    fn greedy_net_of_a_net_is_itself(xs in proptest::collection::vec(-5.0f64..5.0, 1..200), delta in 0.05f64..2.0) {
        let cloud = PointCloud::new(scalars(&xs), NormTag::H);
        let net = greedy_net(&cloud, delta).unwrap();
        let again = greedy_net(&net.centers, delta).unwrap();
        prop_assert_eq!(&again.centers.points, &net.centers.points);
        let h = hausdorff(&cloud.points, &net.centers.points, NormTag::H).unwrap();
        prop_assert!(h.forward <= delta && h.backward == 0.0);
    }

    #[test]
    fn hausdorff_is_a_metric_on_finite_sets(
        a in proptest::collection::vec(-3.0f64..3.0, 1..20),
        b in proptest::collection::vec(-3.0f64..3.0, 1..20),
        c in proptest::collection::vec(-3.0f64..3.0, 1..20),
    ) {
        let (a, b, c) = (scalars(&a), scalars(&b), scalars(&c));
        let d = |x: &[StateVector], y: &[StateVector]| hausdorff(x, y, NormTag::V).unwrap().symmetric;
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!(deviation(&a, &b, NormTag::V).unwrap() <= d(&a, &b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn construction_is_semi_invariant_on_random_paths(seed in 0u64..10_000, eps in 0.0f64..0.5) {
        let rds = DiscreteRds::new(ToySystem::sample(seed, (-8.0, 1.0), 0.01, eps).unwrap(), 1.0).unwrap();
        let k = k_sequence(&rds, &[-4, -3, -2, -1], 0.5, 16, seed).unwrap();
        let p = BuildParams { depth: 4, r: 0.5, unit_pitch: 1.0 / 16.0 };
        let a = build_discrete(&rds, &p, &k).unwrap();
        prop_assert!(semi_invariance_defects(&a, &rds).unwrap().iter().all(|d| *d == 0));
        prop_assert!(a.ball_excess.iter().all(|e| *e <= 1e-12));
        let lambda: Arc<[f64]> = Arc::from([1.0]);
        prop_assert!(a.e_n().iter().all(|u| u.lambda == lambda));
    }
}
