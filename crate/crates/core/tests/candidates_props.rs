mod common;

use common::{bounds, brute_centroids, dist, exact_meb, layouts, near_member};
use fedcent::candidates::{
    candidate_centroids, centroid_hyperbox, covering_ball, trimmed_trusted_hyperbox,
};
use fedcent::evaluation::{gen_random_instance_seeded, FAULT_STRATEGIES};
use fedcent::geometry::hyperbox_intersection;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn centroid_hyperbox_matches_enumeration(layout in layouts(8, 4)) {
        let brute = brute_centroids(&layout);
        let (lo, hi) = bounds(&brute);
        let ch = centroid_hyperbox(&layout);
        for k in 0..layout.dim() {
            prop_assert!((ch.lo()[k] - lo[k]).abs() <= 1e-12 * lo[k].abs().max(1.0));
            prop_assert!((ch.hi()[k] - hi[k]).abs() <= 1e-12 * hi[k].abs().max(1.0));
        }
        let set = candidate_centroids(&layout).unwrap();
        prop_assert_eq!(set.centroids.len(), brute.len());
        for (c, b) in set.centroids.iter().zip(&brute) {
            prop_assert!(near_member(std::slice::from_ref(b), c));
        }
    }

    #[test]
    fn mean_lies_in_box_and_ball(layout in layouts(8, 4)) {
        let mean = layout.mean();
        prop_assert!(centroid_hyperbox(&layout).contains(&mean, 1e-9));
        let ball = covering_ball(&layout, 1e-4).unwrap();
        prop_assert!(dist(&mean, &ball.center) <= ball.radius * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn trimmed_box_meets_centroid_box(layout in layouts(8, 4)) {
        let tth = trimmed_trusted_hyperbox(&layout);
        let ch = centroid_hyperbox(&layout);
        prop_assert!(hyperbox_intersection(&tth, &ch, 1e-9).unwrap().is_some());
    }

    #[test]
    fn covering_ball_matches_exact(layout in layouts(7, 3)) {
        let brute = brute_centroids(&layout);
        let ball = covering_ball(&layout, 1e-4).unwrap();
        for c in &brute {
            prop_assert!(dist(c, &ball.center) <= ball.radius * (1.0 + 1e-9) + 1e-12);
        }
        let (_, exact) = exact_meb(&brute);
        prop_assert!(ball.radius >= exact - 1e-9);
        prop_assert!(ball.radius <= exact * (1.0 + 1e-4) + 1e-12);
    }

    #[test]
    fn trimmed_box_inside_trusted_box(
        n in 4usize..=10, d in 1usize..=5, seed in any::<u64>(), s in 0usize..FAULT_STRATEGIES.len()
    ) {
        let t = (n - 1) / 3;
        let (layout, truth) = gen_random_instance_seeded(n, t, d, t, FAULT_STRATEGIES[s], seed).unwrap();
        let tth = trimmed_trusted_hyperbox(&layout);
        let th = truth.trusted_hyperbox();
        prop_assert!(th.contains(tth.lo(), 0.0) && th.contains(tth.hi(), 0.0));
    }
}
