use bblab::intersect::{count_fiber_intersections, default_delta, essential_lower_bound_audit, per_core_counts};
use bblab::tree::{canonical_tree, TreeOptions};
use bblab::Word;
use proptest::prelude::*;

#[test]
fn counts_do_not_depend_on_the_seed() {
    let tree = canonical_tree(4, &TreeOptions::default()).unwrap();
    let delta = default_delta(&tree).unwrap();
    for j in [-0.9 * delta, -0.2 * delta, 0.0, 0.55 * delta, 0.95 * delta] {
        for k in 0..=4 {
            let base = per_core_counts(&tree, k, j, 0).unwrap();
            for seed in [1, 2] {
                assert_eq!(per_core_counts(&tree, k, j, seed).unwrap(), base, "k={k} j={j} seed={seed}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_fiber_meets_at_least_two_to_the_k(t in -1.0f64..1.0, seed in any::<u64>()) {
        let tree = canonical_tree(3, &TreeOptions::default()).unwrap();
        let j = t * default_delta(&tree).unwrap();
        for k in 0..=3 {
            prop_assert!(count_fiber_intersections(&tree, k, j, seed).unwrap() >= 1 << k);
        }
    }
}

#[test]
fn unlinked_subtree_is_flagged() {
    let w: Word = "1".parse().unwrap();
    let tree = canonical_tree(3, &TreeOptions { unlink: Some(w), seed: 0 }).unwrap();
    let r = essential_lower_bound_audit(&tree, 3, 20, 0).unwrap();
    assert!(!r.passed());
}
