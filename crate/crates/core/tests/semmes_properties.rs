use bblab::semmes::{assemble_point_singularity, audit_connectivity, build_complex_with, full_words, meshed_ball, ComplexOptions, ModelParams, SemmesComplex};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn depth2() -> &'static SemmesComplex {
    static C: OnceLock<SemmesComplex> = OnceLock::new();
    C.get_or_init(|| build_complex_with(full_words(2).unwrap(), 0.4, ModelParams::default(), 0.125, 3, &ComplexOptions::default()).unwrap())
}

#[test]
fn antipodal_cells_on_a_free_column() {
    let c = build_complex_with(full_words(0).unwrap(), 0.4, ModelParams::default(), 0.1, 3, &ComplexOptions::default()).unwrap();
    let m = &c.model;
    let ns = (m.params.length / m.pitch[0]).round() as usize;
    assert_eq!(ns % 2, 0);
    for (ix, iy) in m.free_columns().into_iter().take(5) {
        let at = |is: usize| m.base.iter().position(|b| b.index == [is, ix, iy]).unwrap();
        let d = c.distance(at(0), at(ns / 2));
        assert!((d - m.params.length / 2.0).abs() < 1e-12, "{d}");
    }
}

#[test]
fn distance_is_a_metric() {
    let c = depth2();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = c.cell_count();
    let mut s = c.scratch();
    for _ in 0..1000 {
        let (x, y, z) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        let (xy, yz, xz) = (c.distance_with(x, y, &mut s), c.distance_with(y, z, &mut s), c.distance_with(x, z, &mut s));
        assert_eq!(xy, c.distance_with(y, x, &mut s));
        assert!(xz <= xy + yz + 1e-12);
    }
    assert_eq!(c.distance(7, 7), 0.0);
    let (b, l) = c.neighbours(7).next().unwrap();
    assert!((c.distance(7, b) - l).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn measure_is_additive(cells in proptest::collection::btree_set(0usize..2000, 0..200), split in 0usize..200) {
        let c = depth2();
        let all: Vec<usize> = cells.into_iter().collect();
        let (a, b) = all.split_at(split.min(all.len()));
        let direct = c.measure(&all);
        prop_assert!((c.measure(a) + c.measure(b) - direct).abs() <= 2.0 * f64::EPSILON * direct);
        prop_assert_eq!(c.measure(&[]), 0.0);
    }
}

#[test]
fn whole_complex_measure_is_a_partial_geometric_series() {
    let lambda: f64 = 0.4;
    let c = depth2();
    let m0 = c.level_measure(0);
    let total = c.measure(&(0..c.cell_count()).collect::<Vec<_>>());
    let q = 2.0 * lambda.powi(3);
    assert!((total - m0 * (1.0 + q + q * q)).abs() < 1e-12 * total);
    assert!(total < m0 / (1.0 - q));
}

#[test]
fn convex_ball_connectivity_is_near_one() {
    let c = meshed_ball(0.1, 0.125).unwrap();
    assert_eq!(c.component_count(), 1);
    let r = audit_connectivity(&c, 200, 4);
    // a lattice path between two points of B(x, r) stays within B(x, √3 r) up to a few pitches
    assert!(r.worst <= 1.8, "{}", r.worst);
}

#[test]
fn single_tree_singularity() {
    let c = assemble_point_singularity(1, 0.4, 3, 0.125, 0.1).unwrap();
    assert_eq!(c.component_count(), 1);
    assert_eq!(c.copies.len(), 3);
    assert!(c.ambient.as_ref().unwrap().coords.len() > 1000);
}
