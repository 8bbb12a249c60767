use bblab::modulus::{conformal_exponent, is_admissible, lp_oracle, modulus, ModulusOptions, OracleMode, Surface, SurfaceFamily, ADMISSIBILITY_TOL};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_family(rng: &mut ChaCha8Rng, cells: usize, members: usize) -> SurfaceFamily {
    let volumes: Vec<f64> = (0..cells).map(|_| rng.gen_range(0.1..2.0)).collect();
    let members = (0..members)
        .map(|_| {
            let k = rng.gen_range(1..=cells.min(6));
            Surface::new((0..k).map(|_| (rng.gen_range(0..cells), rng.gen_range(0.1..1.5))).collect())
        })
        .collect();
    SurfaceFamily::new(members, volumes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn returned_density_is_admissible(seed in any::<u64>(), cells in 2usize..30, members in 1usize..15, p in 1.2f64..4.0) {
        let fam = random_family(&mut ChaCha8Rng::seed_from_u64(seed), cells, members);
        let r = modulus(&fam, p, &ModulusOptions::default()).unwrap();
        let (ok, slack) = is_admissible(&r.density, &fam);
        prop_assert!(ok || slack >= -ADMISSIBILITY_TOL);
        prop_assert!(r.admissibility_slack >= -ADMISSIBILITY_TOL);
        prop_assert!(r.lower_bound <= r.value * (1.0 + 1e-12));
        prop_assert!((fam.energy(&r.density, p) - r.value).abs() <= 1e-12 * r.value);
    }

    #[test]
    fn solver_agrees_with_oracle(seed in any::<u64>(), cells in 2usize..25, members in 1usize..12) {
        let fam = random_family(&mut ChaCha8Rng::seed_from_u64(seed), cells, members);
        let r = modulus(&fam, 3.0, &ModulusOptions { oracle: OracleMode::Force, ..Default::default() }).unwrap();
        prop_assert!(r.oracle_gap.unwrap() <= 1e-6 * r.value);
        let o = lp_oracle(&fam, 3.0).unwrap();
        prop_assert!(o.dual <= r.value * (1.0 + 1e-12));
    }
}

#[test]
fn monotone_under_inclusion() {
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let big = random_family(&mut rng, 20, 12);
        let keep = rng.gen_range(1..big.len());
        let small = SurfaceFamily::new(big.members[..keep].to_vec(), big.volumes.clone()).unwrap();
        let o = ModulusOptions::default();
        let (a, b) = (modulus(&small, 2.5, &o).unwrap(), modulus(&big, 2.5, &o).unwrap());
        // certified bounds: Mod(small) ≤ its upper bound, Mod(big) ≥ its dual value
        assert!(a.lower_bound <= b.value * (1.0 + 1e-12), "seed {seed}: {} > {}", a.lower_bound, b.value);
        assert!(a.value <= b.value * (1.0 + 1e-9), "seed {seed}");
    }
}

#[test]
fn conformal_exponent_is_scale_invariant() {
    for n in [3usize, 4] {
        let p = conformal_exponent(n);
        for seed in 0..5u64 {
            let fam = random_family(&mut ChaCha8Rng::seed_from_u64(100 + seed), 15, 8);
            let base = modulus(&fam, p, &ModulusOptions::default()).unwrap().value;
            for s in [0.01, 0.37, 5.0, 250.0] {
                let v = modulus(&fam.rescaled(s, n), p, &ModulusOptions::default()).unwrap().value;
                assert!((v - base).abs() <= 1e-9 * base, "n={n} s={s}: {v} vs {base}");
            }
        }
    }
}
