//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use bblab::geom::linking::linking_number;
use bblab::geom::{Point, Polyline};
use bblab::intersect::{dichotomy_report, essential_lower_bound_audit, DichotomyOptions};
use bblab::lab::{run, verify_manifest, ExperimentConfig, MANIFEST};
use bblab::modulus::{
    annulus_base, conformal_exponent, is_admissible, lower_bound_holder, modulus, product_family, ModulusOptions, OracleMode, ProductGrid, Surface,
    SurfaceFamily, ADMISSIBILITY_TOL,
};
use bblab::semmes::{audit_connectivity, audit_regularity, build_complex_with, full_words, ComplexOptions, ModelParams, SemmesComplex};
use bblab::shrink::{iterate_shrink, run_bb_shrink, run_shrink, ShrinkOptions};
use bblab::tree::{canonical_root, canonical_tree, TreeOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn full(depth: usize, lambda: f64) -> SemmesComplex {
    build_complex_with(full_words(depth).unwrap(), lambda, ModelParams::default(), 0.1, 3, &ComplexOptions::default()).unwrap()
}

fn intersection_growth() -> Outcome {
    let t0 = Instant::now();
    let tree = canonical_tree(6, &TreeOptions::default()).map_err(|e| e.to_string())?;
    let r = essential_lower_bound_audit(&tree, 6, 50, 0).map_err(|e| e.to_string())?;
    let exact = r.levels.iter().all(|l| l.min_count >= 1 << l.depth) && r.levels.len() == 7;
    let dt = t0.elapsed();
    let mins: Vec<usize> = r.levels.iter().map(|l| l.min_count).collect();
    check(r.passed() && exact && dt <= Duration::from_secs(120), format!("min counts {mins:?}, {} violations, {dt:.1?}", r.violations.len()))
}

fn product_modulus() -> Outcome {
    let target = 3.0 / (16.0 * PI);
    let mut notes = Vec::new();
    let mut ok = true;
    for (n, fiber_res) in [(3usize, 16usize), (4, 8)] {
        let p = conformal_exponent(n);
        for res in [8, 16, 32, 64] {
            let grid = ProductGrid { n, base: annulus_base(res, 0.5, 1.0), fiber_res };
            let fam = product_family(&grid).map_err(|e| e.to_string())?;
            let r = modulus(&fam, p, &ModulusOptions::default()).map_err(|e| e.to_string())?;
            let holder = lower_bound_holder(0.75 * PI, grid.fiber_measure(), n);
            if res == 64 {
                ok &= (r.value - target).abs() <= 0.05 * target;
                notes.push(format!("n={n}: {:.6}", r.value));
            } else {
                ok &= r.value >= 0.95 * holder;
            }
        }
    }
    let grid = ProductGrid { n: 3, base: annulus_base(8, 0.5, 1.0), fiber_res: 8 };
    let fam = product_family(&grid).map_err(|e| e.to_string())?;
    let r = modulus(&fam, 3.0, &ModulusOptions { oracle: OracleMode::Force, ..Default::default() }).map_err(|e| e.to_string())?;
    let product_gap = r.oracle_gap.unwrap() / r.value;
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_json(
        r#"{"schema":1,"kind":"modulus","mesh_scale":0.125,"modulus":{"family":{"type":"core","word":"1","depth":2},"oracle":"force"}}"#,
    )
    .map_err(|e| e.to_string())?;
    cfg.out = dir.path().to_path_buf();
    let s = run(&cfg).map_err(|e| e.to_string())?.summary;
    let core_gap = s["oracle_gap"].as_f64().unwrap() / s["value"].as_f64().unwrap();
    ok &= product_gap <= 1e-6 && core_gap <= 1e-6;
    check(ok, format!("target {target:.6}, {}; oracle gaps {product_gap:.1e}, {core_gap:.1e}", notes.join(", ")))
}

fn level_law() -> Outcome {
    let mut worst = [0.0f64; 2];
    for (i, (lambda, factor)) in [(0.4f64, 2.0 * 0.4f64.powi(3)), (0.9, 1.458)].into_iter().enumerate() {
        let c = full(6, lambda);
        let m0 = c.level_measure(0);
        for k in 0..=6 {
            let want = factor.powi(k as i32) * m0;
            worst[i] = worst[i].max((c.level_measure(k) - want).abs() / want);
        }
    }
    check(worst.iter().all(|&e| e <= 1e-12), format!("worst relative error {:.1e} (λ=0.4), {:.1e} (λ=0.9)", worst[0], worst[1]))
}

fn regularity_stability() -> Outcome {
    let s4 = audit_regularity(&full(4, 0.4), 1000, 0).spread();
    let s6 = audit_regularity(&full(6, 0.4), 1000, 0).spread();
    let c3 = audit_connectivity(&full(3, 0.4), 1000, 0).worst;
    let c4 = audit_connectivity(&full(4, 0.4), 1000, 0).worst;
    let within = |a: f64, b: f64| a.is_finite() && b.is_finite() && a.max(b) <= 2.0 * a.min(b);
    check(within(s4, s6) && within(c3, c4), format!("spread {s4:.3} -> {s6:.3}, connectivity {c3:.3} -> {c4:.3}"))
}

fn shrinking_certificates() -> Outcome {
    let (root, _) = canonical_root().map_err(|e| e.to_string())?;
    let eps = root.diameter_estimate() / 10.0;
    let single = match run_shrink(&root, eps, &ShrinkOptions::default()) {
        Ok(c) => (c.schedule_holds() && c.diameters_below_epsilon(), format!("m={} holds={}", c.m, c.holds())),
        Err(e) => (false, e.to_string()),
    };
    let iterated = match iterate_shrink(&root, &[1.0, 0.5, 1.0 / 3.0], &ShrinkOptions::default()) {
        Ok(st) => {
            let depths: Vec<usize> = st.iter().map(|s| s.depth).collect();
            let ok = st.len() == 3 && depths.windows(2).all(|w| w[0] < w[1]) && st.iter().all(|s| s.max_diameter < s.target && s.schedule_holds);
            (ok, format!("depths {depths:?}"))
        }
        Err(e) => (false, e.to_string()),
    };
    check(single.0 && iterated.0, format!("ε=diam/10: {}; iterated: {}", single.1, iterated.1))
}

fn interlaced_certificate() -> Outcome {
    let (root, _) = canonical_root().map_err(|e| e.to_string())?;
    match run_bb_shrink(&root, &root, 1.0, 0.5, &ShrinkOptions::default()) {
        Ok(c) => check(
            c.distortion_product <= 8.0 / 0.5 && c.max_bound < 1.0 && c.holds(),
            format!("product {:.3}, max bound {:.3}", c.distortion_product, c.max_bound),
        ),
        Err(e) => Err(e.to_string()),
    }
}

fn dichotomy() -> Outcome {
    let t0 = Instant::now();
    let r = dichotomy_report(&DichotomyOptions::default()).map_err(|e| e.to_string())?;
    let dt = t0.elapsed();
    let f = r.intrinsic_factor();
    check(
        r.rows.len() == 5 && f < 2.0 && r.euclid_strictly_decreasing() && r.crossing().is_some() && dt <= Duration::from_secs(600),
        format!("intrinsic factor {f:.3}, crossing at k={:?}, {dt:.1?}", r.crossing()),
    )
}

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

fn circle(center: Point, e1: Point, e2: Point, r: f64, n: usize) -> Polyline {
    Polyline::new(
        (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                center + (e1 * t.cos() + e2 * t.sin()) * r
            })
            .collect(),
    )
    .unwrap()
}

fn solver_soundness() -> Outcome {
    let o = ModulusOptions::default();
    let mut worst_slack = f64::INFINITY;
    let mut monotone = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let big = random_family(&mut rng, 20, 12);
        let keep = rng.gen_range(1..big.len());
        let small = SurfaceFamily::new(big.members[..keep].to_vec(), big.volumes.clone()).unwrap();
        let (a, b) = (modulus(&small, 2.5, &o).map_err(|e| e.to_string())?, modulus(&big, 2.5, &o).map_err(|e| e.to_string())?);
        worst_slack = worst_slack.min(is_admissible(&a.density, &small).1).min(is_admissible(&b.density, &big).1);
        monotone += usize::from(a.value <= b.value * (1.0 + 1e-9));
    }
    let mut scale_err = 0.0f64;
    for n in [3usize, 4] {
        let p = conformal_exponent(n);
        let fam = random_family(&mut ChaCha8Rng::seed_from_u64(900 + n as u64), 15, 8);
        let base = modulus(&fam, p, &o).map_err(|e| e.to_string())?.value;
        for s in [0.01, 0.37, 5.0, 250.0] {
            let v = modulus(&fam.rescaled(s, n), p, &o).map_err(|e| e.to_string())?.value;
            scale_err = scale_err.max((v - base).abs() / base);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut agree = 0;
    let mut pairs = 0;
    while pairs < 200 {
        let a = circle(Point::zeros(), Point::x(), Point::y(), 1.0, 24);
        let tilt: f64 = rng.gen_range(-0.6..0.6);
        let e1 = Point::new(tilt.cos(), 0.0, tilt.sin());
        let e2 = Point::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.2..0.2), 1.0).normalize();
        let e2 = (e2 - e1 * e1.dot(&e2)).normalize();
        let c = Point::new(rng.gen_range(0.2..2.6), rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        let b = circle(c, e1, e2, rng.gen_range(0.8..1.2), 20);
        if a.distance_to(&b) < 1e-3 {
            continue;
        }
        let l = linking_number(&a, &b, pairs).map_err(|e| e.to_string())?;
        agree += usize::from(l.gauss == l.projection);
        pairs += 1;
    }
    let tree = canonical_tree(4, &TreeOptions::default()).map_err(|e| e.to_string())?;
    let nodes = tree.certificates.len();
    let null_ok = tree.certificates.iter().filter(|c| c.clasp.iter().all(|k| k.own.signed == 0 && k.own.unsigned == 2)).count();
    check(
        worst_slack >= -ADMISSIBILITY_TOL && monotone == 50 && scale_err <= 1e-9 && agree == 200 && null_ok == nodes && tree.all_certificates_hold(),
        format!("slack {worst_slack:.1e}, monotone {monotone}/50, scale error {scale_err:.1e}, linking {agree}/200, null-homology {null_ok}/{nodes}"),
    )
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut same = 0;
    let configs = [
        r#"{"schema":1,"kind":"metric-audit","depth":3,"samples":300,"seed":11}"#,
        r#"{"schema":1,"kind":"dichotomy","depth":3,"seed":5}"#,
        r#"{"schema":1,"kind":"intersect","depth":4,"samples":20,"seed":3}"#,
    ];
    for (i, json) in configs.iter().enumerate() {
        let mut manifests = Vec::new();
        for (j, threads) in [1usize, 1, 4, 4].into_iter().enumerate() {
            let mut cfg = ExperimentConfig::from_json(json).map_err(|e| e.to_string())?;
            cfg.out = dir.path().join(format!("{i}-{j}"));
            cfg.threads = Some(threads);
            run(&cfg).map_err(|e| e.to_string())?;
            if !verify_manifest(&cfg.out).map_err(|e| e.to_string())?.is_empty() {
                return Err(format!("manifest mismatch in {}", cfg.out.display()));
            }
            manifests.push(std::fs::read(cfg.out.join(MANIFEST)).unwrap());
        }
        same += usize::from(manifests.iter().all(|m| *m == manifests[0]));
    }
    check(same == configs.len(), format!("{same}/{} configs byte-identical over 2 runs x 2 thread counts", configs.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("intersection growth", intersection_growth),
        ("product-family modulus", product_modulus),
        ("level-measure law", level_law),
        ("regularity stability", regularity_stability),
        ("shrinking certificates", shrinking_certificates),
        ("interlaced certificate", interlaced_certificate),
        ("dichotomy witness", dichotomy),
        ("solver soundness", solver_soundness),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {}: {name} ({detail})", i + 1);
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
