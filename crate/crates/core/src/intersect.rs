//! Fiber-disk intersection counts, the 2^k lower bound and co-area area bounds.
//!
//! The linking circle α of a tree bounds a flat disk. Its parallel copies at
//! height `j` along the disk normal, `|j| ≤ δ`, are the fibers. For n = 4 the
//! tree is paired with itself and fibers are indexed by `(j₁, j₂)`, with the
//! count taken through the product structure.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::meridian::{meridian_intersections, Disk};
use crate::geom::polyline::{Point, Polyline};
use crate::tree::TubeTree;
use crate::word::Word;

pub const FIBERS_N3: usize = 64;
pub const FIBER_GRID_N4: usize = 32;

/// `ℋ^{n-2}` of the unit `(n-2)`-ball.
pub fn unit_ball_measure(n: usize) -> f64 {
    match n {
        3 => 2.0,
        4 => std::f64::consts::PI,
        _ => panic!("dimension {n} is not supported"),
    }
}

fn linking_circle(tree: &TubeTree) -> Result<&Polyline> {
    tree.linking_circle.as_ref().ok_or_else(|| Error::ConfigInvalid { field: "tree".into(), message: "tree has no linking circle".into() })
}

/// Unit normal of a closed planar-ish polyline (Newell's method).
fn plane_normal(c: &Polyline) -> Point {
    let v = c.vertices();
    let mut n = Point::zeros();
    for i in 0..v.len() {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        n += a.cross(&b);
    }
    n.normalize()
}

/// Flat disk spanned by the linking circle, shifted by `j` along its normal.
pub fn fiber_disk(alpha: &Polyline, j: f64) -> Disk {
    let c = alpha.centroid();
    let n = plane_normal(alpha);
    let radius = alpha.vertices().iter().map(|v| (v - c).norm()).fold(0.0, f64::max);
    Disk { center: c + n * j, normal: n, radius }
}

/// Half the clearance between the linking circle and the root tube.
pub fn default_delta(tree: &TubeTree) -> Result<f64> {
    let alpha = linking_circle(tree)?;
    let root = tree.root();
    Ok(0.5 * (alpha.distance_to(&root.core) - root.radius))
}

fn check_depth(tree: &TubeTree, k: usize) -> Result<()> {
    if k > tree.depth {
        return Err(Error::DepthOverflow { requested: k, max: tree.depth });
    }
    Ok(())
}

/// Per-core unsigned counts of the depth-`k` cores through the fiber at `j`.
pub fn per_core_counts(tree: &TubeTree, k: usize, j: f64, seed: u64) -> Result<Vec<(Word, i64, usize)>> {
    check_depth(tree, k)?;
    let disk = fiber_disk(linking_circle(tree)?, j);
    tree.level(k)
        .map(|(w, t)| {
            let c = meridian_intersections(&t.core, &disk, seed)?;
            Ok((w.clone(), c.signed, c.unsigned))
        })
        .collect()
}

/// Unsigned intersections of all depth-`k` cores with the fiber disk at `j`.
pub fn count_fiber_intersections(tree: &TubeTree, k: usize, j: f64, seed: u64) -> Result<usize> {
    Ok(per_core_counts(tree, k, j, seed)?.iter().map(|c| c.2).sum())
}

/// Depths of the two factors at interlaced depth `k`.
pub fn product_depths(k: usize) -> (usize, usize) {
    (k.div_ceil(2), k / 2)
}

/// Count at interlaced depth `k` through the fiber `(j₁, j₂)` of the product tree.
pub fn count_product_intersections(tree: &TubeTree, k: usize, j: [f64; 2], seed: u64) -> Result<usize> {
    let (ka, kb) = product_depths(k);
    Ok(count_fiber_intersections(tree, ka, j[0], seed)? * count_fiber_intersections(tree, kb, j[1], seed)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSample {
    pub j: Vec<f64>,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub depth: usize,
    pub fibers: Vec<FiberSample>,
    pub min_count: usize,
    pub max_count: usize,
    /// `ℋ^{n-2}` of each depth-k core torus.
    pub area_estimates: BTreeMap<String, f64>,
    pub min_fiber_area: f64,
}

impl IntersectionReport {
    fn new(depth: usize, fibers: Vec<FiberSample>, area_estimates: BTreeMap<String, f64>) -> Self {
        let min_count = fibers.iter().map(|f| f.count).min().unwrap_or(0);
        let max_count = fibers.iter().map(|f| f.count).max().unwrap_or(0);
        let min_fiber_area = area_estimates.values().copied().fold(f64::INFINITY, f64::min);
        IntersectionReport { depth, fibers, min_count, max_count, area_estimates, min_fiber_area }
    }
}

/// Core-torus areas at depth `k`: lengths for n = 3, length products for n = 4.
pub fn core_areas(tree: &TubeTree, k: usize, n: usize) -> BTreeMap<String, f64> {
    let lengths = |d: usize| tree.level(d).map(|(w, t)| (w.clone(), t.core.length())).collect::<Vec<_>>();
    if n == 3 {
        return lengths(k).into_iter().map(|(w, l)| (w.to_string(), l)).collect();
    }
    let (ka, kb) = product_depths(k);
    let (a, b) = (lengths(ka), lengths(kb));
    let mut out = BTreeMap::new();
    for (wa, la) in &a {
        for (wb, lb) in &b {
            out.insert(crate::word::interlace(wa, wb).merged.to_string(), la * lb);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub depth: usize,
    pub j: f64,
    pub count: usize,
    pub required: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditReport {
    pub delta: f64,
    pub seed: u64,
    pub levels: Vec<IntersectionReport>,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `count ≥ 2^k` for every `k ≤ k_max` on seeded fibers in `[-δ, δ]`.
pub fn essential_lower_bound_audit(tree: &TubeTree, k_max: usize, fiber_samples: usize, seed: u64) -> Result<AuditReport> {
    check_depth(tree, k_max)?;
    let delta = default_delta(tree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let js: Vec<f64> = (0..fiber_samples).map(|_| rng.gen_range(-delta..delta)).collect();
    let mut levels = Vec::new();
    let mut violations = Vec::new();
    for k in 0..=k_max {
        let counts = js.par_iter().map(|&j| count_fiber_intersections(tree, k, j, seed)).collect::<Result<Vec<usize>>>()?;
        let required = 1usize << k;
        for (&j, &count) in js.iter().zip(&counts) {
            if count < required {
                violations.push(Violation { depth: k, j, count, required });
            }
        }
        let fibers = js.iter().zip(counts).map(|(&j, count)| FiberSample { j: vec![j], count }).collect();
        levels.push(IntersectionReport::new(k, fibers, core_areas(tree, k, 3)));
    }
    Ok(AuditReport { delta, seed, levels, violations })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoareaBound {
    pub n: usize,
    pub depth: usize,
    pub delta: f64,
    pub total_area_lb: f64,
    pub min_fiber_area_lb: f64,
    /// `2^k c_{n-2} δ^{n-2}`.
    pub predicted: f64,
    /// Sum of the measured core-torus areas.
    pub measured_total: f64,
    pub report: IntersectionReport,
}

/// Midpoint Riemann sum of fiber counts over a grid of `𝔹^{n-2}(δ)`.
///
/// n = 3 uses `grid` cells on `[-δ, δ]`; n = 4 uses the cells of a `grid × grid`
/// square grid whose centres lie in the disk of radius δ.
pub fn coarea_area_bound(tree: &TubeTree, k: usize, delta: f64, grid: usize, n: usize, seed: u64) -> Result<CoareaBound> {
    check_depth(tree, if n == 3 { k } else { product_depths(k).0 })?;
    let h = 2.0 * delta / grid as f64;
    let mid = |i: usize| -delta + (i as f64 + 0.5) * h;
    let (fibers, cell) = match n {
        3 => {
            let fibers = (0..grid)
                .into_par_iter()
                .map(|i| Ok(FiberSample { j: vec![mid(i)], count: count_fiber_intersections(tree, k, mid(i), seed)? }))
                .collect::<Result<Vec<_>>>()?;
            (fibers, h)
        }
        4 => {
            let (ka, kb) = product_depths(k);
            let row = |d: usize| (0..grid).into_par_iter().map(|i| count_fiber_intersections(tree, d, mid(i), seed)).collect::<Result<Vec<_>>>();
            let (ca, cb) = (row(ka)?, row(kb)?);
            let mut fibers = Vec::new();
            for (i, a) in ca.iter().enumerate() {
                for (l, b) in cb.iter().enumerate() {
                    let j = [mid(i), mid(l)];
                    if j[0].hypot(j[1]) < delta {
                        fibers.push(FiberSample { j: j.to_vec(), count: a * b });
                    }
                }
            }
            (fibers, h * h)
        }
        _ => return Err(Error::ConfigInvalid { field: "dimension".into(), message: format!("{n} is not 3 or 4") }),
    };
    let total_area_lb = fibers.iter().map(|f| f.count as f64 * cell).sum::<f64>();
    let leaves = (1u64 << k) as f64;
    let areas = core_areas(tree, k, n);
    let measured_total = areas.values().sum();
    Ok(CoareaBound {
        n,
        depth: k,
        delta,
        total_area_lb,
        min_fiber_area_lb: total_area_lb / leaves,
        predicted: leaves * unit_ball_measure(n) * delta.powi(n as i32 - 2),
        measured_total,
        report: IntersectionReport::new(k, fibers, areas),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DichotomyOptions {
    pub lambda: f64,
    pub n: usize,
    pub k_max: usize,
    pub mesh_scale: f64,
    /// Core tori sampled per level; all free columns when larger than their count.
    pub samples: usize,
    pub seed: u64,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        DichotomyOptions { lambda: 0.4, n: 3, k_max: 4, mesh_scale: 0.1, samples: usize::MAX, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DichotomyRow {
    pub k: usize,
    pub intrinsic_lb: f64,
    pub euclid_ub: f64,
    pub diam_min: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub lambda: f64,
    pub n: usize,
    pub rows: Vec<DichotomyRow>,
}

impl DichotomyReport {
    /// Ratio of the largest to the smallest intrinsic value.
    pub fn intrinsic_factor(&self) -> f64 {
        let v = self.rows.iter().map(|r| r.intrinsic_lb);
        v.clone().fold(0.0, f64::max) / v.fold(f64::INFINITY, f64::min)
    }

    pub fn euclid_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].euclid_ub < w[0].euclid_ub)
    }

    /// First level whose Euclidean upper bound is below the intrinsic lower bound.
    pub fn crossing(&self) -> Option<usize> {
        self.rows.iter().find(|r| r.euclid_ub < r.intrinsic_lb).map(|r| r.k)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,intrinsic_lb,euclid_ub,diam_min,delta\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:.17e},{:.17e},{:.17e},{:.17e}\n", r.k, r.intrinsic_lb, r.euclid_ub, r.diam_min, r.delta));
        }
        s
    }
}

/// Intrinsic and Euclidean moduli of core-torus families level by level.
///
/// The intrinsic column is the certified dual lower bound of the core family
/// of `1ᵏ` on the Semmes complex of the branch `∅, 1, 11, …`. The Euclidean
/// column boxes the smallest stage-k tube of the shrinking schedule with
/// `m = k_max` on the canonical root; for n = 4 the interlaced tube at depth k
/// is bounded by the sum of its two factor diameters.
pub fn dichotomy_report(opts: &DichotomyOptions) -> Result<DichotomyReport> {
    use crate::modulus::{conformal_exponent, core_family, modulus, upper_bound_boxing, ModulusOptions, OracleMode};
    use crate::semmes::{build_complex_with, ComplexOptions, ModelParams};
    let n = opts.n;
    if n != 3 && n != 4 {
        return Err(Error::ConfigInvalid { field: "dimension".into(), message: format!("{n} is not 3 or 4") });
    }
    let lmax = 2f64.powf(-1.0 / n as f64);
    if !(opts.lambda > 0.0 && opts.lambda < lmax) {
        return Err(Error::ConfigInvalid { field: "lambda".into(), message: format!("{} is not in (0, {lmax})", opts.lambda) });
    }
    let branch: Vec<Word> = (0..=opts.k_max).map(|k| Word::from_letters(&vec![1; k])).collect::<Result<_>>()?;
    let complex = build_complex_with(branch.iter().cloned(), opts.lambda, ModelParams::default(), opts.mesh_scale, n, &ComplexOptions::default())?;
    let p = conformal_exponent(n);
    let mopts = ModulusOptions { oracle: OracleMode::Off, ..Default::default() };
    let intrinsic =
        branch.iter().map(|w| Ok(modulus(&core_family(&complex, w, opts.samples, opts.seed)?.family, p, &mopts)?.lower_bound)).collect::<Result<Vec<f64>>>()?;

    let tree = crate::tree::canonical_tree(0, &crate::tree::TreeOptions::default())?;
    let delta = default_delta(&tree)?;
    let root = tree.root().clone();
    let m = match n {
        3 => opts.k_max,
        _ => product_depths(opts.k_max).0,
    }
    .max(1);
    let shrink_opts = crate::shrink::ShrinkOptions { seed: opts.seed, ..Default::default() };
    let cert = crate::shrink::run_shrink_with_m(&root, root.diameter_estimate(), m, &shrink_opts)?;
    let mins = &cert.min_diameters;
    let rows = (0..=opts.k_max)
        .map(|k| {
            let diam_min = if n == 3 {
                mins[k]
            } else {
                let (a, b) = product_depths(k);
                mins[a] + mins[b]
            };
            DichotomyRow { k, intrinsic_lb: intrinsic[k], euclid_ub: upper_bound_boxing(diam_min, delta, n), diam_min, delta }
        })
        .collect();
    Ok(DichotomyReport { lambda: opts.lambda, n, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{canonical_tree, TreeOptions};

    #[test]
    fn root_and_first_double() {
        let t = canonical_tree(1, &TreeOptions::default()).unwrap();
        let delta = default_delta(&t).unwrap();
        assert!((delta - 0.2).abs() < 1e-3);
        for j in [-0.19, 0.0, 0.13] {
            assert!(count_fiber_intersections(&t, 0, j, 0).unwrap() >= 1);
            let per = per_core_counts(&t, 1, j, 0).unwrap();
            // children are null-homologous off the root: a child meeting the
            // fiber meets it at least twice, with signed count 0
            for (_, signed, unsigned) in &per {
                assert_eq!(*signed, 0);
                assert!(*unsigned == 0 || *unsigned >= 2);
            }
            assert!(per.iter().filter(|c| c.2 > 0).count() >= 1);
            assert!(per.iter().map(|c| c.2).sum::<usize>() >= 2);
        }
    }

    #[test]
    fn product_counts_multiply() {
        let t = canonical_tree(2, &TreeOptions::default()).unwrap();
        let a = count_fiber_intersections(&t, 2, 0.05, 0).unwrap();
        let b = count_fiber_intersections(&t, 1, -0.1, 0).unwrap();
        assert_eq!(count_product_intersections(&t, 3, [0.05, -0.1], 0).unwrap(), a * b);
    }

    #[test]
    fn coarea_small() {
        let t = canonical_tree(3, &TreeOptions::default()).unwrap();
        let b = coarea_area_bound(&t, 3, 0.1, FIBERS_N3, 3, 0).unwrap();
        assert!(b.total_area_lb >= 0.9 * 1.6, "{}", b.total_area_lb);
        assert!(b.total_area_lb <= 1.1 * b.measured_total);
        let b4 = coarea_area_bound(&t, 2, 0.1, FIBER_GRID_N4, 4, 0).unwrap();
        assert!(b4.total_area_lb >= 0.9 * b4.predicted);
    }
}
