//! Ahlfors-regularity, connectivity and quasi-self-similarity audits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::complex::{Scratch, SemmesComplex};
use crate::word::Word;

/// Smallest sampled radius, in local edge lengths.
pub const MIN_RADIUS_PITCHES: f64 = 3.0;
/// Largest dilation searched by the connectivity audit.
pub const MAX_DILATION: f64 = 16.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularitySample {
    pub center: usize,
    pub radius: f64,
    pub measure: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularityReport {
    pub samples: Vec<RegularitySample>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Level measures of tree 0 relative to level 0.
    pub level_growth: Vec<f64>,
    /// Set when `2λⁿ ≥ 1`: level measures do not decay and ratios are unbounded in depth.
    pub divergent: bool,
}

impl RegularityReport {
    pub fn spread(&self) -> f64 {
        self.ratio_max / self.ratio_min
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("center_id,radius,measure,ratio\n");
        for x in &self.samples {
            s.push_str(&format!("{},{:.17e},{:.17e},{:.17e}\n", x.center, x.radius, x.measure, x.ratio));
        }
        s
    }
}

/// Cell groups sampled round-robin: one per planted tree, plus the ambient ball.
fn sample_groups(c: &SemmesComplex) -> Vec<Vec<usize>> {
    let trees = c.copies.iter().map(|k| k.tree).max().map_or(0, |t| t + 1);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); trees];
    for (i, k) in c.copies.iter().enumerate() {
        groups[k.tree].extend(c.copy_cells(i));
    }
    if let Some(a) = &c.ambient {
        groups.push((a.first_cell..a.first_cell + a.coords.len()).collect());
    }
    groups.retain(|g| !g.is_empty());
    groups
}

/// Largest radius sampled around `x`: the diameter of its copy, capped by `diam`.
fn max_radius(c: &SemmesComplex, x: usize, diam: f64) -> f64 {
    let p = c.model.params;
    let d0 = (0.5 * p.length).hypot(2.0);
    let local = c.copy_of(x).map_or(diam, |k| k.scale * d0);
    local.min(diam)
}

fn sample_centers(c: &SemmesComplex, count: usize, diam: f64, seed: u64) -> Vec<(usize, f64)> {
    let groups = sample_groups(c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let g = &groups[i % groups.len()];
            let x = g[rng.gen_range(0..g.len())];
            let lo = MIN_RADIUS_PITCHES * c.local_pitch(x);
            let hi = max_radius(c, x, diam).max(lo);
            let r = (lo.ln() + rng.gen::<f64>() * (hi / lo).ln()).exp();
            (x, r)
        })
        .collect()
}

fn ball(c: &SemmesComplex, x: usize, r: f64, s: &mut Scratch) -> Vec<(usize, f64)> {
    c.settle(x, r, None, s)
}

/// Samples `μ(B(x, r)) / rⁿ` at seeded centers and log-uniform radii between
/// a few local edge lengths and the diameter of the center's copy.
pub fn audit_regularity(c: &SemmesComplex, sample_count: usize, seed: u64) -> RegularityReport {
    let diam = c.diameter_estimate();
    let centers = sample_centers(c, sample_count.max(1), diam, seed);
    let samples: Vec<RegularitySample> = centers
        .par_iter()
        .map_init(
            || c.scratch(),
            |s, &(x, r)| {
                let cells: Vec<usize> = ball(c, x, r, s).into_iter().map(|(v, _)| v).collect();
                let measure = c.measure(&cells);
                RegularitySample { center: x, radius: r, measure, ratio: measure / r.powi(c.n as i32) }
            },
        )
        .collect();
    let ratio_min = samples.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    let ratio_max = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    let m0 = c.level_measure(0);
    let level_growth = (0..=c.depth()).map(|k| c.level_measure(k) / m0).collect();
    RegularityReport { samples, ratio_min, ratio_max, level_growth, divergent: 2.0 * c.lambda.powi(c.n as i32) >= 1.0 }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConnectivitySample {
    pub center: usize,
    pub radius: f64,
    pub pair: (usize, usize),
    /// Smallest C with the pair joined inside `B(x, C r)`; infinite if none up to [`MAX_DILATION`].
    pub factor: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub samples: Vec<ConnectivitySample>,
    pub worst: f64,
    pub components: usize,
}

impl ConnectivityReport {
    pub fn disconnected(&self) -> bool {
        self.components > 1 || self.worst.is_infinite()
    }
}

/// Minimax path from `y` to `z` over cells with known distance to the center.
fn bottleneck(c: &SemmesComplex, dist: &std::collections::HashMap<usize, f64>, y: usize, z: usize) -> f64 {
    use std::collections::{BinaryHeap, HashMap};
    #[derive(PartialEq)]
    struct K(f64, usize);
    impl Eq for K {}
    impl Ord for K {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
        }
    }
    impl PartialOrd for K {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    let mut best: HashMap<usize, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(y, dist[&y]);
    heap.push(K(dist[&y], y));
    while let Some(K(b, u)) = heap.pop() {
        if u == z {
            return b;
        }
        if b > best[&u] {
            continue;
        }
        for (v, _) in c.neighbours(u) {
            let Some(&dv) = dist.get(&v) else { continue };
            let nb = b.max(dv);
            if best.get(&v).is_none_or(|&o| nb < o) {
                best.insert(v, nb);
                heap.push(K(nb, v));
            }
        }
    }
    f64::INFINITY
}

/// For seeded balls `B(x, r)` and pairs of cells in them, the smallest dilation
/// C such that the pair is joined by a path inside `B(x, C r)`.
pub fn audit_connectivity(c: &SemmesComplex, sample_count: usize, seed: u64) -> ConnectivityReport {
    let diam = c.diameter_estimate();
    let centers = sample_centers(c, sample_count.max(1), diam, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let picks: Vec<(f64, f64)> = centers.iter().map(|_| (rng.gen(), rng.gen())).collect();
    let samples: Vec<ConnectivitySample> = centers
        .par_iter()
        .zip(&picks)
        .map_init(
            || c.scratch(),
            |s, (&(x, r), &(u, v))| {
                let reach = c.settle(x, MAX_DILATION * r, None, s);
                let inside = reach.partition_point(|e| e.1 <= r);
                let y = reach[(u * inside as f64) as usize % inside].0;
                let z = reach[(v * inside as f64) as usize % inside].0;
                let dist: std::collections::HashMap<usize, f64> = reach.into_iter().collect();
                let factor = (bottleneck(c, &dist, y, z) / r).max(0.0);
                ConnectivitySample { center: x, radius: r, pair: (y, z), factor }
            },
        )
        .collect();
    let worst = samples.iter().map(|s| s.factor).fold(0.0, f64::max);
    ConnectivityReport { samples, worst, components: c.component_count() }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub word: Word,
    pub pairs: Vec<(usize, usize, f64)>,
    /// Largest of `ratio` and `1/ratio` over the sampled pairs.
    pub distortion: f64,
}

/// Compares `d(φ_w x, φ_w y)` with `λ^{|w|} d(x, y)` on seeded model cell pairs.
pub fn quasi_self_similarity_check(c: &SemmesComplex, w: &Word, pair_count: usize, seed: u64) -> Option<SimilarityReport> {
    let root = c.copy_index(0, &Word::root())?;
    let copy = c.copy_index(0, w)?;
    let per = c.model.cell_count();
    let rel = c.copies[copy].scale / c.copies[root].scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = (0..pair_count).map(|_| (rng.gen_range(0..per), rng.gen_range(0..per))).filter(|p| p.0 != p.1).collect();
    let (fr, fw) = (c.copies[root].first_cell, c.copies[copy].first_cell);
    let ratios: Vec<(usize, usize, f64)> = pairs
        .par_iter()
        .map_init(
            || c.scratch(),
            |s, &(a, b)| {
                let d0 = c.distance_with(fr + a, fr + b, s);
                let dw = c.distance_with(fw + a, fw + b, s);
                (a, b, dw / (rel * d0))
            },
        )
        .collect();
    let distortion = ratios.iter().map(|r| r.2.max(1.0 / r.2)).fold(1.0, f64::max);
    Some(SimilarityReport { word: w.clone(), pairs: ratios, distortion })
}
