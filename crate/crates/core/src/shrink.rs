//! Bing's shrinking schedule, run on explicit curve trees.
//!
//! The root tube carries `2m` meridian disks in cyclic order. Its two
//! children carry the runs `[0, m)` and `[m, 2m)`; below that, a tube whose
//! run is `[s, s + l)` has children on `[s, s + l - 1)` and `[s + 1, s + l)`.
//! After `m` doublings every tube meets a single disk. Incidences and
//! diameters are measured on the generated curves, never inferred.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::bing::{crossing_sequence, ChildSchedule, DiskSystem};
use crate::geom::frame::FrameField;
use crate::geom::meridian::{meridian_intersections, Disk};
use crate::geom::polyline::{Point, Polyline};
use crate::geom::tube::Tube;
use crate::tree::{grow_double, NodeCertificate};
use crate::word::Word;

pub const DEFAULT_LEAF_CAP: usize = 1 << 16;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ShrinkOptions {
    /// Largest number of final tubes a run may enumerate.
    pub leaf_cap: usize,
    pub seed: u64,
}

impl Default for ShrinkOptions {
    fn default() -> Self {
        ShrinkOptions { leaf_cap: DEFAULT_LEAF_CAP, seed: 0 }
    }
}

/// Smallest `m` with `2m` evenly spaced disks at most `eps / 2` apart.
pub fn disk_count_for(length: f64, eps: f64) -> usize {
    // tolerate rounding in the measured length
    let n = (length / (0.5 * eps) * (1.0 - 1e-12)).ceil().max(2.0) as usize;
    let m = n.div_ceil(2);
    m.max(1)
}

/// `2m` normal disks of radius `delta0`, evenly spaced along the core.
pub fn disks_for_m(core: &Polyline, m: usize, delta0: f64, seed: u64) -> Result<DiskSystem> {
    let frames = FrameField::rotation_minimizing(core);
    let total = frames.total_length();
    let count = 2 * m;
    let positions: Vec<f64> = (0..count).map(|i| (i as f64 + 0.5) * total / count as f64).collect();
    let disks = positions
        .iter()
        .map(|&t| {
            let (p, f) = frames.sample(core, t);
            Disk { center: p, normal: f.tangent, radius: delta0 }
        })
        .collect();
    let system = DiskSystem { disks, positions };
    let seq = crossing_sequence(core, &system, seed)?;
    let order: Vec<usize> = seq.iter().map(|c| c.1).collect();
    let mut sorted = order.clone();
    sorted.sort_unstable();
    if sorted != (0..count).collect::<Vec<_>>() {
        return Err(Error::InfeasibleGeometry {
            word: String::new(),
            reason: format!("disks of radius {delta0:e} meet the core {} times in total, expected {count}", order.len()),
        });
    }
    Ok(system)
}

pub fn plan_disks(core: &Polyline, eps: f64, delta0: f64) -> Result<(usize, DiskSystem)> {
    if !(eps > 0.0) {
        return Err(Error::ConfigInvalid { field: "epsilon".into(), message: format!("must be positive, got {eps}") });
    }
    let m = disk_count_for(core.length(), eps);
    Ok((m, disks_for_m(core, m, delta0, 0)?))
}

/// Measured incidence of one tube core with the disk system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Incidence {
    pub first: usize,
    pub count: usize,
    /// Unsigned crossings with each disk of the run, in run order.
    pub multiplicities: Vec<usize>,
    /// Signed crossings with each disk of the run.
    pub signed: Vec<i64>,
    /// Crossings with disks outside the run.
    pub outside: usize,
}

impl Incidence {
    /// The run condition: nothing outside the run, inner disks met twice,
    /// the two end disks met a positive even number of times, all signed
    /// counts zero. The root (`doubled == false`) meets every disk once.
    pub fn rule_holds(&self, doubled: bool) -> bool {
        if self.outside != 0 || self.multiplicities.len() != self.count {
            return false;
        }
        if !doubled {
            return self.multiplicities.iter().all(|&c| c == 1);
        }
        let last = self.count - 1;
        self.signed.iter().all(|&s| s == 0)
            && self.multiplicities.iter().enumerate().all(|(i, &c)| if i == 0 || i == last { c >= 2 && c % 2 == 0 } else { c == 2 })
    }
}

pub fn measure_incidence(core: &Polyline, disks: &DiskSystem, first: usize, count: usize, seed: u64) -> Result<Incidence> {
    let n = disks.count();
    let mut multiplicities = vec![0; count];
    let mut signed = vec![0; count];
    let mut outside = 0;
    for (k, d) in disks.disks.iter().enumerate() {
        let c = meridian_intersections(core, d, seed ^ k as u64)?;
        let off = (k + n - first) % n;
        if off < count {
            multiplicities[off] = c.unsigned;
            signed[off] = c.signed;
        } else {
            outside += c.unsigned;
        }
    }
    Ok(Incidence { first, count, multiplicities, signed, outside })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageTable {
    pub stage: usize,
    pub rows: BTreeMap<Word, Incidence>,
    pub rule_holds: bool,
}

#[derive(Clone, Debug)]
pub struct ShrinkState {
    pub stage: usize,
    pub m: usize,
    pub disk_system: DiskSystem,
    pub tubes: BTreeMap<Word, Tube>,
    pub incidence: BTreeMap<Word, Incidence>,
    pub certificates: Vec<NodeCertificate>,
}

impl ShrinkState {
    pub fn initial(root: Tube, m: usize, disk_system: DiskSystem, seed: u64) -> Result<Self> {
        let inc = measure_incidence(&root.core, &disk_system, 0, 2 * m, seed)?;
        Ok(ShrinkState {
            stage: 0,
            m,
            disk_system,
            tubes: BTreeMap::from([(Word::root(), root)]),
            incidence: BTreeMap::from([(Word::root(), inc)]),
            certificates: Vec::new(),
        })
    }

    pub fn table(&self) -> StageTable {
        let doubled = self.stage > 0;
        let expected = if doubled { self.m + 1 - self.stage } else { 2 * self.m };
        let rule_holds = self.incidence.values().all(|i| i.count == expected && i.rule_holds(doubled));
        StageTable { stage: self.stage, rows: self.incidence.clone(), rule_holds }
    }
}

/// Runs assigned to the two children of a tube carrying `(first, count)`.
fn child_windows(stage: usize, m: usize, first: usize, count: usize) -> [(usize, usize); 2] {
    if stage == 0 {
        [(0, m), (m, m)]
    } else {
        let n = 2 * m;
        [(first, count - 1), ((first + 1) % n, count - 1)]
    }
}

/// A child tube with its incidence and, for doubled nodes, its certificate.
type Grown = (Word, Tube, Incidence, Option<NodeCertificate>);

pub fn shrink_step(state: &ShrinkState, seed: u64) -> Result<ShrinkState> {
    if state.stage >= state.m {
        return Err(Error::InfeasibleSchedule(format!("stage {} is already final for m = {}", state.stage, state.m)));
    }
    let n = 2 * state.m;
    let grown: Vec<Result<Vec<Grown>>> = state
        .tubes
        .par_iter()
        .map(|(w, tube)| {
            let inc = &state.incidence[w];
            let windows = child_windows(state.stage, state.m, inc.first, inc.count);
            let idx = |(f, c): (usize, usize)| (0..c).map(|i| (f + i) % n).collect::<Vec<_>>();
            let schedule = ChildSchedule { first: idx(windows[0]), second: idx(windows[1]) };
            let (a, b, cert) = grow_double(w, tube, Some((&state.disk_system, &schedule)), seed)?;
            let (wa, wb) = w.children();
            let ia = measure_incidence(&a.core, &state.disk_system, windows[0].0, windows[0].1, seed)?;
            let ib = measure_incidence(&b.core, &state.disk_system, windows[1].0, windows[1].1, seed)?;
            Ok(vec![(wa, a, ia, Some(cert)), (wb, b, ib, None)])
        })
        .collect();
    let mut tubes = BTreeMap::new();
    let mut incidence = BTreeMap::new();
    let mut certificates = state.certificates.clone();
    for g in grown {
        for (w, t, i, c) in g? {
            tubes.insert(w.clone(), t);
            incidence.insert(w, i);
            certificates.extend(c);
        }
    }
    Ok(ShrinkState { stage: state.stage + 1, m: state.m, disk_system: state.disk_system.clone(), tubes, incidence, certificates })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShrinkCertificate {
    pub m: usize,
    pub epsilon: f64,
    pub delta0: f64,
    pub stage_tables: Vec<StageTable>,
    pub final_diameters: BTreeMap<Word, f64>,
    /// Largest tube radius at each stage.
    pub radii: Vec<f64>,
    /// Largest chart distortion among the tubes of each stage.
    pub distortions: Vec<f64>,
    /// Smallest tube diameter at each stage.
    pub min_diameters: Vec<f64>,
    pub node_certificates: Vec<NodeCertificate>,
    #[serde(skip)]
    pub leaves: BTreeMap<Word, Tube>,
}

impl ShrinkCertificate {
    pub fn max_final_diameter(&self) -> f64 {
        self.final_diameters.values().copied().fold(0.0, f64::max)
    }

    pub fn diameters_below_epsilon(&self) -> bool {
        self.final_diameters.values().all(|&d| d < self.epsilon)
    }

    pub fn schedule_holds(&self) -> bool {
        self.stage_tables.iter().all(|t| t.rule_holds)
    }

    pub fn radii_decrease(&self) -> bool {
        self.radii.windows(2).all(|w| w[1] < w[0])
    }

    pub fn clasps_hold(&self) -> bool {
        self.node_certificates.iter().all(|c| c.holds())
    }

    pub fn holds(&self) -> bool {
        self.diameters_below_epsilon() && self.schedule_holds() && self.radii_decrease() && self.clasps_hold()
    }
}

fn check_leaf_cap(m: usize, cap: usize) -> Result<()> {
    let leaves = 2f64.powi(m as i32);
    if leaves > cap as f64 {
        return Err(Error::ShrinkTooDeep { m, leaves, cap });
    }
    Ok(())
}

pub fn run_shrink(root: &Tube, eps: f64, opts: &ShrinkOptions) -> Result<ShrinkCertificate> {
    if !(eps > 0.0) {
        return Err(Error::ConfigInvalid { field: "epsilon".into(), message: format!("must be positive, got {eps}") });
    }
    run_shrink_with_m(root, eps, disk_count_for(root.core.length(), eps), opts)
}

/// Runs the schedule with a prescribed `m` (at least the planned one).
pub fn run_shrink_with_m(root: &Tube, eps: f64, m: usize, opts: &ShrinkOptions) -> Result<ShrinkCertificate> {
    check_leaf_cap(m, opts.leaf_cap)?;
    let disks = disks_for_m(&root.core, m, root.radius, opts.seed)?;
    let mut state = ShrinkState::initial(root.clone(), m, disks, opts.seed)?;
    let mut tables = vec![state.table()];
    let mut radii = vec![root.radius];
    let mut distortions = vec![root.chart_distortion];
    let min_diameter = |s: &ShrinkState| s.tubes.values().map(|t| t.diameter_estimate()).fold(f64::INFINITY, f64::min);
    let mut min_diameters = vec![min_diameter(&state)];
    while state.stage < m {
        state = shrink_step(&state, opts.seed)?;
        tables.push(state.table());
        radii.push(state.tubes.values().map(|t| t.radius).fold(0.0, f64::max));
        distortions.push(state.tubes.values().map(|t| t.chart_distortion).fold(1.0, f64::max));
        min_diameters.push(min_diameter(&state));
    }
    let final_diameters = state.tubes.iter().map(|(w, t)| (w.clone(), t.diameter_estimate())).collect();
    Ok(ShrinkCertificate {
        m,
        epsilon: eps,
        delta0: root.radius,
        stage_tables: tables,
        final_diameters,
        radii,
        distortions,
        min_diameters,
        node_certificates: state.certificates,
        leaves: state.tubes,
    })
}

/// Similarity chart: global point = `center + scale * local`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Chart {
    pub center: Point,
    pub scale: f64,
}

impl Chart {
    pub fn identity() -> Self {
        Chart { center: Point::zeros(), scale: 1.0 }
    }

    /// Chart normalizing `tube` (given in this chart) to unit diameter about its centroid.
    fn refine(&self, tube: &Tube) -> Result<(Chart, Tube)> {
        let c = tube.core.centroid();
        let s = tube.diameter_estimate();
        let v: Vec<Point> = tube.core.vertices().iter().map(|p| (p - c) / s).collect();
        let core = Polyline::new_unchecked(v)?;
        let local = crate::geom::tube::tube_of(core, tube.radius / s)?;
        Ok((Chart { center: self.center + c * self.scale, scale: self.scale * s }, local))
    }
}

/// One stage of the iterated schedule.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IteratedStage {
    pub target: f64,
    /// Total depth reached after this stage.
    pub depth: usize,
    /// Doublings added by this stage.
    pub m: usize,
    pub leaf_count: usize,
    pub max_diameter: f64,
    pub schedule_holds: bool,
    pub clasps_hold: bool,
    pub radii_decrease: bool,
}

impl IteratedStage {
    pub fn holds(&self) -> bool {
        self.max_diameter < self.target && self.schedule_holds && self.clasps_hold && self.radii_decrease
    }
}

/// Repeats the schedule inside every final tube of the previous stage.
///
/// Each later stage runs in a similarity chart that rescales the tube it acts
/// in to unit diameter, so radii stay well inside floating-point resolution;
/// diameters are mapped back by the chart scale. All tubes of one stage use
/// the same `m`, the largest any of them needs.
pub fn iterate_shrink(root: &Tube, targets: &[f64], opts: &ShrinkOptions) -> Result<Vec<IteratedStage>> {
    if targets.is_empty() || targets.windows(2).any(|w| !(w[1] < w[0])) || !(targets[targets.len() - 1] > 0.0) {
        return Err(Error::ConfigInvalid { field: "targets".into(), message: "must be positive and strictly decreasing".into() });
    }
    let mut leaves: Vec<(Word, Chart, Tube)> = vec![(Word::root(), Chart::identity(), root.clone())];
    let mut out = Vec::new();
    let mut depth = 0;
    for &target in targets {
        let local: Vec<(Word, Chart, Tube)> = if depth == 0 {
            leaves.clone()
        } else {
            leaves
                .iter()
                .map(|(w, ch, t)| {
                    let (c, l) = ch.refine(t)?;
                    Ok((w.clone(), c, l))
                })
                .collect::<Result<_>>()?
        };
        let m = local.iter().map(|(_, ch, t)| disk_count_for(t.core.length(), target / ch.scale)).max().unwrap();
        let total = 2f64.powi(m as i32) * local.len() as f64;
        if total > opts.leaf_cap as f64 {
            return Err(Error::ShrinkTooDeep { m: depth + m, leaves: total, cap: opts.leaf_cap });
        }
        let runs: Vec<Result<(Word, Chart, ShrinkCertificate)>> =
            local.par_iter().map(|(w, ch, t)| Ok((w.clone(), *ch, run_shrink_with_m(t, target / ch.scale, m, opts)?))).collect();
        let mut next = Vec::with_capacity(total as usize);
        let (mut max_d, mut sched, mut clasp, mut radii) = (0.0f64, true, true, true);
        for r in runs {
            let (w, ch, cert) = r?;
            max_d = max_d.max(ch.scale * cert.max_final_diameter());
            sched &= cert.schedule_holds();
            clasp &= cert.clasps_hold();
            radii &= cert.radii_decrease();
            for (lw, lt) in cert.leaves {
                next.push((w.concat(&lw), ch, lt));
            }
        }
        depth += m;
        out.push(IteratedStage {
            target,
            depth,
            m,
            leaf_count: next.len(),
            max_diameter: max_d,
            schedule_holds: sched,
            clasps_hold: clasp,
            radii_decrease: radii,
        });
        leaves = next;
    }
    Ok(out)
}

/// Allowed bilipschitz factor of the neighbourhood switch at interlaced step `k`.
pub fn switch_factor(k: usize) -> f64 {
    2f64.powf(2f64.powi(-2 * k as i32))
}

/// Product of [`switch_factor`] over steps `1..=m`, each taken twice (one per factor).
pub fn switch_budget_product(m: usize) -> f64 {
    (1..=m).map(|k| switch_factor(k).powi(2)).product()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InterlacedCertificate {
    pub m: usize,
    pub epsilon: f64,
    pub delta0: f64,
    /// Target for each factor: `epsilon * delta0 / 20`.
    pub factor_target: f64,
    /// Measured chart distortion of each alternating step, in order.
    pub step_distortions: Vec<f64>,
    pub distortion_product: f64,
    pub budget: f64,
    /// Largest final tube radius over both factors.
    pub delta_m: f64,
    /// `(8 / delta0)(diam a + diam b + delta_m)` per interlaced word, when enumerable.
    pub bounds: BTreeMap<Word, f64>,
    pub max_bound: f64,
    pub factor_a: ShrinkCertificate,
    pub factor_b: ShrinkCertificate,
}

impl InterlacedCertificate {
    pub fn holds(&self) -> bool {
        self.distortion_product <= self.budget && self.max_bound < self.epsilon && self.factor_a.holds() && self.factor_b.holds()
    }
}

/// Interlaced words enumerated explicitly up to this many pairs.
pub const MAX_ENUMERATED_PAIRS: usize = 1 << 12;

/// Shrinks both factors to `epsilon * delta0 / 20` with a common `m` and
/// bounds every interlaced tube.
///
/// Step `(k, i)` is the k-th doubling of factor `i`; its distortion is the
/// largest chart distortion among the tubes it creates, and the running
/// product must stay within `8 / delta0`.
pub fn run_bb_shrink(a: &Tube, b: &Tube, eps: f64, delta0: f64, opts: &ShrinkOptions) -> Result<InterlacedCertificate> {
    if !(eps > 0.0 && delta0 > 0.0) {
        return Err(Error::ConfigInvalid { field: "epsilon".into(), message: "epsilon and delta0 must be positive".into() });
    }
    let target = eps * delta0 / 20.0;
    let m = disk_count_for(a.core.length(), target).max(disk_count_for(b.core.length(), target));
    let budget = 8.0 / delta0;
    let ca = run_shrink_with_m(a, target, m, opts)?;
    let cb = run_shrink_with_m(b, target, m, opts)?;
    let mut step_distortions = Vec::with_capacity(2 * m);
    let mut product = 1.0;
    for k in 1..=m {
        for c in [&ca, &cb] {
            let d = c.distortions[k];
            step_distortions.push(d);
            product *= d;
        }
    }
    if product > budget {
        return Err(Error::BudgetExceeded { product, budget });
    }
    let delta_m = ca.leaves.values().chain(cb.leaves.values()).map(|t| t.radius).fold(0.0, f64::max);
    let da: Vec<(&Word, f64)> = ca.leaves.iter().map(|(w, t)| (w, crate::geom::diameter(t.core.vertices()))).collect();
    let db: Vec<(&Word, f64)> = cb.leaves.iter().map(|(w, t)| (w, crate::geom::diameter(t.core.vertices()))).collect();
    let bound = |x: f64, y: f64| crate::geom::interlaced::interlaced_diameter_bound(x, y, delta_m, budget);
    let mut bounds = BTreeMap::new();
    if da.len() * db.len() <= MAX_ENUMERATED_PAIRS {
        for (wa, xa) in &da {
            for (wb, xb) in &db {
                bounds.insert(crate::word::interlace(wa, wb).merged, bound(*xa, *xb));
            }
        }
    }
    let max_a = da.iter().map(|x| x.1).fold(0.0, f64::max);
    let max_b = db.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(InterlacedCertificate {
        m,
        epsilon: eps,
        delta0,
        factor_target: target,
        step_distortions,
        distortion_product: product,
        budget,
        delta_m,
        bounds,
        max_bound: bound(max_a, max_b),
        factor_a: ca,
        factor_b: cb,
    })
}
