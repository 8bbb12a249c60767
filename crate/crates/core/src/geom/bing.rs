//! Bing doubles inside a tube.
//!
//! Each child is a *doubled arc*: it runs along an arc of the parent core at
//! offset `+h` along one normal direction, turns around in a half circle, and
//! comes back at offset `-h`. The first child offsets along the frame normal,
//! the second along the binormal. The two arcs cover the parent core and meet
//! at two clasp points; at a clasp both half-circle tips are centred at the
//! same core point and reach past it in opposite directions, so each tip
//! pierces the thin disk spanned by the other child's turn. That is the clasp
//! of the Bing pattern: each child bounds a disk inside the parent tube and
//! crosses a parent meridian disk twice with opposite signs.
//!
//! With a disk schedule the arcs are chosen from the parent core's crossing
//! sequence with the reference disks, so each child meets a prescribed run of
//! consecutive disks.

use serde::{Deserialize, Serialize};

use super::frame::FrameField;
use super::meridian::{self, disk_crossings, Disk, DiskCount};
use super::polyline::{Point, Polyline};
use super::tube::Tube;
use crate::error::{Error, Result};

/// Segments per half-circle turn at the ends of a doubled arc.
pub const TIP_SEGMENTS: usize = 8;
/// Fraction of the parent radius used as the strand offset of each child.
pub const OFFSET_FRACTION: f64 = 0.5;

/// Reference meridian disks in cyclic order along a reference core.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiskSystem {
    pub disks: Vec<Disk>,
    /// Arclength position of each disk center on the reference core.
    pub positions: Vec<f64>,
}

impl DiskSystem {
    pub fn count(&self) -> usize {
        self.disks.len()
    }

    pub fn m(&self) -> usize {
        self.disks.len() / 2
    }
}

/// A run of consecutive disk indices modulo the disk count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiskWindow {
    pub start: usize,
    pub len: usize,
}

impl DiskWindow {
    pub fn indices(&self, modulus: usize) -> Vec<usize> {
        (0..self.len).map(|i| (self.start + i) % modulus).collect()
    }

    pub fn contains(&self, idx: usize, modulus: usize) -> bool {
        (idx + modulus - self.start) % modulus < self.len
    }

    /// First and last disk of the run.
    pub fn is_extreme(&self, idx: usize, modulus: usize) -> bool {
        let off = (idx + modulus - self.start) % modulus;
        off == 0 || off + 1 == self.len
    }

    /// Validates that a set of indices is a single cyclic run.
    pub fn from_indices(indices: &[usize], modulus: usize) -> Result<Self> {
        if indices.is_empty() || indices.len() > modulus {
            return Err(Error::InfeasibleSchedule(format!("window {indices:?} is empty or too long")));
        }
        let mut present = vec![false; modulus];
        for &i in indices {
            if i >= modulus || present[i] {
                return Err(Error::InfeasibleSchedule(format!("window {indices:?} has bad or repeated index")));
            }
            present[i] = true;
        }
        if indices.len() == modulus {
            return Ok(DiskWindow { start: 0, len: modulus });
        }
        // the run starts at the unique present index whose predecessor is absent
        let starts: Vec<usize> = (0..modulus).filter(|&i| present[i] && !present[(i + modulus - 1) % modulus]).collect();
        if starts.len() != 1 {
            return Err(Error::InfeasibleSchedule(format!("disks {indices:?} are not consecutive")));
        }
        Ok(DiskWindow { start: starts[0], len: indices.len() })
    }
}

/// Prescribed disk incidences for the two children.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChildSchedule {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct BingDouble {
    pub first: Polyline,
    pub second: Polyline,
    /// Strand offset from the parent core.
    pub offset: f64,
    /// Arclength interval of the parent core carried by each child.
    pub arcs: [(f64, f64); 2],
    /// Parent meridian disks in the middle of each child's arc.
    pub meridians: [Disk; 2],
    pub sibling_clearance: f64,
    /// Parent radius minus the farthest excursion of each child core.
    pub boundary_clearance: [f64; 2],
    pub windows: Option<[DiskWindow; 2]>,
}

impl BingDouble {
    pub fn child(&self, i: usize) -> &Polyline {
        if i == 0 {
            &self.first
        } else {
            &self.second
        }
    }

    /// Child radii under the quarter-clearance rule.
    pub fn child_radii(&self) -> [f64; 2] {
        [0.25 * self.sibling_clearance.min(self.boundary_clearance[0]), 0.25 * self.sibling_clearance.min(self.boundary_clearance[1])]
    }
}

/// Parent-core crossing parameters with every disk, sorted along the core.
pub fn crossing_sequence(core: &Polyline, disks: &DiskSystem, seed: u64) -> Result<Vec<(f64, usize)>> {
    let arcs = core.arclengths();
    let tol = 1e-15 * core.scale();
    let mut out = Vec::new();
    for (k, d) in disks.disks.iter().enumerate() {
        let crossings = match disk_crossings(core, d, tol) {
            Some(c) => c,
            None => {
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9e37));
                let mut found = None;
                for _ in 0..meridian::MAX_JITTER_RETRIES {
                    let j = core.jittered(meridian::JITTER_SCALE * core.scale(), &mut rng);
                    if let Some(c) = disk_crossings(&j, d, tol) {
                        found = Some(c);
                        break;
                    }
                }
                found.ok_or(Error::NonTransverse { retries: meridian::MAX_JITTER_RETRIES })?
            }
        };
        for c in crossings {
            let t = arcs[c.segment] + c.fraction * (arcs[c.segment + 1] - arcs[c.segment]);
            out.push((t, k));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    Ok(out)
}

fn arc_ok(disks: &[usize], window: &DiskWindow, modulus: usize) -> bool {
    let mut counts = vec![0usize; modulus];
    for &d in disks {
        if !window.contains(d, modulus) {
            return false;
        }
        counts[d] += 1;
    }
    window.indices(modulus).into_iter().all(|d| if window.is_extreme(d, modulus) { counts[d] >= 1 } else { counts[d] == 1 })
}

/// Chooses clasp gaps in the crossing sequence: the first pair of gaps (in
/// sequence order) whose two arcs satisfy the two windows.
fn choose_arcs(seq: &[(f64, usize)], total: f64, windows: &[DiskWindow; 2], modulus: usize) -> Option<(f64, f64, f64)> {
    let n = seq.len();
    if n < 2 {
        return None;
    }
    let gap_mid = |g: usize| {
        let a = seq[g].0;
        let b = if g + 1 == n { seq[0].0 + total } else { seq[g + 1].0 };
        (0.5 * (a + b), b - a)
    };
    for g1 in 0..n {
        for step in 1..n {
            let g2 = (g1 + step) % n;
            let first: Vec<usize> = (1..=step).map(|k| seq[(g1 + k) % n].1).collect();
            let second: Vec<usize> = (step + 1..=n).map(|k| seq[(g1 + k) % n].1).collect();
            if arc_ok(&first, &windows[0], modulus) && arc_ok(&second, &windows[1], modulus) {
                let (c1, w1) = gap_mid(g1);
                let (c2, w2) = gap_mid(g2);
                let c2 = if c2 <= c1 { c2 + total } else { c2 };
                return Some((c1, c2, w1.min(w2)));
            }
        }
    }
    None
}

/// Two Bing children of `parent`, optionally following a disk schedule.
pub fn bing_children(parent: &Tube, schedule: Option<(&DiskSystem, &ChildSchedule)>, seed: u64) -> Result<BingDouble> {
    let core = &parent.core;
    let frames = FrameField::rotation_minimizing(core);
    let total = frames.total_length();
    let h = OFFSET_FRACTION * parent.radius;
    let (c1, c2, windows) = match schedule {
        None => (0.0, 0.5 * total, None),
        Some((disks, sched)) => {
            let modulus = disks.count();
            let wa = DiskWindow::from_indices(&sched.first, modulus)?;
            let wb = DiskWindow::from_indices(&sched.second, modulus)?;
            let seq = crossing_sequence(core, disks, seed)?;
            let (c1, c2, min_gap) = choose_arcs(&seq, total, &[wa, wb], modulus).ok_or_else(|| {
                Error::InfeasibleSchedule(format!(
                    "no clasp placement gives windows {:?} and {:?} from {} parent crossings",
                    sched.first,
                    sched.second,
                    seq.len()
                ))
            })?;
            if min_gap < 3.0 * h {
                return Err(Error::InfeasibleGeometry { word: String::new(), reason: format!("clasp gap {min_gap:e} cannot hold turns of half-width {h:e}") });
            }
            (c1, c2, Some([wa, wb]))
        }
    };
    let first = doubled_arc(core, &frames, c1, c2, h, false)?;
    let second = doubled_arc(core, &frames, c2, c1 + total, h, true)?;
    let meridian_at = |t: f64| {
        let (p, f) = frames.sample(core, t);
        Disk { center: p, normal: f.tangent, radius: parent.radius }
    };
    let meridians = [meridian_at(0.5 * (c1 + c2)), meridian_at(0.5 * (c2 + c1 + total))];
    let sibling_clearance = first.distance_to(&second);
    let boundary_clearance = [parent.radius - first.max_distance_from(core), parent.radius - second.max_distance_from(core)];
    Ok(BingDouble { first, second, offset: h, arcs: [(c1, c2), (c2, c1 + total)], meridians, sibling_clearance, boundary_clearance, windows })
}

/// Closed curve hugging the core arc `[t0, t1]` at offset `h`.
pub fn doubled_arc(core: &Polyline, frames: &FrameField, t0: f64, t1: f64, h: f64, use_binormal: bool) -> Result<Polyline> {
    let total = frames.total_length();
    let n = core.len();
    // vertices this close to an end would make a short kinked segment
    let margin = 0.25 * h;
    let mut inner: Vec<(f64, usize)> = Vec::new();
    for shift in [-total, 0.0, total, 2.0 * total] {
        for i in 0..n {
            let t = frames.arcs[i] + shift;
            if t > t0 + margin && t < t1 - margin {
                inner.push((t, i));
            }
        }
    }
    inner.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let dir = |fr: &super::frame::Frame| if use_binormal { fr.binormal } else { fr.normal };
    // offset direction interpolated between vertex frames so it agrees with
    // the vertex offsets; tangent orthogonalized against it
    let end = |t: f64| {
        let (i, f) = core.locate(&frames.arcs, t);
        let (a, b) = core.segment(i);
        let u = (dir(&frames.frames[i]) * (1.0 - f) + dir(&frames.frames[(i + 1) % n]) * f).normalize();
        let s = b - a;
        let tan = (s - u * u.dot(&s)).normalize();
        (a + s * f, u, tan)
    };
    let (p0, u0, tan0) = end(t0);
    let (p1, u1, tan1) = end(t1);
    let mut forward: Vec<(Point, Point)> = Vec::with_capacity(inner.len() + 2);
    forward.push((p0, u0));
    for &(_, i) in &inner {
        forward.push((core.vertices()[i], dir(&frames.frames[i])));
    }
    forward.push((p1, u1));

    let mut verts = Vec::with_capacity(2 * forward.len() + 2 * TIP_SEGMENTS);
    for (p, u) in &forward {
        verts.push(p + u * h);
    }
    for k in 1..TIP_SEGMENTS {
        let th = std::f64::consts::PI * k as f64 / TIP_SEGMENTS as f64;
        verts.push(p1 + (u1 * th.cos() + tan1 * th.sin()) * h);
    }
    for (p, u) in forward.iter().rev() {
        verts.push(p - u * h);
    }
    for k in 1..TIP_SEGMENTS {
        let th = std::f64::consts::PI * k as f64 / TIP_SEGMENTS as f64;
        verts.push(p0 - (u0 * th.cos() + tan0 * th.sin()) * h);
    }
    Polyline::new_unchecked(verts)
}

/// Bing-pattern certificate for one child against the two parent meridian disks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaspCheck {
    pub own: DiskCount,
    pub other: DiskCount,
}

impl ClaspCheck {
    pub fn holds(&self) -> bool {
        self.own.signed == 0 && self.own.unsigned == 2 && self.other.unsigned == 0
    }
}

pub fn clasp_checks(double: &BingDouble, seed: u64) -> Result<[ClaspCheck; 2]> {
    let mut out = [ClaspCheck { own: DiskCount { signed: 0, unsigned: 0 }, other: DiskCount { signed: 0, unsigned: 0 } }; 2];
    for (i, slot) in out.iter_mut().enumerate() {
        let c = double.child(i);
        *slot = ClaspCheck {
            own: meridian::meridian_intersections(c, &double.meridians[i], seed)?,
            other: meridian::meridian_intersections(c, &double.meridians[1 - i], seed)?,
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::linking::linking_number;
    use crate::geom::meridian::meridian_intersections;
    use crate::geom::polyline::make_round_core;
    use crate::geom::tube::tube_of;

    fn round_tube() -> Tube {
        tube_of(make_round_core(1.0, 96).unwrap(), 0.2).unwrap()
    }

    pub(crate) fn disks_on(core: &Polyline, count: usize, radius: f64) -> DiskSystem {
        let frames = FrameField::rotation_minimizing(core);
        let total = frames.total_length();
        let positions: Vec<f64> = (0..count).map(|i| (i as f64 + 0.5) * total / count as f64).collect();
        let disks = positions
            .iter()
            .map(|&t| {
                let (p, f) = frames.sample(core, t);
                Disk { center: p, normal: f.tangent, radius }
            })
            .collect();
        DiskSystem { disks, positions }
    }

    #[test]
    fn unscheduled_double_has_bing_pattern() {
        let t = round_tube();
        let d = bing_children(&t, None, 0).unwrap();
        let checks = clasp_checks(&d, 0).unwrap();
        assert!(checks.iter().all(|c| c.holds()), "{checks:?}");
        assert!(d.sibling_clearance > 0.0);
        assert!(d.boundary_clearance.iter().all(|&c| c > 0.0));
        assert!(Polyline::new(d.first.vertices().to_vec()).is_ok());
        assert!(Polyline::new(d.second.vertices().to_vec()).is_ok());
        let l = linking_number(&d.first, &d.second, 5).unwrap();
        assert_eq!((l.gauss, l.projection), (0, 0));
    }

    #[test]
    fn clasp_is_geometrically_linked_through_spanning_disk() {
        // the second child's turn pierces the first child's thin spanning disk:
        // a small meridian-like disk of the first child at the clasp point is
        // crossed once by the second child.
        let t = round_tube();
        let d = bing_children(&t, None, 0).unwrap();
        let frames = FrameField::rotation_minimizing(&t.core);
        let (p, f) = frames.sample(&t.core, d.arcs[0].1);
        // disk in the (tangent, normal) plane through the first child's turn
        let disk = Disk { center: p - f.tangent * (0.5 * d.offset), normal: f.binormal, radius: 0.9 * d.offset };
        let c = meridian_intersections(&d.second, &disk, 1).unwrap();
        assert_eq!(c.unsigned, 1);
    }

    #[test]
    fn step_one_schedule_table() {
        let t = round_tube();
        let disks = disks_on(&t.core, 4, t.radius);
        let sched = ChildSchedule { first: vec![0, 1], second: vec![2, 3] };
        let d = bing_children(&t, Some((&disks, &sched)), 0).unwrap();
        let counts = |c: &Polyline| -> Vec<usize> { disks.disks.iter().map(|dk| meridian_intersections(c, dk, 0).unwrap().unsigned).collect() };
        assert_eq!(counts(&d.first), vec![2, 2, 0, 0]);
        assert_eq!(counts(&d.second), vec![0, 0, 2, 2]);
    }

    #[test]
    fn non_consecutive_schedule_is_infeasible() {
        let t = round_tube();
        let disks = disks_on(&t.core, 4, t.radius);
        let sched = ChildSchedule { first: vec![0, 2], second: vec![1, 3] };
        assert!(matches!(bing_children(&t, Some((&disks, &sched)), 0), Err(Error::InfeasibleSchedule(_))));
    }

    #[test]
    fn window_from_indices_wraps() {
        assert_eq!(DiskWindow::from_indices(&[5, 0, 1], 6).unwrap(), DiskWindow { start: 5, len: 3 });
        assert!(DiskWindow::from_indices(&[0, 2], 6).is_err());
    }
}
