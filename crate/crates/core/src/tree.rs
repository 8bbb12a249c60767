//! Nested tube trees generated by repeated Bing doubling.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::bing::{bing_children, clasp_checks, ChildSchedule, ClaspCheck, DiskSystem};
use crate::geom::linking::linking_number;
use crate::geom::polyline::{Point, Polyline};
use crate::geom::tube::{tube_of, tubes_to_obj, SceneTube, Tube};
use crate::word::{Word, DEFAULT_MAX_DEPTH};

/// Radii below this multiple of the coordinate scale are not resolved in f64.
pub const PRECISION_FLOOR: f64 = 1e-12;

/// Geometric certificate of one doubling step.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeCertificate {
    pub parent: Word,
    pub sibling_clearance: f64,
    pub boundary_clearance: [f64; 2],
    pub clasp: [ClaspCheck; 2],
    pub linking_gauss: i64,
    pub linking_projection: i64,
    /// Minimum distance between non-adjacent segments of each child core.
    pub simplicity_margin: [f64; 2],
}

impl NodeCertificate {
    pub fn holds(&self) -> bool {
        self.sibling_clearance > 0.0
            && self.boundary_clearance.iter().all(|&c| c > 0.0)
            && self.clasp.iter().all(|c| c.holds())
            && self.linking_gauss == 0
            && self.linking_projection == 0
            && self.simplicity_margin.iter().all(|&m| m > 0.0)
    }
}

/// Replaces the two children of `parent` by tubes built on the Bing double.
pub fn grow_double(parent_word: &Word, parent: &Tube, schedule: Option<(&DiskSystem, &ChildSchedule)>, seed: u64) -> Result<(Tube, Tube, NodeCertificate)> {
    let d = bing_children(parent, schedule, seed).map_err(|e| match e {
        Error::InfeasibleGeometry { reason, .. } => Error::InfeasibleGeometry { word: parent_word.to_string(), reason },
        other => other,
    })?;
    let radii = d.child_radii();
    let mut tubes = Vec::with_capacity(2);
    for (i, r) in radii.iter().enumerate() {
        let core = d.child(i).clone();
        let w = parent_word.child(i as u8 + 1);
        if !(*r > PRECISION_FLOOR * core.scale()) {
            return Err(Error::PrecisionExhausted { word: w.to_string(), radius: *r });
        }
        let t = tube_of(core, *r).map_err(|e| Error::InfeasibleGeometry { word: w.to_string(), reason: e.to_string() })?;
        tubes.push(t);
    }
    let clasp = clasp_checks(&d, seed)?;
    let link = linking_number(&d.first, &d.second, seed)?;
    let cert = NodeCertificate {
        parent: parent_word.clone(),
        sibling_clearance: d.sibling_clearance,
        boundary_clearance: d.boundary_clearance,
        clasp,
        linking_gauss: link.gauss,
        linking_projection: link.projection,
        simplicity_margin: [d.first.min_nonadjacent_distance(), d.second.min_nonadjacent_distance()],
    };
    let b = tubes.pop().unwrap();
    let a = tubes.pop().unwrap();
    Ok((a, b, cert))
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TreeOptions {
    /// Replace the subtree at this word by an unlinked loop (negative control).
    pub unlink: Option<Word>,
    pub seed: u64,
}

/// Tubes indexed by words, with one certificate per doubled node.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TubeTree {
    pub depth: usize,
    pub tubes: BTreeMap<Word, Tube>,
    pub certificates: Vec<NodeCertificate>,
    /// Circle linking the root tube, when the tree is planted around one.
    pub linking_circle: Option<Polyline>,
}

impl TubeTree {
    pub fn level(&self, k: usize) -> impl Iterator<Item = (&Word, &Tube)> {
        self.tubes.iter().filter(move |(w, _)| w.depth() == k)
    }

    pub fn root(&self) -> &Tube {
        &self.tubes[&Word::root()]
    }

    pub fn all_certificates_hold(&self) -> bool {
        self.certificates.iter().all(|c| c.holds())
    }

    pub fn to_obj(&self, angular: usize) -> String {
        tubes_to_obj(self.tubes.iter().map(|(w, t)| (w.to_string(), t)), angular)
    }

    pub fn scene(&self) -> Vec<SceneTube> {
        self.tubes.iter().map(|(w, t)| SceneTube::new(w, t)).collect()
    }
}

/// Small loop in the parent's (tangent, normal) plane near its first vertex.
/// It bounds a disk in the parent tube but does not follow the core, so it
/// misses most meridian disks.
fn unlinked_loop(parent: &Tube) -> Result<Polyline> {
    let frames = crate::geom::frame::FrameField::rotation_minimizing(&parent.core);
    let (p, f) = frames.sample(&parent.core, 0.0);
    let r = 0.5 * parent.radius;
    let v = (0..32)
        .map(|i| {
            let th = std::f64::consts::TAU * i as f64 / 32.0;
            p + (f.tangent * th.cos() + f.normal * th.sin()) * r
        })
        .collect();
    Polyline::new(v)
}

pub fn build_tree(root: Tube, depth: usize, opts: &TreeOptions) -> Result<TubeTree> {
    if depth > DEFAULT_MAX_DEPTH {
        return Err(Error::DepthOverflow { requested: depth, max: DEFAULT_MAX_DEPTH });
    }
    let mut tubes = BTreeMap::new();
    tubes.insert(Word::root(), root);
    let mut certificates = Vec::new();
    let mut frontier = vec![Word::root()];
    for _ in 0..depth {
        let grown: Vec<Result<(Word, Tube, Tube, NodeCertificate)>> = frontier
            .par_iter()
            .map(|w| {
                let (a, b, c) = grow_double(w, &tubes[w], None, opts.seed)?;
                Ok((w.clone(), a, b, c))
            })
            .collect();
        let mut next = Vec::with_capacity(2 * frontier.len());
        for g in grown {
            let (w, a, b, c) = g?;
            let (wa, wb) = w.children();
            let a = if opts.unlink.as_ref() == Some(&wa) { tube_of(unlinked_loop(&tubes[&w])?, a.radius)? } else { a };
            let b = if opts.unlink.as_ref() == Some(&wb) { tube_of(unlinked_loop(&tubes[&w])?, b.radius)? } else { b };
            tubes.insert(wa.clone(), a);
            tubes.insert(wb.clone(), b);
            certificates.push(c);
            next.push(wa);
            next.push(wb);
        }
        frontier = next;
    }
    Ok(TubeTree { depth, tubes, certificates, linking_circle: None })
}

pub const CANONICAL_CORE_RADIUS: f64 = 0.5;
pub const CANONICAL_TUBE_RADIUS: f64 = 0.1;
pub const CANONICAL_SEGMENTS: usize = 128;

/// Root tube around a circle of radius 1/2 centred at (1, 0, 0) in the xz-plane,
/// and the unit circle of the xy-plane linking it once.
///
/// The root core starts at its top point so the clasps of the first double
/// sit away from the plane of the linking circle.
pub fn canonical_root() -> Result<(Tube, Polyline)> {
    let n = CANONICAL_SEGMENTS;
    let v = (0..n)
        .map(|i| {
            let th = std::f64::consts::FRAC_PI_2 + std::f64::consts::TAU * i as f64 / n as f64;
            Point::new(1.0 + CANONICAL_CORE_RADIUS * th.cos(), 0.0, CANONICAL_CORE_RADIUS * th.sin())
        })
        .collect();
    let core = Polyline::new(v)?;
    let alpha = crate::geom::polyline::make_round_core(1.0, n)?;
    Ok((tube_of(core, CANONICAL_TUBE_RADIUS)?, alpha))
}

pub fn canonical_tree(depth: usize, opts: &TreeOptions) -> Result<TubeTree> {
    let (root, alpha) = canonical_root()?;
    let mut t = build_tree(root, depth, opts)?;
    t.linking_circle = Some(alpha);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_tree_certificates() {
        let t = canonical_tree(3, &TreeOptions::default()).unwrap();
        assert_eq!(t.tubes.len(), 15);
        assert_eq!(t.certificates.len(), 7);
        for c in &t.certificates {
            assert!(c.holds(), "{c:?}");
        }
        // radii strictly decrease along every branch
        for (w, tube) in &t.tubes {
            if let Some(p) = w.parent() {
                assert!(tube.radius < t.tubes[&p].radius);
            }
        }
    }

    #[test]
    fn root_links_alpha() {
        let (root, alpha) = canonical_root().unwrap();
        let l = linking_number(&root.core, &alpha, 0).unwrap();
        assert_eq!(l.gauss.abs(), 1);
        assert!(alpha.distance_to(&root.core) - root.radius > 0.35);
    }

    #[test]
    fn scene_and_obj_export() {
        let t = canonical_tree(1, &TreeOptions::default()).unwrap();
        let s = serde_json::to_string(&t.scene()).unwrap();
        assert!(s.contains("\"word\":\"1\""));
        assert_eq!(t.to_obj(4).lines().filter(|l| l.starts_with("o ")).count(), 3);
    }
}
