//! The voxelized model annular region `𝕋 ∖ (𝕋₁ ∪ 𝕋₂)`.
//!
//! `𝕋` is the flat solid torus `S¹(ℓ) × 𝔹²(1)` with coordinates `(s, x, y)`,
//! `s` periodic. The two holes are Bing doubled arcs: child 1 runs at
//! `x = ±h` over the first half of the circle, child 2 at `y = ±h` over the
//! second, and each closes with half-circle turns that clasp the other.
//! For n = 4 the region is multiplied by a meshed circle of length ℓ.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::frame::FrameField;
use crate::geom::polyline::{Point, Polyline};

/// Fewest cells an annular region may receive.
pub const MIN_REGION_CELLS: usize = 200;

const TURN_SEGMENTS: usize = 12;
const ARC_SEGMENTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Circumference ℓ of the model torus.
    pub length: f64,
    /// Offset h of the doubled arcs from the axis.
    pub offset: f64,
    /// Radius of the hole tubes.
    pub child_radius: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { length: 1.4, offset: 0.28, child_radius: 0.1 }
    }
}

impl ModelParams {
    /// Closed core of hole `i` (0 or 1) in `(s, x, y)`; `s` may leave `[0, ℓ)`.
    pub fn child_core(&self, i: usize) -> Result<Polyline> {
        let (l, h) = (self.length, self.offset);
        let (s0, s1) = if i == 0 { (0.0, 0.5 * l) } else { (0.5 * l, l) };
        // offset direction: x for child 1, y for child 2
        let at = |s: f64, u: f64| if i == 0 { Point::new(s, u, 0.0) } else { Point::new(s, 0.0, u) };
        let mut v = Vec::new();
        for k in 0..ARC_SEGMENTS {
            v.push(at(s0 + (s1 - s0) * k as f64 / ARC_SEGMENTS as f64, h));
        }
        for k in 0..TURN_SEGMENTS {
            let phi = PI * k as f64 / TURN_SEGMENTS as f64;
            v.push(at(s1 + h * phi.sin(), h * phi.cos()));
        }
        for k in 0..ARC_SEGMENTS {
            v.push(at(s1 - (s1 - s0) * k as f64 / ARC_SEGMENTS as f64, -h));
        }
        for k in 0..TURN_SEGMENTS {
            let phi = PI * k as f64 / TURN_SEGMENTS as f64;
            v.push(at(s0 - h * phi.sin(), -h * phi.cos()));
        }
        Polyline::new(v)
    }

    /// Clearances the hole tubes keep: between the cores at a clasp, between
    /// the turns of one core across the circle, and to the outer boundary.
    pub fn clearances(&self) -> [f64; 3] {
        let r = self.child_radius;
        [self.offset - 2.0 * r, self.length - 4.0 * self.offset - 2.0 * r, 1.0 - self.offset - r]
    }
}

/// Closest point on a polyline: (distance, arclength, point).
fn closest(core: &Polyline, arcs: &[f64], p: &Point) -> (f64, f64, Point) {
    let mut best = (f64::INFINITY, 0.0, *p);
    for (i, (a, b)) in core.segments().enumerate() {
        let d = b - a;
        let t = ((p - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
        let q = a + d * t;
        let dist = (p - q).norm();
        if dist < best.0 {
            best = (dist, arcs[i] + t * d.norm(), q);
        }
    }
    best
}

/// Voxel cell of the 3D model region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCell {
    pub index: [usize; 3],
    pub coords: [f64; 3],
}

/// Boundary cell with its position `(t, θ) ∈ [0,1) × [0, 2π)` on a boundary torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCell {
    pub cell: usize,
    pub t: f64,
    pub theta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Model {
    pub params: ModelParams,
    pub n: usize,
    /// Pitch along s, across the disk, and along the extra circle (n = 4).
    pub pitch: [f64; 3],
    pub circle_cells: usize,
    /// 3D cells; n = 4 cells are `base * circle_cells + c`.
    pub base: Vec<ModelCell>,
    /// 3D edges `(a, b, length)` with `a < b`.
    pub base_edges: Vec<(usize, usize, f64)>,
    pub outer: Vec<BoundaryCell>,
    pub holes: [Vec<BoundaryCell>; 2],
    /// Interface pairs `(parent hole cell, child outer cell)` per child, 3D ids.
    pub interfaces: [Vec<(usize, usize)>; 2],
}

fn periodic_gap(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Index of the nearest boundary cell in normalized `(t, θ)`.
fn nearest(list: &[BoundaryCell], q: &BoundaryCell) -> usize {
    let mut best = (f64::INFINITY, 0);
    for b in list {
        let d = periodic_gap(b.t, q.t, 1.0).powi(2) + (periodic_gap(b.theta, q.theta, TAU) / TAU).powi(2);
        if d < best.0 {
            best = (d, b.cell);
        }
    }
    best.1
}

impl Model {
    pub fn new(params: ModelParams, mesh_scale: f64, n: usize) -> Result<Model> {
        if !(3..=4).contains(&n) {
            return Err(Error::ConfigInvalid { field: "dimension".into(), message: format!("{n} is not 3 or 4") });
        }
        if params.clearances().iter().any(|&c| !(c > 0.0)) {
            return Err(Error::ConfigInvalid { field: "model".into(), message: format!("hole tubes overlap: {:?}", params.clearances()) });
        }
        if !(mesh_scale > 0.0) {
            return Err(Error::MeshTooCoarse(format!("mesh scale {mesh_scale}")));
        }
        let l = params.length;
        let ns = (l / mesh_scale).round().max(3.0) as usize;
        let nd = (2.0 / mesh_scale).round().max(2.0) as usize;
        let (ps, pd) = (l / ns as f64, 2.0 / nd as f64);
        let cores = [params.child_core(0)?, params.child_core(1)?];
        let arcs: Vec<Vec<f64>> = cores.iter().map(|c| c.arclengths()).collect();
        let coord = |is: usize, ix: usize, iy: usize| [(is as f64 + 0.5) * ps, -1.0 + (ix as f64 + 0.5) * pd, -1.0 + (iy as f64 + 0.5) * pd];
        let to_point = |c: &[f64; 3], shift: f64| Point::new(c[0] + shift, c[1], c[2]);
        let hole_dist =
            |c: &[f64; 3], i: usize| [-l, 0.0, l].iter().map(|&sh| closest(&cores[i], &arcs[i], &to_point(c, sh))).min_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
        // 0 = outside the disk, 1/2 = in hole 1/2, 3 = region
        let mut kind = vec![0u8; ns * nd * nd];
        let flat = |is: usize, ix: usize, iy: usize| (is * nd + ix) * nd + iy;
        for is in 0..ns {
            for ix in 0..nd {
                for iy in 0..nd {
                    let c = coord(is, ix, iy);
                    kind[flat(is, ix, iy)] = if c[1] * c[1] + c[2] * c[2] > 1.0 {
                        0
                    } else if hole_dist(&c, 0).0 < params.child_radius {
                        1
                    } else if hole_dist(&c, 1).0 < params.child_radius {
                        2
                    } else {
                        3
                    };
                }
            }
        }
        let mut id = vec![usize::MAX; kind.len()];
        let mut base = Vec::new();
        for is in 0..ns {
            for ix in 0..nd {
                for iy in 0..nd {
                    if kind[flat(is, ix, iy)] == 3 {
                        id[flat(is, ix, iy)] = base.len();
                        base.push(ModelCell { index: [is, ix, iy], coords: coord(is, ix, iy) });
                    }
                }
            }
        }
        if base.len() < MIN_REGION_CELLS {
            return Err(Error::MeshTooCoarse(format!("annular region has {} cells, need {MIN_REGION_CELLS}", base.len())));
        }
        let mut base_edges = Vec::new();
        let mut outer = Vec::new();
        let mut holes: [Vec<BoundaryCell>; 2] = [Vec::new(), Vec::new()];
        let frames = [FrameField::rotation_minimizing(&cores[0]), FrameField::rotation_minimizing(&cores[1])];
        for (cid, cell) in base.iter().enumerate() {
            let [is, ix, iy] = cell.index;
            let mut touches = [false; 3];
            let neighbours = [
                (Some((is + 1) % ns), Some(ix), Some(iy), ps),
                (Some(is), ix.checked_add(1).filter(|&v| v < nd), Some(iy), pd),
                (Some(is), Some(ix), iy.checked_add(1).filter(|&v| v < nd), pd),
                (Some((is + ns - 1) % ns), Some(ix), Some(iy), ps),
                (Some(is), ix.checked_sub(1), Some(iy), pd),
                (Some(is), Some(ix), iy.checked_sub(1), pd),
            ];
            for (k, nb) in neighbours.iter().enumerate() {
                let kd = match nb {
                    (Some(a), Some(b), Some(c), _) => kind[flat(*a, *b, *c)],
                    _ => 0,
                };
                if kd == 3 {
                    let other = id[flat(nb.0.unwrap(), nb.1.unwrap(), nb.2.unwrap())];
                    if k < 3 && other != cid {
                        base_edges.push((cid.min(other), cid.max(other), nb.3));
                    }
                } else {
                    touches[kd as usize] = true;
                }
            }
            if touches[0] {
                outer.push(BoundaryCell { cell: cid, t: cell.coords[0] / l, theta: cell.coords[2].atan2(cell.coords[1]).rem_euclid(TAU) });
            }
            for i in 0..2 {
                if touches[i + 1] {
                    let (_, t, q, p) = [-l, 0.0, l]
                        .iter()
                        .map(|&sh| {
                            let p = to_point(&cell.coords, sh);
                            let (d, t, q) = closest(&cores[i], &arcs[i], &p);
                            (d, t, q, p)
                        })
                        .min_by(|a, b| a.0.total_cmp(&b.0))
                        .unwrap();
                    let (_, f) = frames[i].sample(&cores[i], t);
                    let d = p - q;
                    let theta = d.dot(&f.binormal).atan2(d.dot(&f.normal)).rem_euclid(TAU);
                    holes[i].push(BoundaryCell { cell: cid, t: t / frames[i].total_length(), theta });
                }
            }
        }
        base_edges.sort_by_key(|e| (e.0, e.1));
        base_edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
        if outer.is_empty() || holes.iter().any(|h| h.is_empty()) {
            return Err(Error::MeshTooCoarse("a boundary torus received no cells".into()));
        }
        let mut interfaces: [Vec<(usize, usize)>; 2] = [Vec::new(), Vec::new()];
        for i in 0..2 {
            let mut pairs: Vec<(usize, usize)> = outer.iter().map(|o| (nearest(&holes[i], o), o.cell)).collect();
            pairs.extend(holes[i].iter().map(|hc| (hc.cell, nearest(&outer, hc))));
            pairs.sort();
            pairs.dedup();
            interfaces[i] = pairs;
        }
        let circle_cells = if n == 4 { ns } else { 1 };
        Ok(Model { params, n, pitch: [ps, pd, ps], circle_cells, base, base_edges, outer, holes, interfaces })
    }

    /// Number of cells of one copy.
    pub fn cell_count(&self) -> usize {
        self.base.len() * self.circle_cells
    }

    /// Unscaled volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        let v3 = self.pitch[0] * self.pitch[1] * self.pitch[1];
        if self.n == 4 {
            v3 * self.pitch[2]
        } else {
            v3
        }
    }

    pub fn region_volume(&self) -> f64 {
        self.cell_count() as f64 * self.cell_volume()
    }

    /// Cell-level edges of one copy, `(a, b, unscaled length)`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let c = self.circle_cells;
        if self.n == 3 {
            return self.base_edges.clone();
        }
        let mut out = Vec::with_capacity(self.base_edges.len() * c + self.base.len() * c);
        for &(a, b, len) in &self.base_edges {
            for k in 0..c {
                out.push((a * c + k, b * c + k, len));
            }
        }
        for a in 0..self.base.len() {
            for k in 0..c {
                let (u, v) = (a * c + k, a * c + (k + 1) % c);
                out.push((u.min(v), u.max(v), self.pitch[2]));
            }
        }
        out.sort_by_key(|x| (x.0, x.1));
        out
    }

    /// Interface pairs at cell level for child `i`.
    pub fn interface_cells(&self, i: usize) -> Vec<(usize, usize)> {
        let c = self.circle_cells;
        self.interfaces[i].iter().flat_map(|&(a, b)| (0..c).map(move |k| (a * c + k, b * c + k))).collect()
    }

    /// Cells of the core torus through the cross-section point `(ix, iy)`,
    /// with their unscaled masses; `None` if that column meets a hole.
    pub fn core_column(&self, ix: usize, iy: usize) -> Option<Vec<(usize, f64)>> {
        let ns = (self.params.length / self.pitch[0]).round() as usize;
        let col: Vec<usize> = self.base.iter().enumerate().filter(|(_, m)| m.index[1] == ix && m.index[2] == iy).map(|(i, _)| i).collect();
        if col.len() != ns {
            return None;
        }
        let c = self.circle_cells;
        let mass = if self.n == 4 { self.pitch[0] * self.pitch[2] } else { self.pitch[0] };
        Some(col.iter().flat_map(|&b| (0..c).map(move |k| (b * c + k, mass))).collect())
    }

    /// Cross-section positions whose columns avoid both holes.
    pub fn free_columns(&self) -> Vec<(usize, usize)> {
        let mut seen = std::collections::BTreeMap::new();
        for m in &self.base {
            *seen.entry((m.index[1], m.index[2])).or_insert(0usize) += 1;
        }
        let ns = (self.params.length / self.pitch[0]).round() as usize;
        seen.into_iter().filter(|&(_, c)| c == ns).map(|(k, _)| k).collect()
    }
}
