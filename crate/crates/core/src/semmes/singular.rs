//! Finite-stage assembly of trees accumulating at the origin.
//!
//! Tree k (depth k) is planted as a round solid torus in the ball
//! `B_k = B(e₁/k, r_k)` and glued to a voxelized ambient ball. The radius is
//! `min(|x_k|/10, 0.4/(k(k+1)))`: the first term alone lets `B_5` meet `B_6`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::complex::{check_lambda, copies_for_tree, full_words, level_order, Ambient, ComplexOptions, CopyInfo, SemmesComplex};
use super::model::{Model, ModelParams};
use crate::error::{Error, Result};
use crate::geom::polyline::Point;

pub const AMBIENT_RADIUS: f64 = 1.25;
pub const DEFAULT_AMBIENT_PITCH: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedBall {
    pub k: usize,
    pub center: [f64; 3],
    pub radius: f64,
}

impl PlantedBall {
    pub fn new(k: usize) -> Self {
        let x = 1.0 / k as f64;
        let radius = (x / 10.0).min(0.4 / (k * (k + 1)) as f64);
        PlantedBall { k, center: [x, 0.0, 0.0], radius }
    }

    /// Core radius and tube radius of the planted solid torus.
    pub fn torus(&self) -> (f64, f64) {
        (0.5 * self.radius, 0.25 * self.radius)
    }

    /// Image of model coordinates `(s, x, y)` on the planted torus.
    pub fn embed(&self, length: f64, c: &[f64; 3]) -> Point {
        let (big, small) = self.torus();
        let phi = TAU * c[0] / length;
        let rho = big + small * c[1];
        Point::new(self.center[0] + rho * phi.cos(), self.center[1] + rho * phi.sin(), self.center[2] + small * c[2])
    }

    fn inside_torus(&self, p: &Point) -> bool {
        let (big, small) = self.torus();
        let q = p - Point::from(self.center);
        (q.x.hypot(q.y) - big).hypot(q.z) < small
    }
}

/// Checks the planted balls are pairwise disjoint and inside the ambient ball.
pub fn check_planted_balls(k_count: usize) -> Result<Vec<PlantedBall>> {
    let balls: Vec<PlantedBall> = (1..=k_count).map(PlantedBall::new).collect();
    for w in balls.windows(2) {
        let gap = (w[0].center[0] - w[1].center[0]) - (w[0].radius + w[1].radius);
        if !(gap > 0.0) {
            return Err(Error::Overlap(format!("B_{} and B_{} are {gap} apart", w[0].k, w[1].k)));
        }
    }
    if let Some(b) = balls.iter().find(|b| b.center[0] + b.radius >= AMBIENT_RADIUS) {
        return Err(Error::Overlap(format!("B_{} leaves the ambient ball", b.k)));
    }
    Ok(balls)
}

struct AmbientMesh {
    res: usize,
    grid: Vec<usize>,
    coords: Vec<[f64; 3]>,
    edges: Vec<(usize, usize, f64)>,
}

/// Voxels of the ambient ball outside the planted tori, numbered from `first`.
fn mesh_ambient(balls: &[PlantedBall], h: f64, first: usize) -> AmbientMesh {
    let res = (2.0 * AMBIENT_RADIUS / h).ceil() as usize;
    let at = |i: usize| -AMBIENT_RADIUS + (i as f64 + 0.5) * h;
    let mut grid = vec![usize::MAX; res * res * res];
    let mut coords = Vec::new();
    for i in 0..res {
        for j in 0..res {
            for k in 0..res {
                let p = Point::new(at(i), at(j), at(k));
                if p.norm() <= AMBIENT_RADIUS && !balls.iter().any(|b| b.inside_torus(&p)) {
                    grid[(i * res + j) * res + k] = first + coords.len();
                    coords.push([p.x, p.y, p.z]);
                }
            }
        }
    }
    let mut edges = Vec::new();
    for i in 0..res {
        for j in 0..res {
            for k in 0..res {
                let a = grid[(i * res + j) * res + k];
                if a == usize::MAX {
                    continue;
                }
                for (di, dj, dk) in [(1, 0, 0), (0, 1, 0), (0, 0, 1)] {
                    let (x, y, z) = (i + di, j + dj, k + dk);
                    if x < res && y < res && z < res {
                        let b = grid[(x * res + y) * res + z];
                        if b != usize::MAX {
                            edges.push((a, b, h));
                        }
                    }
                }
            }
        }
    }
    AmbientMesh { res, grid, coords, edges }
}

/// The voxelized ambient ball alone, with no planted trees.
pub fn meshed_ball(ambient_pitch: f64, mesh_scale: f64) -> Result<SemmesComplex> {
    let model = Model::new(ModelParams::default(), mesh_scale, 3)?;
    let AmbientMesh { coords, edges, .. } = mesh_ambient(&[], ambient_pitch, 0);
    let volumes = vec![ambient_pitch.powi(3); coords.len()];
    let ambient = Ambient { first_cell: 0, coords, pitch: ambient_pitch };
    SemmesComplex::assemble(3, 0.5, model, Vec::new(), Some(ambient), volumes, &edges)
}

/// K trees of depths 1..=K with Semmes weights, glued into an ambient ball
/// whose cells carry unscaled weights.
pub fn assemble_point_singularity(k_count: usize, lambda: f64, n: usize, mesh_scale: f64, ambient_pitch: f64) -> Result<SemmesComplex> {
    if k_count == 0 {
        return Err(Error::ConfigInvalid { field: "K".into(), message: "need at least one tree".into() });
    }
    if n != 3 {
        return Err(Error::ConfigInvalid { field: "dimension".into(), message: "the ambient ball is meshed in three dimensions only".into() });
    }
    check_lambda(lambda)?;
    if !(lambda < 2f64.powf(-1.0 / n as f64)) {
        return Err(Error::ConfigInvalid { field: "lambda".into(), message: format!("{lambda} is not below 2^(-1/{n})") });
    }
    let balls = check_planted_balls(k_count)?;
    let model = Model::new(ModelParams::default(), mesh_scale, n)?;
    let mut copies: Vec<CopyInfo> = Vec::new();
    let mut volumes = Vec::new();
    let mut edges = Vec::new();
    for (t, b) in balls.iter().enumerate() {
        let words = level_order(full_words(b.k)?);
        let tc = copies_for_tree(&model, &words, lambda, b.torus().1, t, volumes.len(), &ComplexOptions::default())?;
        copies.extend(tc.copies);
        volumes.extend(tc.volumes);
        edges.extend(tc.edges);
    }

    let h = ambient_pitch;
    let first = volumes.len();
    let AmbientMesh { res, grid, coords, edges: ambient_edges } = mesh_ambient(&balls, h, first);
    volumes.extend(std::iter::repeat_n(h * h * h, coords.len()));
    edges.extend(ambient_edges);
    // nearest ambient cell to a point, searching outward shell by shell
    let nearest_ambient = |p: &Point| -> Option<(usize, f64)> {
        let idx = |v: f64| (((v + AMBIENT_RADIUS) / h).floor().max(0.0) as usize).min(res - 1);
        let (ci, cj, ck) = (idx(p.x), idx(p.y), idx(p.z));
        for reach in 1..res {
            let mut best: Option<(usize, f64)> = None;
            let lo = |c: usize| c.saturating_sub(reach);
            let hi = |c: usize| (c + reach).min(res - 1);
            for i in lo(ci)..=hi(ci) {
                for j in lo(cj)..=hi(cj) {
                    for k in lo(ck)..=hi(ck) {
                        let a = grid[(i * res + j) * res + k];
                        if a == usize::MAX {
                            continue;
                        }
                        let c = coords[a - first];
                        let d = (Point::new(c[0], c[1], c[2]) - p).norm();
                        if best.is_none_or(|b| d < b.1 || (d == b.1 && a < b.0)) {
                            best = Some((a, d));
                        }
                    }
                }
            }
            if best.is_some() {
                return best;
            }
        }
        None
    };
    let length = model.params.length;
    for (t, b) in balls.iter().enumerate() {
        let root = copies.iter().find(|c| c.tree == t && c.word.is_root()).expect("every tree has a root copy");
        let small = b.torus().1;
        let embedded: Vec<(usize, Point)> = model.outer.iter().map(|o| (root.first_cell + o.cell, b.embed(length, &model.base[o.cell].coords))).collect();
        for (cell, p) in &embedded {
            let (a, d) = nearest_ambient(p).ok_or_else(|| Error::MeshTooCoarse("ambient ball has no cells".into()))?;
            edges.push((*cell, a, d + 0.5 * small * model.pitch[1]));
        }
        // ambient cells bordering the excised torus reach back to its boundary
        for (ai, c) in coords.iter().enumerate() {
            let p = Point::new(c[0], c[1], c[2]);
            let borders =
                [-h, h].iter().any(|&d| [Point::new(d, 0.0, 0.0), Point::new(0.0, d, 0.0), Point::new(0.0, 0.0, d)].iter().any(|e| b.inside_torus(&(p + e))));
            if borders {
                let (cell, q) =
                    embedded.iter().min_by(|x, y| (x.1 - p).norm().total_cmp(&(y.1 - p).norm()).then(x.0.cmp(&y.0))).expect("outer boundary is non-empty");
                edges.push((*cell, first + ai, (q - p).norm() + 0.5 * small * model.pitch[1]));
            }
        }
    }
    let ambient = Ambient { first_cell: first, coords, pitch: h };
    SemmesComplex::assemble(n, lambda, model, copies, Some(ambient), volumes, &edges)
}

impl SemmesComplex {
    /// Measure of the cells of planted tree `t`.
    pub fn tree_measure(&self, t: usize) -> f64 {
        let cells: Vec<usize> = self.copies.iter().enumerate().filter(|(_, c)| c.tree == t).flat_map(|(i, _)| self.copy_cells(i)).collect();
        self.measure(&cells)
    }
}
