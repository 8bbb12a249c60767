use nalgebra::{Rotation3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vector3<f64>;

pub const MIN_VERTICES: usize = 8;

/// Closed polygonal curve in R^3.
///
/// Vertices are stored without repeating the first one; segment `i` joins
/// vertex `i` to vertex `(i + 1) % n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    vertices: Vec<Point>,
    closed: bool,
}

impl Polyline {
    /// Validates vertex count, distinct consecutive vertices and simplicity.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let p = Self::new_unchecked(vertices)?;
        let gap = p.min_nonadjacent_distance();
        if !(gap > 1e-12 * p.scale()) {
            return Err(Error::DegeneratePolyline(format!("self-intersecting (gap {gap:e})")));
        }
        Ok(p)
    }

    /// Like [`Polyline::new`] but skips the quadratic simplicity check.
    pub fn new_unchecked(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < MIN_VERTICES {
            return Err(Error::TooFewSegments { min: MIN_VERTICES, got: vertices.len() });
        }
        let n = vertices.len();
        for i in 0..n {
            let d = (vertices[(i + 1) % n] - vertices[i]).norm();
            if !(d > 0.0) {
                return Err(Error::DegeneratePolyline(format!("vertices {i} and {} coincide", (i + 1) % n)));
            }
        }
        Ok(Polyline { vertices, closed: true })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn segment(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (0..self.vertices.len()).map(move |i| self.segment(i))
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.segments().map(|(a, b)| (b - a).norm()).collect()
    }

    pub fn length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    /// Cumulative arclength at each vertex, starting at 0; last entry is the total length.
    pub fn arclengths(&self) -> Vec<f64> {
        let mut acc = Vec::with_capacity(self.vertices.len() + 1);
        let mut s = 0.0;
        acc.push(0.0);
        for l in self.segment_lengths() {
            s += l;
            acc.push(s);
        }
        acc
    }

    /// Point at arclength `t` (taken modulo the length) with its segment index and local fraction.
    pub fn locate(&self, arcs: &[f64], t: f64) -> (usize, f64) {
        let total = *arcs.last().unwrap();
        let t = t.rem_euclid(total);
        let i = match arcs.binary_search_by(|a| a.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.vertices.len() - 1),
            Err(i) => i - 1,
        };
        let i = i.min(self.vertices.len() - 1);
        let seg = arcs[i + 1] - arcs[i];
        (i, if seg > 0.0 { (t - arcs[i]) / seg } else { 0.0 })
    }

    pub fn point_at(&self, arcs: &[f64], t: f64) -> Point {
        let (i, f) = self.locate(arcs, t);
        let (a, b) = self.segment(i);
        a + (b - a) * f
    }

    pub fn centroid(&self) -> Point {
        self.vertices.iter().sum::<Point>() / self.vertices.len() as f64
    }

    /// Largest coordinate magnitude; used to size jitter and precision checks.
    pub fn scale(&self) -> f64 {
        self.vertices.iter().map(|v| v.amax()).fold(0.0, f64::max).max(1e-300)
    }

    pub fn transformed(&self, rot: &Rotation3<f64>, shift: &Point) -> Polyline {
        Polyline { vertices: self.vertices.iter().map(|v| rot * v + shift).collect(), closed: true }
    }

    pub fn scaled(&self, s: f64) -> Polyline {
        Polyline { vertices: self.vertices.iter().map(|v| v * s).collect(), closed: true }
    }

    pub fn reversed(&self) -> Polyline {
        let mut v = self.vertices.clone();
        v.reverse();
        Polyline { vertices: v, closed: true }
    }

    /// Copy with every vertex displaced uniformly in a cube of half-width `amp`.
    pub fn jittered<R: Rng>(&self, amp: f64, rng: &mut R) -> Polyline {
        Polyline {
            vertices: self.vertices.iter().map(|v| v + Point::new(rng.gen_range(-amp..=amp), rng.gen_range(-amp..=amp), rng.gen_range(-amp..=amp))).collect(),
            closed: true,
        }
    }

    /// Radius of the circle through each vertex and its two neighbours.
    pub fn vertex_curvature_radii(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let p = self.vertices[(i + n - 1) % n];
                let q = self.vertices[i];
                let r = self.vertices[(i + 1) % n];
                circumradius(&p, &q, &r)
            })
            .collect()
    }

    /// Minimum distance between segments that do not share a vertex.
    pub fn min_nonadjacent_distance(&self) -> f64 {
        let n = self.vertices.len();
        self.min_pair_distance(|i, j| {
            let d = i.abs_diff(j);
            d > 1 && d != n - 1
        })
    }

    /// Minimum segment distance over pairs accepted by `keep`, pruned by a
    /// sweep over boxes sorted on x.
    fn min_pair_distance(&self, keep: impl Fn(usize, usize) -> bool) -> f64 {
        let segs: Vec<_> = self.segments().collect();
        let mut boxes: Vec<(Aabb, usize)> = segs.iter().enumerate().map(|(i, (a, b))| (Aabb::of_segment(a, b), i)).collect();
        boxes.sort_by(|x, y| x.0.lo.x.partial_cmp(&y.0.lo.x).unwrap());
        let mut best = f64::INFINITY;
        for (k, (bi, i)) in boxes.iter().enumerate() {
            for (bj, j) in &boxes[k + 1..] {
                if bj.lo.x - bi.hi.x >= best {
                    break;
                }
                if !keep(*i, *j) || bi.distance_lower_bound(bj) >= best {
                    continue;
                }
                let d = segment_distance(segs[*i].0, segs[*i].1, segs[*j].0, segs[*j].1);
                if d < best {
                    best = d;
                }
            }
        }
        best
    }

    /// Discrete reach: the smaller of the minimal curvature radius and half the
    /// distance between arcs that are far apart along the curve.
    ///
    /// Segments count as far apart when the arclength between them is at least
    /// `min(pi * rho_min, L / 2)` both ways round the curve.
    pub fn reach(&self) -> f64 {
        let rho = self.vertex_curvature_radii().into_iter().fold(f64::INFINITY, f64::min);
        let arcs = self.arclengths();
        let total = *arcs.last().unwrap();
        let sep = (std::f64::consts::PI * rho).min(total / 2.0) * (1.0 - 1e-9);
        let n = self.vertices.len();
        let global = self.min_pair_distance(|i, j| {
            let (i, j) = (i.min(j), i.max(j));
            if j - i <= 1 || j - i == n - 1 {
                return false;
            }
            // arclength gap between the two segments, both ways round
            let gap = (arcs[j] - arcs[i + 1]).min(total - (arcs[j + 1] - arcs[i]));
            gap >= sep
        });
        rho.min(0.5 * global)
    }

    /// Twice the reach: the largest tube diameter the core admits.
    pub fn self_clearance(&self) -> f64 {
        2.0 * self.reach()
    }

    /// Minimum distance to another polyline.
    pub fn distance_to(&self, other: &Polyline) -> f64 {
        let a: Vec<_> = self.segments().collect();
        let b: Vec<_> = other.segments().collect();
        min_segment_set_distance(&a, &b)
    }

    /// Maximum over this curve's vertices of the distance to `other`.
    pub fn max_distance_from(&self, other: &Polyline) -> f64 {
        let segs: Vec<_> = other.segments().collect();
        self.vertices.iter().map(|v| segs.iter().map(|(a, b)| point_segment_distance(v, a, b)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    }
}

/// Regular planar polygon of `segment_count` vertices on the circle of radius
/// `major_radius` in the xy-plane.
pub fn make_round_core(major_radius: f64, segment_count: usize) -> Result<Polyline> {
    if segment_count < MIN_VERTICES {
        return Err(Error::TooFewSegments { min: MIN_VERTICES, got: segment_count });
    }
    if !(major_radius > 0.0) {
        return Err(Error::DegeneratePolyline(format!("major radius {major_radius}")));
    }
    let verts = (0..segment_count)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / segment_count as f64;
            Point::new(major_radius * a.cos(), major_radius * a.sin(), 0.0)
        })
        .collect();
    Polyline::new_unchecked(verts)
}

pub fn circumradius(p: &Point, q: &Point, r: &Point) -> f64 {
    let a = q - p;
    let b = r - q;
    let c = r - p;
    let cross = a.cross(&c).norm();
    if cross == 0.0 {
        // collinear: straight if the middle point lies between, a cusp otherwise
        if a.dot(&b) >= 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        a.norm() * b.norm() * c.norm() / (2.0 * cross)
    }
}

pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_squared();
    let t = if l2 > 0.0 { ((p - a).dot(&ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

/// Distance between segments `[p1,q1]` and `[p2,q2]` (closest-point parameters
/// clamped to the unit square).
pub fn segment_distance(p1: Point, q1: Point, p2: Point, q2: Point) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return r.norm();
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Aabb {
    lo: Point,
    hi: Point,
}

impl Aabb {
    pub(crate) fn of_segment(a: &Point, b: &Point) -> Self {
        Aabb { lo: a.inf(b), hi: a.sup(b) }
    }

    pub(crate) fn distance_lower_bound(&self, o: &Aabb) -> f64 {
        let mut s = 0.0;
        for k in 0..3 {
            let gap = (o.lo[k] - self.hi[k]).max(self.lo[k] - o.hi[k]).max(0.0);
            s += gap * gap;
        }
        s.sqrt()
    }
}

/// Minimum distance between two segment sets, pruned by a sweep on x.
pub fn min_segment_set_distance(a: &[(Point, Point)], b: &[(Point, Point)]) -> f64 {
    let mut bb: Vec<(Aabb, usize)> = b.iter().enumerate().map(|(i, (p, q))| (Aabb::of_segment(p, q), i)).collect();
    bb.sort_by(|x, y| x.0.lo.x.partial_cmp(&y.0.lo.x).unwrap());
    let mut best = f64::INFINITY;
    for (p, q) in a {
        let ba = Aabb::of_segment(p, q);
        for (bx, j) in &bb {
            if bx.lo.x - ba.hi.x > best {
                break;
            }
            if ba.distance_lower_bound(bx) >= best {
                continue;
            }
            let d = segment_distance(*p, *q, b[*j].0, b[*j].1);
            if d < best {
                best = d;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn round_core_examples() {
        assert!(matches!(make_round_core(1.0, 4), Err(Error::TooFewSegments { .. })));
        let c = make_round_core(1.0, 64).unwrap();
        assert_eq!(c.len(), 64);
        assert!(c.vertices().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        // inscribed 128-gon perimeter 2nR sin(pi/n)
        let c2 = make_round_core(2.0, 128).unwrap();
        let exact = 2.0 * 128.0 * 2.0 * (PI / 128.0).sin();
        assert!((c2.length() - exact).abs() < 1e-12);
        assert!((c2.length() - 4.0 * PI).abs() / (4.0 * PI) < 1e-3);
    }

    #[test]
    fn circle_reach_is_radius() {
        let c = make_round_core(1.0, 64).unwrap();
        let r = c.reach();
        assert!(r > 0.99 && r <= 1.0 + 1e-12, "reach {r}");
    }

    #[test]
    fn segment_distance_cases() {
        let o = Point::zeros();
        let x = Point::new(1.0, 0.0, 0.0);
        let d = segment_distance(o, x, Point::new(0.5, 1.0, 1.0), Point::new(0.5, -1.0, 1.0));
        assert!((d - 1.0).abs() < 1e-15);
        let d = segment_distance(o, x, Point::new(2.0, 0.0, 0.0), Point::new(3.0, 0.0, 0.0));
        assert!((d - 1.0).abs() < 1e-15);
        let d = segment_distance(o, x, Point::new(0.0, 1.0, 0.0), Point::new(1.0, 1.0, 0.0));
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_self_intersection() {
        // figure-eight through the origin
        let verts: Vec<Point> = (0..16)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 16.0;
                Point::new(t.sin(), (2.0 * t).sin() / 2.0, 0.0)
            })
            .collect();
        assert!(Polyline::new(verts).is_err());
    }
}
