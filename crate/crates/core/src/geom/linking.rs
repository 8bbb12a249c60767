//! Linking number of two disjoint closed polylines, computed two ways.

use std::f64::consts::PI;

use nalgebra::{Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::polyline::{Point, Polyline};
use crate::error::{Error, Result};

const MAX_PROJECTION_TRIES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Linking {
    pub gauss: i64,
    pub projection: i64,
    /// Raw Gauss double sum before rounding.
    pub gauss_raw: f64,
}

/// Linking number by the Gauss double sum and by a crossing count; both are
/// returned and must agree.
pub fn linking_number(a: &Polyline, b: &Polyline, seed: u64) -> Result<Linking> {
    let gauss_raw = gauss_sum(a, b);
    let projection = projection_count(a, b, seed)?;
    Ok(Linking { gauss: gauss_raw.round() as i64, projection, gauss_raw })
}

/// Exact Gauss integral over segment pairs via the signed solid angle of the
/// quadrilateral spanned by each pair.
pub fn gauss_sum(a: &Polyline, b: &Polyline) -> f64 {
    let mut total = 0.0;
    for (p1, p2) in a.segments() {
        for (q1, q2) in b.segments() {
            total += segment_pair_solid_angle(p1, p2, q1, q2);
        }
    }
    total / (4.0 * PI)
}

fn segment_pair_solid_angle(p1: Point, p2: Point, q1: Point, q2: Point) -> f64 {
    let r13 = q1 - p1;
    let r14 = q2 - p1;
    let r23 = q1 - p2;
    let r24 = q2 - p2;
    let normals = [r13.cross(&r14), r14.cross(&r24), r24.cross(&r23), r23.cross(&r13)];
    let mut unit = [Point::zeros(); 4];
    for (u, n) in unit.iter_mut().zip(normals.iter()) {
        let l = n.norm();
        if l < 1e-300 {
            return 0.0;
        }
        *u = n / l;
    }
    let mut omega = 0.0;
    for k in 0..4 {
        omega += unit[k].dot(&unit[(k + 1) % 4]).clamp(-1.0, 1.0).asin();
    }
    let s = (q2 - q1).cross(&(p2 - p1)).dot(&r13);
    if s > 0.0 {
        omega
    } else if s < 0.0 {
        -omega
    } else {
        0.0
    }
}

/// Half the sum of signed crossings of `a` over or under `b` in a generic
/// projection; degenerate projections are retried under fresh seeded rotations.
pub fn projection_count(a: &Polyline, b: &Polyline, seed: u64) -> Result<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_PROJECTION_TRIES {
        let axis = Vector3::new(rng.gen_range(-PI..PI), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
        let rot = Rotation3::new(axis);
        if let Some(sum) = signed_crossings(a, b, &rot) {
            debug_assert!(sum % 2 == 0);
            return Ok(sum / 2);
        }
    }
    Err(Error::NonTransverse { retries: MAX_PROJECTION_TRIES })
}

fn signed_crossings(a: &Polyline, b: &Polyline, rot: &Rotation3<f64>) -> Option<i64> {
    let pa: Vec<Point> = a.vertices().iter().map(|v| rot * v).collect();
    let pb: Vec<Point> = b.vertices().iter().map(|v| rot * v).collect();
    let (na, nb) = (pa.len(), pb.len());
    let scale = a.scale().max(b.scale());
    let eps = 1e-12 * scale;
    let mut sum = 0i64;
    for i in 0..na {
        let (p, q) = (pa[i], pa[(i + 1) % na]);
        let (minx, maxx) = (p.x.min(q.x), p.x.max(q.x));
        let (miny, maxy) = (p.y.min(q.y), p.y.max(q.y));
        let d1 = q - p;
        for j in 0..nb {
            let (r, s) = (pb[j], pb[(j + 1) % nb]);
            if r.x.max(s.x) < minx || r.x.min(s.x) > maxx || r.y.max(s.y) < miny || r.y.min(s.y) > maxy {
                continue;
            }
            let d2 = s - r;
            let denom = d1.x * d2.y - d1.y * d2.x;
            let w = r - p;
            let t = (w.x * d2.y - w.y * d2.x) / denom;
            let u = (w.x * d1.y - w.y * d1.x) / denom;
            if denom.abs() < eps * eps {
                // parallel in projection: degenerate only if the projections overlap
                let cross = w.x * d1.y - w.y * d1.x;
                if cross.abs() < eps * d1.xy().norm() {
                    return None;
                }
                continue;
            }
            let tol = 1e-9;
            if t < -tol || t > 1.0 + tol || u < -tol || u > 1.0 + tol {
                continue;
            }
            if t.abs() < tol || (t - 1.0).abs() < tol || u.abs() < tol || (u - 1.0).abs() < tol {
                return None;
            }
            let za = p.z + t * d1.z;
            let zb = r.z + u * d2.z;
            if (za - zb).abs() < eps {
                return None;
            }
            // right-handed crossing is +1: over-strand direction x under-strand direction along +z
            let (over, under) = if za > zb { (d1, d2) } else { (d2, d1) };
            let orient = over.x * under.y - over.y * under.x;
            sum += if orient > 0.0 { 1 } else { -1 };
        }
    }
    Some(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn circle(center: Point, e1: Point, e2: Point, r: f64, n: usize) -> Polyline {
        let v = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                center + (e1 * t.cos() + e2 * t.sin()) * r
            })
            .collect();
        Polyline::new(v).unwrap()
    }

    #[test]
    fn hopf_link() {
        let a = circle(Point::zeros(), Point::x(), Point::y(), 1.0, 48);
        let b = circle(Point::new(1.0, 0.0, 0.0), Point::x(), Point::z(), 1.0, 48);
        let l = linking_number(&a, &b, 1).unwrap();
        assert_eq!(l.gauss.abs(), 1);
        assert_eq!(l.gauss, l.projection);
        assert!((l.gauss_raw.abs() - 1.0).abs() < 1e-9);
        // reversing one orientation flips the sign
        let l2 = linking_number(&a, &b.reversed(), 1).unwrap();
        assert_eq!(l2.gauss, -l.gauss);
    }

    #[test]
    fn split_link() {
        let a = circle(Point::zeros(), Point::x(), Point::y(), 1.0, 32);
        let b = circle(Point::new(3.0, 0.0, 0.0), Point::x(), Point::y(), 1.0, 32);
        let l = linking_number(&a, &b, 2).unwrap();
        assert_eq!((l.gauss, l.projection), (0, 0));
    }

    #[test]
    fn gauss_agrees_with_projection_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for k in 0..200 {
            let a = circle(Point::zeros(), Point::x(), Point::y(), 1.0, 24);
            // second circle through the first's disk with random tilt and offset
            let tilt: f64 = rng.gen_range(-0.6..0.6);
            let e1 = Point::new(tilt.cos(), 0.0, tilt.sin());
            let e2 = Point::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.2..0.2), 1.0).normalize();
            let e2 = (e2 - e1 * e1.dot(&e2)).normalize();
            let c = Point::new(rng.gen_range(0.2..2.6), rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
            let b = circle(c, e1, e2, rng.gen_range(0.8..1.2), 20);
            if a.distance_to(&b) < 1e-3 {
                continue;
            }
            let l = linking_number(&a, &b, k).unwrap();
            assert_eq!(l.gauss, l.projection, "pair {k}");
            assert!((l.gauss_raw - l.gauss as f64).abs() < 1e-6);
        }
    }
}
