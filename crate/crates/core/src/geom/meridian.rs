use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::polyline::{Point, Polyline};
use crate::error::{Error, Result};

pub const MAX_JITTER_RETRIES: usize = 8;
/// Jitter amplitude relative to the curve's coordinate scale.
pub const JITTER_SCALE: f64 = 1e-9;

/// Flat round disk: center, unit normal, radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point,
    pub normal: Point,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiskCount {
    pub signed: i64,
    pub unsigned: usize,
}

/// A transverse crossing: segment index, fraction along it, sign.
#[derive(Clone, Copy, Debug)]
pub struct Crossing {
    pub segment: usize,
    pub fraction: f64,
    pub sign: i64,
}

/// Crossings of the curve with the disk; `None` when a vertex lies on the
/// plane (within `tol`) inside the disk's footprint.
pub fn disk_crossings(curve: &Polyline, disk: &Disk, tol: f64) -> Option<Vec<Crossing>> {
    let v = curve.vertices();
    let n = v.len();
    let heights: Vec<f64> = v.iter().map(|p| (p - disk.center).dot(&disk.normal)).collect();
    let mut out = Vec::new();
    let r2 = disk.radius * disk.radius;
    let near = |p: &Point| {
        let d = p - disk.center;
        let h = d.dot(&disk.normal);
        (d - disk.normal * h).norm_squared() <= r2 * (1.0 + 1e-6) + tol
    };
    for i in 0..n {
        let (h0, h1) = (heights[i], heights[(i + 1) % n]);
        if h0.abs() <= tol && near(&v[i]) {
            return None;
        }
        if (h0 < 0.0) != (h1 < 0.0) {
            let f = h0 / (h0 - h1);
            let p = v[i] + (v[(i + 1) % n] - v[i]) * f;
            let d = p - disk.center;
            let planar = d - disk.normal * d.dot(&disk.normal);
            let r = planar.norm();
            if (r - disk.radius).abs() <= tol.max(1e-12 * disk.radius) {
                // crossing on the rim is not transverse to the disk
                return None;
            }
            if r < disk.radius {
                out.push(Crossing { segment: i, fraction: f, sign: if h1 > h0 { 1 } else { -1 } });
            }
        }
    }
    Some(out)
}

/// Algebraic and geometric intersection counts of a closed curve with a disk.
///
/// Vertices on the disk plane are resolved by seeded jitter of relative
/// magnitude [`JITTER_SCALE`], at most [`MAX_JITTER_RETRIES`] times.
pub fn meridian_intersections(curve: &Polyline, disk: &Disk, seed: u64) -> Result<DiskCount> {
    let scale = curve.scale().max(disk.center.amax());
    let tol = 1e-15 * scale;
    if let Some(c) = disk_crossings(curve, disk, tol) {
        return Ok(summarize(&c));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_JITTER_RETRIES {
        let j = curve.jittered(JITTER_SCALE * scale, &mut rng);
        if let Some(c) = disk_crossings(&j, disk, tol) {
            return Ok(summarize(&c));
        }
    }
    Err(Error::NonTransverse { retries: MAX_JITTER_RETRIES })
}

fn summarize(c: &[Crossing]) -> DiskCount {
    DiskCount { signed: c.iter().map(|x| x.sign).sum(), unsigned: c.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::polyline::make_round_core;

    #[test]
    fn examples() {
        let c = make_round_core(1.0, 64).unwrap();
        // meridian disk of the circle at angle 0.05 rad (between vertices)
        let a: f64 = 0.05;
        let d = Disk { center: Point::new(a.cos(), a.sin(), 0.0), normal: Point::new(-a.sin(), a.cos(), 0.0), radius: 0.2 };
        let r = meridian_intersections(&c, &d, 0).unwrap();
        assert_eq!((r.signed.abs(), r.unsigned), (1, 1));

        let far = Disk { center: Point::new(5.0, 0.0, 0.0), normal: Point::z(), radius: 1.0 };
        assert_eq!(meridian_intersections(&c, &far, 0).unwrap(), DiskCount { signed: 0, unsigned: 0 });
    }

    #[test]
    fn vertex_on_plane_is_jittered() {
        let c = make_round_core(1.0, 64).unwrap();
        // plane through vertex 0
        let d = Disk { center: Point::new(1.0, 0.0, 0.0), normal: Point::y(), radius: 0.2 };
        assert!(disk_crossings(&c, &d, 1e-15).is_none());
        let r = meridian_intersections(&c, &d, 3).unwrap();
        assert_eq!((r.signed.abs(), r.unsigned), (1, 1));
    }
}
