//! Rotation-minimizing frames on closed polylines.
//!
//! Frames are propagated with the double-reflection rule from vertex to
//! vertex. On a closed curve the propagated frame comes back rotated by the
//! holonomy angle; that angle is spread linearly in arclength so the frame
//! field closes up continuously.

use nalgebra::{Rotation3, Unit};

use super::polyline::{Point, Polyline};

#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub tangent: Point,
    pub normal: Point,
    pub binormal: Point,
}

#[derive(Clone, Debug)]
pub struct FrameField {
    pub frames: Vec<Frame>,
    /// Cumulative arclength at each vertex plus the total at the end.
    pub arcs: Vec<f64>,
    /// Holonomy angle removed by the twist correction (radians).
    pub holonomy: f64,
}

fn vertex_tangents(curve: &Polyline) -> Vec<Point> {
    let v = curve.vertices();
    let n = v.len();
    (0..n)
        .map(|i| {
            let a = (v[i] - v[(i + n - 1) % n]).normalize();
            let b = (v[(i + 1) % n] - v[i]).normalize();
            let t = a + b;
            if t.norm() < 1e-12 {
                b
            } else {
                t.normalize()
            }
        })
        .collect()
}

fn any_perpendicular(t: &Point) -> Point {
    let probe = if t.x.abs() < 0.9 { Point::x() } else { Point::y() };
    (probe - t * t.dot(&probe)).normalize()
}

impl FrameField {
    pub fn rotation_minimizing(curve: &Polyline) -> Self {
        let v = curve.vertices();
        let n = v.len();
        let tangents = vertex_tangents(curve);
        let mut normals = Vec::with_capacity(n + 1);
        normals.push(any_perpendicular(&tangents[0]));
        for i in 0..n {
            let j = (i + 1) % n;
            let r = normals[i];
            let (x0, x1) = (v[i], v[j]);
            let (t0, t1) = (tangents[i], tangents[j]);
            // double reflection
            let v1 = x1 - x0;
            let c1 = v1.dot(&v1);
            let r_l = r - v1 * (2.0 / c1) * v1.dot(&r);
            let t_l = t0 - v1 * (2.0 / c1) * v1.dot(&t0);
            let v2 = t1 - t_l;
            let c2 = v2.dot(&v2);
            let next = if c2 > 1e-30 { r_l - v2 * (2.0 / c2) * v2.dot(&r_l) } else { r_l };
            let next = (next - t1 * t1.dot(&next)).normalize();
            normals.push(next);
        }
        // signed angle from the start normal to the returned normal, about t0
        let t0 = tangents[0];
        let n0 = normals[0];
        let back = normals[n];
        let holonomy = t0.dot(&n0.cross(&back)).atan2(n0.dot(&back));
        let arcs = curve.arclengths();
        let total = arcs[n];
        let frames = (0..n)
            .map(|i| {
                let t = tangents[i];
                let angle = -holonomy * arcs[i] / total;
                let rot = Rotation3::from_axis_angle(&Unit::new_normalize(t), angle);
                let nn = rot * normals[i];
                let nn = (nn - t * t.dot(&nn)).normalize();
                Frame { tangent: t, normal: nn, binormal: t.cross(&nn) }
            })
            .collect();
        FrameField { frames, arcs, holonomy }
    }

    pub fn total_length(&self) -> f64 {
        *self.arcs.last().unwrap()
    }

    /// Twist rate introduced by the holonomy correction (radians per unit length).
    pub fn twist_rate(&self) -> f64 {
        self.holonomy.abs() / self.total_length()
    }

    /// Position and frame at arclength `t`, interpolated along the containing segment.
    pub fn sample(&self, curve: &Polyline, t: f64) -> (Point, Frame) {
        let (i, f) = curve.locate(&self.arcs, t);
        let (a, b) = curve.segment(i);
        let p = a + (b - a) * f;
        let n = self.frames.len();
        let fa = &self.frames[i];
        let fb = &self.frames[(i + 1) % n];
        let tangent = (b - a).normalize();
        let nn = fa.normal * (1.0 - f) + fb.normal * f;
        let nn = (nn - tangent * tangent.dot(&nn)).normalize();
        (p, Frame { tangent, normal: nn, binormal: tangent.cross(&nn) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::polyline::make_round_core;

    #[test]
    fn planar_circle_has_no_holonomy() {
        let c = make_round_core(1.0, 64).unwrap();
        let f = FrameField::rotation_minimizing(&c);
        assert!(f.holonomy.abs() < 1e-9);
        for fr in &f.frames {
            assert!((fr.tangent.dot(&fr.normal)).abs() < 1e-12);
            assert!((fr.binormal.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn frames_are_continuous_on_a_twisted_curve() {
        // (2,3) torus-knot-like closed curve is nonplanar; check neighbours stay close
        let verts: Vec<Point> = (0..200)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 200.0;
                Point::new((2.0 + (3.0 * t).cos()) * t.cos(), (2.0 + (3.0 * t).cos()) * t.sin(), (3.0 * t).sin())
            })
            .collect();
        let c = Polyline::new(verts).unwrap();
        let f = FrameField::rotation_minimizing(&c);
        let n = f.frames.len();
        for i in 0..n {
            let d = (f.frames[i].normal - f.frames[(i + 1) % n].normal).norm();
            assert!(d < 0.2, "jump {d} at {i}");
        }
    }
}
