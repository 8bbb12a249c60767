use serde::{Deserialize, Serialize};

use super::frame::FrameField;
use super::polyline::{Point, Polyline};
use crate::error::{Error, Result};

/// Closed tubular neighbourhood `{x : dist(x, core) <= radius}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Tube {
    pub core: Polyline,
    pub radius: f64,
    /// Bilipschitz constant of the normal-exponential chart built on the
    /// rotation-minimizing frame.
    pub chart_distortion: f64,
    /// Reach of the core at construction time.
    pub reach: f64,
}

/// Builds the tube and measures its chart distortion.
///
/// The chart `(s, u) -> core(s) + u1 N(s) + u2 B(s)` stretches the arclength
/// direction by `1 - kappa <u, N>` and adds a shear `|u| * twist`; the reported
/// constant bounds both directions over the whole tube.
pub fn tube_of(core: Polyline, radius: f64) -> Result<Tube> {
    let reach = core.reach();
    tube_with_reach(core, radius, reach)
}

pub(crate) fn tube_with_reach(core: Polyline, radius: f64, reach: f64) -> Result<Tube> {
    if !(radius > 0.0) || radius >= reach {
        return Err(Error::RadiusTooLarge { radius, reach });
    }
    let frames = FrameField::rotation_minimizing(&core);
    let kappa = core.vertex_curvature_radii().iter().map(|r| 1.0 / r).fold(0.0, f64::max);
    let chart_distortion = chart_distortion(radius, kappa, frames.twist_rate());
    Ok(Tube { core, radius, chart_distortion, reach })
}

pub fn chart_distortion(radius: f64, kappa: f64, twist: f64) -> f64 {
    let stretch = 1.0 / (1.0 - radius * kappa);
    let shear = (1.0 + (radius * twist).powi(2)).sqrt();
    stretch.max(1.0 + radius * kappa) * shear
}

impl Tube {
    pub fn diameter_estimate(&self) -> f64 {
        super::diameter::diameter(self.core.vertices()) + 2.0 * self.radius
    }

    /// Triangulated boundary surface with `angular` vertices per ring.
    pub fn surface(&self, angular: usize) -> (Vec<Point>, Vec<[usize; 3]>) {
        let frames = FrameField::rotation_minimizing(&self.core);
        let n = self.core.len();
        let mut verts = Vec::with_capacity(n * angular);
        for (i, v) in self.core.vertices().iter().enumerate() {
            let f = &frames.frames[i];
            for a in 0..angular {
                let th = std::f64::consts::TAU * a as f64 / angular as f64;
                verts.push(v + (f.normal * th.cos() + f.binormal * th.sin()) * self.radius);
            }
        }
        let mut tris = Vec::with_capacity(2 * n * angular);
        for i in 0..n {
            let j = (i + 1) % n;
            for a in 0..angular {
                let b = (a + 1) % angular;
                let (p, q, r, s) = (i * angular + a, i * angular + b, j * angular + a, j * angular + b);
                tris.push([p, r, q]);
                tris.push([q, r, s]);
            }
        }
        (verts, tris)
    }
}

/// Wavefront OBJ text for a set of tubes, one object group per label.
pub fn tubes_to_obj<'a>(tubes: impl IntoIterator<Item = (String, &'a Tube)>, angular: usize) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let mut offset = 1;
    for (label, tube) in tubes {
        let (verts, tris) = tube.surface(angular);
        let _ = writeln!(out, "o tube_{}", if label.is_empty() { "root" } else { &label });
        for v in &verts {
            let _ = writeln!(out, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z);
        }
        for t in &tris {
            let _ = writeln!(out, "f {} {} {}", t[0] + offset, t[1] + offset, t[2] + offset);
        }
        offset += verts.len();
    }
    out
}

/// One entry of the JSON scene format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneTube {
    pub word: String,
    pub core: Vec<[f64; 3]>,
    pub radius: f64,
}

impl SceneTube {
    pub fn new(word: &crate::word::Word, tube: &Tube) -> Self {
        SceneTube { word: word.to_string(), core: tube.core.vertices().iter().map(|v| [v.x, v.y, v.z]).collect(), radius: tube.radius }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::polyline::make_round_core;

    /// Finite-difference distortion of the exact normal chart on the unit circle.
    fn oracle_circle_distortion(delta: f64) -> f64 {
        // e(s, u, v) = (1 + u)(cos s, sin s, 0) + v e_z ; metric diag((1+u)^2, 1, 1)
        let h = 1e-6;
        let mut worst: f64 = 1.0;
        for k in 0..=20 {
            let u = -delta + 2.0 * delta * k as f64 / 20.0;
            let p = |s: f64| Point::new((1.0 + u) * s.cos(), (1.0 + u) * s.sin(), 0.0);
            let stretch = (p(0.3 + h) - p(0.3 - h)).norm() / (2.0 * h);
            worst = worst.max(stretch).max(1.0 / stretch);
        }
        worst
    }

    #[test]
    fn tube_of_examples() {
        let c = make_round_core(1.0, 64).unwrap();
        let t = tube_of(c.clone(), 0.1).unwrap();
        assert!(t.chart_distortion <= 1.2);
        // oracle is the smooth circle; the 64-gon stays within a percent of it
        let o = oracle_circle_distortion(0.1);
        assert!((t.chart_distortion - o).abs() / o < 0.01, "{} vs {o}", t.chart_distortion);

        let t9 = tube_of(c.clone(), 0.9).unwrap();
        assert!(t9.chart_distortion <= 10.0 + 1e-6, "{}", t9.chart_distortion);

        assert!(matches!(tube_of(c, 2.0), Err(Error::RadiusTooLarge { .. })));
    }

    #[test]
    fn distortion_decreases_with_radius() {
        let c = make_round_core(1.0, 64).unwrap();
        let ls: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&d| tube_of(c.clone(), d).unwrap().chart_distortion).collect();
        assert!(ls[0] > ls[1] && ls[1] > ls[2] && ls[2] > 1.0);
    }

    #[test]
    fn obj_has_expected_counts() {
        let c = make_round_core(1.0, 16).unwrap();
        let t = tube_of(c, 0.1).unwrap();
        let obj = tubes_to_obj([(String::new(), &t)], 6);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 96);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 192);
    }
}
