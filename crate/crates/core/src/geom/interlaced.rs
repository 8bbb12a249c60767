//! Product data for tubes of the four-dimensional construction.
//!
//! A four-dimensional tube is never embedded; it is carried as the pair of
//! three-dimensional cores together with a common radius and the
//! bilipschitz budget of the neighbourhood switch that realizes it.

use serde::{Deserialize, Serialize};

use super::diameter::diameter;
use super::polyline::Polyline;
use super::tube::Tube;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InterlacedTube {
    pub core_a: Polyline,
    pub core_b: Polyline,
    pub radius: f64,
    pub bilipschitz_budget: f64,
    pub diam_a: f64,
    pub diam_b: f64,
}

impl InterlacedTube {
    /// `budget * (diam core_a + diam core_b + radius)`.
    pub fn diameter_bound(&self) -> f64 {
        interlaced_diameter_bound(self.diam_a, self.diam_b, self.radius, self.bilipschitz_budget)
    }
}

pub fn interlaced_diameter_bound(diam_a: f64, diam_b: f64, radius: f64, budget: f64) -> f64 {
    budget * (diam_a + diam_b + radius)
}

/// Pairs two tubes; the radius is the smaller of the two.
pub fn interlaced_tube(a: &Tube, b: &Tube, budget: f64) -> Result<InterlacedTube> {
    if !(budget >= 1.0) {
        return Err(Error::ConfigInvalid { field: "budget".into(), message: format!("must be at least 1, got {budget}") });
    }
    Ok(InterlacedTube {
        core_a: a.core.clone(),
        core_b: b.core.clone(),
        radius: a.radius.min(b.radius),
        bilipschitz_budget: budget,
        diam_a: diameter(a.core.vertices()),
        diam_b: diameter(b.core.vertices()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::polyline::make_round_core;
    use crate::geom::tube::tube_of;

    #[test]
    fn bound_examples() {
        assert!((interlaced_diameter_bound(1.0, 2.0, 0.05, 10.0) - 30.5).abs() < 1e-12);
        let tiny = interlaced_diameter_bound(1e-6, 1e-6, 1e-3, 1.0);
        assert!((tiny - (2e-6 + 1e-3)).abs() < 1e-15);
    }

    #[test]
    fn tube_pair_uses_measured_core_diameters() {
        // 64-gon of circumradius 0.05 has diameter 0.1
        let a = tube_of(make_round_core(0.05, 64).unwrap(), 0.01).unwrap();
        let b = tube_of(make_round_core(0.05, 64).unwrap(), 0.02).unwrap();
        let t = interlaced_tube(&a, &b, 8.0).unwrap();
        assert!((t.diameter_bound() - 8.0 * (0.1 + 0.1 + 0.01)).abs() < 1e-12);
        assert!(interlaced_tube(&a, &b, 0.5).is_err());
    }
}
