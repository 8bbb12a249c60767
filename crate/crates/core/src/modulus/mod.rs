//! Discrete p-modulus of surface families on weighted cells.
//!
//! A family is a list of sparse cell masses. The energy of a density ρ is
//! `Σ_c vol(c) ρ(c)^p` and ρ is admissible when `Σ_c mass_S(c) ρ(c) ≥ 1` for
//! every member S. [`modulus`] and [`lp_oracle`] solve the same convex program
//! by two unrelated methods.

mod core;
mod oracle;
mod product;
mod solver;

pub use core::{core_family, CoreFamily};
pub use oracle::{lp_oracle, OracleResult, ORACLE_MAX_CELLS, ORACLE_MAX_MEMBERS};
pub use product::{annulus_base, product_family, square_disk_area, ProductGrid};
pub use solver::{modulus, ModulusOptions, ModulusResult, OracleMode};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Admissibility slack tolerated on returned densities.
pub const ADMISSIBILITY_TOL: f64 = 1e-9;

/// Cell masses of one member, sorted by cell id without repeats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub cells: Vec<(usize, f64)>,
}

impl Surface {
    /// Merges repeated cells and drops exact zeros.
    pub fn new(mut cells: Vec<(usize, f64)>) -> Self {
        cells.sort_by_key(|c| c.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(cells.len());
        for (c, m) in cells {
            match out.last_mut() {
                Some(last) if last.0 == c => last.1 += m,
                _ => out.push((c, m)),
            }
        }
        out.retain(|c| c.1 != 0.0);
        Surface { cells: out }
    }

    pub fn mass(&self) -> f64 {
        self.cells.iter().map(|c| c.1).sum()
    }

    pub fn integral(&self, rho: &[f64]) -> f64 {
        self.cells.iter().map(|&(c, m)| m * rho[c]).sum()
    }

    pub fn scaled(&self, s: f64) -> Surface {
        Surface { cells: self.cells.iter().map(|&(c, m)| (c, m * s)).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFamily {
    pub members: Vec<Surface>,
    /// Volume weight of every cell; cell ids index this vector.
    pub volumes: Vec<f64>,
}

impl SurfaceFamily {
    pub fn new(members: Vec<Surface>, volumes: Vec<f64>) -> Result<Self> {
        if let Some(c) = volumes.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidFamily(format!("cell {c} has volume {}", volumes[c])));
        }
        for (i, s) in members.iter().enumerate() {
            if let Some(&(c, m)) = s.cells.iter().find(|&&(c, m)| c >= volumes.len() || !(m.is_finite() && m >= 0.0)) {
                return Err(Error::InvalidFamily(format!("member {i} has mass {m} on cell {c} of {}", volumes.len())));
            }
            if !(s.mass() > 0.0) {
                return Err(Error::InvalidFamily(format!("member {i} has zero mass")));
            }
        }
        Ok(SurfaceFamily { members, volumes })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.volumes.len()
    }

    /// Cells with positive mass in some member.
    pub fn support_size(&self) -> usize {
        let mut seen = vec![false; self.volumes.len()];
        for s in &self.members {
            for &(c, _) in &s.cells {
                seen[c] = true;
            }
        }
        seen.iter().filter(|&&b| b).count()
    }

    pub fn energy(&self, rho: &[f64], p: f64) -> f64 {
        self.volumes.iter().zip(rho).map(|(v, r)| v * r.powf(p)).sum()
    }

    /// Member integrals of ρ, in member order.
    pub fn integrals(&self, rho: &[f64]) -> Vec<f64> {
        self.members.iter().map(|s| s.integral(rho)).collect()
    }

    /// Same cells and members with volumes times `sⁿ` and masses times `s^{n-2}`.
    pub fn rescaled(&self, s: f64, n: usize) -> SurfaceFamily {
        SurfaceFamily {
            members: self.members.iter().map(|m| m.scaled(s.powi(n as i32 - 2))).collect(),
            volumes: self.volumes.iter().map(|v| v * s.powi(n as i32)).collect(),
        }
    }
}

/// `(Σ_c mass_S(c) ρ(c) ≥ 1 for all S, min_S ∫_S ρ − 1)`.
pub fn is_admissible(rho: &[f64], fam: &SurfaceFamily) -> (bool, f64) {
    let slack = fam.integrals(rho).into_iter().fold(f64::INFINITY, f64::min) - 1.0;
    (slack >= 0.0, slack)
}

/// Conformal exponent `n/(n-2)`.
pub fn conformal_exponent(n: usize) -> f64 {
    n as f64 / (n as f64 - 2.0)
}

/// `V^{-2/(n-2)} · area(A)`.
pub fn lower_bound_holder(area: f64, fiber_measure: f64, n: usize) -> f64 {
    assert!(n >= 3);
    fiber_measure.powf(-2.0 / (n as f64 - 2.0)) * area
}

/// `diamⁿ / (c_{n-2} δ^{n-2})^{n/(n-2)}`.
pub fn upper_bound_boxing(diam: f64, delta: f64, n: usize) -> f64 {
    let c = crate::intersect::unit_ball_measure(n);
    diam.powi(n as i32) / (c * delta.powi(n as i32 - 2)).powf(conformal_exponent(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fam(members: Vec<Vec<(usize, f64)>>, volumes: Vec<f64>) -> Result<SurfaceFamily> {
        SurfaceFamily::new(members.into_iter().map(Surface::new).collect(), volumes)
    }

    #[test]
    fn admissibility_examples() {
        let f = fam(vec![vec![(0, 1.0), (1, 2.0)], vec![(2, 3.0)]], vec![1.0; 3]).unwrap();
        assert_eq!(is_admissible(&[0.0; 3], &f), (false, -1.0));
        assert_eq!(is_admissible(&[1.0 / 3.0; 3], &f), (true, 0.0));
    }

    #[test]
    fn zero_mass_member_rejected() {
        assert!(matches!(fam(vec![vec![(0, 0.0)]], vec![1.0]), Err(Error::InvalidFamily(_))));
        assert!(matches!(fam(vec![vec![(3, 1.0)]], vec![1.0]), Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn analytic_bounds() {
        assert_eq!(lower_bound_holder(0.0, 5.0, 3), 0.0);
        assert!((lower_bound_holder(0.75 * PI, 4.0 * PI * PI, 4) - 3.0 / (16.0 * PI)).abs() < 1e-15);
        assert!((lower_bound_holder(1.0, 2.0 * PI, 3) - 0.025330295910584444).abs() < 1e-15);
        assert!((upper_bound_boxing(0.5, 0.1, 3) - 15.625).abs() < 1e-9);
        assert!((upper_bound_boxing(1.0, 0.5, 4) - 1.0 / (PI * 0.25f64).powi(2)).abs() < 1e-12);
        assert!(upper_bound_boxing(1e-6, 0.1, 3) < 1e-15);
    }
}
