use serde::{Deserialize, Serialize};

use super::solver::{feasible, loads, rho_of_load};
use super::SurfaceFamily;
use crate::error::{Error, Result};

pub const ORACLE_MAX_CELLS: usize = 5000;
pub const ORACLE_MAX_MEMBERS: usize = 500;

const ORACLE_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 200_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleResult {
    /// Energy of the rescaled admissible density.
    pub value: f64,
    pub dual: f64,
    pub sweeps: usize,
}

/// `1 − Σ_c mass_c ρ_c(g_c + t·mass_c)`, and its derivative in t.
fn member_slope(cells: &[(usize, f64)], g: &[f64], vol: &[f64], p: f64, t: f64) -> (f64, f64) {
    let q = 1.0 / (p - 1.0);
    let (mut f, mut df) = (1.0, 0.0);
    for &(c, m) in cells {
        let load = g[c] + t * m;
        if load > 0.0 {
            let r = rho_of_load(load, vol[c], p);
            f -= m * r;
            df -= m * m * q * r / load;
        }
    }
    (f, df)
}

/// Exact maximizer of the dual along one multiplier (bracketed Newton).
fn coordinate_max(cells: &[(usize, f64)], g: &[f64], vol: &[f64], p: f64, start: f64) -> f64 {
    if member_slope(cells, g, vol, p, 0.0).0 <= 0.0 {
        return 0.0;
    }
    let mut hi = start.max(f64::MIN_POSITIVE);
    while member_slope(cells, g, vol, p, hi).0 > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    let mut t = 0.5 * hi;
    for _ in 0..200 {
        let (f, df) = member_slope(cells, g, vol, p, t);
        if f == 0.0 {
            return t;
        }
        if f > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - f / df;
        let next = if df < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if next == t || hi - lo <= 1e-15 * hi {
            return t;
        }
        t = next;
    }
    t
}

/// Hildreth-style dual coordinate ascent: each sweep maximizes the dual
/// exactly in one member's multiplier at a time.
///
/// Independent of the primal solver in [`super::modulus`]; used as its oracle.
pub fn lp_oracle(fam: &SurfaceFamily, p: f64) -> Result<OracleResult> {
    if fam.cell_count() > ORACLE_MAX_CELLS || fam.len() > ORACLE_MAX_MEMBERS {
        return Err(Error::SizeExceeded { cells: fam.cell_count(), members: fam.len() });
    }
    if let Some(i) = fam.members.iter().position(|s| !(s.mass() > 0.0)) {
        return Err(Error::InvalidFamily(format!("member {i} has empty support")));
    }
    let mut lambda = vec![0.0; fam.len()];
    let mut best = f64::INFINITY;
    let mut dual = f64::NEG_INFINITY;
    for sweep in 1..=MAX_SWEEPS {
        let mut g = loads(fam, &lambda);
        for (i, s) in fam.members.iter().enumerate() {
            let old = lambda[i];
            for &(c, m) in &s.cells {
                g[c] -= old * m;
            }
            let t = coordinate_max(&s.cells, &g, &fam.volumes, p, old.max(1e-3));
            for &(c, m) in &s.cells {
                g[c] += t * m;
            }
            lambda[i] = t;
        }
        let g = loads(fam, &lambda);
        let rho: Vec<f64> = g.iter().zip(&fam.volumes).map(|(&g, &v)| rho_of_load(g, v, p)).collect();
        dual = dual.max(lambda.iter().sum::<f64>() - (p - 1.0) * fam.energy(&rho, p));
        if let Some((_, e)) = feasible(fam, &rho, p) {
            best = best.min(e);
        }
        if best - dual <= ORACLE_TOL * best {
            return Ok(OracleResult { value: best, dual, sweeps: sweep });
        }
    }
    Err(Error::NonConvergence { iterations: MAX_SWEEPS, best })
}
