use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{is_admissible, lp_oracle, SurfaceFamily, ADMISSIBILITY_TOL, ORACLE_MAX_CELLS, ORACLE_MAX_MEMBERS};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    #[default]
    Auto,
    Off,
    Force,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModulusOptions {
    /// Relative duality gap at which the solver stops.
    pub tol: f64,
    pub max_iter: usize,
    pub oracle: OracleMode,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        ModulusOptions { tol: 1e-11, max_iter: 100_000, oracle: OracleMode::Auto }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModulusResult {
    pub p: f64,
    /// Energy of the returned admissible density.
    pub value: f64,
    pub density: Vec<f64>,
    pub admissibility_slack: f64,
    /// Dual value: a certified lower bound for the discrete modulus.
    pub lower_bound: f64,
    pub iterations: usize,
    pub oracle_gap: Option<f64>,
}

/// Dual of the modulus program at multipliers λ.
pub(super) struct DualPoint {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub rho: Vec<f64>,
}

/// Cell loads `g = Σ_S λ_S mass_S`, accumulated in member order.
pub(super) fn loads(fam: &SurfaceFamily, lambda: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; fam.cell_count()];
    for (s, &l) in fam.members.iter().zip(lambda) {
        if l != 0.0 {
            for &(c, m) in &s.cells {
                g[c] += l * m;
            }
        }
    }
    g
}

/// Minimizer of `vol·ρ^p − g·ρ` over ρ ≥ 0.
pub(super) fn rho_of_load(g: f64, vol: f64, p: f64) -> f64 {
    if g <= 0.0 {
        0.0
    } else {
        (g / (p * vol)).powf(1.0 / (p - 1.0))
    }
}

fn dual_point(fam: &SurfaceFamily, lambda: &[f64], p: f64) -> DualPoint {
    let g = loads(fam, lambda);
    let rho: Vec<f64> = g.iter().zip(&fam.volumes).map(|(&g, &v)| rho_of_load(g, v, p)).collect();
    let integrals: Vec<f64> = fam.members.par_iter().map(|s| s.integral(&rho)).collect();
    let value = lambda.iter().sum::<f64>() - (p - 1.0) * fam.energy(&rho, p);
    DualPoint { value, gradient: integrals.iter().map(|i| 1.0 - i).collect(), rho }
}

/// Rescales ρ so its smallest member integral is 1; returns the density and energy.
pub(super) fn feasible(fam: &SurfaceFamily, rho: &[f64], p: f64) -> Option<(Vec<f64>, f64)> {
    let m = fam.members.par_iter().map(|s| s.integral(rho)).collect::<Vec<_>>().into_iter().fold(f64::INFINITY, f64::min);
    if !(m > 0.0 && m.is_finite()) {
        return None;
    }
    let r: Vec<f64> = rho.iter().map(|x| x / m).collect();
    let e = fam.energy(&r, p);
    Some((r, e))
}

/// Families up to this many members are polished by projected Newton steps.
pub const NEWTON_MAX_MEMBERS: usize = 2000;
const POLISH_EVERY: usize = 200;

fn projected_norm(lambda: &[f64], gradient: &[f64]) -> f64 {
    lambda.iter().zip(gradient).map(|(&l, &g)| if l > 0.0 { g * g } else { g.max(0.0).powi(2) }).sum::<f64>().sqrt()
}

/// An admissible density and its energy.
type Feasible = (Vec<f64>, f64);

/// Projected Newton ascent on the dual over the members not pinned at zero.
///
/// Returns the final multipliers, their dual value and the best rescaled
/// admissible density seen.
fn newton_polish(fam: &SurfaceFamily, p: f64, start: &[f64], w: &[f64], tol: f64) -> (Vec<f64>, f64, Option<Feasible>) {
    let n = fam.len();
    let q = 1.0 / (p - 1.0);
    let mut x = start.to_vec();
    let mut d = dual_point(fam, &x, p);
    let mut best: Option<Feasible> = feasible(fam, &d.rho, p);
    let mut cell_members: Vec<Vec<(usize, f64)>> = vec![Vec::new(); fam.cell_count()];
    for (i, s) in fam.members.iter().enumerate() {
        for &(c, m) in &s.cells {
            cell_members[c].push((i, m));
        }
    }
    for _ in 0..100 {
        let g = loads(fam, &x);
        let free: Vec<usize> = (0..n).filter(|&i| x[i] > 0.0 || d.gradient[i] > 0.0).collect();
        if free.is_empty() {
            break;
        }
        let mut slot = vec![usize::MAX; n];
        for (k, &i) in free.iter().enumerate() {
            slot[i] = k;
        }
        let f = free.len();
        let mut h = nalgebra::DMatrix::<f64>::zeros(f, f);
        for (c, ms) in cell_members.iter().enumerate() {
            if g[c] <= 0.0 {
                continue;
            }
            let dr = q * d.rho[c] / g[c];
            for &(i, mi) in ms {
                if slot[i] == usize::MAX {
                    continue;
                }
                for &(j, mj) in ms {
                    if slot[j] != usize::MAX {
                        h[(slot[i], slot[j])] += dr * mi * mj;
                    }
                }
            }
        }
        let scale = (0..f).map(|k| h[(k, k)] * w[free[k]]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for (k, &i) in free.iter().enumerate() {
            if h[(k, k)] <= 0.0 {
                h[(k, k)] = 1.0 / w[i];
            }
            h[(k, k)] += 1e-13 * scale / w[i];
        }
        let Some(chol) = h.cholesky() else { break };
        let rhs = nalgebra::DVector::from_iterator(f, free.iter().map(|&i| d.gradient[i]));
        let step = chol.solve(&rhs);
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let mut cand = x.clone();
            for (k, &i) in free.iter().enumerate() {
                cand[i] = (x[i] + alpha * step[k]).max(0.0);
            }
            let dc = dual_point(fam, &cand, p);
            let lin: f64 = free.iter().map(|&i| d.gradient[i] * (cand[i] - x[i])).sum();
            // near the optimum the dual value stalls in rounding; the projected gradient does not
            if (dc.value >= d.value + 1e-4 * lin && dc.value > d.value)
                || projected_norm(&cand, &dc.gradient) < (1.0 - 1e-4 * alpha) * projected_norm(&x, &d.gradient)
            {
                x = cand;
                d = dc;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if let Some((r, e)) = feasible(fam, &d.rho, p) {
            if best.as_ref().is_none_or(|b| e < b.1) {
                best = Some((r, e));
            }
        }
        let upper = best.as_ref().map_or(f64::INFINITY, |b| b.1);
        if !moved || upper - d.value <= tol * upper {
            break;
        }
    }
    (x, d.value, best)
}

/// Accelerated projected ascent on the Lagrange dual, with backtracking and
/// adaptive restart. Every iterate's density is rescaled to admissibility, so
/// the best energy seen is a certified upper bound and the best dual value a
/// certified lower bound.
pub fn modulus(fam: &SurfaceFamily, p: f64, opts: &ModulusOptions) -> Result<ModulusResult> {
    if !(p > 1.0) {
        return Err(Error::ConfigInvalid { field: "p".into(), message: format!("{p} must exceed 1") });
    }
    if fam.is_empty() {
        return Err(Error::InvalidFamily("family is empty".into()));
    }
    let n = fam.len();
    // each member's optimal multiplier when alone: the metric of the ascent
    let q = 1.0 / (p - 1.0);
    let w: Vec<f64> = fam.members.iter().map(|s| s.cells.iter().map(|&(c, m)| m * (m / (p * fam.volumes[c])).powf(q)).sum::<f64>().powf(1.0 - p)).collect();
    let dw = dual_point(fam, &w, p);
    let k = fam.energy(&dw.rho, p);
    let t = (w.iter().sum::<f64>() / (p * k)).powf(p - 1.0);
    let mut x: Vec<f64> = w.iter().map(|wi| t * wi).collect();
    let mut x_prev = x.clone();
    let mut dx = dual_point(fam, &x, p);
    let mut best_lower = dx.value;
    let (mut best_rho, mut best_upper) = feasible(fam, &dx.rho, p).expect("positive multipliers reach every member");
    let mut step = 1.0 / (p - 1.0);
    let mut theta = 1.0f64;
    let mut iterations = 0;
    while iterations < opts.max_iter && best_upper - best_lower > opts.tol * best_upper {
        iterations += 1;
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta = (theta - 1.0) / theta_next;
        let y: Vec<f64> = x.iter().zip(&x_prev).map(|(a, b)| (a + beta * (a - b)).max(0.0)).collect();
        let dy = dual_point(fam, &y, p);
        let (x_new, d_new) = loop {
            let cand: Vec<f64> = (0..n).map(|i| (y[i] + step * w[i] * dy.gradient[i]).max(0.0)).collect();
            let dc = dual_point(fam, &cand, p);
            let (mut lin, mut sq) = (0.0, 0.0);
            for i in 0..n {
                let d = cand[i] - y[i];
                lin += dy.gradient[i] * d;
                sq += d * d / w[i];
            }
            if dc.value >= dy.value + lin - 0.5 * sq / step || sq == 0.0 || step < 1e-300 {
                break (cand, dc);
            }
            step *= 0.5;
        };
        step *= 1.25;
        if d_new.value < dx.value {
            // adaptive restart: drop the momentum
            theta = 1.0;
            x_prev = x.clone();
        } else {
            theta = theta_next;
            x_prev = std::mem::replace(&mut x, x_new);
            dx = d_new;
        }
        best_lower = best_lower.max(dx.value);
        if let Some((r, e)) = feasible(fam, &dx.rho, p) {
            if e < best_upper {
                best_upper = e;
                best_rho = r;
            }
        }
        if n <= NEWTON_MAX_MEMBERS && iterations % POLISH_EVERY == 0 && best_upper - best_lower > opts.tol * best_upper {
            let (lam, lower, polished) = newton_polish(fam, p, &x, &w, opts.tol);
            if let Some((r, e)) = polished {
                if e < best_upper {
                    best_upper = e;
                    best_rho = r;
                }
            }
            if lower > dx.value {
                best_lower = best_lower.max(lower);
                x_prev = lam.clone();
                x = lam;
                dx = dual_point(fam, &x, p);
                theta = 1.0;
            }
        }
    }
    let (_, slack) = is_admissible(&best_rho, fam);
    debug_assert!(slack >= -ADMISSIBILITY_TOL);
    if best_upper - best_lower > opts.tol * best_upper {
        return Err(Error::NonConvergence { iterations, best: best_upper });
    }
    let run_oracle = match opts.oracle {
        OracleMode::Off => false,
        OracleMode::Force => true,
        OracleMode::Auto => fam.cell_count() <= ORACLE_MAX_CELLS && fam.len() <= ORACLE_MAX_MEMBERS,
    };
    let oracle_gap = if run_oracle { Some((best_upper - lp_oracle(fam, p)?.value).abs()) } else { None };
    Ok(ModulusResult { p, value: best_upper, density: best_rho, admissibility_slack: slack, lower_bound: best_lower, iterations, oracle_gap })
}
