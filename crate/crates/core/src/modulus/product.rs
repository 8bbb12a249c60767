use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{Surface, SurfaceFamily};
use crate::error::{Error, Result};

/// `∫ s(x) dx` with `s(x) = √(R² − x²)`.
fn half_chord_integral(x: f64, r: f64) -> f64 {
    let x = x.clamp(-r, r);
    0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).asin())
}

/// Exact area of the rectangle `[x0,x1]×[y0,y1]` inside the disk of radius `r`.
pub fn square_disk_area(x0: f64, x1: f64, y0: f64, y1: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let (a, b) = (x0.max(-r), x1.min(r));
    if a >= b {
        return 0.0;
    }
    // breakpoints where the chord half-height crosses |y0| or |y1|
    let mut xs = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < r {
            let s = (r * r - y * y).sqrt();
            xs.extend([-s, s].into_iter().filter(|&x| x > a && x < b));
        }
    }
    xs.sort_by(f64::total_cmp);
    let mut area = 0.0;
    for w in xs.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let m = 0.5 * (u + v);
        let s = (r * r - m * m).max(0.0).sqrt();
        let int_s = half_chord_integral(v, r) - half_chord_integral(u, r);
        let (top_s, bot_s) = (y1 >= s, y0 <= -s);
        let dx = v - u;
        let top = if top_s { int_s } else { y1 * dx };
        let bot = if bot_s { -int_s } else { y0 * dx };
        area += (top - bot).max(0.0);
    }
    area
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseCell {
    pub ix: usize,
    pub iy: usize,
    pub area: f64,
}

/// Cells of the `res × res` grid on `[-r_out, r_out]²` meeting the annulus
/// `r_in ≤ |x| ≤ r_out` in positive area, with exact areas.
pub fn annulus_base(res: usize, r_in: f64, r_out: f64) -> Vec<BaseCell> {
    let h = 2.0 * r_out / res as f64;
    let mut out = Vec::new();
    for iy in 0..res {
        for ix in 0..res {
            let (x0, y0) = (-r_out + ix as f64 * h, -r_out + iy as f64 * h);
            let (x1, y1) = (x0 + h, y0 + h);
            let area = square_disk_area(x0, x1, y0, y1, r_out) - square_disk_area(x0, x1, y0, y1, r_in);
            if area > 0.0 {
                out.push(BaseCell { ix, iy, area });
            }
        }
    }
    out
}

/// Base cells times a `(S¹)^{n-2}` fiber of `fiber_res^{n-2}` equal cells.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductGrid {
    pub n: usize,
    pub base: Vec<BaseCell>,
    pub fiber_res: usize,
}

impl ProductGrid {
    pub fn fiber_cells(&self) -> usize {
        self.fiber_res.pow(self.n as u32 - 2)
    }

    pub fn fiber_cell_measure(&self) -> f64 {
        (TAU / self.fiber_res as f64).powi(self.n as i32 - 2)
    }

    /// `ℋ^{n-2}` of the whole fiber torus.
    pub fn fiber_measure(&self) -> f64 {
        TAU.powi(self.n as i32 - 2)
    }

    pub fn base_area(&self) -> f64 {
        self.base.iter().map(|b| b.area).sum()
    }
}

/// One member `{x} × (S¹)^{n-2}` per base cell, spread over its fiber column.
pub fn product_family(grid: &ProductGrid) -> Result<SurfaceFamily> {
    if !(3..=4).contains(&grid.n) || grid.fiber_res == 0 {
        return Err(Error::ConfigInvalid { field: "grid".into(), message: format!("n = {}, fiber_res = {}", grid.n, grid.fiber_res) });
    }
    let f = grid.fiber_cells();
    let fm = grid.fiber_cell_measure();
    let mut volumes = Vec::with_capacity(grid.base.len() * f);
    let mut members = Vec::with_capacity(grid.base.len());
    for (i, b) in grid.base.iter().enumerate() {
        volumes.extend(std::iter::repeat_n(b.area * fm, f));
        members.push(Surface { cells: (0..f).map(|k| (i * f + k, fm)).collect() });
    }
    SurfaceFamily::new(members, volumes)
}
