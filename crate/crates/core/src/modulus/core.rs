use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Surface, SurfaceFamily};
use crate::error::{Error, Result};
use crate::semmes::SemmesComplex;
use crate::word::Word;

/// A family on a compacted set of complex cells.
#[derive(Clone, Debug)]
pub struct CoreFamily {
    pub family: SurfaceFamily,
    /// Complex cell id of each family cell.
    pub cells: Vec<usize>,
}

/// Core tori `{x} × (S¹)^{n-2}` of the copy of `w` that avoid both holes.
///
/// Columns are drawn from a seeded permutation of the free cross-section
/// positions, so smaller samples are subfamilies of larger ones.
pub fn core_family(c: &SemmesComplex, w: &Word, sample_count: usize, seed: u64) -> Result<CoreFamily> {
    let copy = c.copy_index(0, w).ok_or_else(|| Error::InvalidFamily(format!("word {w} has no copy")))?;
    let k = &c.copies[copy];
    let mut cols = c.model.free_columns();
    cols.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    cols.truncate(sample_count);
    let mass_scale = k.scale.powi(c.n as i32 - 2);
    let mut cells = Vec::new();
    let mut members = Vec::with_capacity(cols.len());
    for (ix, iy) in cols {
        let col = c.model.core_column(ix, iy).expect("free column");
        let mut m = Vec::with_capacity(col.len());
        for (local, mass) in col {
            m.push((cells.len(), mass * mass_scale));
            cells.push(k.first_cell + local);
        }
        members.push(Surface::new(m));
    }
    let volumes = cells.iter().map(|&i| c.volumes[i]).collect();
    Ok(CoreFamily { family: SurfaceFamily::new(members, volumes)?, cells })
}
