use super::polyline::Point;

/// Point sets up to this size use the plain pairwise scan.
pub const EXACT_LIMIT: usize = 10_000;

/// Maximum pairwise distance.
///
/// Larger sets are scanned in order of decreasing distance from the centroid;
/// once a point is closer to the centroid than half the best pair found, no
/// later pair can beat it, so the result is still exact.
pub fn diameter(points: &[Point]) -> f64 {
    match points.len() {
        0 | 1 => 0.0,
        n if n <= EXACT_LIMIT => {
            let mut best2: f64 = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    best2 = best2.max((points[i] - points[j]).norm_squared());
                }
            }
            best2.sqrt()
        }
        _ => pruned_diameter(points),
    }
}

fn pruned_diameter(points: &[Point]) -> f64 {
    let c = points.iter().sum::<Point>() / points.len() as f64;
    let mut order: Vec<(f64, usize)> = points.iter().enumerate().map(|(i, p)| ((p - c).norm(), i)).collect();
    order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut best: f64 = 0.0;
    for (a, &(ra, i)) in order.iter().enumerate() {
        // any partner is at most ra from c, so the pair is at most 2 ra long
        if 2.0 * ra <= best {
            break;
        }
        for &(rb, j) in &order[a + 1..] {
            if ra + rb <= best {
                break;
            }
            best = best.max((points[i] - points[j]).norm());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::polyline::make_round_core;
    use nalgebra::{Rotation3, Vector3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        assert_eq!(diameter(&[Point::new(1.0, 2.0, 3.0)]), 0.0);
        let c = make_round_core(1.0, 64).unwrap();
        assert!((diameter(c.vertices()) - 2.0).abs() < 2e-3);
        assert_eq!(diameter(&[Point::zeros(), Point::new(3.0, 4.0, 0.0)]), 5.0);
    }

    #[test]
    fn pruned_matches_pairwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point> = (0..3000).map(|_| Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0), rng.gen_range(-0.5..0.5))).collect();
        assert_eq!(pruned_diameter(&pts), diameter(&pts));
    }

    #[test]
    fn monotone_and_rigid_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let pts: Vec<Point> = (0..200).map(|_| Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let d = diameter(&pts);
            assert!(diameter(&pts[..100]) <= d);
            let axis = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let rot = Rotation3::new(axis);
            let shift = Point::new(rng.gen_range(-5.0..5.0), 0.3, -2.0);
            let moved: Vec<Point> = pts.iter().map(|p| rot * p + shift).collect();
            assert!((diameter(&moved) - d).abs() < 1e-12);
        }
    }
}
