#![allow(dead_code)]

use rand::Rng;
use vfplan_core::visibility::line_of_sight_brute;
use vfplan_core::{Floorplan, Point2, ScannerModel, Segment};

pub fn random_interior(fp: &Floorplan, rng: &mut impl Rng) -> Point2 {
    let (lo, hi) = fp.bounds();
    loop {
        let p = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if fp.contains(p) {
            return p;
        }
    }
}

/// Whole-segment visibility judged by sampling points along it and testing
/// each against every occluder.
pub fn sampled_full_visibility(
    occluders: &[Segment],
    scanner: ScannerModel,
    p: Point2,
    target: &Segment,
    samples: usize,
) -> bool {
    (0..samples).all(|k| {
        let q = target.point_at((k as f64 + 0.5) / samples as f64);
        let r = p.dist(q);
        r >= scanner.r_min && r <= scanner.r_max && line_of_sight_brute(occluders, p, q)
    })
}

/// Floyd-Warshall written out independently of the library.
pub fn all_pairs(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        d[i][i] = 0.0;
    }
    for &(a, b, w) in edges {
        d[a][b] = d[a][b].min(w);
        d[b][a] = d[b][a].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}
