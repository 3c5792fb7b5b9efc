//! Exhaustive solver and ray-sampling visibility for small instances.
//!
//! Both exist to check the production path: the solver gives the true optimum
//! the greedy planner is compared against, and the sampler estimates visible
//! angles without sharing any code with the exact interval computation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::floorplan::Segment;
use crate::geometry::Point2;
use crate::planner::{CandidateGraph, CoverageTable};
use crate::visibility::ScannerModel;

pub const DEFAULT_MAX_CANDIDATES: usize = 18;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSolution {
    pub opt_cover: usize,
    pub cover_witness: Vec<usize>,
    /// Smallest covering set that is also connected, if one exists.
    pub opt_full: Option<usize>,
    pub full_witness: Option<Vec<usize>>,
}

/// Next integer with the same number of set bits.
fn next_combination(x: u32) -> u32 {
    let c = x & x.wrapping_neg();
    let r = x + c;
    (((r ^ x) >> 2) / c) | r
}

fn members(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Enumerates subsets by increasing size; returns the first covering and first covering-and-connected sets.
pub fn exact_solve(table: &CoverageTable, graph: &CandidateGraph, max_candidates: usize) -> Result<ExactSolution> {
    let m = table.candidates();
    if m > max_candidates || m > 31 {
        return Err(Error::Parameter(format!(
            "exact solver is limited to {max_candidates} candidates, got {m}"
        )));
    }
    table.ensure_feasible()?;
    let n = table.segments();
    let words = n.div_ceil(64);
    let rows: Vec<Vec<u64>> = (0..m)
        .map(|i| {
            let mut w = vec![0u64; words];
            for j in table.row(i).ones() {
                w[j / 64] |= 1 << (j % 64);
            }
            w
        })
        .collect();
    let full: Vec<u64> = (0..words)
        .map(|k| {
            let bits = (n - 64 * k).min(64);
            if bits == 64 {
                u64::MAX
            } else {
                (1u64 << bits) - 1
            }
        })
        .collect();
    let adj: Vec<u32> = (0..m)
        .map(|i| graph.neighbors(i).iter().fold(0u32, |acc, &(u, _)| acc | 1 << u))
        .collect();
    let covers = |mask: u32| {
        let mut acc = vec![0u64; words];
        for i in members(mask) {
            for (a, r) in acc.iter_mut().zip(&rows[i]) {
                *a |= r;
            }
        }
        acc == full
    };
    let connected = |mask: u32| {
        let mut reach = mask & mask.wrapping_neg();
        loop {
            let grown = members(reach).iter().fold(reach, |acc, &i| acc | (adj[i] & mask));
            if grown == reach {
                return reach == mask;
            }
            reach = grown;
        }
    };
    let mut cover: Option<Vec<usize>> = None;
    let mut full_set: Option<Vec<usize>> = None;
    for k in 1..=m {
        let mut x: u32 = (1u32 << k) - 1;
        while x < (1u32 << m) {
            if covers(x) {
                if cover.is_none() {
                    cover = Some(members(x));
                }
                if connected(x) {
                    full_set = Some(members(x));
                    break;
                }
            }
            x = next_combination(x);
        }
        if full_set.is_some() {
            break;
        }
    }
    let cover_witness = cover.expect("a feasible table has a covering subset");
    Ok(ExactSolution {
        opt_cover: cover_witness.len(),
        cover_witness,
        opt_full: full_set.as_ref().map(Vec::len),
        full_witness: full_set,
    })
}

/// Estimates the valid observed angle of `target` from `p` by casting `rays`
/// rays across the target's angular span.
///
/// Rays are evenly spaced at cell centers, or jittered within their cells when a seed is given.
pub fn sampling_visibility_oracle(
    p: Point2,
    target: &Segment,
    scanner: ScannerModel,
    occluders: &[Segment],
    rays: usize,
    jitter_seed: Option<u64>,
) -> f64 {
    let (a, b) = (target.a, target.b);
    let start = (a.y - p.y).atan2(a.x - p.x);
    let mut width = (b.y - p.y).atan2(b.x - p.x) - start;
    if width > std::f64::consts::PI {
        width -= std::f64::consts::TAU;
    } else if width < -std::f64::consts::PI {
        width += std::f64::consts::TAU;
    }
    if rays == 0 || width.abs() < 1e-15 {
        return 0.0;
    }
    // Only occluders whose bounding box meets the viewing triangle's can matter.
    let lo = Point2::new(p.x.min(a.x).min(b.x), p.y.min(a.y).min(b.y));
    let hi = Point2::new(p.x.max(a.x).max(b.x), p.y.max(a.y).max(b.y));
    let near: Vec<&Segment> = occluders
        .iter()
        .filter(|o| {
            o.a.x.max(o.b.x) >= lo.x && o.a.x.min(o.b.x) <= hi.x && o.a.y.max(o.b.y) >= lo.y && o.a.y.min(o.b.y) <= hi.y
        })
        .collect();
    let e = b - a;
    let mut rng = jitter_seed.map(ChaCha8Rng::seed_from_u64);
    let mut hits = 0usize;
    for k in 0..rays {
        let u = match rng.as_mut() {
            Some(r) => r.gen::<f64>(),
            None => 0.5,
        };
        let phi = start + width * (k as f64 + u) / rays as f64;
        let d = Point2::new(phi.cos(), phi.sin());
        let denom = d.x * e.y - d.y * e.x;
        if denom == 0.0 {
            continue;
        }
        let ap = a - p;
        let s = (ap.x * e.y - ap.y * e.x) / denom;
        let t = (ap.x * d.y - ap.y * d.x) / denom;
        if !(0.0..=1.0).contains(&t) || s < scanner.r_min || s > scanner.r_max {
            continue;
        }
        let blocked = near.iter().any(|o| {
            let f = o.b - o.a;
            let den = d.x * f.y - d.y * f.x;
            if den == 0.0 {
                return false;
            }
            let op = o.a - p;
            let so = (op.x * f.y - op.y * f.x) / den;
            let to = (op.x * d.y - op.y * d.x) / den;
            to > 0.0 && to < 1.0 && so > 0.0 && so < s * (1.0 - 1e-9)
        });
        if !blocked {
            hits += 1;
        }
    }
    hits as f64 * width.abs() / rays as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floorplan::SegmentKind;
    use std::f64::consts::FRAC_PI_2;

    fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
        Segment::new(Point2::new(ax, ay), Point2::new(bx, by), SegmentKind::Wall, 0)
    }

    fn table(rows: &[&str]) -> CoverageTable {
        let rows: Vec<Vec<bool>> = rows.iter().map(|r| r.chars().map(|c| c == '1').collect()).collect();
        CoverageTable::from_rows(&rows)
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut x = 0b111u32;
        let mut count = 0;
        while x < 1 << 6 {
            assert_eq!(x.count_ones(), 3);
            count += 1;
            x = next_combination(x);
        }
        assert_eq!(count, 20);
    }

    #[test]
    fn single_cover() {
        let t = table(&["111", "100"]);
        let g = CandidateGraph::from_overlaps(2, [], 0.4);
        let s = exact_solve(&t, &g, 18).unwrap();
        assert_eq!((s.opt_cover, s.opt_full), (1, Some(1)));
    }

    #[test]
    fn connectivity_costs_an_extra_viewpoint() {
        // 0 and 1 cover everything but do not overlap; 2 bridges them.
        let t = table(&["1100", "0011", "0000"]);
        let g = CandidateGraph::from_overlaps(3, [(0, 2, 0.5), (1, 2, 0.5)], 0.4);
        let s = exact_solve(&t, &g, 18).unwrap();
        assert_eq!(s.opt_cover, 2);
        assert_eq!(s.opt_full, Some(3));
        assert_eq!(s.full_witness, Some(vec![0, 1, 2]));
    }

    #[test]
    fn refuses_large_instances() {
        let rows: Vec<Vec<bool>> = (0..19).map(|_| vec![true]).collect();
        let t = CoverageTable::from_rows(&rows);
        let g = CandidateGraph::from_overlaps(19, [], 0.4);
        assert!(exact_solve(&t, &g, 18).is_err());
    }

    #[test]
    fn optimum_ignores_candidate_order() {
        let rows = ["110000", "001100", "000011", "101010", "010101"];
        let perm = [3, 0, 4, 2, 1];
        let t = table(&rows);
        let permuted: Vec<&str> = perm.iter().map(|&k| rows[k]).collect();
        let tp = table(&permuted);
        let g = CandidateGraph::from_overlaps(5, [], 0.4);
        assert_eq!(
            exact_solve(&t, &g, 18).unwrap().opt_cover,
            exact_solve(&tp, &g, 18).unwrap().opt_cover
        );
    }

    #[test]
    fn sampler_converges_on_right_angle() {
        let s = ScannerModel::new(0.5, 10.0).unwrap();
        let est = sampling_visibility_oracle(Point2::new(0.0, 0.0), &seg(1., -1., 1., 1.), s, &[], 1_000_000, None);
        assert!((est - FRAC_PI_2).abs() < 1e-3);
        let est = sampling_visibility_oracle(Point2::new(0.0, 0.0), &seg(1., -1., 1., 1.), s, &[], 100_000, Some(3));
        assert!((est - FRAC_PI_2).abs() < 1e-3);
    }

    #[test]
    fn sampler_sees_nothing_behind_a_wall() {
        let s = ScannerModel::new(0.5, 10.0).unwrap();
        let wall = seg(0.5, -5.0, 0.5, 5.0);
        let est = sampling_visibility_oracle(Point2::new(0.0, 0.0), &seg(1., -1., 1., 1.), s, &[wall], 100_000, None);
        assert_eq!(est, 0.0);
    }
}
