//! Annular scanner model and exact visibility of boundary segments.
//!
//! A target segment is parameterized by `t` in `[0, 1]`. The visible part is
//! the annulus interval set minus the open shadow intervals cast by every
//! occluder that intersects the triangle spanned by the viewpoint and the
//! target. All angles are computed from those intervals directly.

mod bsp;

pub use bsp::{line_of_sight_brute, BspTree};

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floorplan::{Floorplan, Segment};
use crate::geometry::Point2;

/// Parameter intervals narrower than this are treated as empty.
const T_EPS: f64 = 1e-12;
/// Occluder material closer than this to the target line is ignored (it is the target's own wall).
const FRONT_EPS: f64 = 1e-9;

/// 360° static scanner with a valid range `[r_min, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScannerModel {
    pub r_min: f64,
    pub r_max: f64,
}

impl ScannerModel {
    pub fn new(r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(Error::Parameter(format!(
                "scanner range needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        Ok(ScannerModel { r_min, r_max })
    }
}

/// Portions of a target visible from a point.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibleSpan {
    /// Disjoint, ordered parameter intervals on the target.
    pub intervals: Vec<(f64, f64)>,
    pub parts: Vec<(Point2, Point2)>,
    pub theta_valid: f64,
}

impl VisibleSpan {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Angle subtended at `p` by the straight segment (u, v).
pub fn subtended_angle(p: Point2, u: Point2, v: Point2) -> f64 {
    let (a, b) = (u - p, v - p);
    a.cross(b).atan2(a.dot(b)).abs()
}

/// Visibility queries against one floorplan and scanner.
#[derive(Debug, Clone)]
pub struct VisibilityEngine {
    floorplan: Floorplan,
    tree: BspTree,
    scanner: ScannerModel,
}

impl VisibilityEngine {
    pub fn new(floorplan: &Floorplan, occluders: &[Segment], scanner: ScannerModel) -> Result<Self> {
        Ok(VisibilityEngine {
            floorplan: floorplan.clone(),
            tree: BspTree::build(occluders)?,
            scanner,
        })
    }

    pub fn tree(&self) -> &BspTree {
        &self.tree
    }

    pub fn scanner(&self) -> ScannerModel {
        self.scanner
    }

    pub fn floorplan(&self) -> &Floorplan {
        &self.floorplan
    }

    pub fn line_of_sight(&self, p: Point2, q: Point2) -> bool {
        self.tree.line_of_sight(p, q)
    }

    /// Visible part of `target` from `p`, which must lie in the interior.
    pub fn valid_span(&self, p: Point2, target: &Segment) -> Result<VisibleSpan> {
        self.check_interior(p)?;
        Ok(self.span_unchecked(p, target.a, target.b))
    }

    /// True iff at least `fraction` of the target's length is visible from `p`.
    pub fn coverage_entry(&self, p: Point2, target: &Segment, fraction: f64) -> Result<bool> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::Parameter(format!(
                "coverage fraction must lie in (0, 1], got {fraction}"
            )));
        }
        self.check_interior(p)?;
        let visible: f64 = self
            .visible_intervals(p, target.a, target.b)
            .iter()
            .map(|(t0, t1)| t1 - t0)
            .sum();
        Ok(visible >= fraction - 1e-9)
    }

    fn check_interior(&self, p: Point2) -> Result<()> {
        if self.floorplan.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideInterior { x: p.x, y: p.y })
        }
    }

    pub(crate) fn span_unchecked(&self, p: Point2, a: Point2, b: Point2) -> VisibleSpan {
        let intervals = self.visible_intervals(p, a, b);
        let parts: Vec<(Point2, Point2)> = intervals
            .iter()
            .map(|&(t0, t1)| (a.lerp(b, t0), a.lerp(b, t1)))
            .collect();
        let theta_valid = parts.iter().map(|&(u, v)| subtended_angle(p, u, v)).sum();
        VisibleSpan {
            intervals,
            parts,
            theta_valid,
        }
    }

    /// Visible parameter intervals of the segment (a, b) from `p`, without the interior check.
    pub fn visible_intervals(&self, p: Point2, a: Point2, b: Point2) -> Vec<(f64, f64)> {
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            return Vec::new();
        }
        // Viewpoint on the target's supporting line sees it edge-on.
        let h = d.cross(p - a) / len;
        if h.abs() <= FRONT_EPS {
            return Vec::new();
        }
        let mut valid = annulus_intervals(p, a, b, self.scanner);
        if valid.is_empty() {
            return valid;
        }
        let sa = a.lerp(b, valid[0].0);
        let sb = a.lerp(b, valid[valid.len() - 1].1);
        let mut shadows: Vec<(f64, f64)> = Vec::new();
        for idx in self.tree.occluders_near(&[p, sa, sb]) {
            let o = &self.tree.occluders()[idx];
            if let Some(s) = shadow_interval(p, a, b, h.signum(), o.a, o.b) {
                shadows.push(s);
            }
        }
        if !shadows.is_empty() {
            valid = subtract_open(&valid, &mut shadows);
        }
        valid
    }
}

/// Parameter intervals of (a, b) inside the closed annulus around `p`.
pub fn annulus_intervals(p: Point2, a: Point2, b: Point2, scanner: ScannerModel) -> Vec<(f64, f64)> {
    let d = b - a;
    let w = a - p;
    let qa = d.norm2();
    let qb = 2.0 * d.dot(w);
    let qc = w.norm2();
    let roots = |r: f64| -> Option<(f64, f64)> {
        let c = qc - r * r;
        let disc = qb * qb - 4.0 * qa * c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        // Numerically stable pair of roots.
        let q = -0.5 * (qb + qb.signum() * sq);
        let (r1, r2) = if q != 0.0 { (q / qa, c / q) } else { (0.0, 0.0) };
        Some((r1.min(r2), r1.max(r2)))
    };
    let (lo, hi) = match roots(scanner.r_max) {
        Some((t1, t2)) => (t1.max(0.0), t2.min(1.0)),
        None => return Vec::new(),
    };
    if hi - lo <= T_EPS {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(2);
    match roots(scanner.r_min) {
        Some((s1, s2)) if s2 > lo && s1 < hi => {
            if s1 - lo > T_EPS {
                out.push((lo, s1));
            }
            if hi - s2 > T_EPS {
                out.push((s2, hi));
            }
        }
        _ => out.push((lo, hi)),
    }
    out
}

/// Clips segment (c, e) to the half-plane `g >= 0`, `g` affine.
fn clip_half_plane(c: Point2, e: Point2, g: impl Fn(Point2) -> f64) -> Option<(Point2, Point2)> {
    let gc = g(c);
    let ge = g(e);
    if gc < 0.0 && ge < 0.0 {
        return None;
    }
    if gc >= 0.0 && ge >= 0.0 {
        return Some((c, e));
    }
    let m = c.lerp(e, gc / (gc - ge));
    if gc < 0.0 {
        Some((m, e))
    } else {
        Some((c, m))
    }
}

/// Open parameter interval on (a, b) hidden from `p` by occluder (c, e).
///
/// `side` is the sign of `p`'s offset from the target line.
fn shadow_interval(
    p: Point2,
    a: Point2,
    b: Point2,
    side: f64,
    c: Point2,
    e: Point2,
) -> Option<(f64, f64)> {
    let d = b - a;
    let len = d.norm();
    let pa = a - p;
    let pb = b - p;
    let wedge = pa.cross(pb).signum();
    // Inside the wedge at p spanned by a and b.
    let (c, e) = clip_half_plane(c, e, |x| pa.cross(x - p) * wedge)?;
    let (c, e) = clip_half_plane(c, e, |x| -pb.cross(x - p) * wedge)?;
    // Strictly between p and the target line.
    let (c, e) = clip_half_plane(c, e, |x| side * d.cross(x - a) / len - FRONT_EPS)?;
    let project = |x: Point2| {
        let r = x - p;
        let denom = d.cross(r);
        (p - a).cross(r) / denom
    };
    let t0 = project(c);
    let t1 = project(e);
    if !t0.is_finite() || !t1.is_finite() {
        return None;
    }
    let (lo, hi) = (t0.min(t1).max(0.0), t0.max(t1).min(1.0));
    (hi - lo > T_EPS).then_some((lo, hi))
}

/// Removes open intervals from a sorted list of closed intervals.
fn subtract_open(valid: &[(f64, f64)], shadows: &mut [(f64, f64)]) -> Vec<(f64, f64)> {
    shadows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(shadows.len());
    for &(s0, s1) in shadows.iter() {
        match merged.last_mut() {
            Some(last) if s0 < last.1 => last.1 = last.1.max(s1),
            _ => merged.push((s0, s1)),
        }
    }
    let mut out = Vec::new();
    for &(v0, v1) in valid {
        let mut start = v0;
        for &(s0, s1) in &merged {
            if s1 <= start || s0 >= v1 {
                continue;
            }
            if s0 - start > T_EPS {
                out.push((start, s0));
            }
            start = start.max(s1);
            if start >= v1 {
                break;
            }
        }
        if v1 - start > T_EPS {
            out.push((start, v1));
        }
    }
    out
}

/// Angular interval `[start, start + width)` seen from `p` for the straight piece (u, v).
pub fn angular_interval(p: Point2, u: Point2, v: Point2) -> (f64, f64) {
    let (a, b) = (u - p, v - p);
    let width = a.cross(b).atan2(a.dot(b));
    let start = if width >= 0.0 { a.angle() } else { b.angle() };
    (start.rem_euclid(TAU), width.abs())
}

/// Measure of the union of angular intervals on the circle, in `[0, 2π]`.
pub fn angular_union(intervals: &[(f64, f64)]) -> f64 {
    let mut flat: Vec<(f64, f64)> = Vec::with_capacity(intervals.len() + 4);
    for &(start, width) in intervals {
        if width >= TAU {
            return TAU;
        }
        let end = start + width;
        if end > TAU {
            flat.push((start, TAU));
            flat.push((0.0, end - TAU));
        } else {
            flat.push((start, end));
        }
    }
    flat.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (s, e) in flat {
        cur = match cur {
            Some((cs, ce)) if s <= ce => Some((cs, ce.max(e))),
            Some((cs, ce)) => {
                total += ce - cs;
                Some((s, e))
            }
            None => Some((s, e)),
        };
    }
    if let Some((cs, ce)) = cur {
        total += ce - cs;
    }
    total.clamp(0.0, TAU)
}
