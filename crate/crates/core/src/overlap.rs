//! Overlap ratios between viewpoints from their visible boundary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floorplan::BoundarySet;
use crate::geometry::Point2;
use crate::visibility::{angular_interval, angular_union, VisibilityEngine};

/// Interval endpoints closer than this (in meters along an edge) are treated as equal.
const LEN_TOL: f64 = 1e-9;

/// Visible parameter range on one source edge of the boundary set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSpan {
    pub edge: usize,
    pub t0: f64,
    pub t1: f64,
}

/// Everything a viewpoint sees of a boundary set.
#[derive(Debug, Clone)]
pub struct VisRecord {
    pub viewpoint: Point2,
    /// Fingerprint of the boundary set the record was computed against.
    pub boundary: u64,
    /// Sorted by edge, then by start; disjoint within an edge.
    pub spans: Vec<EdgeSpan>,
    pub total_length: f64,
    /// Union of the visible angular intervals, in `[0, 2π]`.
    pub total_angle: f64,
}

impl VisRecord {
    /// Runs the visibility engine against every source edge of `boundary`.
    pub fn compute(engine: &VisibilityEngine, boundary: &BoundarySet, p: Point2) -> Self {
        let mut spans = Vec::new();
        for (e, edge) in boundary.edges.iter().enumerate() {
            for (t0, t1) in engine.visible_intervals(p, edge.a, edge.b) {
                spans.push(EdgeSpan { edge: e, t0, t1 });
            }
        }
        Self::from_spans(boundary, p, spans)
    }

    pub fn from_spans(boundary: &BoundarySet, p: Point2, spans: Vec<EdgeSpan>) -> Self {
        let total_length = spans
            .iter()
            .map(|s| (s.t1 - s.t0) * boundary.edges[s.edge].length())
            .sum();
        let total_angle = span_angle(boundary, p, &spans);
        VisRecord {
            viewpoint: p,
            boundary: boundary.fingerprint,
            spans,
            total_length,
            total_angle,
        }
    }

    /// Visible sub-spans of each fragment, as `(fragment id, t0, t1)` in the fragment's own parameter.
    pub fn fragment_spans(&self, boundary: &BoundarySet) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for s in &self.spans {
            for f in boundary.edge_fragments[s.edge].clone() {
                let o = boundary.origins[f];
                let lo = s.t0.max(o.t0);
                let hi = s.t1.min(o.t1);
                if hi > lo {
                    let w = o.t1 - o.t0;
                    out.push((f, (lo - o.t0) / w, (hi - o.t0) / w));
                }
            }
        }
        out.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        out
    }

    /// Visible fraction of each fragment's length, summed over its sub-spans.
    pub fn fragment_fractions(&self, boundary: &BoundarySet) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (f, t0, t1) in self.fragment_spans(boundary) {
            match out.last_mut() {
                Some(last) if last.0 == f => last.1 += t1 - t0,
                _ => out.push((f, t1 - t0)),
            }
        }
        out
    }
}

fn span_angle(boundary: &BoundarySet, p: Point2, spans: &[EdgeSpan]) -> f64 {
    let intervals: Vec<(f64, f64)> = spans
        .iter()
        .map(|s| {
            let e = &boundary.edges[s.edge];
            angular_interval(p, e.point_at(s.t0), e.point_at(s.t1))
        })
        .collect();
    angular_union(&intervals)
}

/// Spans seen from both records.
fn common_spans(boundary: &BoundarySet, a: &VisRecord, b: &VisRecord) -> Vec<EdgeSpan> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.spans.len() && j < b.spans.len() {
        let (x, y) = (a.spans[i], b.spans[j]);
        if x.edge != y.edge {
            if x.edge < y.edge {
                i += 1;
            } else {
                j += 1;
            }
            continue;
        }
        let lo = x.t0.max(y.t0);
        let hi = x.t1.min(y.t1);
        let len = boundary.edges[x.edge].length();
        if (hi - lo) * len > LEN_TOL {
            out.push(EdgeSpan { edge: x.edge, t0: lo, t1: hi });
        }
        if x.t1 < y.t1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn check_same(boundary: &BoundarySet, a: &VisRecord, b: &VisRecord) -> Result<()> {
    if a.boundary != boundary.fingerprint || b.boundary != boundary.fingerprint {
        return Err(Error::Contract(
            "visibility records were computed against a different boundary set".into(),
        ));
    }
    Ok(())
}

/// Shared visible length and the angle it subtends at each viewpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection {
    pub length: f64,
    pub theta_a: f64,
    pub theta_b: f64,
}

pub fn intersect_visible(boundary: &BoundarySet, a: &VisRecord, b: &VisRecord) -> Result<Intersection> {
    check_same(boundary, a, b)?;
    let common = common_spans(boundary, a, b);
    let length = common
        .iter()
        .map(|s| (s.t1 - s.t0) * boundary.edges[s.edge].length())
        .sum::<f64>()
        .min(a.total_length.min(b.total_length));
    Ok(Intersection {
        length,
        theta_a: span_angle(boundary, a.viewpoint, &common).min(a.total_angle),
        theta_b: span_angle(boundary, b.viewpoint, &common).min(b.total_angle),
    })
}

/// The five overlap variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMetric {
    MinLen,
    #[default]
    MeanLen,
    UnionLen,
    UnionAng,
    MeanAng,
}

impl OverlapMetric {
    pub const ALL: [OverlapMetric; 5] = [
        OverlapMetric::MinLen,
        OverlapMetric::MeanLen,
        OverlapMetric::UnionLen,
        OverlapMetric::UnionAng,
        OverlapMetric::MeanAng,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OverlapMetric::MinLen => "min-len",
            OverlapMetric::MeanLen => "mean-len",
            OverlapMetric::UnionLen => "union-len",
            OverlapMetric::UnionAng => "union-ang",
            OverlapMetric::MeanAng => "mean-ang",
        }
    }

    pub fn uses_angles(self) -> bool {
        matches!(self, OverlapMetric::UnionAng | OverlapMetric::MeanAng)
    }
}

impl fmt::Display for OverlapMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OverlapMetric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        OverlapMetric::ALL
            .into_iter()
            .find(|m| m.name() == s || m.name().replace('-', "_") == s)
            .ok_or_else(|| Error::Parameter(format!("unknown overlap metric {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Ratios {
    pub min_len: f64,
    pub mean_len: f64,
    pub union_len: f64,
    pub union_ang: f64,
    pub mean_ang: f64,
}

impl Ratios {
    pub fn get(&self, m: OverlapMetric) -> f64 {
        match m {
            OverlapMetric::MinLen => self.min_len,
            OverlapMetric::MeanLen => self.mean_len,
            OverlapMetric::UnionLen => self.union_len,
            OverlapMetric::UnionAng => self.union_ang,
            OverlapMetric::MeanAng => self.mean_ang,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapResult {
    pub length_ab: f64,
    pub theta_a_ab: f64,
    pub theta_b_ab: f64,
    pub ratios: Ratios,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        (num / den).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// The five ratios from the raw quantities; empty denominators give 0.
pub fn ratios_from_parts(
    len_a: f64,
    len_b: f64,
    len_ab: f64,
    theta_a: f64,
    theta_b: f64,
    theta_a_ab: f64,
    theta_b_ab: f64,
) -> Ratios {
    let mean_ang = if theta_a > 0.0 && theta_b > 0.0 {
        (0.5 * (theta_a_ab / theta_a) + 0.5 * (theta_b_ab / theta_b)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ratios {
        min_len: ratio(len_ab, len_a.min(len_b)),
        mean_len: ratio(2.0 * len_ab, len_a + len_b),
        union_len: ratio(len_ab, len_a + len_b - len_ab),
        union_ang: ratio(theta_a_ab + theta_b_ab, theta_a + theta_b),
        mean_ang,
    }
}

pub fn overlap_ratios(boundary: &BoundarySet, a: &VisRecord, b: &VisRecord) -> Result<OverlapResult> {
    let i = intersect_visible(boundary, a, b)?;
    Ok(OverlapResult {
        length_ab: i.length,
        theta_a_ab: i.theta_a,
        theta_b_ab: i.theta_b,
        ratios: ratios_from_parts(
            a.total_length,
            b.total_length,
            i.length,
            a.total_angle,
            b.total_angle,
            i.theta_a,
            i.theta_b,
        ),
    })
}

/// One ratio, skipping the angle work for length-based variants.
pub fn overlap(boundary: &BoundarySet, a: &VisRecord, b: &VisRecord, metric: OverlapMetric) -> Result<f64> {
    if metric.uses_angles() {
        return Ok(overlap_ratios(boundary, a, b)?.ratios.get(metric));
    }
    check_same(boundary, a, b)?;
    let len_ab: f64 = common_spans(boundary, a, b)
        .iter()
        .map(|s| (s.t1 - s.t0) * boundary.edges[s.edge].length())
        .sum::<f64>()
        .min(a.total_length.min(b.total_length));
    Ok(ratios_from_parts(a.total_length, b.total_length, len_ab, 0.0, 0.0, 0.0, 0.0).get(metric))
}
