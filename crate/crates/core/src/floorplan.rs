//! Floorplan input, validation, and boundary discretization.
//!
//! A floorplan is an outer ring with optional holes (columns, interior wall
//! blocks, buildings on a site plan) and tagged openings. Walls are the ring
//! edges minus door spans. The boundary set `L` is the list of equal-length
//! fragments each wall (and optionally each window) is cut into.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Point2, EPS};

/// What a boundary segment represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    Wall,
    Window,
    #[serde(alias = "door", alias = "door_frame")]
    DoorFrame,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
    pub kind: SegmentKind,
    pub id: usize,
}

impl Segment {
    pub fn new(a: Point2, b: Point2, kind: SegmentKind, id: usize) -> Self {
        Segment { a, b, kind, id }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn point_at(&self, t: f64) -> Point2 {
        self.a.lerp(self.b, t)
    }

    pub fn midpoint(&self) -> Point2 {
        self.point_at(0.5)
    }
}

/// A validated polygonal domain: outer ring counterclockwise, holes clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Floorplan {
    outer: Vec<Point2>,
    holes: Vec<Vec<Point2>>,
    openings: Vec<Segment>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawOpening {
    kind: SegmentKind,
    segment: [[f64; 2]; 2],
}

#[derive(Debug, Serialize, Deserialize)]
struct RawFloorplan {
    #[serde(default)]
    units: Option<String>,
    outer: Vec<[f64; 2]>,
    #[serde(default)]
    holes: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    openings: Vec<RawOpening>,
}

/// Parses and validates floorplan JSON.
pub fn parse_floorplan(input: &[u8]) -> Result<Floorplan> {
    let raw: RawFloorplan = serde_json::from_slice(input).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if let Some(units) = &raw.units {
        if units != "meters" {
            return Err(Error::Validation(format!(
                "unsupported units {units:?}; only \"meters\" is accepted"
            )));
        }
    }
    let to_ring = |r: &[[f64; 2]]| r.iter().map(|&p| Point2::from(p)).collect::<Vec<_>>();
    let openings = raw
        .openings
        .iter()
        .enumerate()
        .map(|(i, o)| {
            Segment::new(
                Point2::from(o.segment[0]),
                Point2::from(o.segment[1]),
                o.kind,
                i,
            )
        })
        .collect();
    Floorplan::new(
        to_ring(&raw.outer),
        raw.holes.iter().map(|h| to_ring(h)).collect(),
        openings,
    )
}

/// Drops repeated vertices and merges collinear runs.
fn clean_ring(ring: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = Vec::with_capacity(ring.len());
    for &p in ring {
        if pts.last().is_none_or(|q| q.dist(p) > EPS) {
            pts.push(p);
        }
    }
    while pts.len() > 1 && pts[0].dist(pts[pts.len() - 1]) <= EPS {
        pts.pop();
    }
    loop {
        let n = pts.len();
        if n < 3 {
            return pts;
        }
        let mut removed = false;
        for i in 0..n {
            let a = pts[(i + n - 1) % n];
            let b = pts[i];
            let c = pts[(i + 1) % n];
            let ac = c - a;
            let len = ac.norm();
            // b sits on the straight line a->c, between a and c
            if len > 0.0
                && ((b - a).cross(ac) / len).abs() <= EPS
                && (b - a).dot(ac) > 0.0
                && (c - b).dot(ac) > 0.0
            {
                pts.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return pts;
        }
    }
}

impl Floorplan {
    /// Validates and normalizes a floorplan.
    pub fn new(outer: Vec<Point2>, holes: Vec<Vec<Point2>>, openings: Vec<Segment>) -> Result<Self> {
        let check_finite = |ring: &[Point2], name: &str| {
            if ring.iter().all(|p| p.is_finite()) {
                Ok(())
            } else {
                Err(Error::Validation(format!("{name} has non-finite coordinates")))
            }
        };
        check_finite(&outer, "outer ring")?;
        let mut outer = clean_ring(&outer);
        if outer.len() < 3 {
            return Err(Error::Validation("outer ring needs at least 3 distinct vertices".into()));
        }
        if !geometry::ring_is_simple(&outer) {
            return Err(Error::Validation("outer ring is self-intersecting".into()));
        }
        if geometry::ring_signed_area2(&outer) < 0.0 {
            outer.reverse();
        }

        let mut cleaned = Vec::with_capacity(holes.len());
        for (i, h) in holes.iter().enumerate() {
            let name = format!("hole {i}");
            check_finite(h, &name)?;
            let mut h = clean_ring(h);
            if h.len() < 3 {
                return Err(Error::Validation(format!("{name} needs at least 3 distinct vertices")));
            }
            if !geometry::ring_is_simple(&h) {
                return Err(Error::Validation(format!("{name} is self-intersecting")));
            }
            if geometry::ring_signed_area2(&h) > 0.0 {
                h.reverse();
            }
            if !h.iter().all(|&p| geometry::point_in_ring(p, &outer)) {
                return Err(Error::Validation(format!("{name} is not inside the outer ring")));
            }
            cleaned.push(h);
        }

        // Holes touching the outer ring or each other can cut the interior apart.
        for (i, h) in cleaned.iter().enumerate() {
            if rings_touch(h, &outer) {
                return Err(Error::DisconnectedInterior(format!(
                    "hole {i} touches the outer ring"
                )));
            }
            for (j, g) in cleaned.iter().enumerate().skip(i + 1) {
                if rings_touch(h, g)
                    || geometry::point_in_ring(h[0], g)
                    || geometry::point_in_ring(g[0], h)
                {
                    return Err(Error::DisconnectedInterior(format!(
                        "holes {i} and {j} overlap or touch"
                    )));
                }
            }
        }

        let fp = Floorplan {
            outer,
            holes: cleaned,
            openings: Vec::new(),
        };
        let mut checked = Vec::with_capacity(openings.len());
        for (i, o) in openings.into_iter().enumerate() {
            if o.kind == SegmentKind::Wall {
                return Err(Error::Validation(format!("opening {i} has kind wall")));
            }
            if !o.a.is_finite() || !o.b.is_finite() || o.length() <= EPS {
                return Err(Error::Validation(format!("opening {i} is degenerate")));
            }
            if fp.host_edge(&o).is_none() {
                return Err(Error::Validation(format!(
                    "opening {i} does not lie on a boundary edge"
                )));
            }
            checked.push(Segment { id: i, ..o });
        }
        Ok(Floorplan {
            openings: checked,
            ..fp
        })
    }

    pub fn outer(&self) -> &[Point2] {
        &self.outer
    }

    pub fn holes(&self) -> &[Vec<Point2>] {
        &self.holes
    }

    pub fn openings(&self) -> &[Segment] {
        &self.openings
    }

    /// Outer ring followed by every hole.
    pub fn rings(&self) -> impl Iterator<Item = &[Point2]> {
        std::iter::once(self.outer.as_slice()).chain(self.holes.iter().map(|h| h.as_slice()))
    }

    /// Even-odd interior test on outer minus holes.
    pub fn contains(&self, p: Point2) -> bool {
        geometry::point_in_ring(p, &self.outer)
            && !self.holes.iter().any(|h| geometry::point_in_ring(p, h))
    }

    /// (min, max) corners of the bounding box.
    pub fn bounds(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.outer {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Ring edges in traversal order, before removing doors.
    pub fn ring_segments(&self) -> Vec<(Point2, Point2)> {
        self.rings().flat_map(geometry::ring_edges).collect()
    }

    /// Index of the ring edge an opening lies on.
    fn host_edge(&self, o: &Segment) -> Option<usize> {
        let tol = 1e-6;
        self.ring_segments().iter().position(|&(a, b)| {
            geometry::point_segment_distance(o.a, a, b) <= tol
                && geometry::point_segment_distance(o.b, a, b) <= tol
        })
    }

    /// Walls: ring edges with door spans cut out, in traversal order.
    pub fn walls(&self) -> Vec<Segment> {
        let doors: Vec<&Segment> = self
            .openings
            .iter()
            .filter(|o| o.kind == SegmentKind::DoorFrame)
            .collect();
        let mut out = Vec::new();
        for (a, b) in self.ring_segments() {
            let ab = b - a;
            let len2 = ab.norm2();
            let mut cuts: Vec<(f64, f64)> = doors
                .iter()
                .filter(|d| {
                    geometry::point_segment_distance(d.a, a, b) <= 1e-6
                        && geometry::point_segment_distance(d.b, a, b) <= 1e-6
                })
                .map(|d| {
                    let ta = (d.a - a).dot(ab) / len2;
                    let tb = (d.b - a).dot(ab) / len2;
                    (ta.min(tb).clamp(0.0, 1.0), ta.max(tb).clamp(0.0, 1.0))
                })
                .collect();
            cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut start = 0.0;
            let mut pieces = Vec::new();
            for (c0, c1) in cuts {
                if c0 > start {
                    pieces.push((start, c0));
                }
                start = start.max(c1);
            }
            if start < 1.0 {
                pieces.push((start, 1.0));
            }
            for (t0, t1) in pieces {
                let (p, q) = (a.lerp(b, t0), a.lerp(b, t1));
                if p.dist(q) > EPS {
                    out.push(Segment::new(p, q, SegmentKind::Wall, out.len()));
                }
            }
        }
        out
    }

    pub fn windows(&self) -> impl Iterator<Item = &Segment> {
        self.openings.iter().filter(|o| o.kind == SegmentKind::Window)
    }

    /// Segments that block sightlines: walls, plus windows when opaque.
    pub fn occluders(&self, windows_opaque: bool) -> Vec<Segment> {
        let mut occ = self.walls();
        if windows_opaque {
            for w in self.windows() {
                let id = occ.len();
                occ.push(Segment { id, ..*w });
            }
        }
        occ
    }

    /// Serializes to the floorplan JSON interchange format.
    pub fn to_json(&self) -> String {
        let pt = |p: &Point2| [p.x, p.y];
        let raw = RawFloorplan {
            units: Some("meters".into()),
            outer: self.outer.iter().map(pt).collect(),
            holes: self.holes.iter().map(|h| h.iter().map(pt).collect()).collect(),
            openings: self
                .openings
                .iter()
                .map(|o| RawOpening {
                    kind: o.kind,
                    segment: [pt(&o.a), pt(&o.b)],
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("floorplan serializes")
    }
}

fn rings_touch(a: &[Point2], b: &[Point2]) -> bool {
    geometry::ring_edges(a).any(|(p, q)| {
        geometry::ring_edges(b).any(|(c, d)| geometry::segments_touch(p, q, c, d))
    })
}

/// Where a fragment came from: its source edge and parameter range on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FragmentOrigin {
    pub edge: usize,
    pub t0: f64,
    pub t1: f64,
}

/// The discretized boundary `L`.
#[derive(Debug, Clone)]
pub struct BoundarySet {
    pub segments: Vec<Segment>,
    pub partition_length: f64,
    /// Source edges (walls, then windows when included); `segments` partition them.
    pub edges: Vec<Segment>,
    pub origins: Vec<FragmentOrigin>,
    pub edge_fragments: Vec<Range<usize>>,
    /// Hash of the fragment geometry; records built against different sets never mix.
    pub fingerprint: u64,
}

impl BoundarySet {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }
}

/// Splits every wall into `ceil(len / partition_length)` equal fragments.
pub fn partition_boundary(
    fp: &Floorplan,
    partition_length: f64,
    include_openings: bool,
) -> Result<BoundarySet> {
    if !(partition_length > 0.0 && partition_length.is_finite()) {
        return Err(Error::Parameter(format!(
            "partition length must be positive, got {partition_length}"
        )));
    }
    let mut edges = fp.walls();
    if include_openings {
        for w in fp.windows() {
            let id = edges.len();
            edges.push(Segment { id, ..*w });
        }
    }
    let mut segments = Vec::new();
    let mut origins = Vec::new();
    let mut edge_fragments = Vec::with_capacity(edges.len());
    for (e, edge) in edges.iter().enumerate() {
        let len = edge.length();
        // Guard against 10.0 / 0.1 landing a hair above 100.
        let k = ((len / partition_length) - 1e-9).ceil().max(1.0) as usize;
        let start = segments.len();
        for i in 0..k {
            let t0 = i as f64 / k as f64;
            let t1 = (i + 1) as f64 / k as f64;
            let id = segments.len();
            segments.push(Segment::new(edge.point_at(t0), edge.point_at(t1), edge.kind, id));
            origins.push(FragmentOrigin { edge: e, t0, t1 });
        }
        edge_fragments.push(start..segments.len());
    }
    let mut h = DefaultHasher::new();
    for s in &segments {
        for v in [s.a.x, s.a.y, s.b.x, s.b.y] {
            v.to_bits().hash(&mut h);
        }
    }
    Ok(BoundarySet {
        segments,
        partition_length,
        edges,
        origins,
        edge_fragments,
        fingerprint: h.finish(),
    })
}
