//! Visibility Field and distance field over a regular grid.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rstar::primitives::Line;
use rstar::{PointDistance, RTree};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floorplan::{BoundarySet, Floorplan};
use crate::geometry::{self, Point2};
use crate::visibility::{angular_interval, angular_union, VisibilityEngine};

/// Sentinel stored in [`VisibilityField::theta`] for cells outside the interior.
pub const EXTERIOR: f64 = -1.0;

/// Regular grid; cell `(i, j)` has its center at `origin + ((i + ½)·res, (j + ½)·res)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: f64,
    /// Lower-left corner of cell (0, 0).
    pub origin: Point2,
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    /// Grid over the floorplan's bounding box with one cell of margin on every side.
    pub fn covering(fp: &Floorplan, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::Parameter(format!(
                "grid resolution must be positive, got {resolution}"
            )));
        }
        let (lo, hi) = fp.bounds();
        let width = ((hi.x - lo.x) / resolution).ceil() as usize + 2;
        let height = ((hi.y - lo.y) / resolution).ceil() as usize + 2;
        Ok(GridSpec {
            resolution,
            origin: Point2::new(lo.x - resolution, lo.y - resolution),
            width,
            height,
        })
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.width, idx / self.width)
    }

    pub fn center(&self, idx: usize) -> Point2 {
        let (i, j) = self.coords(idx);
        Point2::new(
            self.origin.x + (i as f64 + 0.5) * self.resolution,
            self.origin.y + (j as f64 + 0.5) * self.resolution,
        )
    }

    /// Cell containing `p`, if inside the grid.
    pub fn cell_of(&self, p: Point2) -> Option<usize> {
        let fi = ((p.x - self.origin.x) / self.resolution).floor();
        let fj = ((p.y - self.origin.y) / self.resolution).floor();
        if fi < 0.0 || fj < 0.0 || fi >= self.width as f64 || fj >= self.height as f64 {
            return None;
        }
        Some(self.index(fi as usize, fj as usize))
    }

    /// The 8 neighbors of a cell that exist in the grid.
    pub fn neighbors8(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.coords(idx);
        let (i, j) = (i as isize, j as isize);
        const D: [(isize, isize); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
        D.iter().filter_map(move |&(di, dj)| {
            let (ni, nj) = (i + di, j + dj);
            (ni >= 0 && nj >= 0 && (ni as usize) < self.width && (nj as usize) < self.height)
                .then(|| self.index(ni as usize, nj as usize))
        })
    }
}

/// Interior mask by even-odd scanline fill over all rings.
pub fn interior_mask(fp: &Floorplan, spec: &GridSpec) -> Vec<bool> {
    let edges = fp.ring_segments();
    let mut mask = vec![false; spec.len()];
    let mut xs = Vec::new();
    for j in 0..spec.height {
        let y = spec.origin.y + (j as f64 + 0.5) * spec.resolution;
        xs.clear();
        for &(a, b) in &edges {
            if (a.y > y) != (b.y > y) {
                xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let i0 = ((pair[0] - spec.origin.x) / spec.resolution - 0.5).ceil().max(0.0) as usize;
            let i1f = ((pair[1] - spec.origin.x) / spec.resolution - 0.5).floor();
            if i1f < 0.0 {
                continue;
            }
            let i1 = (i1f as usize).min(spec.width - 1);
            for i in i0..=i1 {
                let x = spec.origin.x + (i as f64 + 0.5) * spec.resolution;
                // Strict interior: centers exactly on an edge stay outside.
                if x > pair[0] && x < pair[1] {
                    mask[spec.index(i, j)] = true;
                }
            }
        }
    }
    mask
}

/// Valid observed angle per cell.
#[derive(Debug, Clone)]
pub struct VisibilityField {
    pub spec: GridSpec,
    /// Radians in `[0, 2π]`; [`EXTERIOR`] outside.
    pub theta: Vec<f64>,
}

impl VisibilityField {
    pub fn at(&self, idx: usize) -> Option<f64> {
        let v = self.theta[idx];
        (v != EXTERIOR).then_some(v)
    }
}

/// Union of the visible angular intervals of every boundary segment at `p`.
pub fn theta_at(engine: &VisibilityEngine, boundary: &BoundarySet, p: Point2) -> f64 {
    let mut intervals = Vec::new();
    for e in &boundary.edges {
        for (t0, t1) in engine.visible_intervals(p, e.a, e.b) {
            intervals.push(angular_interval(p, e.point_at(t0), e.point_at(t1)));
        }
    }
    angular_union(&intervals)
}

/// Computes the VF on every interior cell center.
pub fn compute_vf(engine: &VisibilityEngine, boundary: &BoundarySet, spec: &GridSpec) -> VisibilityField {
    let mask = interior_mask(engine.floorplan(), spec);
    let theta = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            if mask[idx] {
                theta_at(engine, boundary, spec.center(idx))
            } else {
                EXTERIOR
            }
        })
        .collect();
    VisibilityField { spec: *spec, theta }
}

/// Euclidean distance to the nearest boundary edge, with the nearest point.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub spec: GridSpec,
    /// Meters; 0 on exterior cells.
    pub dist: Vec<f64>,
    pub interior: Vec<bool>,
    /// Closest boundary point of every interior cell (the feature transform).
    pub nearest: Vec<Point2>,
}

impl DistanceField {
    pub fn at(&self, idx: usize) -> Option<f64> {
        self.interior[idx].then(|| self.dist[idx])
    }
}

/// Spatial index over boundary edges for nearest-edge queries.
pub struct EdgeIndex {
    tree: RTree<Line<[f64; 2]>>,
}

impl EdgeIndex {
    pub fn new(fp: &Floorplan) -> Self {
        let lines = fp
            .ring_segments()
            .into_iter()
            .map(|(a, b)| Line::new([a.x, a.y], [b.x, b.y]))
            .collect();
        EdgeIndex {
            tree: RTree::bulk_load(lines),
        }
    }

    /// Nearest boundary point to `p` and its distance.
    pub fn nearest(&self, p: Point2) -> (Point2, f64) {
        let q = [p.x, p.y];
        let line = self
            .tree
            .nearest_neighbor(&q)
            .expect("floorplan has edges");
        let (c, _) = geometry::closest_on_segment(
            p,
            Point2::new(line.from[0], line.from[1]),
            Point2::new(line.to[0], line.to[1]),
        );
        (c, line.distance_2(&q).sqrt())
    }
}

/// Exact distance from each interior cell center to the nearest boundary edge.
pub fn compute_distance_field(fp: &Floorplan, spec: &GridSpec) -> DistanceField {
    let interior = interior_mask(fp, spec);
    let index = EdgeIndex::new(fp);
    let pairs: Vec<(f64, Point2)> = (0..spec.len())
        .into_par_iter()
        .map(|idx| {
            if interior[idx] {
                let (c, d) = index.nearest(spec.center(idx));
                (d, c)
            } else {
                (0.0, spec.center(idx))
            }
        })
        .collect();
    let (dist, nearest) = pairs.into_iter().unzip();
    DistanceField {
        spec: *spec,
        dist,
        interior,
        nearest,
    }
}

/// A scalar grid that can be written as a graymap.
pub trait ScalarField {
    fn spec(&self) -> &GridSpec;
    fn value(&self, idx: usize) -> Option<f64>;
    /// Value mapped to the brightest pixel.
    fn scale_max(&self) -> f64;
    fn kind(&self) -> &'static str;
}

impl ScalarField for VisibilityField {
    fn spec(&self) -> &GridSpec {
        &self.spec
    }
    fn value(&self, idx: usize) -> Option<f64> {
        self.at(idx)
    }
    fn scale_max(&self) -> f64 {
        std::f64::consts::TAU
    }
    fn kind(&self) -> &'static str {
        "visibility"
    }
}

impl ScalarField for DistanceField {
    fn spec(&self) -> &GridSpec {
        &self.spec
    }
    fn value(&self, idx: usize) -> Option<f64> {
        self.at(idx)
    }
    fn scale_max(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }
    fn kind(&self) -> &'static str {
        "distance"
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldSidecar {
    pub field: String,
    pub resolution: f64,
    pub origin: [f64; 2],
    pub width: usize,
    pub height: usize,
    pub scale_max: f64,
    pub sentinel: String,
    pub sentinel_pixel: u16,
    pub exterior_cells: usize,
}

/// Files written by [`export_field`].
#[derive(Debug, Clone)]
pub struct ExportedField {
    pub pgm: PathBuf,
    pub sidecar: PathBuf,
    pub csv: Option<PathBuf>,
}

/// Writes `<stem>.pgm` (plain P2, top row = highest y), `<stem>.json`, and optionally `<stem>.csv`.
pub fn export_field(field: &dyn ScalarField, stem: &Path, with_csv: bool) -> Result<ExportedField> {
    let spec = field.spec();
    let scale = field.scale_max();
    let pgm = stem.with_extension("pgm");
    let mut out = String::with_capacity(spec.len() * 6 + 32);
    out.push_str(&format!("P2\n{} {}\n65535\n", spec.width, spec.height));
    let mut exterior = 0;
    for j in (0..spec.height).rev() {
        let row: Vec<String> = (0..spec.width)
            .map(|i| match field.value(spec.index(i, j)) {
                Some(v) if scale > 0.0 => {
                    (((v / scale).clamp(0.0, 1.0) * 65535.0).round() as u16).to_string()
                }
                Some(_) => "0".to_string(),
                None => {
                    exterior += 1;
                    "0".to_string()
                }
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    fs::write(&pgm, out)?;

    let sidecar = stem.with_extension("json");
    let meta = FieldSidecar {
        field: field.kind().to_string(),
        resolution: spec.resolution,
        origin: [spec.origin.x, spec.origin.y],
        width: spec.width,
        height: spec.height,
        scale_max: scale,
        sentinel: "exterior".into(),
        sentinel_pixel: 0,
        exterior_cells: exterior,
    };
    fs::write(&sidecar, serde_json::to_string_pretty(&meta).expect("sidecar serializes"))?;

    let csv = if with_csv {
        let path = stem.with_extension("csv");
        let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
        writeln!(w, "i,j,x,y,value")?;
        for idx in 0..spec.len() {
            let (i, j) = spec.coords(idx);
            let c = spec.center(idx);
            match field.value(idx) {
                Some(v) => writeln!(w, "{i},{j},{},{},{v}", c.x, c.y)?,
                None => writeln!(w, "{i},{j},{},{},exterior", c.x, c.y)?,
            }
        }
        w.flush()?;
        Some(path)
    } else {
        None
    };
    Ok(ExportedField { pgm, sidecar, csv })
}

/// Reads a CSV written by [`export_field`]; `None` marks exterior cells.
pub fn import_field_csv(path: &Path, spec: &GridSpec) -> Result<Vec<Option<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut values = vec![None; spec.len()];
    for (n, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let bad = || Error::Parse {
            line: n + 1,
            column: 1,
            message: format!("malformed field row {line:?}"),
        };
        if cols.len() != 5 {
            return Err(bad());
        }
        let i: usize = cols[0].parse().map_err(|_| bad())?;
        let j: usize = cols[1].parse().map_err(|_| bad())?;
        if i >= spec.width || j >= spec.height {
            return Err(bad());
        }
        values[spec.index(i, j)] = match cols[4] {
            "exterior" => None,
            v => Some(v.parse().map_err(|_| bad())?),
        };
    }
    Ok(values)
}
