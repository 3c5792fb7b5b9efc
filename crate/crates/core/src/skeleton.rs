//! Medial-axis skeleton of the free space and its decomposition into
//! converging points and converging lines.
//!
//! Extraction runs in three steps on the distance field:
//!
//! 1. Anchor cells are marked where the nearest boundary point jumps between
//!    4-adjacent cells, i.e. where the grid crosses the medial axis.
//! 2. Homotopic thinning peels simple pixels in order of increasing distance,
//!    keeping anchors, then a directional pass thins the result to one pixel.
//! 3. Spurs shorter than `max(3, r_min / resolution)` cells are pruned.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::vfield::{DistanceField, GridSpec};

/// Pixels in the cyclic order E, NE, N, NW, W, SW, S, SE; bit k holds neighbor k.
const RING: [(isize, isize); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Minimum angle between the feature vectors of an anchor pair.
const ANCHOR_ANGLE_COS: f64 = 0.5;

/// 8-connectivity number of the pixel with neighborhood `nb`.
pub fn connectivity_number(nb: u8) -> u32 {
    let x = |k: usize| 1 - ((nb >> (k % 8)) & 1) as u32;
    [0, 2, 4, 6]
        .iter()
        .map(|&k| x(k) - x(k) * x(k + 1) * x(k + 2))
        .sum()
}

const fn build_simple_table() -> [bool; 256] {
    let mut t = [false; 256];
    let mut nb = 0;
    while nb < 256 {
        let mut sum = 0;
        let mut k = 0;
        while k < 8 {
            let xk = 1 - ((nb >> k) & 1);
            let x1 = 1 - ((nb >> ((k + 1) % 8)) & 1);
            let x2 = 1 - ((nb >> ((k + 2) % 8)) & 1);
            sum += xk - xk * x1 * x2;
            k += 2;
        }
        t[nb] = sum == 1;
        nb += 1;
    }
    t
}

static SIMPLE: [bool; 256] = build_simple_table();

/// True if deleting the pixel keeps the 8-connected topology of its neighborhood.
pub fn is_simple(nb: u8) -> bool {
    SIMPLE[nb as usize]
}

/// One-pixel-wide skeleton on the field's grid.
#[derive(Debug, Clone)]
pub struct SkeletonGrid {
    pub spec: GridSpec,
    pub mask: Vec<bool>,
}

struct Grid<'a> {
    spec: &'a GridSpec,
    offsets: [isize; 8],
}

impl<'a> Grid<'a> {
    fn new(spec: &'a GridSpec) -> Self {
        let w = spec.width as isize;
        let mut offsets = [0; 8];
        for (k, (di, dj)) in RING.iter().enumerate() {
            offsets[k] = dj * w + di;
        }
        Grid { spec, offsets }
    }

    fn on_border(&self, idx: usize) -> bool {
        let (i, j) = self.spec.coords(idx);
        i == 0 || j == 0 || i + 1 == self.spec.width || j + 1 == self.spec.height
    }

    /// Neighborhood byte; callers never pass border cells.
    fn nbhd(&self, mask: &[bool], idx: usize) -> u8 {
        let mut b = 0u8;
        for (k, off) in self.offsets.iter().enumerate() {
            if mask[(idx as isize + off) as usize] {
                b |= 1 << k;
            }
        }
        b
    }

    fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        self.offsets.iter().map(move |off| (idx as isize + off) as usize)
    }
}

impl SkeletonGrid {
    pub fn cells(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Set 8-neighbors of a cell.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        self.spec.neighbors8(idx).filter(|&n| self.mask[n]).collect()
    }

    pub fn degree(&self, idx: usize) -> usize {
        self.spec.neighbors8(idx).filter(|&n| self.mask[n]).count()
    }

    /// Number of 8-connected components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.mask.len()];
        let mut count = 0;
        for start in self.cells() {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(c) = stack.pop() {
                for n in self.neighbors(c) {
                    if !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        count
    }

    /// True if some 2×2 block is entirely set.
    pub fn has_thick_block(&self) -> bool {
        let s = &self.spec;
        (0..s.height.saturating_sub(1)).any(|j| {
            (0..s.width - 1).any(|i| {
                self.mask[s.index(i, j)]
                    && self.mask[s.index(i + 1, j)]
                    && self.mask[s.index(i, j + 1)]
                    && self.mask[s.index(i + 1, j + 1)]
            })
        })
    }

    /// Builds a skeleton from an explicit cell list (used for hand-made shapes).
    pub fn from_cells(spec: GridSpec, cells: &[usize]) -> Self {
        let mut mask = vec![false; spec.len()];
        for &c in cells {
            mask[c] = true;
        }
        SkeletonGrid { spec, mask }
    }
}

fn dist_key(d: f64, idx: usize) -> Reverse<(u64, usize)> {
    // Non-negative floats order like their bit patterns.
    Reverse((d.max(0.0).to_bits(), idx))
}

/// Cells a spur must reach to survive pruning.
pub fn spur_threshold(spec: &GridSpec, r_min: f64) -> usize {
    ((r_min / spec.resolution).ceil() as usize).max(3)
}

/// Extracts the skeleton; `r_min` sets the spur pruning length.
pub fn extract_skeleton(df: &DistanceField, r_min: f64) -> Result<SkeletonGrid> {
    let spec = &df.spec;
    let grid = Grid::new(spec);
    let res = spec.resolution;
    let clearance = res * std::f64::consts::FRAC_1_SQRT_2;
    let mut mask: Vec<bool> = (0..spec.len())
        .map(|i| df.interior[i] && df.dist[i] > clearance && !grid.on_border(i))
        .collect();
    if !mask.iter().any(|&m| m) {
        return Err(Error::Degenerate(format!(
            "no free-space cell is more than {clearance:.4} m from the boundary at resolution {res} m; use a finer resolution"
        )));
    }

    let anchor = mark_anchors(df, &mask);
    thin_homotopic(&grid, df, &mut mask, &anchor);
    thin_directional(&grid, df, &mut mask);
    let sk = SkeletonGrid { spec: *spec, mask };
    let mut mask = prune_spurs(&sk, spur_threshold(spec, r_min));
    thin_directional(&grid, df, &mut mask);
    Ok(SkeletonGrid { spec: *spec, mask })
}

/// Cells where the nearest boundary point jumps to a far, differently oriented feature.
fn mark_anchors(df: &DistanceField, open: &[bool]) -> Vec<bool> {
    let spec = &df.spec;
    let jump = std::f64::consts::SQRT_2 * spec.resolution;
    let mut anchor = vec![false; spec.len()];
    for j in 0..spec.height {
        for i in 0..spec.width {
            let a = spec.index(i, j);
            if !open[a] {
                continue;
            }
            for b in [
                (i + 1 < spec.width).then(|| spec.index(i + 1, j)),
                (j + 1 < spec.height).then(|| spec.index(i, j + 1)),
            ]
            .into_iter()
            .flatten()
            {
                if !open[b] {
                    continue;
                }
                let (na, nb) = (df.nearest[a], df.nearest[b]);
                if na.dist(nb) <= jump {
                    continue;
                }
                let fa = na - spec.center(a);
                let fb = nb - spec.center(b);
                let denom = fa.norm() * fb.norm();
                if denom == 0.0 || fa.dot(fb) / denom > ANCHOR_ANGLE_COS {
                    continue;
                }
                let (da, db) = (df.dist[a], df.dist[b]);
                if da >= db {
                    anchor[a] = true;
                }
                if db >= da {
                    anchor[b] = true;
                }
            }
        }
    }
    anchor
}

fn thin_homotopic(grid: &Grid, df: &DistanceField, mask: &mut [bool], anchor: &[bool]) {
    let mut queued = vec![false; mask.len()];
    let mut heap = BinaryHeap::new();
    for idx in 0..mask.len() {
        if mask[idx] && !anchor[idx] && grid.neighbors(idx).any(|n| !mask[n]) {
            queued[idx] = true;
            heap.push(dist_key(df.dist[idx], idx));
        }
    }
    while let Some(Reverse((_, idx))) = heap.pop() {
        queued[idx] = false;
        if !mask[idx] || !is_simple(grid.nbhd(mask, idx)) {
            continue;
        }
        mask[idx] = false;
        for n in grid.neighbors(idx) {
            if mask[n] && !anchor[n] && !queued[n] {
                queued[n] = true;
                heap.push(dist_key(df.dist[n], n));
            }
        }
    }
}

/// Removes simple non-end pixels one border direction at a time until stable.
fn thin_directional(grid: &Grid, df: &DistanceField, mask: &mut [bool]) {
    // Bits of the S, N, E, W neighbors.
    const SIDES: [u8; 4] = [1 << 6, 1 << 2, 1 << 0, 1 << 4];
    let mut cells: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    cells.sort_by(|&a, &b| df.dist[a].total_cmp(&df.dist[b]).then(a.cmp(&b)));
    loop {
        let mut changed = false;
        for side in SIDES {
            let candidates: Vec<usize> = cells
                .iter()
                .copied()
                .filter(|&c| {
                    let nb = grid.nbhd(mask, c);
                    mask[c] && nb & side == 0 && nb.count_ones() >= 2 && is_simple(nb)
                })
                .collect();
            for c in candidates {
                let nb = grid.nbhd(mask, c);
                if nb.count_ones() >= 2 && is_simple(nb) {
                    mask[c] = false;
                    changed = true;
                }
            }
            cells.retain(|&c| mask[c]);
        }
        if !changed {
            break;
        }
    }
}

/// Deletes branches of fewer than `min_len` cells that end at a junction.
fn prune_spurs(sk: &SkeletonGrid, min_len: usize) -> Vec<bool> {
    let mut mask = sk.mask.clone();
    for tip in sk.cells() {
        if sk.degree(tip) != 1 {
            continue;
        }
        let mut branch = Vec::new();
        let mut prev = usize::MAX;
        let mut cur = tip;
        let reached_junction = loop {
            if sk.degree(cur) >= 3 {
                break true;
            }
            branch.push(cur);
            if branch.len() >= min_len {
                break false;
            }
            match sk.neighbors(cur).into_iter().find(|&n| n != prev) {
                Some(next) => {
                    prev = cur;
                    cur = next;
                }
                None => break false,
            }
        };
        if reached_junction {
            for c in branch {
                mask[c] = false;
            }
        }
    }
    mask
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointKind {
    Joint,
    InsertedMidpoint,
    Endpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergingPoint {
    pub id: usize,
    pub kind: PointKind,
    pub cell: usize,
    pub position: Point2,
}

/// Clusters of pixels with at least three skeleton neighbors, ordered by lowest cell.
pub fn joint_clusters(sk: &SkeletonGrid) -> Vec<Vec<usize>> {
    let mut in_cluster = vec![false; sk.mask.len()];
    let mut clusters = Vec::new();
    for start in sk.cells() {
        if in_cluster[start] || sk.degree(start) < 3 {
            continue;
        }
        in_cluster[start] = true;
        let mut members = vec![start];
        let mut k = 0;
        while k < members.len() {
            for n in sk.neighbors(members[k]) {
                if !in_cluster[n] && sk.degree(n) >= 3 {
                    in_cluster[n] = true;
                    members.push(n);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        clusters.push(members);
    }
    clusters
}

/// Joints (one per cluster, at the member nearest the centroid) and leaf tips.
pub fn detect_joints(sk: &SkeletonGrid) -> Vec<ConvergingPoint> {
    let spec = &sk.spec;
    let mut out: Vec<(usize, PointKind)> = Vec::new();
    for members in joint_clusters(sk) {
        let n = members.len() as f64;
        let c = members
            .iter()
            .fold(Point2::default(), |acc, &m| acc + spec.center(m))
            * (1.0 / n);
        let snapped = members
            .iter()
            .copied()
            .min_by(|&a, &b| {
                spec.center(a)
                    .dist(c)
                    .total_cmp(&spec.center(b).dist(c))
                    .then(a.cmp(&b))
            })
            .expect("clusters are non-empty");
        out.push((snapped, PointKind::Joint));
    }
    for c in sk.cells() {
        if sk.degree(c) <= 1 {
            out.push((c, PointKind::Endpoint));
        }
    }
    out.sort_by_key(|&(c, _)| c);
    out.into_iter()
        .enumerate()
        .map(|(id, (cell, kind))| ConvergingPoint {
            id,
            kind,
            cell,
            position: spec.center(cell),
        })
        .collect()
}

/// A skeleton ridge between two converging points.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergingLine {
    pub start: usize,
    pub end: usize,
    /// Ridge cells in order; excludes joint cluster cells, includes tip cells.
    pub path: Vec<usize>,
    pub length: f64,
}

impl ConvergingLine {
    pub fn is_closed(&self) -> bool {
        self.start == self.end && self.path.len() > 1
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Input points plus one synthetic endpoint per joint-free loop.
    pub points: Vec<ConvergingPoint>,
    pub lines: Vec<ConvergingLine>,
    /// Cluster cells per joint id.
    pub clusters: Vec<(usize, Vec<usize>)>,
}

impl Decomposition {
    /// Cells from the start point to the end point, inclusive.
    pub fn chain(&self, line: &ConvergingLine) -> Vec<usize> {
        chain_cells(&self.points, line)
    }
}

fn polyline_length(spec: &GridSpec, cells: &[usize]) -> f64 {
    cells
        .windows(2)
        .map(|w| spec.center(w[0]).dist(spec.center(w[1])))
        .sum()
}

/// Splits the skeleton into ridges between converging points.
pub fn build_converging_lines(sk: &SkeletonGrid, points: &[ConvergingPoint]) -> Decomposition {
    let spec = &sk.spec;
    let mut points = points.to_vec();
    let clusters = joint_clusters(sk);
    let mut cluster_of = vec![usize::MAX; sk.mask.len()];
    let mut cluster_joint = Vec::with_capacity(clusters.len());
    for (k, members) in clusters.iter().enumerate() {
        for &m in members {
            cluster_of[m] = k;
        }
        let joint = points
            .iter()
            .find(|p| p.kind == PointKind::Joint && members.binary_search(&p.cell).is_ok())
            .map(|p| p.id)
            .expect("every cluster has a joint");
        cluster_joint.push(joint);
    }
    let point_at = |points: &[ConvergingPoint], cell: usize| points.iter().find(|p| p.cell == cell).map(|p| p.id);
    let ridge_nbrs = |c: usize| -> Vec<usize> {
        sk.neighbors(c)
            .into_iter()
            .filter(|&n| cluster_of[n] == usize::MAX)
            .collect()
    };
    let cluster_nbrs = |c: usize| -> Vec<usize> {
        let mut ks: Vec<usize> = sk
            .neighbors(c)
            .into_iter()
            .filter(|&n| cluster_of[n] != usize::MAX)
            .map(|n| cluster_of[n])
            .collect();
        ks.dedup();
        ks
    };

    let mut visited = vec![false; sk.mask.len()];
    let mut lines = Vec::new();
    for seed in sk.cells() {
        if visited[seed] || cluster_of[seed] != usize::MAX {
            continue;
        }
        // Collect the ridge component and look for an end.
        let mut comp = vec![seed];
        visited[seed] = true;
        let mut k = 0;
        while k < comp.len() {
            for n in ridge_nbrs(comp[k]) {
                if !visited[n] {
                    visited[n] = true;
                    comp.push(n);
                }
            }
            k += 1;
        }
        let start = comp.iter().copied().filter(|&c| ridge_nbrs(c).len() < 2).min();
        let (first, closed) = match start {
            Some(s) => (s, false),
            None => (*comp.iter().min().expect("component is non-empty"), true),
        };
        // Walk the ridge.
        let mut path = vec![first];
        let mut prev = usize::MAX;
        let mut cur = first;
        loop {
            let mut nexts: Vec<usize> = ridge_nbrs(cur).into_iter().filter(|&n| n != prev).collect();
            nexts.sort_unstable();
            match nexts.first() {
                Some(&n) if n != first => {
                    path.push(n);
                    prev = cur;
                    cur = n;
                }
                _ => break,
            }
        }
        let (start_id, end_id) = if closed {
            let id = points.len();
            points.push(ConvergingPoint {
                id,
                kind: PointKind::Endpoint,
                cell: first,
                position: spec.center(first),
            });
            (id, id)
        } else {
            let last = *path.last().expect("path is non-empty");
            let mut ends_first = cluster_nbrs(first);
            let ends_last = if last == first {
                ends_first.split_off(ends_first.len().min(1))
            } else {
                cluster_nbrs(last)
            };
            let tip = |points: &[ConvergingPoint], c: usize| point_at(points, c).expect("tips are converging points");
            let s = match ends_first.first() {
                Some(&k) => cluster_joint[k],
                None => tip(&points, first),
            };
            let e = match ends_last.first() {
                Some(&k) => cluster_joint[k],
                None => tip(&points, last),
            };
            (s, e)
        };
        let mut line = ConvergingLine {
            start: start_id,
            end: end_id,
            path,
            length: 0.0,
        };
        let chain = chain_cells(&points, &line);
        line.length = polyline_length(spec, &chain);
        lines.push(line);
    }
    let clusters = clusters
        .into_iter()
        .enumerate()
        .map(|(k, members)| (cluster_joint[k], members))
        .collect();
    Decomposition {
        points,
        lines,
        clusters,
    }
}

fn chain_cells(points: &[ConvergingPoint], line: &ConvergingLine) -> Vec<usize> {
    let mut cells = Vec::with_capacity(line.path.len() + 2);
    let start = points[line.start].cell;
    let end = points[line.end].cell;
    if line.path.first() != Some(&start) {
        cells.push(start);
    }
    cells.extend_from_slice(&line.path);
    if line.is_closed() || cells.last() != Some(&end) {
        cells.push(end);
    }
    cells
}

/// Candidate set after midpoint insertion.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub points: Vec<ConvergingPoint>,
    /// Pairs still below the threshold on ridges too short to split.
    pub flagged: Vec<(usize, usize)>,
}

/// Inserts arc-length midpoints on ridges whose end points overlap less than `tau`.
///
/// Joint-free loops are split once at their midpoint whenever `tau > 0`, so the
/// loop is judged on two distinct end points rather than one point against itself.
pub fn refine_candidates<F>(decomp: &Decomposition, spec: &GridSpec, mut overlap_fn: F, tau: f64) -> Refinement
where
    F: FnMut(&ConvergingPoint, &ConvergingPoint) -> f64,
{
    let mut points = decomp.points.clone();
    let mut flagged = Vec::new();
    for line in &decomp.lines {
        let chain = chain_cells(&decomp.points, line);
        let mut arc = vec![0.0; chain.len()];
        for k in 1..chain.len() {
            arc[k] = arc[k - 1] + spec.center(chain[k - 1]).dist(spec.center(chain[k]));
        }
        let last = chain.len() - 1;
        let mut stack = vec![(0usize, last, line.start, line.end, line.is_closed() && tau > 0.0)];
        while let Some((lo, hi, a, b, force)) = stack.pop() {
            if a != b && !force && overlap_fn(&points[a], &points[b]) >= tau {
                continue;
            }
            if a == b && !force {
                continue;
            }
            if hi - lo < 2 {
                flagged.push((a.min(b), a.max(b)));
                continue;
            }
            let target = 0.5 * (arc[lo] + arc[hi]);
            let mid = (lo + 1..hi)
                .min_by(|&x, &y| (arc[x] - target).abs().total_cmp(&(arc[y] - target).abs()))
                .expect("interior cell exists");
            let id = points.len();
            points.push(ConvergingPoint {
                id,
                kind: PointKind::InsertedMidpoint,
                cell: chain[mid],
                position: spec.center(chain[mid]),
            });
            // Right half pushed first so the left half is refined first.
            stack.push((mid, hi, id, b, false));
            stack.push((lo, mid, a, id, false));
        }
    }
    Refinement { points, flagged }
}

/// Drops points closer than `r_min` to the boundary and renumbers the rest.
pub fn filter_by_clearance(points: &[ConvergingPoint], df: &DistanceField, r_min: f64) -> Vec<ConvergingPoint> {
    points
        .iter()
        .filter(|p| df.dist[p.cell] >= r_min)
        .enumerate()
        .map(|(id, p)| ConvergingPoint { id, ..*p })
        .collect()
}
