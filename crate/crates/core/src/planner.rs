//! Greedy viewpoint selection with connectivity repair and pruning.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::floorplan::BoundarySet;
use crate::overlap::{self, OverlapMetric, VisRecord};

/// Which candidate fully sees which boundary fragment.
#[derive(Debug, Clone)]
pub struct CoverageTable {
    rows: Vec<FixedBitSet>,
    /// Number of fragments each candidate covers.
    pub counts: Vec<usize>,
    /// Fragments no candidate covers.
    pub uncoverable: Vec<usize>,
    segments: usize,
}

impl CoverageTable {
    /// Entry (i, j) is set when at least `fraction` of fragment j is visible from candidate i.
    pub fn from_records(records: &[VisRecord], boundary: &BoundarySet, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::Parameter(format!(
                "coverage fraction must lie in (0, 1], got {fraction}"
            )));
        }
        let n = boundary.len();
        let rows: Vec<FixedBitSet> = records
            .par_iter()
            .map(|r| {
                let mut row = FixedBitSet::with_capacity(n);
                for (f, visible) in r.fragment_fractions(boundary) {
                    if visible >= fraction - 1e-9 {
                        row.insert(f);
                    }
                }
                row
            })
            .collect();
        Ok(Self::from_bitsets(rows, n))
    }

    /// Table from explicit boolean rows.
    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let n = rows.first().map_or(0, Vec::len);
        let bits = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), n, "rows must have equal length");
                let mut b = FixedBitSet::with_capacity(n);
                for (j, &v) in r.iter().enumerate() {
                    b.set(j, v);
                }
                b
            })
            .collect();
        Self::from_bitsets(bits, n)
    }

    fn from_bitsets(rows: Vec<FixedBitSet>, segments: usize) -> Self {
        let counts = rows.iter().map(|r| r.count_ones(..)).collect();
        let mut any = FixedBitSet::with_capacity(segments);
        for r in &rows {
            any.union_with(r);
        }
        let uncoverable = (0..segments).filter(|&j| !any.contains(j)).collect();
        CoverageTable {
            rows,
            counts,
            uncoverable,
            segments,
        }
    }

    pub fn candidates(&self) -> usize {
        self.rows.len()
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    pub fn row(&self, i: usize) -> &FixedBitSet {
        &self.rows[i]
    }

    /// Fails with the list of fragments nobody can cover.
    pub fn ensure_feasible(&self) -> Result<()> {
        if self.uncoverable.is_empty() {
            Ok(())
        } else {
            Err(Error::Infeasible {
                reason: format!(
                    "{} boundary segment(s) are not fully visible from any candidate viewpoint",
                    self.uncoverable.len()
                ),
                segments: self.uncoverable.clone(),
            })
        }
    }

    /// Fragments covered by at least one of `selected`.
    pub fn covered_by(&self, selected: &[usize]) -> FixedBitSet {
        let mut covered = FixedBitSet::with_capacity(self.segments);
        for &i in selected {
            covered.union_with(&self.rows[i]);
        }
        covered
    }

    pub fn covers_all(&self, selected: &[usize]) -> bool {
        self.covered_by(selected).count_ones(..) == self.segments
    }
}

/// Overlap graph over candidates: edges where overlap reaches `tau`.
#[derive(Debug, Clone)]
pub struct CandidateGraph {
    /// Sorted neighbor lists with overlap values.
    adj: Vec<Vec<(usize, f64)>>,
    pub tau: f64,
}

impl CandidateGraph {
    /// Keeps pairs with `overlap >= tau` and some shared boundary.
    pub fn from_overlaps(n: usize, pairs: impl IntoIterator<Item = (usize, usize, f64)>, tau: f64) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (a, b, o) in pairs {
            if a != b && o >= tau && o > 0.0 {
                adj[a].push((b, o));
                adj[b].push((a, o));
            }
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
            list.dedup_by_key(|&mut (v, _)| v);
        }
        CandidateGraph { adj, tau }
    }

    /// All-pairs overlap under `metric`, computed in parallel.
    pub fn build(records: &[VisRecord], boundary: &BoundarySet, metric: OverlapMetric, tau: f64) -> Result<Self> {
        let rows: Result<Vec<Vec<(usize, usize, f64)>>> = (0..records.len())
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::new();
                for j in i + 1..records.len() {
                    let o = overlap::overlap(boundary, &records[i], &records[j], metric)?;
                    if o >= tau && o > 0.0 {
                        row.push((i, j, o));
                    }
                }
                Ok(row)
            })
            .collect();
        Ok(Self::from_overlaps(records.len(), rows?.into_iter().flatten(), tau))
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    pub fn overlap(&self, a: usize, b: usize) -> Option<f64> {
        let list = &self.adj[a];
        list.binary_search_by_key(&b, |&(v, _)| v).ok().map(|k| list[k].1)
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.overlap(a, b).map(|o| 1.0 - o)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges among `nodes` as `(a, b, overlap)` with `a < b`, sorted.
    pub fn induced_edges(&self, nodes: &[usize]) -> Vec<(usize, usize, f64)> {
        let mut inside = vec![false; self.len()];
        for &v in nodes {
            inside[v] = true;
        }
        let mut out = Vec::new();
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        for &a in &sorted {
            for &(b, o) in &self.adj[a] {
                if a < b && inside[b] {
                    out.push((a, b, o));
                }
            }
        }
        out
    }

    /// Connected components of the subgraph induced by `nodes`, each sorted, ordered by smallest member.
    pub fn components(&self, nodes: &[usize]) -> Vec<Vec<usize>> {
        let mut inside = vec![false; self.len()];
        for &v in nodes {
            inside[v] = true;
        }
        let mut seen = vec![false; self.len()];
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        let mut comps = Vec::new();
        for &s in &sorted {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &(u, _) in &self.adj[v] {
                    if inside[u] && !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self, nodes: &[usize]) -> bool {
        self.components(nodes).len() <= 1
    }

    /// Degree of `v` within the subgraph induced by `nodes`.
    fn induced_degree(&self, v: usize, inside: &[bool]) -> usize {
        self.adj[v].iter().filter(|&&(u, _)| inside[u]).count()
    }
}

/// Selected viewpoints in selection order plus bookkeeping from each pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ViewpointNetwork {
    pub selected: Vec<usize>,
    /// Nodes added for connectivity or loop closure rather than coverage.
    pub connector_ids: Vec<usize>,
    /// Selections made by the coverage loop.
    pub coverage_stage_count: usize,
    /// Leaves the loop-closing pass could not reinforce.
    pub accepted_leaves: Vec<usize>,
}

impl ViewpointNetwork {
    pub fn is_connector(&self, v: usize) -> bool {
        self.connector_ids.contains(&v)
    }
}

/// Greedy coverage: seed at the best candidate, then grow through the overlap frontier.
///
/// Frontier candidates are ranked by new coverage, then by their best overlap
/// with the selection, then by lowest id. When the frontier offers nothing new
/// while fragments remain uncovered, a new seed is started among all candidates.
pub fn greedy_select(table: &CoverageTable, graph: &CandidateGraph) -> Result<ViewpointNetwork> {
    if table.candidates() == 0 {
        return Err(Error::Infeasible {
            reason: "no candidate viewpoints".into(),
            segments: (0..table.segments()).collect(),
        });
    }
    table.ensure_feasible()?;
    let m = table.candidates();
    let mut uncovered = FixedBitSet::with_capacity(table.segments());
    uncovered.insert_range(..);
    let mut in_s = vec![false; m];
    let mut selected = Vec::new();
    while uncovered.count_ones(..) > 0 {
        let gain = |i: usize| table.row(i).intersection_count(&uncovered);
        // Best overlap with the selection, per frontier candidate.
        let mut frontier: Vec<(usize, f64)> = Vec::new();
        let mut best_link = vec![f64::NEG_INFINITY; m];
        for &s in &selected {
            for &(v, o) in graph.neighbors(s) {
                if !in_s[v] {
                    if best_link[v] == f64::NEG_INFINITY {
                        frontier.push((v, 0.0));
                    }
                    best_link[v] = best_link[v].max(o);
                }
            }
        }
        let pick = frontier
            .iter()
            .map(|&(v, _)| (v, gain(v), best_link[v]))
            .filter(|&(_, g, _)| g > 0)
            .max_by(|x, y| {
                x.1.cmp(&y.1)
                    .then(x.2.total_cmp(&y.2))
                    .then(y.0.cmp(&x.0))
            })
            .map(|(v, _, _)| v);
        let pick = match pick {
            Some(v) => v,
            None => (0..m)
                .filter(|&v| !in_s[v])
                .map(|v| (v, gain(v)))
                .filter(|&(_, g)| g > 0)
                .max_by(|x, y| x.1.cmp(&y.1).then(y.0.cmp(&x.0)))
                .map(|(v, _)| v)
                .expect("feasible table leaves a candidate with positive gain"),
        };
        in_s[pick] = true;
        selected.push(pick);
        uncovered.difference_with(table.row(pick));
    }
    Ok(ViewpointNetwork {
        coverage_stage_count: selected.len(),
        selected,
        ..Default::default()
    })
}

/// Path cost compared by total weight, then hop count.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost(f64, usize);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Cheapest path from `sources` to any node with `is_target`; returns the full node path.
fn nearest_target(
    graph: &CandidateGraph,
    sources: &[usize],
    is_target: impl Fn(usize) -> bool,
) -> Option<(Cost, Vec<usize>)> {
    let n = graph.len();
    let mut best = vec![None::<Cost>; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        best[s] = Some(Cost(0.0, 0));
        heap.push(std::cmp::Reverse((Cost(0.0, 0), s)));
    }
    while let Some(std::cmp::Reverse((cost, v))) = heap.pop() {
        if best[v] != Some(cost) {
            continue;
        }
        if is_target(v) {
            let mut path = vec![v];
            let mut cur = v;
            while prev[cur] != usize::MAX {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some((cost, path));
        }
        for &(u, o) in graph.neighbors(v) {
            let next = Cost(cost.0 + (1.0 - o), cost.1 + 1);
            if best[u].map_or(true, |b| next < b) {
                best[u] = Some(next);
                prev[u] = v;
                heap.push(std::cmp::Reverse((next, u)));
            }
        }
    }
    None
}

/// Joins the components of the selection along cheapest candidate paths, closest pair first.
pub fn augment_connectivity(net: &ViewpointNetwork, graph: &CandidateGraph) -> Result<ViewpointNetwork> {
    let mut out = net.clone();
    loop {
        let comps = graph.components(&out.selected);
        if comps.len() <= 1 {
            return Ok(out);
        }
        let mut comp_of = vec![usize::MAX; graph.len()];
        for (k, c) in comps.iter().enumerate() {
            for &v in c {
                comp_of[v] = k;
            }
        }
        let mut best: Option<(Cost, usize, Vec<usize>)> = None;
        for (k, c) in comps.iter().enumerate() {
            let found = nearest_target(graph, c, |v| comp_of[v] != usize::MAX && comp_of[v] != k);
            if let Some((cost, path)) = found {
                if best.as_ref().map_or(true, |b| cost < b.0) {
                    best = Some((cost, k, path));
                }
            }
        }
        let Some((_, _, path)) = best else {
            return Err(Error::Infeasible {
                reason: format!(
                    "the selection splits into {} groups that no chain of candidates with overlap >= {} can join; lower tau",
                    comps.len(),
                    graph.tau
                ),
                segments: Vec::new(),
            });
        };
        for v in path {
            if comp_of[v] == usize::MAX && !out.selected.contains(&v) {
                out.selected.push(v);
                out.connector_ids.push(v);
            }
        }
    }
}

/// Removes viewpoints whose loss keeps coverage and connectivity, highest id first, until none can go.
pub fn prune_redundant(net: &ViewpointNetwork, table: &CoverageTable, graph: &CandidateGraph) -> ViewpointNetwork {
    let mut out = net.clone();
    let mut count = vec![0usize; table.segments()];
    for &v in &out.selected {
        for j in table.row(v).ones() {
            count[j] += 1;
        }
    }
    loop {
        let mut order = out.selected.clone();
        order.sort_unstable_by(|a, b| b.cmp(a));
        let mut changed = false;
        for v in order {
            if out.selected.len() <= 1 {
                break;
            }
            if table.row(v).ones().any(|j| count[j] < 2) {
                continue;
            }
            let rest: Vec<usize> = out.selected.iter().copied().filter(|&u| u != v).collect();
            if !graph.is_connected(&rest) {
                continue;
            }
            for j in table.row(v).ones() {
                count[j] -= 1;
            }
            out.selected = rest;
            out.connector_ids.retain(|&u| u != v);
            changed = true;
        }
        if !changed {
            return out;
        }
    }
}

/// Closes loops at leaves: a leaf gains the cheapest outside candidate linked
/// to it and to another selected node, if both links together weigh at most `1 − tau`.
pub fn reinforce_cycles(net: &ViewpointNetwork, graph: &CandidateGraph, enabled: bool) -> ViewpointNetwork {
    let mut out = net.clone();
    if !enabled {
        return out;
    }
    let budget = 1.0 - graph.tau;
    let mut inside = vec![false; graph.len()];
    for &v in &out.selected {
        inside[v] = true;
    }
    let leaves: Vec<usize> = out
        .selected
        .iter()
        .copied()
        .filter(|&v| graph.induced_degree(v, &inside) == 1)
        .collect();
    let mut accepted = Vec::new();
    for v in leaves {
        if graph.induced_degree(v, &inside) != 1 {
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for &(c, o) in graph.neighbors(v) {
            if inside[c] {
                continue;
            }
            let closing = graph
                .neighbors(c)
                .iter()
                .filter(|&&(u, _)| u != v && inside[u])
                .map(|&(_, o2)| 1.0 - o2)
                .fold(f64::INFINITY, f64::min);
            let cost = (1.0 - o) + closing;
            if cost.is_finite() && best.map_or(true, |(b, _)| cost < b) {
                best = Some((cost, c));
            }
        }
        match best {
            Some((cost, c)) if cost <= budget + 1e-12 => {
                inside[c] = true;
                out.selected.push(c);
                out.connector_ids.push(c);
            }
            _ => accepted.push(v),
        }
    }
    out.accepted_leaves = accepted;
    out
}

/// Coverage, connectivity repair, pruning, and optional loop closing, in that order.
pub fn plan_network(table: &CoverageTable, graph: &CandidateGraph, reinforce: bool) -> Result<ViewpointNetwork> {
    let net = greedy_select(table, graph)?;
    let net = augment_connectivity(&net, graph)?;
    let net = prune_redundant(&net, table, graph);
    Ok(reinforce_cycles(&net, graph, reinforce))
}

/// True if no single removal keeps both full coverage and connectivity.
pub fn is_irreducible(selected: &[usize], table: &CoverageTable, graph: &CandidateGraph) -> bool {
    selected.len() <= 1
        || selected.iter().all(|&v| {
            let rest: Vec<usize> = selected.iter().copied().filter(|&u| u != v).collect();
            !(table.covers_all(&rest) && graph.is_connected(&rest))
        })
}
