//! Network quality: viewpoint count, weighted average path length, coverage.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::planner::{CandidateGraph, CoverageTable, ViewpointNetwork};

/// Path length charged to each ordered pair with no connecting path.
pub const UNREACHABLE_PENALTY: f64 = 100.0;

/// All-pairs shortest path lengths over `n` nodes; `None` where unreachable.
pub fn shortest_paths(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<Option<f64>>> {
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0.0);
    }
    for &(a, b, w) in edges {
        if d[a][b].map_or(true, |x| w < x) {
            d[a][b] = Some(w);
            d[b][a] = Some(w);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = d[i][k] else { continue };
            for j in 0..n {
                if let Some(dkj) = d[k][j] {
                    let via = dik + dkj;
                    if d[i][j].map_or(true, |x| via < x) {
                        d[i][j] = Some(via);
                    }
                }
            }
        }
    }
    d
}

/// Mean shortest weighted path over ordered pairs; unreachable pairs count as 100, and N ≤ 1 gives 0.
pub fn wapl(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let d = shortest_paths(n, edges);
    let mut total = 0.0;
    for (i, row) in d.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                total += v.unwrap_or(UNREACHABLE_PENALTY);
            }
        }
    }
    total / (n * (n - 1)) as f64
}

/// Induced edges of the network as local `(a, b, weight)` triples.
pub fn network_edges(net: &ViewpointNetwork, graph: &CandidateGraph) -> Vec<(usize, usize, f64)> {
    let pos = |v: usize| net.selected.iter().position(|&u| u == v).expect("edge endpoints are selected");
    graph
        .induced_edges(&net.selected)
        .into_iter()
        .map(|(a, b, o)| (pos(a), pos(b), 1.0 - o))
        .collect()
}

pub fn compute_wapl(net: &ViewpointNetwork, graph: &CandidateGraph) -> f64 {
    wapl(net.selected.len(), &network_edges(net, graph))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub vc: usize,
    pub wapl: f64,
    pub coverage_percent: f64,
    pub component_count: usize,
    pub disconnected_pairs: usize,
}

pub fn compute_report(net: &ViewpointNetwork, table: &CoverageTable, graph: &CandidateGraph) -> MetricsReport {
    let n = net.selected.len();
    let edges = network_edges(net, graph);
    let d = shortest_paths(n, &edges);
    let disconnected_pairs = d.iter().flatten().filter(|v| v.is_none()).count();
    let coverage_percent = if table.segments() == 0 {
        100.0
    } else {
        100.0 * table.covered_by(&net.selected).count_ones(..) as f64 / table.segments() as f64
    };
    MetricsReport {
        vc: n,
        wapl: wapl(n, &edges),
        coverage_percent,
        component_count: graph.components(&net.selected).len(),
        disconnected_pairs,
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<20}{:>12}", "metric", "value")?;
        writeln!(f, "{:<20}{:>12}", "vc", self.vc)?;
        writeln!(f, "{:<20}{:>12.4}", "wapl", self.wapl)?;
        writeln!(f, "{:<20}{:>12.2}", "coverage_percent", self.coverage_percent)?;
        writeln!(f, "{:<20}{:>12}", "components", self.component_count)?;
        write!(f, "{:<20}{:>12}", "disconnected_pairs", self.disconnected_pairs)
    }
}
