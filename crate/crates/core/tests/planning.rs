mod common;

use proptest::prelude::*;
use vfplan_core::metrics::wapl;
use vfplan_core::oracle::exact_solve;
use vfplan_core::planner::{
    augment_connectivity, greedy_select, is_irreducible, prune_redundant, reinforce_cycles, CandidateGraph,
    CoverageTable, ViewpointNetwork,
};
use vfplan_core::{plan, scenes, Error, NetworkJson, PlanOptions, Point2, ScannerModel, VisibilityEngine};

#[test]
fn square_room_needs_one_viewpoint() {
    let s = scenes::SQUARE;
    let r = plan(&s.floorplan(), &s.config(), PlanOptions::default()).unwrap();
    assert_eq!(r.report.vc, 1);
    assert_eq!(r.report.coverage_percent, 100.0);
}

#[test]
fn out_of_range_walls_are_reported() {
    let s = scenes::SQUARE;
    let mut cfg = s.config();
    cfg.r_max = 3.0;
    match plan(&s.floorplan(), &cfg, PlanOptions::default()) {
        Err(Error::Infeasible { segments, .. }) => assert!(!segments.is_empty()),
        other => panic!("expected infeasibility, got {other:?}"),
    }
}

#[test]
fn near_total_overlap_threshold_is_infeasible_in_a_corridor() {
    let s = scenes::CORRIDOR;
    let mut cfg = s.config();
    cfg.tau = 0.99;
    let err = plan(&s.floorplan(), &cfg, PlanOptions::default()).unwrap_err();
    assert!(err.is_infeasible(), "{err}");
}

#[test]
fn two_rooms_need_two_viewpoints_for_coverage() {
    let s = scenes::TWO_ROOM;
    let r = plan(&s.floorplan(), &s.config(), PlanOptions::default()).unwrap();
    let exact = exact_solve(&r.table, &r.graph, 18).unwrap();
    assert_eq!(exact.opt_cover, 2);
    assert!(r.report.vc >= exact.opt_full.unwrap());
    assert!(r.table.covers_all(&r.network.selected));
}

#[test]
fn coverage_table_matches_point_sampling() {
    let s = scenes::LSHAPE;
    let r = plan(&s.floorplan(), &s.config(), PlanOptions::default()).unwrap();
    let fp = s.floorplan();
    let occ = fp.occluders(false);
    let scanner = ScannerModel::new(r.config.r_min, r.config.r_max).unwrap();
    for (i, c) in r.candidates.iter().enumerate() {
        for seg in &r.boundary.segments {
            let sampled = common::sampled_full_visibility(&occ, scanner, c.position, seg, 64);
            assert_eq!(r.table.get(i, seg.id), sampled, "candidate {i}, fragment {}", seg.id);
        }
    }
}

#[test]
fn report_can_be_recomputed_from_network_json() {
    let s = scenes::TWO_ROOM;
    let r = plan(&s.floorplan(), &s.config(), PlanOptions::default()).unwrap();
    let net: NetworkJson = serde_json::from_str(&r.network_json_string()).unwrap();
    let n = net.viewpoints.len();
    let local = |id: usize| net.viewpoints.iter().position(|v| v.id == id).unwrap();
    let edges: Vec<(usize, usize, f64)> = net.edges.iter().map(|e| (local(e.a), local(e.b), e.weight)).collect();
    let d = common::all_pairs(n, &edges);
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += if d[i][j].is_finite() { d[i][j] } else { 100.0 };
            }
        }
    }
    let expected_wapl = if n > 1 { sum / (n * (n - 1)) as f64 } else { 0.0 };
    assert_eq!(net.metrics.vc, n);
    assert!((net.metrics.wapl - expected_wapl).abs() < 1e-12);
    assert!(d.iter().flatten().all(|x| x.is_finite()));
    // Coverage straight from the visibility engine at the written coordinates.
    let fp = s.floorplan();
    let eng = VisibilityEngine::new(&fp, &fp.occluders(false), ScannerModel::new(0.6, 30.0).unwrap()).unwrap();
    let covered = r
        .boundary
        .segments
        .iter()
        .filter(|seg| {
            net.viewpoints
                .iter()
                .any(|v| eng.coverage_entry(Point2::new(v.x, v.y), seg, 1.0).unwrap())
        })
        .count();
    assert_eq!(100.0 * covered as f64 / r.boundary.len() as f64, net.metrics.coverage_percent);
}

#[test]
fn identical_runs_serialize_identically() {
    let s = scenes::ANNULUS;
    let a = plan(&s.floorplan(), &s.config(), PlanOptions::default()).unwrap();
    let b = plan(&s.floorplan(), &s.config(), PlanOptions::default()).unwrap();
    assert_eq!(a.network_json_string(), b.network_json_string());
}

#[test]
fn planned_networks_are_irreducible() {
    for s in [scenes::LSHAPE, scenes::TWO_ROOM, scenes::ANNULUS, scenes::CORRIDOR] {
        let r = plan(&s.floorplan(), &s.config(), PlanOptions::default()).unwrap();
        assert!(is_irreducible(&r.network.selected, &r.table, &r.graph), "{}", s.name);
    }
}

/// Every simple path from `a` to `b`, by brute force.
fn cheapest_path(g: &CandidateGraph, a: usize, b: usize) -> (f64, Vec<usize>) {
    fn walk(g: &CandidateGraph, path: &mut Vec<usize>, cost: f64, b: usize, best: &mut (f64, Vec<usize>)) {
        let v = *path.last().unwrap();
        if v == b {
            if cost < best.0 - 1e-12 || (cost <= best.0 + 1e-12 && path.len() < best.1.len()) {
                *best = (cost, path.clone());
            }
            return;
        }
        for &(u, o) in g.neighbors(v) {
            if !path.contains(&u) {
                path.push(u);
                walk(g, path, cost + 1.0 - o, b, best);
                path.pop();
            }
        }
    }
    let mut best = (f64::INFINITY, Vec::new());
    walk(g, &mut vec![a], 0.0, b, &mut best);
    best
}

#[test]
fn connectors_follow_the_cheapest_corridor() {
    // 0 and 1 are the selected ends; 2-3-4 is a cheap corridor, 5 a costly shortcut.
    let g = CandidateGraph::from_overlaps(
        6,
        [(0, 2, 0.9), (2, 3, 0.8), (3, 4, 0.85), (4, 1, 0.9), (0, 5, 0.45), (5, 1, 0.45)],
        0.4,
    );
    let net = ViewpointNetwork {
        selected: vec![0, 1],
        coverage_stage_count: 2,
        ..Default::default()
    };
    let out = augment_connectivity(&net, &g).unwrap();
    let (_, path) = cheapest_path(&g, 0, 1);
    assert_eq!(out.connector_ids, path[1..path.len() - 1].to_vec());
    assert!(g.is_connected(&out.selected));
}

#[test]
fn loop_closing_picks_the_cheapest_triangle() {
    // Path 0-1-2; candidates 3 and 4 each close a loop at leaf 0.
    let g = CandidateGraph::from_overlaps(
        5,
        [(0, 1, 0.7), (1, 2, 0.7), (0, 3, 0.8), (3, 1, 0.8), (0, 4, 0.9), (4, 1, 0.95), (2, 4, 0.5)],
        0.4,
    );
    let net = ViewpointNetwork {
        selected: vec![0, 1, 2],
        coverage_stage_count: 3,
        ..Default::default()
    };
    let out = reinforce_cycles(&net, &g, true);
    // Enumerate closing candidates for leaf 0 and take the cheapest two-edge detour.
    let budget = 1.0 - 0.4;
    let best = (3..5)
        .filter_map(|c| {
            let w0 = g.weight(0, c)?;
            let back = [1usize, 2].iter().filter_map(|&u| g.weight(c, u)).fold(f64::INFINITY, f64::min);
            Some((w0 + back, c))
        })
        .filter(|&(w, _)| w <= budget)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    assert_eq!(out.connector_ids.first(), Some(&best.1));
    assert!(out.selected.contains(&best.1));
    assert_eq!(reinforce_cycles(&net, &g, false), net);
}

fn random_instance(m: usize, n: usize, bits: &[bool], links: &[f64]) -> (CoverageTable, CandidateGraph) {
    let mut rows: Vec<Vec<bool>> = (0..m).map(|i| (0..n).map(|j| bits[(i * n + j) % bits.len()]).collect()).collect();
    // Guarantee feasibility: candidate j % m covers fragment j.
    for j in 0..n {
        rows[j % m][j] = true;
    }
    let mut pairs = Vec::new();
    let mut k = 0;
    for a in 0..m {
        for b in a + 1..m {
            pairs.push((a, b, links[k % links.len()]));
            k += 1;
        }
    }
    (CoverageTable::from_rows(&rows), CandidateGraph::from_overlaps(m, pairs, 0.4))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn greedy_stays_within_harmonic_bound(
        m in 2usize..10,
        n in 1usize..24,
        bits in prop::collection::vec(prop::bool::weighted(0.3), 240),
        links in prop::collection::vec(0.0..1.0f64, 45),
    ) {
        let (t, g) = random_instance(m, n, &bits, &links);
        let greedy = greedy_select(&t, &g).unwrap();
        let exact = exact_solve(&t, &g, 18).unwrap();
        let bound = (1.0 + (n as f64).ln()) * exact.opt_cover as f64;
        prop_assert!(greedy.coverage_stage_count as f64 <= bound + 1e-9);
        prop_assert!(t.covers_all(&greedy.selected));
    }

    #[test]
    fn pruned_networks_are_irreducible(
        m in 2usize..10,
        n in 1usize..24,
        bits in prop::collection::vec(prop::bool::weighted(0.4), 240),
        links in prop::collection::vec(0.0..1.0f64, 45),
    ) {
        let (t, g) = random_instance(m, n, &bits, &links);
        let net = greedy_select(&t, &g).unwrap();
        if let Ok(net) = augment_connectivity(&net, &g) {
            // Pad with every candidate so pruning has work to do.
            let mut padded = net.clone();
            padded.selected = (0..m).collect();
            let starts = if g.is_connected(&padded.selected) { vec![net, padded] } else { vec![net] };
            for full in starts {
                let out = prune_redundant(&full, &t, &g);
                prop_assert!(t.covers_all(&out.selected));
                prop_assert!(g.is_connected(&out.selected));
                prop_assert!(is_irreducible(&out.selected, &t, &g));
            }
        }
    }

    #[test]
    fn wapl_ignores_labels(n in 2usize..8, ws in prop::collection::vec(0.0..0.6f64, 28), rot in 0usize..8) {
        let mut edges = Vec::new();
        let mut k = 0;
        for a in 0..n {
            for b in a + 1..n {
                if ws[k] < 0.45 {
                    edges.push((a, b, ws[k]));
                }
                k += 1;
            }
        }
        let relabel = |v: usize| (v + rot) % n;
        let moved: Vec<_> = edges.iter().map(|&(a, b, w)| (relabel(a), relabel(b), w)).collect();
        prop_assert!((wapl(n, &edges) - wapl(n, &moved)).abs() < 1e-9);
    }

    #[test]
    fn adding_an_edge_never_raises_wapl(n in 2usize..8, ws in prop::collection::vec(0.0..0.6f64, 28), a in 0usize..8, b in 0usize..8, w in 0.0..0.6f64) {
        let mut edges = Vec::new();
        let mut k = 0;
        for x in 0..n {
            for y in x + 1..n {
                if ws[k] < 0.3 {
                    edges.push((x, y, ws[k]));
                }
                k += 1;
            }
        }
        let before = wapl(n, &edges);
        let (a, b) = (a % n, b % n);
        prop_assume!(a != b);
        edges.push((a, b, w));
        prop_assert!(wapl(n, &edges) <= before + 1e-12);
    }
}
