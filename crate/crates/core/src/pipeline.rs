//! End-to-end planning: floorplan in, viewpoint network and artifacts out.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{PlanConfig, SweepAxis};
use crate::error::{Error, Result};
use crate::floorplan::{partition_boundary, BoundarySet, Floorplan};
use crate::metrics::{compute_report, MetricsReport};
use crate::overlap::{self, VisRecord};
use crate::planner::{plan_network, CandidateGraph, CoverageTable, ViewpointNetwork};
use crate::skeleton::{
    build_converging_lines, detect_joints, extract_skeleton, filter_by_clearance, refine_candidates, ConvergingPoint,
    Decomposition, PointKind, SkeletonGrid,
};
use crate::svg;
use crate::vfield::{compute_distance_field, compute_vf, export_field, DistanceField, GridSpec, VisibilityField};
use crate::visibility::{ScannerModel, VisibilityEngine};

#[derive(Debug, Clone, Copy, Default)]
pub struct PlanOptions {
    /// Also compute the visibility field (not needed for planning).
    pub emit_fields: bool,
}

/// Everything produced by one planning run.
#[derive(Debug)]
pub struct PlanResult {
    pub config: PlanConfig,
    pub boundary: BoundarySet,
    pub engine: VisibilityEngine,
    pub distance: DistanceField,
    pub skeleton: SkeletonGrid,
    pub decomposition: Decomposition,
    /// Ridge end pairs left below `tau` because the ridge was too short to split.
    pub flagged_pairs: Vec<(usize, usize)>,
    pub candidates: Vec<ConvergingPoint>,
    pub records: Vec<VisRecord>,
    pub table: CoverageTable,
    pub graph: CandidateGraph,
    pub network: ViewpointNetwork,
    pub report: MetricsReport,
    pub vf: Option<VisibilityField>,
    /// Wall-clock milliseconds per stage.
    pub timings: Vec<(&'static str, f64)>,
}

struct Clock {
    last: Instant,
    laps: Vec<(&'static str, f64)>,
}

impl Clock {
    fn new() -> Self {
        Clock {
            last: Instant::now(),
            laps: Vec::new(),
        }
    }

    fn lap(&mut self, name: &'static str) {
        let now = Instant::now();
        self.laps.push((name, (now - self.last).as_secs_f64() * 1e3));
        self.last = now;
    }
}

/// Runs the full pipeline on one floorplan.
pub fn plan(fp: &Floorplan, cfg: &PlanConfig, opts: PlanOptions) -> Result<PlanResult> {
    cfg.validate()?;
    let mut clock = Clock::new();
    let boundary = partition_boundary(fp, cfg.partition_length, cfg.include_openings)?;
    let scanner = ScannerModel::new(cfg.r_min, cfg.r_max)?;
    let engine = VisibilityEngine::new(fp, &fp.occluders(cfg.windows_opaque), scanner)?;
    clock.lap("setup");

    let spec = GridSpec::covering(fp, cfg.resolution)?;
    let distance = compute_distance_field(fp, &spec);
    clock.lap("distance_field");
    let skeleton = extract_skeleton(&distance, cfg.r_min)?;
    let points = detect_joints(&skeleton);
    let decomposition = build_converging_lines(&skeleton, &points);
    clock.lap("skeleton");

    // Visibility records keyed by cell; the initial points are computed up front in parallel.
    let mut cache: HashMap<usize, VisRecord> = decomposition
        .points
        .par_iter()
        .map(|p| (p.cell, VisRecord::compute(&engine, &boundary, p.position)))
        .collect();
    let metric = cfg.overlap_metric;
    let refinement = refine_candidates(
        &decomposition,
        &spec,
        |a, b| {
            for p in [a, b] {
                cache
                    .entry(p.cell)
                    .or_insert_with(|| VisRecord::compute(&engine, &boundary, p.position));
            }
            overlap::overlap(&boundary, &cache[&a.cell], &cache[&b.cell], metric)
                .expect("records share the boundary set")
        },
        cfg.tau,
    );
    let candidates = filter_by_clearance(&refinement.points, &distance, cfg.r_min);
    if candidates.is_empty() {
        return Err(Error::Infeasible {
            reason: format!(
                "no skeleton point keeps r_min = {} m of clearance from the boundary",
                cfg.r_min
            ),
            segments: (0..boundary.len()).collect(),
        });
    }
    let records: Vec<VisRecord> = candidates
        .par_iter()
        .map(|p| match cache.get(&p.cell) {
            Some(r) => r.clone(),
            None => VisRecord::compute(&engine, &boundary, p.position),
        })
        .collect();
    drop(cache);
    clock.lap("candidates");

    let table = CoverageTable::from_records(&records, &boundary, cfg.coverage_fraction)?;
    table.ensure_feasible()?;
    let graph = CandidateGraph::build(&records, &boundary, metric, cfg.tau)?;
    clock.lap("coverage_and_overlap");
    let network = plan_network(&table, &graph, cfg.reinforce_cycles)?;
    let report = compute_report(&network, &table, &graph);
    clock.lap("optimize");

    let vf = if opts.emit_fields {
        let vf = compute_vf(&engine, &boundary, &spec);
        clock.lap("visibility_field");
        Some(vf)
    } else {
        None
    };
    Ok(PlanResult {
        config: *cfg,
        boundary,
        engine,
        distance,
        skeleton,
        decomposition,
        flagged_pairs: refinement.flagged,
        candidates,
        records,
        table,
        graph,
        network,
        report,
        vf,
        timings: clock.laps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Cover,
    Connector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewpointJson {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub role: Role,
    pub order: usize,
    pub kind: PointKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub a: usize,
    pub b: usize,
    pub overlap: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryJson {
    pub segments: usize,
    pub candidates: usize,
    pub candidate_edges: usize,
    pub coverage_stage: usize,
    pub connectors: usize,
    pub accepted_leaves: Vec<usize>,
    pub flagged_pairs: usize,
}

/// The network file; contains no timings so identical runs serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub viewpoints: Vec<ViewpointJson>,
    pub edges: Vec<EdgeJson>,
    pub metrics: MetricsReport,
    pub config: PlanConfig,
    pub summary: SummaryJson,
}

impl PlanResult {
    pub fn network_json(&self) -> NetworkJson {
        let net = &self.network;
        let viewpoints = net
            .selected
            .iter()
            .enumerate()
            .map(|(order, &v)| {
                let c = &self.candidates[v];
                ViewpointJson {
                    id: v,
                    x: c.position.x,
                    y: c.position.y,
                    role: if net.is_connector(v) { Role::Connector } else { Role::Cover },
                    order,
                    kind: c.kind,
                }
            })
            .collect();
        let edges = self
            .graph
            .induced_edges(&net.selected)
            .into_iter()
            .map(|(a, b, o)| EdgeJson {
                a,
                b,
                overlap: o,
                weight: 1.0 - o,
            })
            .collect();
        NetworkJson {
            viewpoints,
            edges,
            metrics: self.report,
            config: self.config,
            summary: SummaryJson {
                segments: self.boundary.len(),
                candidates: self.candidates.len(),
                candidate_edges: self.graph.edge_count(),
                coverage_stage: net.coverage_stage_count,
                connectors: net.connector_ids.len(),
                accepted_leaves: net.accepted_leaves.clone(),
                flagged_pairs: self.flagged_pairs.len(),
            },
        }
    }

    pub fn network_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.network_json()).expect("network serializes");
        s.push('\n');
        s
    }

    pub fn timings_json(&self) -> String {
        let map: serde_json::Map<String, serde_json::Value> = self
            .timings
            .iter()
            .map(|&(k, v)| (k.to_string(), serde_json::json!(v)))
            .collect();
        serde_json::to_string_pretty(&map).expect("timings serialize")
    }

    /// Writes `network.json`, `metrics.txt`, `plan.svg`, `timings.json`, and field exports when computed.
    pub fn write_artifacts(&self, out_dir: &Path) -> Result<()> {
        fs::create_dir_all(out_dir)?;
        fs::write(out_dir.join("network.json"), self.network_json_string())?;
        fs::write(out_dir.join("metrics.txt"), format!("{}\n", self.report))?;
        fs::write(out_dir.join("plan.svg"), svg::render_plan(self))?;
        fs::write(out_dir.join("timings.json"), self.timings_json())?;
        if let Some(vf) = &self.vf {
            export_field(vf, &out_dir.join("vf"), true)?;
            export_field(&self.distance, &out_dir.join("distance"), false)?;
        }
        Ok(())
    }
}

/// One sweep row; `vc` and `wapl` are absent when the run failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub vc: Option<usize>,
    pub wapl: Option<f64>,
    pub runtime_ms: f64,
    pub peak_mem_mb: Option<f64>,
    pub status: String,
}

/// Peak resident memory of this process, where the platform reports it.
pub fn peak_memory_mb() -> Option<f64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024.0)
}

/// Runs the pipeline once per value, in order; failures become rows with a status.
pub fn run_sweep(fp: &Floorplan, base: &PlanConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Parameter("sweep needs at least one value".into()));
    }
    Ok(values
        .iter()
        .map(|&value| {
            let mut cfg = *base;
            axis.apply(&mut cfg, value);
            let start = Instant::now();
            let outcome = plan(fp, &cfg, PlanOptions::default());
            let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            let peak_mem_mb = peak_memory_mb();
            match outcome {
                Ok(r) => SweepRow {
                    value,
                    vc: Some(r.report.vc),
                    wapl: Some(r.report.wapl),
                    runtime_ms,
                    peak_mem_mb,
                    status: "ok".into(),
                },
                Err(e) => SweepRow {
                    value,
                    vc: None,
                    wapl: None,
                    runtime_ms,
                    peak_mem_mb,
                    status: if e.is_infeasible() { "infeasible".into() } else { "error".into() },
                },
            }
        })
        .collect())
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let na = || "NA".to_string();
    let mut out = String::from("value,vc,wapl,runtime_ms,peak_mem_mb,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.1},{},{}\n",
            r.value,
            r.vc.map_or_else(na, |v| v.to_string()),
            r.wapl.map_or_else(na, |v| format!("{v:.6}")),
            r.runtime_ms,
            r.peak_mem_mb.map_or_else(na, |v| format!("{v:.1}")),
            r.status
        ));
    }
    out
}
