//! Viewpoint network planning for static LiDAR scanning on 2D floorplans.
//!
//! The pipeline parses a floorplan, computes what a range-limited scanner sees
//! from every free-space cell, extracts the medial-axis skeleton as the
//! candidate space, and greedily selects a small connected set of viewpoints
//! that covers every boundary fragment.

pub mod config;
pub mod error;
pub mod floorplan;
pub mod geometry;
pub mod metrics;
pub mod oracle;
pub mod overlap;
pub mod pipeline;
pub mod planner;
pub mod scenes;
pub mod skeleton;
pub mod svg;
pub mod vfield;
pub mod visibility;

pub use config::{PlanConfig, Profile, SweepAxis};
pub use error::{Error, Result};
pub use floorplan::{parse_floorplan, partition_boundary, BoundarySet, Floorplan, Segment, SegmentKind};
pub use geometry::Point2;
pub use metrics::MetricsReport;
pub use overlap::{OverlapMetric, VisRecord};
pub use pipeline::{plan, NetworkJson, PlanOptions, PlanResult};
pub use planner::{CandidateGraph, CoverageTable, ViewpointNetwork};
pub use scenes::Scene;
pub use skeleton::{ConvergingLine, ConvergingPoint, PointKind, SkeletonGrid};
pub use vfield::{DistanceField, GridSpec, VisibilityField};
pub use visibility::{BspTree, ScannerModel, VisibilityEngine};
