//! Planning parameters and their per-profile defaults.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::overlap::OverlapMetric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    #[default]
    Indoor,
    Outdoor,
    /// Indoor defaults with at least one value overridden.
    Custom,
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "indoor" => Ok(Profile::Indoor),
            "outdoor" => Ok(Profile::Outdoor),
            "custom" => Ok(Profile::Custom),
            _ => Err(Error::Parameter(format!("unknown profile {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub profile: Profile,
    pub r_min: f64,
    pub r_max: f64,
    pub resolution: f64,
    pub partition_length: f64,
    pub tau: f64,
    pub overlap_metric: OverlapMetric,
    pub include_openings: bool,
    pub windows_opaque: bool,
    pub reinforce_cycles: bool,
    /// Share of a fragment that must be visible for it to count as covered.
    pub coverage_fraction: f64,
}

impl PlanConfig {
    pub fn indoor() -> Self {
        PlanConfig {
            profile: Profile::Indoor,
            r_min: 0.6,
            r_max: 30.0,
            resolution: 0.02,
            partition_length: 0.1,
            tau: 0.4,
            overlap_metric: OverlapMetric::MeanLen,
            include_openings: false,
            windows_opaque: false,
            reinforce_cycles: false,
            coverage_fraction: 1.0,
        }
    }

    pub fn outdoor() -> Self {
        PlanConfig {
            profile: Profile::Outdoor,
            r_min: 1.2,
            r_max: 75.0,
            resolution: 0.25,
            partition_length: 1.0,
            tau: 0.3,
            ..Self::indoor()
        }
    }

    pub fn for_profile(profile: Profile) -> Self {
        match profile {
            Profile::Outdoor => Self::outdoor(),
            Profile::Indoor => Self::indoor(),
            Profile::Custom => PlanConfig {
                profile: Profile::Custom,
                ..Self::indoor()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Parameter(format!("{what} is out of range: {v}")));
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(Error::Parameter(format!(
                "scanner range needs 0 < r_min < r_max, got r_min={} r_max={}",
                self.r_min, self.r_max
            )));
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return bad("resolution", self.resolution);
        }
        if !(self.partition_length > 0.0 && self.partition_length.is_finite()) {
            return bad("partition length", self.partition_length);
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau", self.tau);
        }
        if !(self.coverage_fraction > 0.0 && self.coverage_fraction <= 1.0) {
            return bad("coverage fraction", self.coverage_fraction);
        }
        Ok(())
    }
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self::indoor()
    }
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Tau,
    RMax,
    Resolution,
    Partition,
}

impl SweepAxis {
    pub fn apply(self, cfg: &mut PlanConfig, value: f64) {
        match self {
            SweepAxis::Tau => cfg.tau = value,
            SweepAxis::RMax => cfg.r_max = value,
            SweepAxis::Resolution => cfg.resolution = value,
            SweepAxis::Partition => cfg.partition_length = value,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Tau => "tau",
            SweepAxis::RMax => "r-max",
            SweepAxis::Resolution => "resolution",
            SweepAxis::Partition => "partition",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(SweepAxis::Tau),
            "r-max" | "r_max" => Ok(SweepAxis::RMax),
            "resolution" => Ok(SweepAxis::Resolution),
            "partition" | "partition-length" | "partition_length" => Ok(SweepAxis::Partition),
            _ => Err(Error::Parameter(format!("unknown sweep axis {s:?}"))),
        }
    }
}
