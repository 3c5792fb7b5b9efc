use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use vfplan_core::oracle::{exact_solve, DEFAULT_MAX_CANDIDATES};
use vfplan_core::pipeline::{run_sweep, sweep_csv};
use vfplan_core::{parse_floorplan, plan, scenes, Error, Floorplan, OverlapMetric, PlanConfig, PlanOptions, Profile, SweepAxis};

#[derive(Parser)]
#[command(name = "vfplan", version, about = "Plan static LiDAR viewpoint networks on 2D floorplans")]
struct Cli {
    /// Worker threads for the parallel stages; outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a viewpoint network and write its artifacts.
    Plan {
        #[command(flatten)]
        input: InputArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Also export the visibility and distance fields.
        #[arg(long)]
        emit_vf: bool,
    },
    /// Re-plan once per value of one parameter and print a CSV table.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        /// tau, r-max, resolution or partition.
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Solve the planned instance exhaustively (small instances only).
    #[command(hide = true)]
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_MAX_CANDIDATES)]
        max_candidates: usize,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Floorplan JSON file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Name of a bundled scene instead of a file.
    #[arg(long)]
    scene: Option<String>,
}

#[derive(Args)]
struct ConfigArgs {
    /// indoor, outdoor or custom (custom starts from indoor).
    #[arg(long)]
    profile: Option<Profile>,
    /// Scanner near blind radius in meters.
    #[arg(long)]
    r_min: Option<f64>,
    /// Scanner range in meters.
    #[arg(long)]
    r_max: Option<f64>,
    /// Grid cell size in meters.
    #[arg(long)]
    resolution: Option<f64>,
    /// Longest boundary fragment in meters.
    #[arg(long)]
    partition: Option<f64>,
    /// Minimum overlap ratio for two viewpoints to register.
    #[arg(long)]
    tau: Option<f64>,
    /// min-len, mean-len, union-len, union-ang or mean-ang.
    #[arg(long)]
    overlap_metric: Option<OverlapMetric>,
    /// Count door openings as coverage targets.
    #[arg(long)]
    include_openings: bool,
    /// Treat windows as occluders.
    #[arg(long)]
    windows_opaque: bool,
    /// Close cheap loops at network leaves.
    #[arg(long)]
    reinforce_cycles: bool,
}

impl ConfigArgs {
    /// Profile defaults first (a bundled scene supplies its own), then explicit flags.
    fn resolve(&self, scene_default: Option<PlanConfig>) -> PlanConfig {
        let mut c = match (self.profile, scene_default) {
            (Some(p), _) => PlanConfig::for_profile(p),
            (None, Some(c)) => c,
            (None, None) => PlanConfig::default(),
        };
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut c.r_min, self.r_min);
        set(&mut c.r_max, self.r_max);
        set(&mut c.resolution, self.resolution);
        set(&mut c.partition_length, self.partition);
        set(&mut c.tau, self.tau);
        if let Some(m) = self.overlap_metric {
            c.overlap_metric = m;
        }
        c.include_openings |= self.include_openings;
        c.windows_opaque |= self.windows_opaque;
        c.reinforce_cycles |= self.reinforce_cycles;
        c
    }
}

fn load(input: &InputArgs, config: &ConfigArgs) -> Result<(Floorplan, PlanConfig)> {
    if let Some(name) = &input.scene {
        let scene = scenes::by_name(name)?;
        return Ok((scene.floorplan(), config.resolve(Some(scene.config()))));
    }
    let path = input.input.as_deref().expect("clap requires one input");
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok((parse_floorplan(&bytes)?, config.resolve(None)))
}

fn run_plan(input: &InputArgs, out: &Path, config: &ConfigArgs, emit_vf: bool) -> Result<()> {
    let (fp, cfg) = load(input, config)?;
    let result = plan(&fp, &cfg, PlanOptions { emit_fields: emit_vf })?;
    result.write_artifacts(out)?;
    println!("{}", result.report);
    Ok(())
}

fn run_sweep_cmd(input: &InputArgs, axis: SweepAxis, values: &[f64], out: Option<&Path>, config: &ConfigArgs) -> Result<()> {
    let (fp, cfg) = load(input, config)?;
    let csv = sweep_csv(&run_sweep(&fp, &cfg, axis, values)?);
    match out {
        Some(p) => fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn run_oracle(input: &InputArgs, max_candidates: usize, config: &ConfigArgs) -> Result<()> {
    let (fp, cfg) = load(input, config)?;
    let result = plan(&fp, &cfg, PlanOptions::default())?;
    let exact = exact_solve(&result.table, &result.graph, max_candidates)?;
    let json = serde_json::json!({
        "candidates": result.candidates.len(),
        "segments": result.boundary.len(),
        "opt_cover": exact.opt_cover,
        "cover_witness": exact.cover_witness,
        "opt_full": exact.opt_full,
        "full_witness": exact.full_witness,
        "greedy_coverage_stage": result.network.coverage_stage_count,
        "greedy_vc": result.report.vc,
    });
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(())
}

/// 1 for bad input (including unreadable input files), 2 for infeasible instances, 3 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_infeasible() => 2,
        Some(e) if e.is_input() => 1,
        Some(_) => 3,
        None if err.downcast_ref::<std::io::Error>().is_some() => 1,
        None => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(3);
        }
    }
    let outcome = match &cli.command {
        Command::Plan {
            input,
            out,
            config,
            emit_vf,
        } => run_plan(input, out, config, *emit_vf),
        Command::Sweep {
            input,
            axis,
            values,
            out,
            config,
        } => run_sweep_cmd(input, *axis, values, out.as_deref(), config),
        Command::Oracle {
            input,
            max_candidates,
            config,
        } => run_oracle(input, *max_candidates, config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match err.downcast_ref::<Error>() {
                Some(Error::Infeasible { reason, segments }) => {
                    eprintln!("infeasible: {reason}");
                    if !segments.is_empty() {
                        eprintln!("segments: {}", join(segments));
                    }
                }
                _ => eprintln!("error: {err:#}"),
            }
            ExitCode::from(exit_code(&err))
        }
    }
}

fn join(ids: &[usize]) -> String {
    ids.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}
