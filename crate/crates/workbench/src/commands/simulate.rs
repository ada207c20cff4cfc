//! `simulate`: run a speed profile and emit the conditioned dataset.

use std::path::PathBuf;

use clap::Args;

use bldc_core::pipeline::run_conditioned;

use crate::config::WorkbenchConfig;
use crate::error::Result;
use crate::io::{self, RunMetadata};

use super::{parse_profile, prepare_out_dir};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Speed profile: `triangle`, `updown`, `constant:<rpm>` or `ramp:<rpm>`.
    #[arg(long)]
    pub profile: String,
    /// Profile duration in seconds (profile-specific default otherwise).
    #[arg(long)]
    pub duration: Option<f64>,
    /// Seed for every stochastic stage (overrides the config value).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Configuration file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Emit rows at the full A/D rate instead of the decimated feature
    /// rate.
    #[arg(long)]
    pub full_rate: bool,
}

pub fn run(args: &SimulateArgs, verbose: bool) -> Result<()> {
    let started = std::time::Instant::now();
    let cfg = WorkbenchConfig::load(args.config.as_deref())?;
    let seed = cfg.resolve_seed(args.seed);
    let out_dir = prepare_out_dir(&args.out_dir)?;
    let (profile, desc) = parse_profile(&args.profile, args.duration)?;

    let params = cfg.motor.to_params();
    let sim_cfg = cfg.sim_config();
    let cond_cfg = cfg.conditioning.to_config();
    let mut pl_cfg = cfg.pipeline.to_config();
    if args.full_rate {
        pl_cfg.feature_stride = 1;
    }

    let run = run_conditioned(&profile, &params, &sim_cfg, &cond_cfg, &pl_cfg, seed)?;

    io::write_conditioned_csv(&out_dir.join("conditioned.csv"), &run.rows)?;
    io::write_trace_csv(&out_dir.join("trace.csv"), &run.raw)?;
    RunMetadata::from_run(
        &run,
        &desc,
        sim_cfg.acquisition_rate_hz,
        pl_cfg.feature_stride,
        pl_cfg.settle_time,
    )
    .save(&out_dir.join("metadata.json"))?;
    cfg.echo_to(&out_dir)?;

    if verbose {
        println!(
            "simulate: seed {seed}, profile start {:.3}s, handoff {:.3}s, {:.1}s elapsed",
            run.profile_start_time,
            run.handoff_time,
            started.elapsed().as_secs_f64()
        );
    }
    println!(
        "simulate: profile {desc}, {} rows at {} Hz -> {}",
        run.rows.len(),
        run.dataset_rate_hz,
        out_dir.display()
    );
    Ok(())
}
