//! `run`: sensorless drive loop with trained estimators.

use std::path::PathBuf;

use clap::Args;

use bldc_core::estimator::{PositionEstimator, SpeedEstimator};
use bldc_core::pipeline::{sensorless_run, Feedback};

use crate::config::WorkbenchConfig;
use crate::error::Result;
use crate::io::{self, ModelFile};

use super::prepare_out_dir;

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Trained position model JSON.
    #[arg(long)]
    pub position_model: PathBuf,
    /// Trained speed model JSON.
    #[arg(long)]
    pub speed_model: PathBuf,
    /// Target speed, rpm.
    #[arg(long, default_value_t = 850.0)]
    pub rpm: f64,
    /// Mechanical cycles to sustain after the handover.
    #[arg(long, default_value_t = 100.0)]
    pub cycles: f64,
    /// Seed for the simulated motor (overrides the config value).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep sensor-based feedback throughout (reference behaviour).
    #[arg(long)]
    pub sensor_reference: bool,
    /// Configuration file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

pub fn run(args: &RunArgs, verbose: bool) -> Result<()> {
    let started = std::time::Instant::now();
    let cfg = WorkbenchConfig::load(args.config.as_deref())?;
    let seed = cfg.resolve_seed(args.seed);
    let out_dir = prepare_out_dir(&args.out_dir)?;
    let params = cfg.motor.to_params();
    let sim_cfg = cfg.sim_config();
    let cond_cfg = cfg.conditioning.to_config();
    let pl_cfg = cfg.pipeline.to_config();
    let keep_every = cfg.eval.keep_every.max(1);

    let feedback = if args.sensor_reference {
        Feedback::Sensor
    } else {
        let pos_model = ModelFile::load(&args.position_model)?;
        let speed_model = ModelFile::load(&args.speed_model)?;
        Feedback::Estimated {
            position: PositionEstimator::new(
                pos_model.to_net()?,
                pos_model.input_scaling.to_scaling(),
                pos_model.pole_pairs,
            )?,
            speed: SpeedEstimator::new(
                speed_model.to_net()?,
                speed_model.input_scaling.to_scaling(),
            )?,
        }
    };

    let outcome = sensorless_run(
        args.rpm,
        args.cycles,
        &params,
        &sim_cfg,
        &cond_cfg,
        &pl_cfg,
        feedback,
        seed,
        keep_every,
    )?;

    io::write_trace_csv(&out_dir.join("trace.csv"), &outcome.trace)?;
    io::write_estimates_csv(&out_dir.join("estimates.csv"), &outcome.samples)?;
    cfg.echo_to(&out_dir)?;

    if verbose {
        println!(
            "run: seed {seed}, {:.1}s elapsed",
            started.elapsed().as_secs_f64()
        );
    }
    println!(
        "run: {} mode at {} rpm sustained {:.1} mechanical cycles -> {}",
        if args.sensor_reference {
            "sensor"
        } else {
            "sensorless"
        },
        args.rpm,
        outcome.cycles,
        out_dir.display()
    );
    Ok(())
}
