//! `eval`: constant-speed evaluation runs and the per-speed report.

use std::path::PathBuf;

use clap::Args;

use bldc_core::estimator::{PositionEstimator, SpeedEstimator};
use bldc_core::metrics::{EvalReport, MetricsAccumulator};
use bldc_core::pipeline::evaluate_speed;

use crate::config::WorkbenchConfig;
use crate::error::{CliError, Result};
use crate::io::{self, ModelFile};

use super::{parse_speeds, prepare_out_dir, speed_label};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Trained position model JSON.
    #[arg(long)]
    pub position_model: PathBuf,
    /// Trained speed model JSON.
    #[arg(long)]
    pub speed_model: PathBuf,
    /// Speeds to test, rpm (comma separated).
    #[arg(long)]
    pub speeds: Option<String>,
    /// Mechanical cycles per speed.
    #[arg(long)]
    pub cycles: Option<f64>,
    /// Seed; each speed runs on an offset of it (overrides the config
    /// value).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Configuration file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Also write gnuplot-compatible tracking data per speed.
    #[arg(long)]
    pub plot_data: bool,
}

pub fn run(args: &EvalArgs, verbose: bool) -> Result<()> {
    let started = std::time::Instant::now();
    let cfg = WorkbenchConfig::load(args.config.as_deref())?;
    let seed = cfg.resolve_seed(args.seed);
    let out_dir = prepare_out_dir(&args.out_dir)?;

    let speeds = match &args.speeds {
        Some(spec) => parse_speeds(spec)?,
        None => cfg.eval.speeds.clone(),
    };
    if speeds.is_empty() {
        return Err(CliError::usage("no speeds to evaluate".to_string()));
    }
    let cycles = args.cycles.unwrap_or(cfg.eval.cycles);

    let pos_model = ModelFile::load(&args.position_model)?;
    let speed_model = ModelFile::load(&args.speed_model)?;
    let params = cfg.motor.to_params();
    let sim_cfg = cfg.sim_config();
    let cond_cfg = cfg.conditioning.to_config();
    let pl_cfg = cfg.pipeline.to_config();
    let keep_every = cfg.eval.keep_every.max(1);

    // Speeds are independent runs; fan them out.
    let results: Vec<
        Result<(
            MetricsAccumulator,
            Vec<bldc_core::metrics::EstimateSample>,
            f64,
        )>,
    > = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (i, &rpm) in speeds.iter().enumerate() {
            let params = params.clone();
            let sim_cfg = sim_cfg.clone();
            let cond_cfg = cond_cfg.clone();
            let pl_cfg = pl_cfg.clone();
            let pos_model = &pos_model;
            let speed_model = &speed_model;
            let seed = seed.wrapping_add(i as u64);
            handles.push(scope.spawn(move || {
                let position = PositionEstimator::new(
                    pos_model.to_net()?,
                    pos_model.input_scaling.to_scaling(),
                    pos_model.pole_pairs,
                )?;
                let speed_net = SpeedEstimator::new(
                    speed_model.to_net()?,
                    speed_model.input_scaling.to_scaling(),
                )?;
                let out = evaluate_speed(
                    rpm, cycles, &params, &sim_cfg, &cond_cfg, &pl_cfg, position, speed_net, seed,
                    keep_every,
                )?;
                Ok((out.accumulator, out.samples, out.cycles))
            }));
        }
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut rows = Vec::new();
    let mut pooled = MetricsAccumulator::new();
    for (&rpm, result) in speeds.iter().zip(results) {
        let (acc, samples, run_cycles) = result?;
        pooled.merge(&acc);
        let row = acc.into_row(Some(rpm));
        println!(
            "eval {:>6} rpm: F={:.3} successful={:.3} unknown={:.3} erroneous={:.3} \
             maeE={:.2}deg maeS={:.1}rpm rel={:.1}% ({:.0} cycles)",
            speed_label(rpm),
            row.f_score,
            row.successful,
            row.unknown,
            row.erroneous,
            row.mae_elect_deg,
            row.mae_speed_rpm,
            row.rel_speed_err_pct,
            run_cycles,
        );
        io::write_estimates_csv(
            &out_dir.join(format!("est_{}.csv", speed_label(rpm))),
            &samples,
        )?;
        if args.plot_data {
            io::write_plot_data(
                &out_dir.join(format!("plot_{}.dat", speed_label(rpm))),
                &samples,
            )?;
        }
        rows.push(row);
    }
    let report = EvalReport {
        rows,
        aggregate: pooled.into_row(None),
        pole_pairs: pos_model.pole_pairs,
    };
    io::write_report_csv(&out_dir.join("report.csv"), &report)?;
    io::write_report_json(&out_dir.join("report.json"), &report)?;
    cfg.echo_to(&out_dir)?;

    if verbose {
        println!(
            "eval: base seed {seed}, {:.1}s elapsed",
            started.elapsed().as_secs_f64()
        );
    }
    println!(
        "eval aggregate: F={:.3} successful={:.3} unknown={:.3} erroneous={:.3} -> {}",
        report.aggregate.f_score,
        report.aggregate.successful,
        report.aggregate.unknown,
        report.aggregate.erroneous,
        out_dir.display()
    );
    Ok(())
}
