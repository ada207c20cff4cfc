//! `train`: fit the position or speed network on labelled datasets.

use std::path::PathBuf;

use clap::{Args, ValueEnum};

use bldc_core::estimator::PositionEstimator;
use bldc_core::mlp::{self, BatchMode, LabeledDataset};
use bldc_core::pipeline::{build_position_dataset, build_speed_dataset};

use crate::config::WorkbenchConfig;
use crate::error::{CliError, Result};
use crate::io::{self, ModelFile, TrainingMeta};

use super::prepare_out_dir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Position,
    Speed,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labelled dataset CSV (repeat to merge several runs).
    #[arg(long = "dataset", required = true)]
    pub datasets: Vec<PathBuf>,
    /// Which estimator to fit.
    #[arg(long, value_enum)]
    pub target: Target,
    /// Trained position model (required for --target speed).
    #[arg(long)]
    pub position_model: Option<PathBuf>,
    /// Learning-rate override.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Epoch-count override.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Batch override: `full` or `mini:<size>`.
    #[arg(long)]
    pub batch: Option<String>,
    /// Early-stopping patience override, epochs.
    #[arg(long)]
    pub patience: Option<usize>,
    /// Split percentages, e.g. "40,10,50".
    #[arg(long)]
    pub split: Option<String>,
    /// Seed for the shuffle, split and weight initialization
    /// (overrides the config value).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Configuration file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Also write the assembled feature vectors as CSV.
    #[arg(long)]
    pub dump_features: bool,
}

fn parse_split(spec: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::usage(format!("bad split \"{spec}\"")))?;
    if parts.len() != 3 {
        return Err(CliError::usage(format!(
            "split needs three percentages, got \"{spec}\""
        )));
    }
    Ok([parts[0] / 100.0, parts[1] / 100.0, parts[2] / 100.0])
}

pub fn run(args: &TrainArgs, verbose: bool) -> Result<()> {
    let started = std::time::Instant::now();
    let cfg = WorkbenchConfig::load(args.config.as_deref())?;
    let seed = cfg.resolve_seed(args.seed);
    let out_dir = prepare_out_dir(&args.out_dir)?;
    let pl_cfg = cfg.pipeline.to_config();
    let scaling = pl_cfg.scaling;
    let pole_pairs = cfg.motor.pole_pairs;

    let mut section = match args.target {
        Target::Position => cfg.training.position.clone(),
        Target::Speed => cfg.training.speed.clone(),
    };
    if let Some(lr) = args.learning_rate {
        section.learning_rate = lr;
    }
    if let Some(epochs) = args.epochs {
        section.max_epochs = epochs;
    }
    if let Some(batch) = &args.batch {
        section.batch = batch.clone();
    }
    if let Some(patience) = args.patience {
        section.early_stop_patience = patience;
    }
    if let Some(split) = &args.split {
        section.split = parse_split(split)?;
    }
    let train_cfg = section.to_config(seed)?;

    // Assemble per-file datasets (rows from different runs must not be
    // concatenated before feature pairing).
    let mut dataset: Option<LabeledDataset> = None;
    for path in &args.datasets {
        let rows = io::read_dataset_csv(path)?;
        let part = match args.target {
            Target::Position => build_position_dataset(&rows, pole_pairs, &scaling)?,
            Target::Speed => {
                let model_path = args.position_model.as_ref().ok_or_else(|| {
                    CliError::usage("--target speed requires --position-model".to_string())
                })?;
                let model = ModelFile::load(model_path)?;
                let pos = PositionEstimator::new(
                    model.to_net()?,
                    model.input_scaling.to_scaling(),
                    model.pole_pairs,
                )?;
                build_speed_dataset(&rows, pos, &pl_cfg, model.pole_pairs)?
            }
        };
        match dataset.as_mut() {
            None => dataset = Some(part),
            Some(ds) => ds.merge(&part)?,
        }
    }
    let dataset = dataset.expect("clap enforces at least one dataset");

    let (target_name, topology) = match args.target {
        Target::Position => ("position", (10usize, 5usize, 2usize)),
        Target::Speed => ("speed", (21, 10, 1)),
    };

    let (net, history) = mlp::train(&dataset, topology, &train_cfg)?;

    let meta = TrainingMeta {
        learning_rate: train_cfg.learning_rate,
        batch: match train_cfg.batch_mode {
            BatchMode::Full => "full".to_string(),
            BatchMode::Mini(n) => format!("mini:{n}"),
        },
        max_epochs: train_cfg.max_epochs,
        early_stop_patience: train_cfg.early_stop_patience,
        split: section.split,
        epochs_run: history.epochs.len(),
        best_epoch: history.best_epoch,
        best_val_cost: history.best_val_cost,
        dataset_examples: dataset.m,
        dataset_rate_hz: cfg.drive.acquisition_rate_hz / pl_cfg.feature_stride as f64,
        feature_stride: pl_cfg.feature_stride,
        ratio_window: pl_cfg.ratio_window,
    };
    let model = ModelFile::from_net(target_name, &net, &scaling, pole_pairs, meta);
    model.save(&out_dir.join("model.json"))?;
    io::write_history_csv(&out_dir.join("history.csv"), &history)?;
    if args.dump_features {
        match args.target {
            Target::Position => {
                io::write_position_features_csv(&out_dir.join("position_features.csv"), &dataset)?
            }
            Target::Speed => {
                io::write_speed_features_csv(&out_dir.join("speed_features.csv"), &dataset)?
            }
        }
    }
    cfg.echo_to(&out_dir)?;

    if verbose {
        println!(
            "train: seed {seed}, {} epochs run, {:.1}s elapsed",
            history.epochs.len(),
            started.elapsed().as_secs_f64()
        );
    }
    println!(
        "train: {target_name} ({},{},{}) on {} examples, best validation cost {} at epoch {} -> {}",
        topology.0,
        topology.1,
        topology.2,
        dataset.m,
        history.best_val_cost,
        history.best_epoch,
        out_dir.display()
    );
    Ok(())
}
