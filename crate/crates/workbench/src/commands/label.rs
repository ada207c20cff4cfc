//! `label`: attach rotor-state labels to a conditioned dataset.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use bldc_core::vsn::label_dataset;

use crate::config::WorkbenchConfig;
use crate::error::{CliError, Result};
use crate::io::{self, RunMetadata};

use super::prepare_out_dir;

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Conditioned dataset CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Run metadata JSON (defaults to metadata.json next to the input).
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// Pole pairs; overrides the metadata value.
    #[arg(long)]
    pub pole_pairs: Option<u32>,
    /// Configuration file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct LabelStatsJson {
    total: u64,
    distinct_slots: usize,
    slots: usize,
    counts: Vec<u64>,
}

pub fn run(args: &LabelArgs, verbose: bool) -> Result<()> {
    let started = std::time::Instant::now();
    let cfg = WorkbenchConfig::load(args.config.as_deref())?;
    let out_dir = prepare_out_dir(&args.out_dir)?;

    let pole_pairs = match args.pole_pairs {
        Some(kp) => kp,
        None => {
            let meta_path = args
                .metadata
                .clone()
                .unwrap_or_else(|| args.input.with_file_name("metadata.json"));
            match RunMetadata::load(&meta_path) {
                Ok(meta) => meta.pole_pairs,
                Err(_) if args.metadata.is_none() => cfg.motor.pole_pairs,
                Err(e) => return Err(e),
            }
        }
    };

    let rows = io::read_dataset_csv(&args.input)?;
    if rows.is_empty() {
        return Err(CliError::data(format!(
            "{} holds no rows to label",
            args.input.display()
        )));
    }
    let (samples, stats) = label_dataset(&rows, pole_pairs)?;

    io::write_labeled_csv(&out_dir.join("labeled.csv"), &samples)?;
    let stats_json = LabelStatsJson {
        total: stats.total,
        distinct_slots: stats.coverage(),
        slots: stats.counts.len(),
        counts: stats.counts.clone(),
    };
    std::fs::write(
        out_dir.join("label_stats.json"),
        serde_json::to_string_pretty(&stats_json)? + "\n",
    )?;
    cfg.echo_to(&out_dir)?;

    if verbose {
        println!(
            "label: pole pairs {pole_pairs}, {:.1}s elapsed",
            started.elapsed().as_secs_f64()
        );
    }
    println!(
        "label: {} rows, {}/{} slots observed -> {}",
        stats.total,
        stats.coverage(),
        stats.counts.len(),
        out_dir.display()
    );
    Ok(())
}
