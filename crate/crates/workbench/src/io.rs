//! File formats: CSV traces and datasets, model JSON, reports.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! files are byte-identical across runs with the same seed and parse back
//! to the exact values.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use bldc_core::estimator::StateClass;
use bldc_core::features::FeatureScaling;
use bldc_core::metrics::{EstimateSample, EvalReport, SpeedRow};
use bldc_core::mlp::{LabeledDataset, Mlp, TrainHistory};
use bldc_core::motor::TraceSample;
use bldc_core::pipeline::{ConditionedRun, DatasetRow};
use bldc_core::vsn::LabeledSample;

use crate::config::ScalingSection;
use crate::error::{CliError, Result};

pub const TRACE_HEADER: &str = "t_s,v_a,v_b,v_c,enc_deg,mech_deg,speed_rpm,seq";
pub const CONDITIONED_HEADER: &str = "t_s,v_as,v_bs,v_cs,enc_deg,speed_rpm";
pub const LABELED_HEADER: &str =
    "t_s,v_as,v_bs,v_cs,enc_deg,speed_rpm,vsn,cycle,global_idx,sin_label,cos_label";
pub const ESTIMATE_HEADER: &str =
    "t_s,angle_true,angle_hat,vsn_true,vsn_hat,state_class,speed_true,speed_hat";
pub const HISTORY_HEADER: &str = "epoch,train_cost,val_cost";
pub const REPORT_HEADER: &str = "speed_rpm,f_score,accuracy,successful,unknown,erroneous,\
mae_mech_deg,mae_elect_deg,mae_speed_rpm,rel_speed_err_pct,samples";
pub const POSITION_FEATURE_HEADER: &str = "v_as_now,v_bs_now,v_cs_now,v_as_next,v_bs_next,\
v_cs_next,dt_s,volt_mul_a,volt_mul_b,volt_mul_c,sin_target,cos_target";
pub const SPEED_FEATURE_HEADER: &str = "ratio1_1,ratio1_2,ratio1_3,ratio1_4,ratio1_5,ratio1_6,\
ratio1_7,ratio1_8,ratio1_9,ratio2_1,ratio2_2,ratio2_3,ratio2_4,ratio2_5,ratio2_6,ratio2_7,\
ratio2_8,ratio2_9,ratio2_10,ratio2_11,ratio2_12,speed_target";

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| {
        CliError::data(format!("cannot create {}: {e}", path.display()))
    })?))
}

pub fn write_trace_csv(path: &Path, samples: &[TraceSample]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{TRACE_HEADER}")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            s.time, s.v_raw[0], s.v_raw[1], s.v_raw[2], s.enc_deg, s.mech_deg, s.speed_rpm, s.seq
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_conditioned_csv(path: &Path, rows: &[DatasetRow]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{CONDITIONED_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.time, r.v_xs[0], r.v_xs[1], r.v_xs[2], r.enc_deg, r.speed_rpm
        )?;
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(field: &str, line_no: usize, path: &Path) -> Result<f64> {
    field.trim().parse().map_err(|_| {
        CliError::data(format!(
            "{}:{line_no}: cannot parse \"{field}\" as a number",
            path.display()
        ))
    })
}

/// Read a conditioned or labelled dataset CSV into rows (extra label
/// columns are tolerated; the first six are required).
pub fn read_dataset_csv(path: &Path) -> Result<Vec<DatasetRow>> {
    let file = File::open(path)
        .map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let mut rows = Vec::new();
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(CliError::data(format!("{} is empty", path.display()))),
    };
    if !header.starts_with(CONDITIONED_HEADER) {
        return Err(CliError::data(format!(
            "{}: unexpected header \"{header}\"; expected columns {CONDITIONED_HEADER}[,...]",
            path.display()
        )));
    }
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 2;
        let mut f = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            let field = f.next().ok_or_else(|| {
                CliError::data(format!(
                    "{}:{line_no}: missing column {name}",
                    path.display()
                ))
            })?;
            parse_f64(field, line_no, path)
        };
        rows.push(DatasetRow {
            time: next("t_s")?,
            v_xs: [next("v_as")?, next("v_bs")?, next("v_cs")?],
            enc_deg: next("enc_deg")?,
            speed_rpm: next("speed_rpm")?,
        });
    }
    Ok(rows)
}

pub fn write_labeled_csv(path: &Path, samples: &[LabeledSample]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{LABELED_HEADER}")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.time,
            s.v_xs[0],
            s.v_xs[1],
            s.v_xs[2],
            s.enc_deg,
            s.speed_rpm,
            s.label.vsn,
            s.label.elec_cycle,
            s.label.global_index,
            s.label.sin_label,
            s.label.cos_label
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_history_csv(path: &Path, history: &TrainHistory) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{HISTORY_HEADER}")?;
    for e in &history.epochs {
        writeln!(w, "{},{},{}", e.epoch, e.train_cost, e.val_cost)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_estimates_csv(path: &Path, samples: &[EstimateSample]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{ESTIMATE_HEADER}")?;
    for s in samples {
        let angle_hat = s
            .estimate
            .angle_hat
            .map(|a| a.to_string())
            .unwrap_or_default();
        let vsn_hat = s
            .estimate
            .vsn_hat
            .map(|v| v.to_string())
            .unwrap_or_else(|| "unknown".to_string());
        let speed_hat = s.speed_hat_rpm.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            s.time,
            s.angle_true_deg,
            angle_hat,
            s.vsn_true(),
            vsn_hat,
            state_str(s.state),
            s.speed_true_rpm,
            speed_hat
        )?;
    }
    w.flush()?;
    Ok(())
}

fn state_str(s: StateClass) -> &'static str {
    s.as_str()
}

fn row_fields(row: &SpeedRow) -> String {
    let speed = row
        .speed_rpm
        .map(|s| s.to_string())
        .unwrap_or_else(|| "all".to_string());
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        speed,
        row.f_score,
        row.accuracy,
        row.successful,
        row.unknown,
        row.erroneous,
        row.mae_mech_deg,
        row.mae_elect_deg,
        row.mae_speed_rpm,
        row.rel_speed_err_pct,
        row.samples
    )
}

pub fn write_report_csv(path: &Path, report: &EvalReport) -> Result<()> {
    let mut w = create(path)?;
    // Conventions: micro-averaged F over the 12 states with abstaining
    // unknowns; position MAE over classified slot midpoints.
    writeln!(w, "{REPORT_HEADER}")?;
    for row in &report.rows {
        writeln!(w, "{}", row_fields(row))?;
    }
    writeln!(w, "{}", row_fields(&report.aggregate))?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ReportRowJson<'a> {
    speed_rpm: Option<f64>,
    f_score: f64,
    accuracy: f64,
    successful: f64,
    unknown: f64,
    erroneous: f64,
    mae_mech_deg: f64,
    mae_elect_deg: f64,
    mae_speed_rpm: f64,
    rel_speed_err_pct: f64,
    samples: u64,
    speed_samples: u64,
    empty: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

fn row_json(row: &SpeedRow) -> ReportRowJson<'_> {
    ReportRowJson {
        speed_rpm: row.speed_rpm,
        f_score: row.f_score,
        accuracy: row.accuracy,
        successful: row.successful,
        unknown: row.unknown,
        erroneous: row.erroneous,
        mae_mech_deg: row.mae_mech_deg,
        mae_elect_deg: row.mae_elect_deg,
        mae_speed_rpm: row.mae_speed_rpm,
        rel_speed_err_pct: row.rel_speed_err_pct,
        samples: row.samples,
        speed_samples: row.speed_samples,
        empty: row.empty,
        note: row
            .empty
            .then_some("no samples; metric fields are placeholders"),
    }
}

pub fn write_report_json(path: &Path, report: &EvalReport) -> Result<()> {
    #[derive(Serialize)]
    struct ReportJson<'a> {
        convention: &'a str,
        pole_pairs: u32,
        rows: Vec<ReportRowJson<'a>>,
        aggregate: ReportRowJson<'a>,
    }
    let doc = ReportJson {
        convention: "micro-averaged F-score over 12 states; unknown estimates abstain \
                     (recall cost only); position MAE between classified and encoder slot \
                     midpoints; electrical degrees are mechanical times pole pairs, wrapped",
        pole_pairs: report.pole_pairs,
        rows: report.rows.iter().map(row_json).collect(),
        aggregate: row_json(&report.aggregate),
    };
    let text = serde_json::to_string_pretty(&doc)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Gnuplot-friendly whitespace-separated tracking data.
pub fn write_plot_data(path: &Path, samples: &[EstimateSample]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# t_s angle_true angle_hat speed_true speed_hat")?;
    for s in samples {
        writeln!(
            w,
            "{} {} {} {} {}",
            s.time,
            s.angle_true_deg,
            s.estimate.angle_hat.unwrap_or(f64::NAN),
            s.speed_true_rpm,
            s.speed_hat_rpm.unwrap_or(f64::NAN)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Serialized model: topology, row-major weights, scaling, training
/// metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    /// "position" or "speed".
    pub target: String,
    pub topology: [usize; 3],
    pub hidden_activation: String,
    pub output_activation: String,
    /// Hidden weights, rows of `inputs + 1` (bias first).
    pub theta1: Vec<Vec<f64>>,
    /// Output weights, rows of `hidden + 1` (bias first).
    pub theta2: Vec<Vec<f64>>,
    pub input_scaling: ScalingSection,
    pub pole_pairs: u32,
    pub seed: u64,
    pub training: TrainingMeta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub learning_rate: f64,
    pub batch: String,
    pub max_epochs: usize,
    pub early_stop_patience: usize,
    pub split: [f64; 3],
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_cost: f64,
    pub dataset_examples: usize,
    pub dataset_rate_hz: f64,
    pub feature_stride: usize,
    pub ratio_window: usize,
}

impl ModelFile {
    pub fn from_net(
        target: &str,
        net: &Mlp,
        scaling: &FeatureScaling,
        pole_pairs: u32,
        training: TrainingMeta,
    ) -> Self {
        let rows = |flat: &[f64], cols: usize| -> Vec<Vec<f64>> {
            flat.chunks(cols).map(|c| c.to_vec()).collect()
        };
        Self {
            target: target.to_string(),
            topology: [net.n_in, net.n_hidden, net.n_out],
            hidden_activation: "tan_sigmoid".to_string(),
            output_activation: "linear".to_string(),
            theta1: rows(&net.theta1, net.n_in + 1),
            theta2: rows(&net.theta2, net.n_hidden + 1),
            input_scaling: ScalingSection::from_scaling(scaling),
            pole_pairs,
            seed: net.seed,
            training,
        }
    }

    pub fn to_net(&self) -> Result<Mlp> {
        let [n_in, n_hidden, n_out] = self.topology;
        let net = Mlp {
            n_in,
            n_hidden,
            n_out,
            theta1: self.theta1.iter().flatten().copied().collect(),
            theta2: self.theta2.iter().flatten().copied().collect(),
            seed: self.seed,
        };
        net.check_shapes().map_err(CliError::from)?;
        Ok(net)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read model {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::data(format!("bad model {}: {e}", path.display())))
    }
}

/// Run metadata written next to every simulated dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub pole_pairs: u32,
    pub sim_rate_hz: f64,
    pub acquisition_rate_hz: f64,
    pub dataset_rate_hz: f64,
    pub feature_stride: usize,
    pub handoff_time_s: f64,
    pub profile_start_time_s: f64,
    pub settle_time_s: f64,
    pub profile: String,
    pub rows: usize,
    pub filter: FilterMeta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterMeta {
    pub sample_rate_hz: f64,
    pub lp1_b: [f64; 2],
    pub lp1_a: f64,
    pub lp2_b: [f64; 3],
    pub lp2_a: [f64; 2],
    pub group_delay_s: f64,
}

impl RunMetadata {
    pub fn from_run(
        run: &ConditionedRun,
        profile_desc: &str,
        acquisition_rate_hz: f64,
        feature_stride: usize,
        settle_time: f64,
    ) -> Self {
        Self {
            seed: run.seed,
            pole_pairs: run.pole_pairs,
            sim_rate_hz: run.coeffs.sample_rate_hz,
            acquisition_rate_hz,
            dataset_rate_hz: run.dataset_rate_hz,
            feature_stride,
            handoff_time_s: run.handoff_time,
            profile_start_time_s: run.profile_start_time,
            settle_time_s: settle_time,
            profile: profile_desc.to_string(),
            rows: run.rows.len(),
            filter: FilterMeta {
                sample_rate_hz: run.coeffs.sample_rate_hz,
                lp1_b: run.coeffs.lp1_b,
                lp1_a: run.coeffs.lp1_a,
                lp2_b: run.coeffs.lp2_b,
                lp2_a: run.coeffs.lp2_a,
                group_delay_s: run.coeffs.group_delay_s,
            },
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read metadata {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::data(format!("bad metadata {}: {e}", path.display())))
    }
}

pub fn write_position_features_csv(path: &Path, ds: &LabeledDataset) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{POSITION_FEATURE_HEADER}")?;
    for i in 0..ds.m {
        let x = ds.input(i);
        let y = ds.target(i);
        let fields: Vec<String> = x.iter().chain(y).map(|v| v.to_string()).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_speed_features_csv(path: &Path, ds: &LabeledDataset) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{SPEED_FEATURE_HEADER}")?;
    for i in 0..ds.m {
        let x = ds.input(i);
        let y = ds.target(i);
        let fields: Vec<String> = x.iter().chain(y).map(|v| v.to_string()).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}
