//! Evaluation metrics: confusion counts, F-score, MAE and per-speed
//! reports.
//!
//! State classification is 12-way over the virtual sequence numbers with
//! abstention: a classified estimate that matches the truth is a true
//! positive, a classified mismatch counts as a false positive for the
//! predicted state and a false negative for the true one, and an unknown
//! estimate abstains (false negative for the true state only). With that
//! convention micro recall equals plain accuracy while precision only
//! pays for confident mistakes; the F-score is their harmonic mean.
//!
//! Angular errors use minimal wrapped differences: mechanical error on the
//! 360-degree mechanical circle, electrical error on the electrical circle
//! after multiplying by the pole-pair count. For sub-cycle errors the two
//! differ exactly by that factor.

use alloc::format;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimator::{PositionEstimate, StateClass};
use crate::num::{wrap360, wrapped_diff_deg};

pub const VSN_CLASSES: usize = 12;

/// Per-class and aggregate confusion counts for the 12-way VSN
/// classification, with an abstention (unknown) bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionCounts {
    pub tp: [u64; VSN_CLASSES],
    pub fp: [u64; VSN_CLASSES],
    pub fn_: [u64; VSN_CLASSES],
    pub unknown: u64,
    pub total: u64,
}

impl Default for ConfusionCounts {
    fn default() -> Self {
        Self {
            tp: [0; VSN_CLASSES],
            fp: [0; VSN_CLASSES],
            fn_: [0; VSN_CLASSES],
            unknown: 0,
            total: 0,
        }
    }
}

impl ConfusionCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one example: `truth` is the 0-based true class, `pred` the
    /// 0-based prediction or `None` for an abstention.
    pub fn record(&mut self, truth: usize, pred: Option<usize>) {
        debug_assert!(truth < VSN_CLASSES);
        self.total += 1;
        match pred {
            Some(p) if p == truth => self.tp[truth] += 1,
            Some(p) => {
                self.fp[p] += 1;
                self.fn_[truth] += 1;
            }
            None => {
                self.unknown += 1;
                self.fn_[truth] += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        for c in 0..VSN_CLASSES {
            self.tp[c] += other.tp[c];
            self.fp[c] += other.fp[c];
            self.fn_[c] += other.fn_[c];
        }
        self.unknown += other.unknown;
        self.total += other.total;
    }

    /// True negatives of one class (everything not involving it).
    pub fn tn(&self, class: usize) -> u64 {
        self.total - self.tp[class] - self.fp[class] - self.fn_[class]
    }

    pub fn sum_tp(&self) -> u64 {
        self.tp.iter().sum()
    }

    pub fn sum_fp(&self) -> u64 {
        self.fp.iter().sum()
    }

    /// Per-class false negatives summed; abstentions are already included
    /// in the per-class counts.
    pub fn sum_fn(&self) -> u64 {
        self.fn_.iter().sum::<u64>()
    }

    /// Micro precision: confident mistakes only in the denominator.
    pub fn precision(&self) -> f64 {
        let tp = self.sum_tp();
        if tp + self.sum_fp() == 0 {
            return 0.0;
        }
        tp as f64 / (tp + self.sum_fp()) as f64
    }

    /// Micro recall over all examples (equals accuracy).
    pub fn recall(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.sum_tp() as f64 / self.total as f64
    }

    pub fn accuracy(&self) -> f64 {
        self.recall()
    }
}

/// Harmonic mean of micro precision and recall; defined as 0 when both
/// vanish.
pub fn f_score(counts: &ConfusionCounts) -> f64 {
    let p = counts.precision();
    let r = counts.recall();
    if p + r == 0.0 {
        return 0.0;
    }
    2.0 * p * r / (p + r)
}

/// Mean absolute error between paired vectors.
pub fn mae(estimates: &[f64], targets: &[f64]) -> Result<f64> {
    if estimates.len() != targets.len() {
        return Err(Error::Contract(format!(
            "length mismatch: {} vs {}",
            estimates.len(),
            targets.len()
        )));
    }
    if estimates.is_empty() {
        return Err(Error::Contract("MAE of empty vectors".into()));
    }
    let sum: f64 = estimates
        .iter()
        .zip(targets)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / estimates.len() as f64)
}

/// Mean absolute error of angles in degrees using minimal wrapped
/// differences on the circle.
pub fn mae_wrapped_deg(estimates: &[f64], targets: &[f64]) -> Result<f64> {
    if estimates.len() != targets.len() {
        return Err(Error::Contract(format!(
            "length mismatch: {} vs {}",
            estimates.len(),
            targets.len()
        )));
    }
    if estimates.is_empty() {
        return Err(Error::Contract("MAE of empty vectors".into()));
    }
    let sum: f64 = estimates
        .iter()
        .zip(targets)
        .map(|(a, b)| wrapped_diff_deg(*a, *b).abs())
        .sum();
    Ok(sum / estimates.len() as f64)
}

/// One time-aligned estimate/truth pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateSample {
    pub time: f64,
    /// Encoder mechanical angle, degrees.
    pub angle_true_deg: f64,
    pub speed_true_rpm: f64,
    /// 1-based global slot of the encoder angle.
    pub truth_slot: u32,
    pub estimate: PositionEstimate,
    pub state: StateClass,
    /// Latest speed estimate (held between transition events).
    pub speed_hat_rpm: Option<f64>,
    /// Set when this sample produced a fresh speed estimate.
    pub speed_fresh: bool,
}

impl EstimateSample {
    pub fn vsn_true(&self) -> u8 {
        ((self.truth_slot - 1) % 12 + 1) as u8
    }
}

/// Streaming metric accumulator for one run.
#[derive(Debug, Clone, Default)]
pub struct MetricsAccumulator {
    pub counts: ConfusionCounts,
    successful: u64,
    unknown: u64,
    erroneous: u64,
    mech_err_sum: f64,
    elec_err_sum: f64,
    angle_samples: u64,
    speed_err_sum: f64,
    speed_true_sum: f64,
    speed_samples: u64,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, sample: &EstimateSample, pole_pairs: u32) {
        let truth_class = (sample.truth_slot as usize - 1) % VSN_CLASSES;
        let pred = sample.estimate.vsn_hat.map(|v| v as usize - 1);
        self.counts.record(truth_class, pred);
        match sample.state {
            StateClass::Successful => self.successful += 1,
            StateClass::Unknown => self.unknown += 1,
            StateClass::Erroneous => self.erroneous += 1,
        }
        // Position error compares the classified slot midpoint against the
        // encoder slot midpoint (both sides carry the same half-slot
        // quantization, so a perfect classifier scores zero). Unknown
        // estimates carry no state and are excluded.
        if let Some(slot_hat) = sample.estimate.global_slot_hat {
            let width = 30.0 / pole_pairs as f64;
            let mid_hat = (slot_hat as f64 - 0.5) * width;
            let mid_true = (sample.truth_slot as f64 - 0.5) * width;
            let mech_err = wrapped_diff_deg(mid_hat, mid_true).abs();
            let elec_err = wrapped_diff_deg(
                wrap360(mid_hat * pole_pairs as f64),
                wrap360(mid_true * pole_pairs as f64),
            )
            .abs();
            self.mech_err_sum += mech_err;
            self.elec_err_sum += elec_err;
            self.angle_samples += 1;
        }
        // Speed error is recorded per transition event (fresh estimates);
        // held values between events would replicate one reading many
        // times at low speed.
        if sample.speed_fresh {
            if let Some(speed_hat) = sample.speed_hat_rpm {
                self.speed_err_sum += (speed_hat - sample.speed_true_rpm).abs();
                self.speed_true_sum += sample.speed_true_rpm;
                self.speed_samples += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.counts.merge(&other.counts);
        self.successful += other.successful;
        self.unknown += other.unknown;
        self.erroneous += other.erroneous;
        self.mech_err_sum += other.mech_err_sum;
        self.elec_err_sum += other.elec_err_sum;
        self.angle_samples += other.angle_samples;
        self.speed_err_sum += other.speed_err_sum;
        self.speed_true_sum += other.speed_true_sum;
        self.speed_samples += other.speed_samples;
    }

    pub fn total(&self) -> u64 {
        self.counts.total
    }

    pub fn into_row(self, speed_rpm: Option<f64>) -> SpeedRow {
        let total = self.counts.total;
        let empty = total == 0;
        let frac = |n: u64| {
            if empty {
                0.0
            } else {
                n as f64 / total as f64
            }
        };
        let mean_speed = if self.speed_samples > 0 {
            self.speed_true_sum / self.speed_samples as f64
        } else {
            0.0
        };
        let mae_speed = if self.speed_samples > 0 {
            self.speed_err_sum / self.speed_samples as f64
        } else {
            0.0
        };
        SpeedRow {
            speed_rpm,
            f_score: f_score(&self.counts),
            accuracy: self.counts.accuracy(),
            successful: frac(self.successful),
            unknown: frac(self.unknown),
            erroneous: frac(self.erroneous),
            mae_mech_deg: if self.angle_samples > 0 {
                self.mech_err_sum / self.angle_samples as f64
            } else {
                0.0
            },
            mae_elect_deg: if self.angle_samples > 0 {
                self.elec_err_sum / self.angle_samples as f64
            } else {
                0.0
            },
            mae_speed_rpm: mae_speed,
            rel_speed_err_pct: if mean_speed > 0.0 {
                100.0 * mae_speed / mean_speed
            } else {
                0.0
            },
            samples: total,
            speed_samples: self.speed_samples,
            empty,
        }
    }
}

/// One row of the per-speed report.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedRow {
    /// Tested speed; `None` for the aggregate row.
    pub speed_rpm: Option<f64>,
    pub f_score: f64,
    pub accuracy: f64,
    pub successful: f64,
    pub unknown: f64,
    pub erroneous: f64,
    pub mae_mech_deg: f64,
    pub mae_elect_deg: f64,
    pub mae_speed_rpm: f64,
    pub rel_speed_err_pct: f64,
    pub samples: u64,
    pub speed_samples: u64,
    /// Set when the run produced no estimates; metric fields are
    /// placeholders, not measurements.
    pub empty: bool,
}

/// Per-speed evaluation report with an aggregate row.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<SpeedRow>,
    pub aggregate: SpeedRow,
    pub pole_pairs: u32,
}

impl EvalReport {
    pub fn row_for(&self, speed: f64) -> Option<&SpeedRow> {
        self.rows.iter().find(|r| {
            r.speed_rpm
                .map(|s| (s - speed).abs() < 1e-9)
                .unwrap_or(false)
        })
    }
}

/// Build an evaluation report from per-speed estimate traces.
pub fn per_speed_report(runs: &[(f64, &[EstimateSample])], pole_pairs: u32) -> EvalReport {
    let mut rows = Vec::with_capacity(runs.len());
    let mut pooled = MetricsAccumulator::new();
    for (speed, samples) in runs {
        let mut acc = MetricsAccumulator::new();
        for s in *samples {
            acc.record(s, pole_pairs);
        }
        pooled.merge(&acc);
        rows.push(acc.into_row(Some(*speed)));
    }
    EvalReport {
        rows,
        aggregate: pooled.into_row(None),
        pole_pairs,
    }
}
