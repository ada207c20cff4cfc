//! End-to-end wiring: conditioned dataset production, network dataset
//! construction, streaming evaluation and the sensorless drive loop.
//!
//! Data flows simulator → conditioning chain → dataset rows → position
//! features → position network → state-transition events → speed features
//! → speed network. Dataset rows are decimated from the A/D rate by a
//! configurable stride so feature pairs see a useful position change per
//! step; estimation in the sensorless loop runs at that same stride,
//! matching the distribution the networks were trained on.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimator::{
    classify_state, default_unknown_threshold, PositionEstimate, PositionEstimator, SpeedEstimate,
    SpeedEstimator,
};
use crate::features::{
    position_features, FeatureScaling, SpeedFeatures, VsnEventTracker, POSITION_INPUTS,
    RATIO1_WINDOW, SPEED_INPUTS,
};
use crate::metrics::{EstimateSample, MetricsAccumulator};
use crate::mlp::LabeledDataset;
use crate::motor::{MotorParams, SimConfig, Simulator, SpeedProfile, TraceSample};
use crate::num::wrap360;
use crate::signal::{ConditioningConfig, FilterCoeffs, SignalChain};
use crate::vsn::{angle_to_vsn, elec_label};

/// One conditioned dataset row: what the estimation pipeline consumes,
/// with ground truth attached for labelling and evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetRow {
    pub time: f64,
    /// Conditioned differential voltages `[V_AS, V_BS, V_CS]`.
    pub v_xs: [f64; 3],
    /// Encoder reading, mechanical degrees.
    pub enc_deg: f64,
    /// True speed, rpm.
    pub speed_rpm: f64,
}

/// Estimation-pipeline configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Dataset rows are every `feature_stride`-th A/D sample.
    pub feature_stride: usize,
    /// Window length for the first speed-ratio family.
    pub ratio_window: usize,
    /// Chord-distance threshold separating known from unknown estimates.
    pub unknown_threshold: f64,
    pub scaling: FeatureScaling,
    /// Consecutive boundary-trigger estimates required before the
    /// sensorless loop re-commutates.
    pub debounce: usize,
    /// Electrical degrees before the window end at which the estimated
    /// angle triggers the next commutation (compensates estimator
    /// latency).
    pub commutation_margin_deg: f64,
    /// Consecutive unknown estimates that abort the sensorless loop.
    pub loss_of_lock_limit: usize,
    /// Data discarded after profile start while the regulator settles, s.
    pub settle_time: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            feature_stride: 8,
            ratio_window: RATIO1_WINDOW,
            unknown_threshold: default_unknown_threshold(12),
            scaling: FeatureScaling::default(),
            debounce: 2,
            commutation_margin_deg: 10.0,
            loss_of_lock_limit: 2000,
            settle_time: 0.25,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.feature_stride == 0 {
            return Err(Error::Config("feature_stride must be >= 1".into()));
        }
        if self.ratio_window < 2 {
            return Err(Error::Config("ratio_window must be >= 2".into()));
        }
        if !(self.unknown_threshold > 0.0) {
            return Err(Error::Config("unknown_threshold must be > 0".into()));
        }
        if self.debounce == 0 || self.loss_of_lock_limit == 0 {
            return Err(Error::Config(
                "debounce and loss_of_lock_limit must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// A simulated run reduced to dataset rows (plus the aligned raw samples).
#[derive(Debug, Clone)]
pub struct ConditionedRun {
    pub rows: Vec<DatasetRow>,
    /// Raw trace samples at the same instants as `rows`.
    pub raw: Vec<TraceSample>,
    pub dataset_rate_hz: f64,
    pub handoff_time: f64,
    pub profile_start_time: f64,
    pub coeffs: FilterCoeffs,
    pub pole_pairs: u32,
    pub seed: u64,
}

fn check_rates(sim_cfg: &SimConfig, cond_cfg: &ConditioningConfig) -> Result<()> {
    if (cond_cfg.adc_rate - sim_cfg.acquisition_rate_hz).abs() > 1e-6 {
        return Err(Error::Config(format!(
            "adc rate {} Hz must match the acquisition rate {} Hz",
            cond_cfg.adc_rate, sim_cfg.acquisition_rate_hz
        )));
    }
    Ok(())
}

/// Simulate a profile and produce conditioned dataset rows at the
/// decimated feature rate, discarding startup and settling data.
pub fn run_conditioned(
    profile: &SpeedProfile,
    params: &MotorParams,
    sim_cfg: &SimConfig,
    cond_cfg: &ConditioningConfig,
    pl_cfg: &PipelineConfig,
    seed: u64,
) -> Result<ConditionedRun> {
    pl_cfg.validate()?;
    check_rates(sim_cfg, cond_cfg)?;
    let mut sim = Simulator::new(profile.clone(), params.clone(), sim_cfg.clone(), seed)?;
    let input_rate = sim_cfg.acquisition_rate_hz * sim_cfg.substeps as f64;
    let mut chain = SignalChain::new(cond_cfg.clone(), input_rate)?;
    let coeffs = chain.coeffs();

    let start = sim.profile_start_time() + pl_cfg.settle_time;
    let total = sim.profile_start_time() + profile.duration;
    let ticks = (total * sim_cfg.acquisition_rate_hz) as usize;
    let mut rows = Vec::new();
    let mut raw = Vec::new();
    let mut cond = None;
    for tick in 0..ticks {
        let sample = sim.tick(|t, v| {
            cond = chain.push(t, v);
        })?;
        let Some(c) = cond.take() else {
            return Err(Error::Contract(
                "chain did not emit on an A/D instant".into(),
            ));
        };
        if tick % pl_cfg.feature_stride == 0 && sample.time >= start {
            rows.push(DatasetRow {
                time: c.time,
                v_xs: c.v_xs,
                enc_deg: sample.enc_deg,
                speed_rpm: sample.speed_rpm,
            });
            raw.push(sample);
        }
    }
    Ok(ConditionedRun {
        rows,
        raw,
        dataset_rate_hz: sim_cfg.acquisition_rate_hz / pl_cfg.feature_stride as f64,
        handoff_time: sim.handoff_time(),
        profile_start_time: sim.profile_start_time(),
        coeffs,
        pole_pairs: params.pole_pairs,
        seed,
    })
}

/// Position-network training examples from consecutive dataset rows.
///
/// Inputs are the scaled ten-element feature vectors; targets are the
/// sine/cosine of the encoder slot's within-cycle midpoint.
pub fn build_position_dataset(
    rows: &[DatasetRow],
    pole_pairs: u32,
    scaling: &FeatureScaling,
) -> Result<LabeledDataset> {
    let mut ds = LabeledDataset::new(POSITION_INPUTS, 2);
    for w in rows.windows(2) {
        let f = position_features(w[0].v_xs, w[1].v_xs, w[1].time - w[0].time)?;
        let label = angle_to_vsn(w[0].enc_deg, pole_pairs)?;
        let (s, c) = elec_label(label.vsn)?;
        ds.push(&f.to_input(scaling), &[s, c]);
    }
    Ok(ds)
}

/// Streaming estimator over dataset rows: position network, transition
/// events, speed features and (optionally) the speed network.
pub struct EstimationStream {
    position: PositionEstimator,
    speed: Option<SpeedEstimator>,
    tracker: VsnEventTracker,
    prev_row: Option<DatasetRow>,
    last_speed: Option<SpeedEstimate>,
    seeded: bool,
    pole_pairs: u32,
    // Continuous unwrapped angle estimate feeding the event tracker.
    unwrapped_est: Option<f64>,
}

/// Everything the stream knows about one processed row.
pub struct StreamStep {
    /// The row the estimate describes (the earlier of the feature pair).
    pub truth: DatasetRow,
    pub estimate: PositionEstimate,
    /// Fresh speed features when this row completed a transition event.
    pub speed_features: Option<SpeedFeatures>,
    /// Latest speed estimate (held between events).
    pub speed_estimate: Option<SpeedEstimate>,
    /// Set when `speed_estimate` was produced by this very step.
    pub speed_fresh: bool,
}

impl EstimationStream {
    pub fn new(
        position: PositionEstimator,
        speed: Option<SpeedEstimator>,
        pl_cfg: &PipelineConfig,
        pole_pairs: u32,
    ) -> Self {
        let mut position = position;
        position.unknown_threshold = pl_cfg.unknown_threshold;
        Self {
            position,
            speed,
            tracker: VsnEventTracker::new(pole_pairs, pl_cfg.ratio_window),
            prev_row: None,
            last_speed: None,
            seeded: false,
            pole_pairs,
            unwrapped_est: None,
        }
    }

    pub fn position(&self) -> &PositionEstimator {
        &self.position
    }

    /// Feed one row; yields an estimate for the previous row once a pair
    /// exists.
    pub fn push(&mut self, row: DatasetRow) -> Result<Option<StreamStep>> {
        if !self.seeded {
            // The run begins sensor-based: take the cycle index and
            // electrical angle from the encoder, exactly once.
            let label = angle_to_vsn(row.enc_deg, self.pole_pairs)?;
            self.position.seed_cycle(
                label.elec_cycle - 1,
                wrap360(row.enc_deg * self.pole_pairs as f64),
            );
            self.seeded = true;
        }
        let Some(prev) = self.prev_row.replace(row) else {
            return Ok(None);
        };
        let f = position_features(prev.v_xs, row.v_xs, row.time - prev.time)?;
        let estimate = self.position.estimate(&f)?;
        let mut speed_features = None;
        let mut speed_fresh = false;
        // Confident estimates extend the continuous unwrapped position
        // that drives transition-event detection.
        if estimate.global_slot_hat.is_some() {
            if let Some(angle) = estimate.angle_hat {
                let unwrapped = match self.unwrapped_est {
                    None => angle,
                    Some(prev_u) => prev_u + crate::num::wrapped_diff_deg(angle, wrap360(prev_u)),
                };
                self.unwrapped_est = Some(unwrapped);
                if let Some(sf) = self.tracker.push_angle(prev.time, unwrapped)? {
                    if let Some(speed_net) = &self.speed {
                        self.last_speed = Some(speed_net.estimate(&sf)?);
                        speed_fresh = true;
                    }
                    speed_features = Some(sf);
                }
            }
        }
        Ok(Some(StreamStep {
            truth: prev,
            estimate,
            speed_features,
            speed_estimate: self.last_speed,
            speed_fresh,
        }))
    }

    /// Turn a stream step into a time-aligned estimate/truth sample.
    pub fn to_sample(&self, step: &StreamStep) -> Result<EstimateSample> {
        let label = angle_to_vsn(step.truth.enc_deg, self.pole_pairs)?;
        let state = classify_state(
            &step.estimate,
            label.global_index,
            self.position.unknown_threshold,
        );
        Ok(EstimateSample {
            time: step.truth.time,
            angle_true_deg: step.truth.enc_deg,
            speed_true_rpm: step.truth.speed_rpm,
            truth_slot: label.global_index,
            estimate: step.estimate,
            state,
            speed_hat_rpm: step.speed_estimate.map(|s| s.speed_hat_rpm),
            speed_fresh: step.speed_fresh,
        })
    }
}

/// Speed-network training examples: run the position estimator over the
/// rows, extract transition events and pair each fresh feature vector with
/// the true speed.
pub fn build_speed_dataset(
    rows: &[DatasetRow],
    position: PositionEstimator,
    pl_cfg: &PipelineConfig,
    pole_pairs: u32,
) -> Result<LabeledDataset> {
    let scaling = *position.scaling();
    let mut stream = EstimationStream::new(position, None, pl_cfg, pole_pairs);
    let mut ds = LabeledDataset::new(SPEED_INPUTS, 1);
    for row in rows {
        if let Some(step) = stream.push(*row)? {
            if let Some(sf) = step.speed_features {
                ds.push(
                    &sf.to_input(&scaling),
                    &[step.truth.speed_rpm * scaling.speed_scale],
                );
            }
        }
    }
    Ok(ds)
}

/// Outcome of one evaluated constant-speed run.
pub struct EvaluatedRun {
    pub accumulator: MetricsAccumulator,
    /// Estimate/truth samples, decimated by `keep_every`.
    pub samples: Vec<EstimateSample>,
    pub cycles: f64,
}

/// Simulate a constant-speed run and evaluate the estimators over at
/// least `cycles` mechanical cycles, streaming so memory stays flat.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_speed(
    speed_rpm: f64,
    cycles: f64,
    params: &MotorParams,
    sim_cfg: &SimConfig,
    cond_cfg: &ConditioningConfig,
    pl_cfg: &PipelineConfig,
    position: PositionEstimator,
    speed_net: SpeedEstimator,
    seed: u64,
    keep_every: usize,
) -> Result<EvaluatedRun> {
    pl_cfg.validate()?;
    check_rates(sim_cfg, cond_cfg)?;
    // Small cushion so the evaluated window spans at least `cycles` full
    // mechanical cycles after settling.
    let duration = cycles / (speed_rpm / 60.0) * 1.02 + pl_cfg.settle_time + 0.05;
    let profile = SpeedProfile::constant(speed_rpm, duration);
    let mut sim = Simulator::new(profile, params.clone(), sim_cfg.clone(), seed)?;
    let input_rate = sim_cfg.acquisition_rate_hz * sim_cfg.substeps as f64;
    let mut chain = SignalChain::new(cond_cfg.clone(), input_rate)?;
    let mut stream = EstimationStream::new(position, Some(speed_net), pl_cfg, params.pole_pairs);

    let start = sim.profile_start_time() + pl_cfg.settle_time;
    let total = sim.profile_start_time() + duration;
    let ticks = (total * sim_cfg.acquisition_rate_hz) as usize;
    let mut acc = MetricsAccumulator::new();
    let mut samples = Vec::new();
    let mut kept = 0usize;
    let mut start_revs = None;
    let mut cond = None;
    for tick in 0..ticks {
        let sample = sim.tick(|t, v| {
            cond = chain.push(t, v);
        })?;
        let c = cond
            .take()
            .ok_or_else(|| Error::Contract("chain did not emit on an A/D instant".into()))?;
        if sample.time < start || tick % pl_cfg.feature_stride != 0 {
            continue;
        }
        if start_revs.is_none() {
            start_revs = Some(sim.revolutions());
        }
        let row = DatasetRow {
            time: c.time,
            v_xs: c.v_xs,
            enc_deg: sample.enc_deg,
            speed_rpm: sample.speed_rpm,
        };
        if let Some(step) = stream.push(row)? {
            let s = stream.to_sample(&step)?;
            acc.record(&s, params.pole_pairs);
            kept += 1;
            if keep_every > 0 && kept % keep_every == 0 {
                samples.push(s);
            }
        }
    }
    Ok(EvaluatedRun {
        accumulator: acc,
        samples,
        cycles: sim.revolutions() - start_revs.unwrap_or(0.0),
    })
}

/// Sensorless run outcome.
pub struct SensorlessOutcome {
    /// Mechanical cycles completed after the handover to estimates.
    pub cycles: f64,
    /// Decimated truth trace.
    pub trace: Vec<TraceSample>,
    /// Decimated estimate/truth samples (empty in sensor-feedback mode).
    pub samples: Vec<EstimateSample>,
}

/// Commutation feedback for [`sensorless_run`].
pub enum Feedback {
    /// Sensor-based control throughout: the reference behaviour.
    Sensor,
    /// Perfect-oracle substitution: the external control path is driven
    /// with the previous sample's true sequence number and speed. With
    /// exact "estimates" no debounce applies, and the run must match the
    /// sensor-based one bit for bit.
    Oracle,
    /// Estimator-driven commutation and speed regulation.
    Estimated {
        position: PositionEstimator,
        speed: SpeedEstimator,
    },
}

/// Drive at a constant target speed; after a sensor-based start, either
/// keep sensor feedback (`Feedback::Sensor`) or hand commutation to the
/// estimators. Aborts with a loss-of-lock fault when unknown estimates
/// persist (or the run stalls past its time budget), reporting the cycles
/// achieved.
#[allow(clippy::too_many_arguments)]
pub fn sensorless_run(
    target_rpm: f64,
    cycles: f64,
    params: &MotorParams,
    sim_cfg: &SimConfig,
    cond_cfg: &ConditioningConfig,
    pl_cfg: &PipelineConfig,
    feedback: Feedback,
    seed: u64,
    keep_every: usize,
) -> Result<SensorlessOutcome> {
    pl_cfg.validate()?;
    check_rates(sim_cfg, cond_cfg)?;
    let duration = cycles / (target_rpm / 60.0) + pl_cfg.settle_time;
    let profile = SpeedProfile::constant(target_rpm, duration);
    let mut sim = Simulator::new(profile, params.clone(), sim_cfg.clone(), seed)?;
    let input_rate = sim_cfg.acquisition_rate_hz * sim_cfg.substeps as f64;
    let mut chain = SignalChain::new(cond_cfg.clone(), input_rate)?;

    let switch_time = sim.profile_start_time() + pl_cfg.settle_time;
    // Time budget: the commanded cycles plus headroom; a stall that never
    // reaches the cycle target is treated as loss of lock.
    let deadline = switch_time + 2.0 * cycles / (target_rpm / 60.0) + 1.0;

    let oracle = matches!(feedback, Feedback::Oracle);
    let mut stream = match feedback {
        Feedback::Sensor | Feedback::Oracle => None,
        Feedback::Estimated { position, speed } => Some(EstimationStream::new(
            position,
            Some(speed),
            pl_cfg,
            params.pole_pairs,
        )),
    };

    let mut trace = Vec::new();
    let mut samples = Vec::new();
    let mut cond = None;
    let mut kept = 0usize;
    let mut tick = 0u64;
    let mut start_revs = None;
    let mut unknown_streak = 0usize;
    let mut applied_seq: Option<u8> = None;
    let mut trigger_count = 0usize;
    let mut speed_feedback = target_rpm;
    let mut prev_sample: Option<TraceSample> = None;

    loop {
        let t = sim.state().time;
        if t >= deadline {
            return Err(Error::LossOfLock {
                cycles: sim.revolutions() - start_revs.unwrap_or(sim.revolutions()),
            });
        }
        let external_active =
            (stream.is_some() || oracle) && t >= switch_time && prev_sample.is_some();

        let gate = if external_active {
            if oracle {
                // Truth read back through the external control path.
                let prev = prev_sample.as_ref().unwrap();
                sim.gate_for(prev.seq, prev.speed_rpm)?
            } else {
                let seq = applied_seq.unwrap_or(prev_sample.as_ref().map(|s| s.seq).unwrap_or(1));
                sim.gate_for(seq, speed_feedback)?
            }
        } else {
            sim.internal_gate()?
        };
        let sample = sim.tick_with(&gate, |tt, v| {
            cond = chain.push(tt, v);
        })?;
        let c = cond
            .take()
            .ok_or_else(|| Error::Contract("chain did not emit on an A/D instant".into()))?;
        // Estimation runs at the same decimated rate the networks were
        // trained on; gates hold between estimates.
        let estimation_tick = tick % pl_cfg.feature_stride as u64 == 0;
        tick += 1;

        if sample.time >= switch_time {
            if start_revs.is_none() {
                start_revs = Some(sim.revolutions());
                applied_seq = Some(sample.seq);
            }
            if let (Some(stream), true) = (stream.as_mut(), estimation_tick) {
                let row = DatasetRow {
                    time: c.time,
                    v_xs: c.v_xs,
                    enc_deg: sample.enc_deg,
                    speed_rpm: sample.speed_rpm,
                };
                if let Some(step) = stream.push(row)? {
                    match (step.estimate.vsn_hat, step.estimate.elec_angle_hat) {
                        (Some(_), Some(elec_hat)) => {
                            unknown_streak = 0;
                            // Advance on the estimated angle approaching the
                            // end of the applied step's 60-degree window.
                            // The voltage pattern is dominated by the
                            // applied rails, so the estimate saturates at
                            // the boundary instead of crossing it; the
                            // margin fires the transition edge just before.
                            let a = applied_seq.unwrap_or(sample.seq);
                            let window_start = 60.0 * (a as f64 - 1.0);
                            let offset = wrap360(elec_hat - window_start);
                            if (60.0 - pl_cfg.commutation_margin_deg..150.0).contains(&offset) {
                                trigger_count += 1;
                                if trigger_count >= pl_cfg.debounce {
                                    applied_seq = Some(a % 6 + 1);
                                    trigger_count = 0;
                                }
                            } else {
                                trigger_count = 0;
                            }
                        }
                        _ => {
                            unknown_streak += 1;
                            if unknown_streak > pl_cfg.loss_of_lock_limit {
                                return Err(Error::LossOfLock {
                                    cycles: sim.revolutions()
                                        - start_revs.unwrap_or(sim.revolutions()),
                                });
                            }
                        }
                    }
                    if let Some(est) = step.speed_estimate {
                        speed_feedback = est.speed_hat_rpm;
                    }
                    let s = stream.to_sample(&step)?;
                    kept += 1;
                    if keep_every > 0 && kept % keep_every == 0 {
                        samples.push(s);
                        trace.push(sample);
                    }
                }
            } else if stream.is_none() && estimation_tick {
                kept += 1;
                if keep_every > 0 && kept % keep_every == 0 {
                    trace.push(sample);
                }
            }
            let done = sim.revolutions() - start_revs.unwrap_or(0.0) >= cycles;
            if done {
                return Ok(SensorlessOutcome {
                    cycles: sim.revolutions() - start_revs.unwrap_or(0.0),
                    trace,
                    samples,
                });
            }
        }
        prev_sample = Some(sample);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::Mlp;
    use crate::motor::NoiseConfig;

    fn quiet_sim() -> SimConfig {
        SimConfig {
            noise: NoiseConfig::silent(),
            ..SimConfig::default()
        }
    }

    fn small_run(rpm: f64, dur: f64, seed: u64) -> ConditionedRun {
        let profile = SpeedProfile::constant(rpm, dur);
        run_conditioned(
            &profile,
            &MotorParams::maxon_ec45(),
            &quiet_sim(),
            &ConditioningConfig::default(),
            &PipelineConfig::default(),
            seed,
        )
        .unwrap()
    }

    #[test]
    fn conditioned_rows_are_decimated_and_post_settle() {
        let run = small_run(600.0, 0.5, 1);
        assert!(!run.rows.is_empty());
        assert!((run.dataset_rate_hz - 12500.0).abs() < 1e-9);
        let dt = run.rows[1].time - run.rows[0].time;
        assert!((dt - 8.0e-5).abs() < 1e-9, "dt {dt}");
        assert!(run.rows[0].time >= run.profile_start_time + 0.25);
        assert_eq!(run.rows.len(), run.raw.len());
    }

    #[test]
    fn position_dataset_shapes_and_targets() {
        let run = small_run(850.0, 0.4, 2);
        let ds =
            build_position_dataset(&run.rows, run.pole_pairs, &FeatureScaling::default()).unwrap();
        assert_eq!(ds.n_in, 10);
        assert_eq!(ds.n_out, 2);
        assert_eq!(ds.m, run.rows.len() - 1);
        // Targets are unit vectors.
        for i in 0..ds.m {
            let y = ds.target(i);
            assert!((y[0] * y[0] + y[1] * y[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_rates_rejected() {
        let mut cond = ConditioningConfig::default();
        cond.adc_rate = 50e3;
        let profile = SpeedProfile::constant(400.0, 0.2);
        let r = run_conditioned(
            &profile,
            &MotorParams::maxon_ec45(),
            &quiet_sim(),
            &cond,
            &PipelineConfig::default(),
            0,
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn sensor_feedback_run_completes_cycles() {
        let out = sensorless_run(
            850.0,
            20.0,
            &MotorParams::maxon_ec45(),
            &quiet_sim(),
            &ConditioningConfig::default(),
            &PipelineConfig::default(),
            Feedback::Sensor,
            3,
            10,
        )
        .unwrap();
        assert!(out.cycles >= 20.0);
        assert!(!out.trace.is_empty());
        assert!(out.samples.is_empty());
    }

    #[test]
    fn oracle_feedback_matches_sensor_run_exactly() {
        let args = (
            600.0,
            10.0,
            MotorParams::maxon_ec45(),
            SimConfig::default(),
            ConditioningConfig::default(),
            PipelineConfig::default(),
        );
        let a = sensorless_run(
            args.0,
            args.1,
            &args.2,
            &args.3,
            &args.4,
            &args.5,
            Feedback::Sensor,
            9,
            5,
        )
        .unwrap();
        let b = sensorless_run(
            args.0,
            args.1,
            &args.2,
            &args.3,
            &args.4,
            &args.5,
            Feedback::Oracle,
            9,
            5,
        )
        .unwrap();
        assert_eq!(a.trace.len(), b.trace.len());
        for (x, y) in a.trace.iter().zip(&b.trace) {
            assert_eq!(x.time.to_bits(), y.time.to_bits());
            assert_eq!(x.mech_deg.to_bits(), y.mech_deg.to_bits());
            assert_eq!(x.speed_rpm.to_bits(), y.speed_rpm.to_bits());
            for k in 0..3 {
                assert_eq!(x.v_raw[k].to_bits(), y.v_raw[k].to_bits());
            }
            assert_eq!(x.seq, y.seq);
        }
    }

    #[test]
    fn garbage_network_loses_lock() {
        // All-zero networks output (0, 0): every estimate is unknown, so
        // the loop must abort with the fault rather than spin forever.
        let pl = PipelineConfig {
            loss_of_lock_limit: 50,
            ..PipelineConfig::default()
        };
        let position =
            PositionEstimator::new(Mlp::zeroed(10, 5, 2), FeatureScaling::default(), 8).unwrap();
        let speed = SpeedEstimator::new(Mlp::zeroed(21, 10, 1), FeatureScaling::default()).unwrap();
        let r = sensorless_run(
            850.0,
            50.0,
            &MotorParams::maxon_ec45(),
            &quiet_sim(),
            &ConditioningConfig::default(),
            &pl,
            Feedback::Estimated { position, speed },
            4,
            0,
        );
        match r {
            Err(Error::LossOfLock { cycles }) => assert!(cycles < 50.0),
            other => panic!("expected loss of lock, got {:?}", other.map(|o| o.cycles)),
        }
    }
}
