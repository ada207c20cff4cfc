//! Angle reconstruction, state classification and the stateful
//! position/speed estimators.
//!
//! The position network regresses the sine/cosine of the within-cycle
//! (electrical) slot midpoint; the four-quadrant arctangent of that pair
//! recovers the angle regardless of the output magnitude, so inconsistent
//! values larger than one are harmless. Confidence is the chord distance
//! between the normalized output and the nearest slot-midpoint label on
//! the unit circle; estimates farther than the unknown threshold carry no
//! state.
//!
//! Absolute mechanical angle is the within-cycle angle plus a tracked
//! electrical-cycle index. The cycle identity is not observable from the
//! phase voltages (every electrical cycle produces the same waveform), so
//! the tracker is seeded from the sensor-based phase of a run and advanced
//! on wrap-around of confident estimates; low-confidence estimates hold
//! the previous cycle index.

use alloc::format;

use crate::error::{Error, Result};
use crate::features::{FeatureScaling, PositionFeatures, SpeedFeatures};
use crate::mlp::Mlp;
use crate::num::{atan2, rad_to_deg, sin_deg, sqrt, wrap360, wrapped_diff_deg};

/// Classification of one position estimate against the encoder truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateClass {
    Successful,
    Unknown,
    Erroneous,
}

impl StateClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StateClass::Successful => "successful",
            StateClass::Unknown => "unknown",
            StateClass::Erroneous => "erroneous",
        }
    }
}

/// One position estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionEstimate {
    /// Sine/cosine consistent with `angle_hat` (magnitude preserved from
    /// the raw network output).
    pub sin_hat: f64,
    pub cos_hat: f64,
    /// Estimated mechanical angle, degrees in `[0, 360)`; `None` only for
    /// the degenerate all-zero network output.
    pub angle_hat: Option<f64>,
    /// Estimated electrical angle, degrees in `[0, 360)`.
    pub elec_angle_hat: Option<f64>,
    /// Estimated state within the electrical cycle; `None` when unknown.
    pub vsn_hat: Option<u8>,
    /// Estimated 1-based global slot (state + tracked cycle).
    pub global_slot_hat: Option<u32>,
    /// Chord distance from the normalized output to the nearest label.
    pub confidence: f64,
}

/// One speed estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedEstimate {
    pub speed_hat_rpm: f64,
    /// Span of the feature window that produced it, seconds.
    pub window_time: f64,
}

/// Half the chord distance between adjacent label midpoints for `n`
/// equally spaced slots: `sin(180/n degrees)`.
pub fn default_unknown_threshold(n_slots: u32) -> f64 {
    sin_deg(180.0 / n_slots as f64)
}

/// Four-quadrant arctangent mapped onto `[0, 360)` degrees; `None` for the
/// undefined (0, 0) input.
pub fn reconstruct_angle_deg(sin_hat: f64, cos_hat: f64) -> Option<f64> {
    if sin_hat == 0.0 && cos_hat == 0.0 {
        return None;
    }
    Some(wrap360(rad_to_deg(atan2(sin_hat, cos_hat))))
}

fn nearest_slot(angle_deg: f64, n_slots: u32) -> (u32, f64) {
    let width = 360.0 / n_slots as f64;
    let slot = ((angle_deg / width) as u32).min(n_slots - 1);
    let mid = (slot as f64 + 0.5) * width;
    let half_angle = wrapped_diff_deg(angle_deg, mid) / 2.0;
    // Chord between unit vectors separated by d degrees is 2 sin(d/2).
    (slot, 2.0 * sin_deg(half_angle).abs())
}

/// Interpret a raw sine/cosine pair as a mechanical-angle estimate over
/// the `12 * K_p` slot labels. Stateless; magnitude does not affect the
/// angle.
pub fn reconstruct_estimate(
    sin_hat: f64,
    cos_hat: f64,
    pole_pairs: u32,
    unknown_threshold: f64,
) -> PositionEstimate {
    let Some(angle) = reconstruct_angle_deg(sin_hat, cos_hat) else {
        return PositionEstimate {
            sin_hat,
            cos_hat,
            angle_hat: None,
            elec_angle_hat: None,
            vsn_hat: None,
            global_slot_hat: None,
            confidence: f64::INFINITY,
        };
    };
    let n_slots = 12 * pole_pairs;
    let (slot, confidence) = nearest_slot(angle, n_slots);
    let known = confidence <= unknown_threshold;
    PositionEstimate {
        sin_hat,
        cos_hat,
        angle_hat: Some(angle),
        elec_angle_hat: Some(wrap360(angle * pole_pairs as f64)),
        vsn_hat: known.then_some((slot % 12 + 1) as u8),
        global_slot_hat: known.then_some(slot + 1),
        confidence,
    }
}

/// Classify an estimate against the encoder's 1-based global slot:
/// unknown when confidence exceeds the threshold, successful when both
/// the state and the cycle slot match, erroneous otherwise.
pub fn classify_state(
    estimate: &PositionEstimate,
    truth_global_slot: u32,
    threshold: f64,
) -> StateClass {
    if estimate.confidence > threshold || estimate.global_slot_hat.is_none() {
        return StateClass::Unknown;
    }
    if estimate.global_slot_hat == Some(truth_global_slot) {
        StateClass::Successful
    } else {
        StateClass::Erroneous
    }
}

/// Stateful position estimator: 10-5-2 network plus cycle tracking.
#[derive(Debug, Clone)]
pub struct PositionEstimator {
    net: Mlp,
    scaling: FeatureScaling,
    pole_pairs: u32,
    pub unknown_threshold: f64,
    cycle: u32,
    last_elec: Option<f64>,
}

impl PositionEstimator {
    pub fn new(net: Mlp, scaling: FeatureScaling, pole_pairs: u32) -> Result<Self> {
        net.check_shapes()?;
        if net.topology() != (10, 5, 2) {
            return Err(Error::Contract(format!(
                "position network topology {:?} is not (10, 5, 2)",
                net.topology()
            )));
        }
        if pole_pairs == 0 {
            return Err(Error::Contract("pole_pairs must be >= 1".into()));
        }
        Ok(Self {
            net,
            scaling,
            pole_pairs,
            unknown_threshold: default_unknown_threshold(12),
            cycle: 0,
            last_elec: None,
        })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn scaling(&self) -> &FeatureScaling {
        &self.scaling
    }

    /// Seed the cycle tracker, e.g. from the last sensor-based sample
    /// before sensorless operation.
    pub fn seed_cycle(&mut self, cycle_zero_based: u32, elec_angle_deg: f64) {
        self.cycle = cycle_zero_based % self.pole_pairs;
        self.last_elec = Some(elec_angle_deg);
    }

    pub fn cycle(&self) -> u32 {
        self.cycle
    }

    /// Estimate the rotor position from one feature vector.
    pub fn estimate(&mut self, features: &PositionFeatures) -> Result<PositionEstimate> {
        if !features.is_finite() {
            return Err(Error::Estimation("non-finite position features".into()));
        }
        let x = features.to_input(&self.scaling);
        let (_, h) = self.net.forward(&x)?;
        let (s, c) = (h[0], h[1]);
        let norm = sqrt(s * s + c * c);
        if !norm.is_finite() {
            return Err(Error::Estimation("non-finite network output".into()));
        }
        let Some(elec) = reconstruct_angle_deg(s, c) else {
            return Ok(PositionEstimate {
                sin_hat: s,
                cos_hat: c,
                angle_hat: None,
                elec_angle_hat: None,
                vsn_hat: None,
                global_slot_hat: None,
                confidence: f64::INFINITY,
            });
        };
        let (q0, confidence) = nearest_slot(elec, 12);
        let known = confidence <= self.unknown_threshold;

        if known {
            if let Some(prev) = self.last_elec {
                if elec < 90.0 && prev > 270.0 {
                    self.cycle = (self.cycle + 1) % self.pole_pairs;
                } else if elec > 270.0 && prev < 90.0 {
                    self.cycle = (self.cycle + self.pole_pairs - 1) % self.pole_pairs;
                }
            }
            self.last_elec = Some(elec);
        }

        let mech = wrap360((self.cycle as f64 * 360.0 + elec) / self.pole_pairs as f64);
        Ok(PositionEstimate {
            sin_hat: norm * sin_deg(mech),
            cos_hat: norm * crate::num::cos_deg(mech),
            angle_hat: Some(mech),
            elec_angle_hat: Some(elec),
            vsn_hat: known.then_some((q0 + 1) as u8),
            global_slot_hat: known.then_some(self.cycle * 12 + q0 + 1),
            confidence,
        })
    }
}

/// Speed estimator: 21-10-1 network over speed-ratio features.
#[derive(Debug, Clone)]
pub struct SpeedEstimator {
    net: Mlp,
    scaling: FeatureScaling,
}

impl SpeedEstimator {
    pub fn new(net: Mlp, scaling: FeatureScaling) -> Result<Self> {
        net.check_shapes()?;
        if net.topology() != (21, 10, 1) {
            return Err(Error::Contract(format!(
                "speed network topology {:?} is not (21, 10, 1)",
                net.topology()
            )));
        }
        Ok(Self { net, scaling })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn estimate(&self, features: &SpeedFeatures) -> Result<SpeedEstimate> {
        if !features.is_finite() {
            return Err(Error::Estimation("non-finite speed features".into()));
        }
        let x = features.to_input(&self.scaling);
        let (_, h) = self.net.forward(&x)?;
        if !h[0].is_finite() {
            return Err(Error::Estimation("non-finite network output".into()));
        }
        Ok(SpeedEstimate {
            speed_hat_rpm: h[0] / self.scaling.speed_scale,
            window_time: features.window_time,
        })
    }
}
