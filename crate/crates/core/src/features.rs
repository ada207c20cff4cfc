//! Estimator input features.
//!
//! Position features pair the conditioned phase voltages at two
//! consecutive acquisition instants with their time difference and the
//! per-phase products `voltMul_X = V_X(t) * V_X(t+dt)`; a negative product
//! flags a zero crossing between the two instants. The ten scalars feed
//! the 10-5-2 position network.
//!
//! Speed features are position differentials over time. `speedRatio1`
//! takes a sliding window of `n = 10` position samples and forms the nine
//! ratios `(b_n - b_{n-p}) / (t_n - t_{n-p})`; `speedRatio2` forms one
//! ratio per virtual sequence number from the same state observed in two
//! consecutive electrical cycles. Positions are accumulated (unwrapped)
//! before differencing, which also makes the per-state ratios robust to
//! occasional missed states. The 21 scalars feed the 21-10-1 speed
//! network.
//!
//! Position features are computed per (decimated) dataset row; speed
//! features fire per state-transition event. Both rates are recorded in
//! dataset metadata by the workbench.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::vsn::slot_midpoint_deg;

pub const POSITION_INPUTS: usize = 10;
pub const SPEED_INPUTS: usize = 21;
pub const RATIO1_WINDOW: usize = 10;

/// Scale factors applied to raw features before they enter a network, and
/// to the speed target. Stored with every trained model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureScaling {
    /// Multiplies voltages (with `pair_agc` off, 1 / clamp range maps them
    /// into [-1, 1]).
    pub voltage_scale: f64,
    /// Normalize each feature pair by the shared RMS of its six voltages
    /// before applying `voltage_scale`. The drive's duty regulation makes
    /// raw amplitudes track speed; this keeps the network's input range
    /// uniform across the speed span.
    pub pair_agc: bool,
    /// Multiplies the acquisition time difference.
    pub dt_scale: f64,
    /// Multiplies speed ratios (degrees per second).
    pub ratio_scale: f64,
    /// Multiplies the speed target (rpm).
    pub speed_scale: f64,
}

/// RMS floor for pair normalization, volts (guards standstill noise).
const AGC_FLOOR: f64 = 0.05;

impl Default for FeatureScaling {
    fn default() -> Self {
        Self {
            voltage_scale: 0.5,
            pair_agc: true,
            dt_scale: 1000.0,
            ratio_scale: 1.0 / 9000.0,
            speed_scale: 1.0 / 1500.0,
        }
    }
}

impl FeatureScaling {
    /// Literal fixed scaling into [-1, 1] by the clamp range.
    pub fn fixed(clamp_range: f64) -> Self {
        Self {
            voltage_scale: 1.0 / clamp_range,
            pair_agc: false,
            ..Self::default()
        }
    }
}

/// Ten-element position feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionFeatures {
    pub v_now: [f64; 3],
    pub v_next: [f64; 3],
    pub dt: f64,
    pub volt_mul: [f64; 3],
}

/// Assemble position features from two consecutive voltage samples.
pub fn position_features(v_now: [f64; 3], v_next: [f64; 3], dt: f64) -> Result<PositionFeatures> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("dt {dt} must be > 0")));
    }
    Ok(PositionFeatures {
        v_now,
        v_next,
        dt,
        volt_mul: [
            v_now[0] * v_next[0],
            v_now[1] * v_next[1],
            v_now[2] * v_next[2],
        ],
    })
}

impl PositionFeatures {
    /// Scaled network input, 10 entries:
    /// `[v_now, v_next, dt, volt_mul]`.
    pub fn to_input(&self, s: &FeatureScaling) -> [f64; POSITION_INPUTS] {
        let mut vs = s.voltage_scale;
        if s.pair_agc {
            let sum_sq: f64 = self.v_now.iter().chain(&self.v_next).map(|v| v * v).sum();
            let rms = crate::num::sqrt(sum_sq / 6.0);
            vs /= rms.max(AGC_FLOOR);
        }
        [
            self.v_now[0] * vs,
            self.v_now[1] * vs,
            self.v_now[2] * vs,
            self.v_next[0] * vs,
            self.v_next[1] * vs,
            self.v_next[2] * vs,
            self.dt * s.dt_scale,
            self.volt_mul[0] * vs * vs,
            self.volt_mul[1] * vs * vs,
            self.volt_mul[2] * vs * vs,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.v_now.iter().all(|v| v.is_finite())
            && self.v_next.iter().all(|v| v.is_finite())
            && self.dt.is_finite()
    }
}

/// Nine window ratios from the last `n` unwrapped positions.
///
/// `window` holds `(position_deg_unwrapped, time_s)` pairs, oldest first;
/// the last `n` entries are used. Ratio `p` is
/// `(b_last - b_{last-p}) / (t_last - t_{last-p})` for `p = 1..n-1`.
pub fn speed_ratio1(window: &[(f64, f64)], n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Domain("window size must be >= 2".into()));
    }
    if window.len() < n {
        return Err(Error::InsufficientData {
            needed: n,
            got: window.len(),
        });
    }
    let w = &window[window.len() - n..];
    let (b_n, t_n) = w[n - 1];
    let mut out = Vec::with_capacity(n - 1);
    for p in 1..n {
        let (b_p, t_p) = w[n - 1 - p];
        let dt = t_n - t_p;
        if dt <= 0.0 {
            return Err(Error::Domain(format!(
                "non-increasing timestamps in window (dt {dt})"
            )));
        }
        out.push((b_n - b_p) / dt);
    }
    Ok(out)
}

/// One ratio per virtual sequence number from observations of the same
/// state in two consecutive electrical cycles.
///
/// `pairs[q-1]` holds `((b_prev, t_prev), (b_cur, t_cur))` for state `q`,
/// or `None` when a state was missed. Missing states are imputed with the
/// mean of the computed ratios and flagged `false` in the second return.
pub fn speed_ratio2(
    pairs: &[Option<((f64, f64), (f64, f64))>; 12],
) -> Result<([f64; 12], [bool; 12])> {
    let mut ratios = [0.0; 12];
    let mut fresh = [false; 12];
    let mut sum = 0.0;
    let mut count = 0usize;
    for (q, pair) in pairs.iter().enumerate() {
        if let Some(((b0, t0), (b1, t1))) = pair {
            let dt = t1 - t0;
            if dt <= 0.0 {
                return Err(Error::Domain(format!(
                    "non-increasing timestamps for state {} (dt {dt})",
                    q + 1
                )));
            }
            ratios[q] = (b1 - b0) / dt;
            fresh[q] = true;
            sum += ratios[q];
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mean = sum / count as f64;
    for q in 0..12 {
        if !fresh[q] {
            ratios[q] = mean;
        }
    }
    Ok((ratios, fresh))
}

/// 21-element speed feature vector with freshness flags for the per-state
/// ratios (an imputed slot carries `false`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedFeatures {
    pub ratio1: [f64; 9],
    pub ratio2: [f64; 12],
    pub fresh: [bool; 12],
    /// Time span of the acquisition window the ratios came from, seconds.
    pub window_time: f64,
}

impl SpeedFeatures {
    /// Scaled network input, 21 entries: nine window ratios then twelve
    /// per-state ratios.
    pub fn to_input(&self, s: &FeatureScaling) -> [f64; SPEED_INPUTS] {
        let mut out = [0.0; SPEED_INPUTS];
        for (i, r) in self.ratio1.iter().enumerate() {
            out[i] = r * s.ratio_scale;
        }
        for (i, r) in self.ratio2.iter().enumerate() {
            out[9 + i] = r * s.ratio_scale;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.ratio1.iter().all(|v| v.is_finite()) && self.ratio2.iter().all(|v| v.is_finite())
    }
}

/// Streaming per-state ratio tracker (one ratio per VSN, carried forward
/// until the state is seen again).
#[derive(Debug, Clone, Default)]
pub struct SpeedRatio2Tracker {
    last_obs: [Option<(f64, f64)>; 12],
    ratios: [Option<f64>; 12],
}

impl SpeedRatio2Tracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record a state observation at an unwrapped position and time.
    pub fn observe(&mut self, vsn: u8, beta_deg: f64, t: f64) -> Result<()> {
        if !(1..=12).contains(&vsn) {
            return Err(Error::Domain(format!("vsn {vsn} outside 1-12")));
        }
        let q = vsn as usize - 1;
        if let Some((b0, t0)) = self.last_obs[q] {
            if t <= t0 {
                return Err(Error::Domain(format!(
                    "non-increasing observation time for state {vsn}"
                )));
            }
            self.ratios[q] = Some((beta_deg - b0) / (t - t0));
        }
        self.last_obs[q] = Some((beta_deg, t));
        Ok(())
    }

    /// Current ratio vector; missing states imputed with the mean of the
    /// computed ones and flagged `false`.
    pub fn values(&self) -> Result<([f64; 12], [bool; 12])> {
        let mut ratios = [0.0; 12];
        let mut fresh = [false; 12];
        let mut sum = 0.0;
        let mut count = 0usize;
        for q in 0..12 {
            if let Some(r) = self.ratios[q] {
                ratios[q] = r;
                fresh[q] = true;
                sum += r;
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let mean = sum / count as f64;
        for q in 0..12 {
            if !fresh[q] {
                ratios[q] = mean;
            }
        }
        Ok((ratios, fresh))
    }
}

/// Turns a stream of continuous (unwrapped) position estimates into
/// state-transition events and speed features.
///
/// Events are forward crossings of the slot-midpoint grid. The crossing
/// time is interpolated between the two estimates that straddle the grid
/// point, and the event position is the exactly-known midpoint, so the
/// ratio formulas see precise `(position, time)` pairs. The grid ratchets
/// forward only: noise-induced backward wiggles produce no events and the
/// event times stay strictly increasing.
#[derive(Debug, Clone)]
pub struct VsnEventTracker {
    window_len: usize,
    window: VecDeque<(f64, f64)>,
    ratio2: SpeedRatio2Tracker,
    slot_width: f64,
    prev: Option<(f64, f64)>,
    /// Next midpoint grid value to cross (unwrapped degrees).
    next_mid: f64,
    events: u64,
}

impl VsnEventTracker {
    pub fn new(pole_pairs: u32, window_len: usize) -> Self {
        Self {
            window_len,
            window: VecDeque::with_capacity(window_len + 1),
            ratio2: SpeedRatio2Tracker::new(),
            slot_width: slot_midpoint_deg(0, pole_pairs) * 2.0,
            prev: None,
            next_mid: 0.0,
            events: 0,
        }
    }

    pub fn events_seen(&self) -> u64 {
        self.events
    }

    /// Push a continuous unwrapped angle estimate; returns speed features
    /// when a midpoint crossing occurred and the window is full.
    pub fn push_angle(&mut self, t: f64, angle_deg: f64) -> Result<Option<SpeedFeatures>> {
        let w = self.slot_width;
        let Some((t0, a0)) = self.prev else {
            self.prev = Some((t, angle_deg));
            // First grid point strictly ahead of the starting angle.
            let k = crate::num::floor(angle_deg / w - 0.5) + 1.0;
            self.next_mid = (k + 0.5) * w;
            return Ok(None);
        };
        if t <= t0 {
            return Err(Error::Domain(format!(
                "non-increasing estimate time {t} after {t0}"
            )));
        }
        self.prev = Some((t, angle_deg));
        if angle_deg <= a0 {
            return Ok(None);
        }
        let mut emitted = false;
        while angle_deg >= self.next_mid {
            let frac = (self.next_mid - a0) / (angle_deg - a0);
            let t_cross = t0 + frac * (t - t0);
            self.record_event(t_cross, self.next_mid)?;
            self.next_mid += w;
            emitted = true;
        }
        if !emitted || self.window.len() < self.window_len {
            return Ok(None);
        }
        let contiguous: Vec<(f64, f64)> = self.window.iter().copied().collect();
        let r1 = speed_ratio1(&contiguous, self.window_len)?;
        let (ratio2, fresh) = match self.ratio2.values() {
            Ok(v) => v,
            Err(_) => return Ok(None),
        };
        let mut ratio1 = [0.0; 9];
        for (dst, src) in ratio1.iter_mut().zip(&r1) {
            *dst = *src;
        }
        let window_time = contiguous[contiguous.len() - 1].1 - contiguous[0].1;
        Ok(Some(SpeedFeatures {
            ratio1,
            ratio2,
            fresh,
            window_time,
        }))
    }

    fn record_event(&mut self, t: f64, mid_unwrapped: f64) -> Result<()> {
        if let Some(&(_, t_last)) = self.window.back() {
            if t <= t_last {
                // Interpolation through a near-stall can collapse times;
                // skip rather than poison the window.
                return Ok(());
            }
        }
        self.window.push_back((mid_unwrapped, t));
        if self.window.len() > self.window_len {
            self.window.pop_front();
        }
        let slot = crate::num::floor(mid_unwrapped / self.slot_width) as i64;
        let vsn = (slot.rem_euclid(12)) as u8 + 1;
        self.ratio2.observe(vsn, mid_unwrapped, t)?;
        self.events += 1;
        Ok(())
    }
}
