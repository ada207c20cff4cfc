//! Commanded speed trajectories.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    RampUp,
    Triangle,
    UpDown,
    Constant,
}

/// Piecewise-linear commanded speed over time, rpm.
///
/// Times are relative to the start of closed-loop profile tracking; the
/// simulator prepends its own standstill ramp-up.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile {
    pub kind: ProfileKind,
    /// `(time_s, speed_rpm)` knots, strictly time-ordered.
    pub setpoints: Vec<(f64, f64)>,
    /// Total tracked duration, seconds.
    pub duration: f64,
}

impl SpeedProfile {
    pub fn constant(rpm: f64, duration: f64) -> Self {
        Self {
            kind: ProfileKind::Constant,
            setpoints: alloc::vec![(0.0, rpm)],
            duration,
        }
    }

    pub fn ramp_up(target_rpm: f64, ramp_time: f64, duration: f64) -> Self {
        Self {
            kind: ProfileKind::RampUp,
            setpoints: alloc::vec![(0.0, 0.0), (ramp_time, target_rpm)],
            duration,
        }
    }

    /// Alternating rise and fall between `lo` and `hi` with the given
    /// full period.
    pub fn triangle(lo_rpm: f64, hi_rpm: f64, period: f64, duration: f64) -> Self {
        let mut setpoints = alloc::vec![(0.0, lo_rpm)];
        let half = period / 2.0;
        let mut t = half;
        let mut at_top = true;
        while t < duration + half {
            setpoints.push((t, if at_top { hi_rpm } else { lo_rpm }));
            at_top = !at_top;
            t += half;
        }
        Self {
            kind: ProfileKind::Triangle,
            setpoints,
            duration,
        }
    }

    /// Speed rises and falls alternately across the full range:
    /// 85, 250, 125, 600, 400, 950, 750, 1500 rpm, evenly spaced ramps.
    pub fn up_down(duration: f64) -> Self {
        const KNOTS: [f64; 8] = [85.0, 250.0, 125.0, 600.0, 400.0, 950.0, 750.0, 1500.0];
        let seg = duration / (KNOTS.len() - 1) as f64;
        let setpoints = KNOTS
            .iter()
            .enumerate()
            .map(|(i, &rpm)| (i as f64 * seg, rpm))
            .collect();
        Self {
            kind: ProfileKind::UpDown,
            setpoints,
            duration,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.setpoints.is_empty() {
            return Err(Error::Config("profile has no setpoints".into()));
        }
        if !(self.duration > 0.0) {
            return Err(Error::Config(format!(
                "profile duration {} must be > 0",
                self.duration
            )));
        }
        let mut prev = f64::NEG_INFINITY;
        for &(t, rpm) in &self.setpoints {
            if !t.is_finite() || t <= prev {
                return Err(Error::Config(format!(
                    "profile setpoint times must strictly increase (at t={t})"
                )));
            }
            if !rpm.is_finite() || rpm < 0.0 {
                return Err(Error::Config(format!("profile speed {rpm} must be >= 0")));
            }
            prev = t;
        }
        Ok(())
    }

    /// Commanded speed at `t` (clamped to the profile's ends).
    pub fn speed_at(&self, t: f64) -> f64 {
        let pts = &self.setpoints;
        if t <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let (t0, r0) = w[0];
            let (t1, r1) = w[1];
            if t < t1 {
                return r0 + (r1 - r0) * (t - t0) / (t1 - t0);
            }
        }
        pts[pts.len() - 1].1
    }

    pub fn max_speed(&self) -> f64 {
        self.setpoints.iter().fold(0.0, |m, &(_, r)| m.max(r))
    }
}
