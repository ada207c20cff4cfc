//! Discrete low-pass filters designed by bilinear transform.

use alloc::format;

use crate::error::{Error, Result};
use crate::num::{cos, sqrt, tan, PI};

fn prewarp(cutoff_hz: f64, sample_rate_hz: f64) -> Result<f64> {
    if !(cutoff_hz > 0.0) {
        return Err(Error::Config(format!("cutoff {cutoff_hz} Hz must be > 0")));
    }
    if cutoff_hz >= sample_rate_hz / 2.0 {
        return Err(Error::Config(format!(
            "cutoff {cutoff_hz} Hz at or above Nyquist for fs {sample_rate_hz} Hz"
        )));
    }
    Ok(tan(PI * cutoff_hz / sample_rate_hz))
}

/// First-order low-pass, `H(s) = wc / (s + wc)` discretized by bilinear
/// transform. Direct form, one state.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderLp {
    pub b0: f64,
    pub b1: f64,
    pub a1: f64,
    z: f64,
}

impl FirstOrderLp {
    pub fn design(cutoff_hz: f64, sample_rate_hz: f64) -> Result<Self> {
        let k = prewarp(cutoff_hz, sample_rate_hz)?;
        let norm = 1.0 / (1.0 + k);
        Ok(Self {
            b0: k * norm,
            b1: k * norm,
            a1: (k - 1.0) * norm,
            z: 0.0,
        })
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.z;
        self.z = self.b1 * x - self.a1 * y;
        y
    }

    pub fn reset(&mut self) {
        self.z = 0.0;
    }

    /// Magnitude of the discrete transfer function at `f_hz`.
    pub fn magnitude_at(&self, f_hz: f64, sample_rate_hz: f64) -> f64 {
        let w = 2.0 * PI * f_hz / sample_rate_hz;
        let (c1, s1) = (cos(w), crate::num::sin(w));
        // |b0 + b1 z^-1| / |1 + a1 z^-1| at z = e^{jw}
        let nr = self.b0 + self.b1 * c1;
        let ni = -self.b1 * s1;
        let dr = 1.0 + self.a1 * c1;
        let di = -self.a1 * s1;
        sqrt((nr * nr + ni * ni) / (dr * dr + di * di))
    }
}

/// Second-order Butterworth low-pass biquad (bilinear transform, Q = 1/√2),
/// direct form II transposed.
#[derive(Debug, Clone, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
    z: [f64; 2],
}

impl Biquad {
    pub fn lowpass_butterworth(cutoff_hz: f64, sample_rate_hz: f64) -> Result<Self> {
        let k = prewarp(cutoff_hz, sample_rate_hz)?;
        let q = core::f64::consts::FRAC_1_SQRT_2;
        let norm = 1.0 / (1.0 + k / q + k * k);
        Ok(Self {
            b: [k * k * norm, 2.0 * k * k * norm, k * k * norm],
            a: [2.0 * (k * k - 1.0) * norm, (1.0 - k / q + k * k) * norm],
            z: [0.0; 2],
        })
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let y = self.b[0] * x + self.z[0];
        self.z[0] = self.b[1] * x - self.a[0] * y + self.z[1];
        self.z[1] = self.b[2] * x - self.a[1] * y;
        y
    }

    pub fn reset(&mut self) {
        self.z = [0.0; 2];
    }

    pub fn is_stable(&self) -> bool {
        self.a[1].abs() < 1.0 && self.a[0].abs() < 1.0 + self.a[1]
    }

    pub fn magnitude_at(&self, f_hz: f64, sample_rate_hz: f64) -> f64 {
        let w = 2.0 * PI * f_hz / sample_rate_hz;
        let (c1, s1) = (cos(w), crate::num::sin(w));
        let (c2, s2) = (cos(2.0 * w), crate::num::sin(2.0 * w));
        let nr = self.b[0] + self.b[1] * c1 + self.b[2] * c2;
        let ni = -self.b[1] * s1 - self.b[2] * s2;
        let dr = 1.0 + self.a[0] * c1 + self.a[1] * c2;
        let di = -self.a[0] * s1 - self.a[1] * s2;
        sqrt((nr * nr + ni * ni) / (dr * dr + di * di))
    }
}
