//! Signal conditioning: virtual neutral, differential gain, two low-pass
//! stages, clamping and A/D quantization.
//!
//! The chain mirrors a per-phase analog front end. Raw terminal voltages
//! are referenced to a virtual neutral point built from an equal-resistor
//! wye, amplified, scaled so rated-voltage swings occupy about 80% of the
//! clamp range, filtered by a restrictive first-order low-pass and a
//! second-order Butterworth stage, hard-clamped, then decimated and
//! quantized by a mid-tread converter.

use alloc::format;
use alloc::vec::Vec;

use super::filter::{Biquad, FirstOrderLp};
use crate::error::{Error, Result};
use crate::num::round;

/// Front-end configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningConfig {
    /// Differential amplifier gain, V/V.
    pub diff_gain: f64,
    /// First (restrictive) low-pass cutoff, hertz.
    pub lp1_cutoff: f64,
    /// Second (spur-suppression) low-pass cutoff, hertz.
    pub lp2_cutoff: f64,
    /// Hard clamp, volts (symmetric).
    pub clamp_range: f64,
    /// Converter resolution, bits.
    pub adc_bits: u32,
    /// Converter sample rate, hertz.
    pub adc_rate: f64,
    /// Post-gain scale applied so a rated-voltage swing lands inside the
    /// clamp range.
    pub output_scale: f64,
}

impl ConditioningConfig {
    /// Defaults sized for a motor of the given rated voltage: the full
    /// rail maps to 80% of the clamp range.
    pub fn for_rated_voltage(rated: f64) -> Self {
        let diff_gain = 5.0;
        let clamp_range = 5.0;
        Self {
            diff_gain,
            lp1_cutoff: 20e3,
            lp2_cutoff: 100e3,
            clamp_range,
            adc_bits: 16,
            adc_rate: 100e3,
            output_scale: 0.8 * clamp_range / (rated * diff_gain),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lp1_cutoff > 0.0) || !(self.lp2_cutoff > 0.0) {
            return Err(Error::Config("filter cutoffs must be > 0".into()));
        }
        if !(self.clamp_range > 0.0) {
            return Err(Error::Config("clamp_range must be > 0".into()));
        }
        if !(8..=24).contains(&self.adc_bits) {
            return Err(Error::Config(format!(
                "adc_bits {} outside [8, 24]",
                self.adc_bits
            )));
        }
        if !(self.adc_rate > 0.0) {
            return Err(Error::Config("adc_rate must be > 0".into()));
        }
        if !(self.diff_gain > 0.0) || !(self.output_scale > 0.0) {
            return Err(Error::Config("gains must be > 0".into()));
        }
        Ok(())
    }

    /// Quantizer step, volts.
    #[inline]
    pub fn lsb(&self) -> f64 {
        2.0 * self.clamp_range / (1u64 << self.adc_bits) as f64
    }

    /// Net DC gain of the chain (both filters are unity at DC).
    #[inline]
    pub fn dc_gain(&self) -> f64 {
        self.diff_gain * self.output_scale
    }

    #[inline]
    fn code_max(&self) -> i64 {
        (1i64 << (self.adc_bits - 1)) - 1
    }

    #[inline]
    fn code_min(&self) -> i64 {
        -(1i64 << (self.adc_bits - 1))
    }
}

impl Default for ConditioningConfig {
    fn default() -> Self {
        Self::for_rated_voltage(12.0)
    }
}

/// Virtual neutral point of an equal-resistor wye: the neutral is the mean
/// of the three terminals, and the third differential output is derived
/// from the other two so the wye constraint (outputs sum to zero) holds
/// exactly.
pub fn virtual_neutral(v_a: f64, v_b: f64, v_c: f64) -> (f64, [f64; 3]) {
    let v_s = (v_a + v_b + v_c) / 3.0;
    let oa = v_a - v_s;
    let ob = v_b - v_s;
    (v_s, [oa, ob, -(oa + ob)])
}

/// Mid-tread quantizer over the clamp range; codes saturate at the signed
/// range of `adc_bits` (positive full scale costs one LSB of headroom).
pub fn quantize(v: f64, cfg: &ConditioningConfig) -> i32 {
    let code = round(v / cfg.lsb()) as i64;
    code.clamp(cfg.code_min(), cfg.code_max()) as i32
}

/// Reconstruct the voltage at the center of a code's quantization cell.
pub fn dequantize(code: i32, cfg: &ConditioningConfig) -> f64 {
    code as f64 * cfg.lsb()
}

/// One conditioned acquisition sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionedSample {
    pub time: f64,
    /// Filtered, clamped differential voltages `[V_AS, V_BS, V_CS]`.
    pub v_xs: [f64; 3],
    pub adc_codes: [i32; 3],
}

/// Designed filter coefficients, reported for auditability.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterCoeffs {
    pub sample_rate_hz: f64,
    pub lp1_b: [f64; 2],
    pub lp1_a: f64,
    pub lp2_b: [f64; 3],
    pub lp2_a: [f64; 2],
    /// Low-frequency group delay of the cascade, seconds.
    pub group_delay_s: f64,
}

/// Streaming conditioning chain over the three phase channels.
///
/// Input samples arrive at `input_rate_hz` (the simulator substep rate);
/// every `input_rate / adc_rate`-th filtered sample is emitted, clamped
/// and quantized. Per-channel filter state makes a chain instance single
/// -stream; independent instances may run concurrently.
#[derive(Debug, Clone)]
pub struct SignalChain {
    cfg: ConditioningConfig,
    input_rate_hz: f64,
    lp1: [FirstOrderLp; 3],
    lp2: [Biquad; 3],
    decim: usize,
    count: usize,
}

impl SignalChain {
    pub fn new(cfg: ConditioningConfig, input_rate_hz: f64) -> Result<Self> {
        cfg.validate()?;
        let ratio = input_rate_hz / cfg.adc_rate;
        let decim = round(ratio) as usize;
        if decim == 0 || (ratio - decim as f64).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "input rate {input_rate_hz} Hz is not an integer multiple of adc rate {} Hz",
                cfg.adc_rate
            )));
        }
        let lp1 = FirstOrderLp::design(cfg.lp1_cutoff, input_rate_hz)?;
        let lp2 = Biquad::lowpass_butterworth(cfg.lp2_cutoff, input_rate_hz)?;
        Ok(Self {
            cfg,
            input_rate_hz,
            lp1: [lp1.clone(), lp1.clone(), lp1],
            lp2: [lp2.clone(), lp2.clone(), lp2],
            decim,
            count: 0,
        })
    }

    pub fn config(&self) -> &ConditioningConfig {
        &self.cfg
    }

    /// Push one raw sample; returns a conditioned sample on A/D instants.
    pub fn push(&mut self, time: f64, raw: [f64; 3]) -> Option<ConditionedSample> {
        let (_, diff) = virtual_neutral(raw[0], raw[1], raw[2]);
        let gain = self.cfg.dc_gain();
        let mut filtered = [0.0; 3];
        for x in 0..3 {
            let amplified = diff[x] * gain;
            filtered[x] = self.lp2[x].process(self.lp1[x].process(amplified));
        }
        self.count += 1;
        if self.count < self.decim {
            return None;
        }
        self.count = 0;
        let c = self.cfg.clamp_range;
        let mut v_xs = [0.0; 3];
        let mut adc = [0i32; 3];
        for x in 0..3 {
            v_xs[x] = filtered[x].clamp(-c, c);
            adc[x] = quantize(v_xs[x], &self.cfg);
        }
        Some(ConditionedSample {
            time,
            v_xs,
            adc_codes: adc,
        })
    }

    /// Cascade magnitude response (filters only, no gain) at `f_hz`.
    pub fn filter_magnitude_at(&self, f_hz: f64) -> f64 {
        self.lp1[0].magnitude_at(f_hz, self.input_rate_hz)
            * self.lp2[0].magnitude_at(f_hz, self.input_rate_hz)
    }

    /// Linear part of the chain for one channel (gain and filters, no
    /// clamp, no quantizer); used to verify LTI behaviour.
    pub fn process_linear(&mut self, channel: usize, x: f64) -> f64 {
        let amplified = x * self.cfg.dc_gain();
        self.lp2[channel].process(self.lp1[channel].process(amplified))
    }

    pub fn coeffs(&self) -> FilterCoeffs {
        let lp1 = &self.lp1[0];
        let lp2 = &self.lp2[0];
        // Group delay from the phase slope near DC.
        let df = self.input_rate_hz * 1e-6;
        let phase = |f: f64| -> f64 {
            let w = 2.0 * core::f64::consts::PI * f / self.input_rate_hz;
            let ph1 = {
                let (c, s) = (crate::num::cos(w), crate::num::sin(w));
                let n = crate::num::atan2(-lp1.b1 * s, lp1.b0 + lp1.b1 * c);
                let d = crate::num::atan2(-lp1.a1 * s, 1.0 + lp1.a1 * c);
                n - d
            };
            let ph2 = {
                let (c1, s1) = (crate::num::cos(w), crate::num::sin(w));
                let (c2, s2) = (crate::num::cos(2.0 * w), crate::num::sin(2.0 * w));
                let n = crate::num::atan2(
                    -lp2.b[1] * s1 - lp2.b[2] * s2,
                    lp2.b[0] + lp2.b[1] * c1 + lp2.b[2] * c2,
                );
                let d = crate::num::atan2(
                    -lp2.a[0] * s1 - lp2.a[1] * s2,
                    1.0 + lp2.a[0] * c1 + lp2.a[1] * c2,
                );
                n - d
            };
            ph1 + ph2
        };
        let dphi = phase(2.0 * df) - phase(df);
        let dw = 2.0 * core::f64::consts::PI * df;
        FilterCoeffs {
            sample_rate_hz: self.input_rate_hz,
            lp1_b: [lp1.b0, lp1.b1],
            lp1_a: lp1.a1,
            lp2_b: lp2.b,
            lp2_a: lp2.a,
            group_delay_s: -dphi / dw,
        }
    }
}

/// Batch conditioning of a uniformly sampled raw stream.
///
/// Empty input yields empty output; non-uniform timestamps are a format
/// error.
pub fn condition(
    samples: &[(f64, [f64; 3])],
    cfg: &ConditioningConfig,
    input_rate_hz: f64,
) -> Result<Vec<ConditionedSample>> {
    let mut chain = SignalChain::new(cfg.clone(), input_rate_hz)?;
    if samples.is_empty() {
        return Ok(Vec::new());
    }
    let dt = 1.0 / input_rate_hz;
    let mut out = Vec::with_capacity(samples.len() / chain.decim + 1);
    for (i, w) in samples.windows(2).enumerate() {
        let measured = w[1].0 - w[0].0;
        if (measured - dt).abs() > dt * 1e-6 {
            return Err(Error::Format(format!(
                "non-uniform sample spacing at index {}: {measured} s vs {dt} s",
                i + 1
            )));
        }
    }
    for &(t, raw) in samples {
        if let Some(s) = chain.push(t, raw) {
            out.push(s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Rng;

    #[test]
    fn virtual_neutral_examples() {
        let (vs, o) = virtual_neutral(4.0, -4.0, 0.0);
        assert_eq!(vs, 0.0);
        assert_eq!(o, [4.0, -4.0, 0.0]);
        let (vs, o) = virtual_neutral(1.0, 1.0, 1.0);
        assert_eq!(vs, 1.0);
        assert_eq!(o, [0.0, 0.0, 0.0]);
        let (vs, o) = virtual_neutral(6.0, 0.0, 0.0);
        assert_eq!(vs, 2.0);
        assert_eq!(o, [4.0, -2.0, -2.0]);
    }

    #[test]
    fn virtual_neutral_outputs_sum_to_exactly_zero() {
        let mut rng = Rng::seed_from(17);
        for _ in 0..1000 {
            let (_, o) = virtual_neutral(
                rng.range(-12.0, 12.0),
                rng.range(-12.0, 12.0),
                rng.range(-12.0, 12.0),
            );
            assert_eq!(o[0] + o[1] + o[2], 0.0);
        }
    }

    #[test]
    fn quantizer_examples() {
        let cfg = ConditioningConfig::default();
        assert_eq!(quantize(0.0, &cfg), 0);
        assert_eq!(quantize(5.0, &cfg), 32767);
        assert_eq!(quantize(-5.0, &cfg), -32768);
        assert_eq!(cfg.lsb(), 10.0 / 65536.0);
        assert!((cfg.lsb() - 152.587890625e-6).abs() < 1e-18);
    }

    #[test]
    fn quantizer_round_trip_and_monotonicity() {
        let cfg = ConditioningConfig::default();
        let lsb = cfg.lsb();
        let mut rng = Rng::seed_from(5);
        let mut prev_v = -cfg.clamp_range;
        let mut prev_c = quantize(prev_v, &cfg);
        for _ in 0..5000 {
            let v = rng.range(-cfg.clamp_range, cfg.clamp_range - lsb);
            let c = quantize(v, &cfg);
            let err = (dequantize(c, &cfg) - v).abs();
            assert!(err <= lsb / 2.0 + 1e-15, "err {err} at {v}");
            // monotone over a sorted pair
            if v >= prev_v {
                assert!(c >= prev_c);
            }
            prev_v = v;
            prev_c = c;
        }
    }

    #[test]
    fn dc_gain_maps_rail_to_eighty_percent_of_clamp() {
        let cfg = ConditioningConfig::for_rated_voltage(12.0);
        let fs = 1e6;
        // Differential DC input at the full rail.
        let raw = [12.0, -12.0, 0.0];
        let out = condition(
            &(0..40_000)
                .map(|i| (i as f64 / fs, raw))
                .collect::<Vec<_>>(),
            &cfg,
            fs,
        )
        .unwrap();
        let last = out.last().unwrap();
        // Channel A reads (12 - 0)·(chain dc gain) = 12·(1/3) = 4 V.
        assert!((last.v_xs[0] - 4.0).abs() < 1e-6, "{}", last.v_xs[0]);
        assert!((cfg.dc_gain() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn high_frequency_attenuation_meets_designed_response() {
        let cfg = ConditioningConfig::default();
        let fs = 1e6;
        let chain = SignalChain::new(cfg.clone(), fs).unwrap();
        let analytic = chain.filter_magnitude_at(150e3);
        // Drive a small differential 150 kHz sinusoid through the chain and
        // compare the output amplitude against the analytic response.
        let mut chain = SignalChain::new(cfg, fs).unwrap();
        let amp_in = 0.5;
        let mut peak: f64 = 0.0;
        let n = 60_000;
        for i in 0..n {
            let t = i as f64 / fs;
            let s = amp_in * crate::num::sin(2.0 * core::f64::consts::PI * 150e3 * t);
            let y = chain.process_linear(0, s);
            if i > n / 2 {
                peak = peak.max(y.abs());
            }
        }
        let measured_ratio = peak / (amp_in * chain.config().dc_gain());
        assert!(
            measured_ratio <= analytic * 1.122, // within 1 dB
            "measured {measured_ratio}, analytic {analytic}"
        );
        assert!(
            analytic < 0.12,
            "cascade should crush 150 kHz, got {analytic}"
        );
    }

    #[test]
    fn clamp_saturates_exactly() {
        let cfg = ConditioningConfig::default();
        let fs = 1e6;
        // 30 V differential swing: beyond the clamp after gain.
        let samples: Vec<_> = (0..20_000)
            .map(|i| (i as f64 / fs, [30.0, -30.0, 0.0]))
            .collect();
        let out = condition(&samples, &cfg, fs).unwrap();
        let last = out.last().unwrap();
        assert_eq!(last.v_xs[0], cfg.clamp_range);
        assert_eq!(last.v_xs[1], -cfg.clamp_range);
    }

    #[test]
    fn empty_stream_and_bad_timestamps() {
        let cfg = ConditioningConfig::default();
        assert!(condition(&[], &cfg, 1e6).unwrap().is_empty());
        let bad = [(0.0, [0.0; 3]), (1e-6, [0.0; 3]), (5e-6, [0.0; 3])];
        assert!(matches!(condition(&bad, &cfg, 1e6), Err(Error::Format(_))));
    }

    #[test]
    fn chain_is_linear_before_the_clamp() {
        let cfg = ConditioningConfig::default();
        let fs = 1e6;
        let mut c1 = SignalChain::new(cfg.clone(), fs).unwrap();
        let mut c2 = SignalChain::new(cfg.clone(), fs).unwrap();
        let mut c12 = SignalChain::new(cfg, fs).unwrap();
        let mut rng = Rng::seed_from(9);
        for _ in 0..5000 {
            let a = rng.range(-1.0, 1.0);
            let b = rng.range(-1.0, 1.0);
            let y1 = c1.process_linear(0, a);
            let y2 = c2.process_linear(0, b);
            let y12 = c12.process_linear(0, a + b);
            assert!((y12 - (y1 + y2)).abs() < 1e-12);
        }
    }

    #[test]
    fn decimation_produces_adc_rate_output() {
        let cfg = ConditioningConfig::default();
        let fs = 1e6;
        let n = 100_000; // 0.1 s
        let samples: Vec<_> = (0..n).map(|i| (i as f64 / fs, [1.0, 0.0, -1.0])).collect();
        let out = condition(&samples, &cfg, fs).unwrap();
        assert_eq!(out.len(), n / 10);
        let dt = out[1].time - out[0].time;
        assert!((dt - 1e-5).abs() < 1e-12);
    }

    #[test]
    fn quantized_channels_sum_within_one_lsb() {
        let cfg = ConditioningConfig::default();
        let fs = 1e6;
        let mut chain = SignalChain::new(cfg.clone(), fs).unwrap();
        let mut rng = Rng::seed_from(23);
        let mut checked = 0;
        for i in 0..30_000 {
            let t = i as f64 / fs;
            let raw = [
                rng.range(-6.0, 6.0),
                rng.range(-6.0, 6.0),
                rng.range(-6.0, 6.0),
            ];
            if let Some(s) = chain.push(t, raw) {
                let sum_v = s.v_xs[0] + s.v_xs[1] + s.v_xs[2];
                assert!(sum_v.abs() < 1e-9, "pre-quantization sum {sum_v}");
                // Three roundings of values summing to zero stay within
                // 1.5 LSB, i.e. one code.
                let sum_codes = s.adc_codes.iter().map(|&c| c as i64).sum::<i64>();
                assert!(sum_codes.abs() <= 1, "code sum {sum_codes}");
                checked += 1;
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn coeffs_report_is_populated() {
        let chain = SignalChain::new(ConditioningConfig::default(), 1e6).unwrap();
        let c = chain.coeffs();
        assert_eq!(c.sample_rate_hz, 1e6);
        assert!(c.group_delay_s > 0.0 && c.group_delay_s < 1e-4);
    }

    #[test]
    fn misaligned_rates_rejected() {
        let mut cfg = ConditioningConfig::default();
        cfg.adc_rate = 3e5;
        assert!(SignalChain::new(cfg, 1e6).is_err());
    }
}
