//! Drive-cycle simulator: six-step inverter, speed regulator, encoder
//! model and noisy terminal-voltage measurement.
//!
//! A run has three phases. From standstill the inverter steps open-loop
//! through the commutation table, ramping the commanded frequency until the
//! handoff speed is reached. From there commutation is slaved to the rotor
//! angle once per acquisition tick and a feedforward-plus-proportional
//! regulator drives the PWM duty so the motor tracks first a bridge ramp to
//! the profile's initial speed and then the commanded profile itself.
//!
//! Measurements are average-value terminal voltages with injected
//! switching ripple, a high-frequency spur and white Gaussian noise; they
//! are produced at the integration substep rate so the conditioning chain
//! can filter them before A/D decimation.

use alloc::format;
use alloc::vec::Vec;

use super::commutation::{commutation_step, step_info};
use super::dynamics::{step_dynamics, terminal_voltages, DriveState, GateCommand};
use super::params::MotorParams;
use super::profile::SpeedProfile;
use crate::error::{Error, Result};
use crate::num::{cos, floor, rpm_to_rad_s, sin, wrap360, Rng, PI};

/// Incremental encoder resolution, pulses per revolution.
pub const ENCODER_COUNTS: u32 = 1024;

/// Quantize a mechanical angle to the encoder grid (floor, no jitter,
/// no index pulse). Step is `360 / counts` degrees.
pub fn encoder_read(mech_angle_deg: f64, counts: u32) -> f64 {
    let step = 360.0 / counts as f64;
    floor(mech_angle_deg / step) * step
}

/// Disturbances injected on the raw voltage measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    /// White Gaussian noise, volts (1 sigma).
    pub measurement_sigma: f64,
    /// Switching ripple amplitude at the PWM frequency, volts.
    pub ripple_amplitude: f64,
    /// High-frequency spur amplitude, volts.
    pub spur_amplitude: f64,
    /// Spur frequency, hertz.
    pub spur_freq_hz: f64,
}

impl NoiseConfig {
    /// Defaults scaled to a rated voltage: sigma is 1% of the rail.
    pub fn for_rated_voltage(v: f64) -> Self {
        Self {
            measurement_sigma: 0.01 * v,
            ripple_amplitude: 0.02 * v,
            spur_amplitude: 0.01 * v,
            spur_freq_hz: 150e3,
        }
    }

    pub fn silent() -> Self {
        Self {
            measurement_sigma: 0.0,
            ripple_amplitude: 0.0,
            spur_amplitude: 0.0,
            spur_freq_hz: 150e3,
        }
    }
}

/// Simulator timing and control configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Acquisition (control tick) rate, hertz.
    pub acquisition_rate_hz: f64,
    /// Integration substeps per acquisition tick.
    pub substeps: u32,
    /// PWM switching frequency (ripple fundamental), hertz.
    pub pwm_freq_hz: f64,
    /// Regulator duty ceiling.
    pub duty_max: f64,
    /// Fixed duty used during the open-loop ramp.
    pub open_loop_duty: f64,
    /// Speed at which commutation hands off from commanded stepping to
    /// rotor-slaved operation, rpm.
    pub handoff_rpm: f64,
    /// Open-loop ramp acceleration, rpm/s.
    pub open_loop_accel_rpm_s: f64,
    /// Closed-loop bridge acceleration toward the profile start, rpm/s.
    pub bridge_accel_rpm_s: f64,
    /// Proportional speed-regulator gain (dimensionless).
    pub speed_gain: f64,
    /// Encoder pulses per revolution.
    pub encoder_counts: u32,
    /// Highest commanded speed the simulator accepts, rpm.
    pub max_speed_rpm: f64,
    pub noise: NoiseConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            acquisition_rate_hz: 100e3,
            substeps: 10,
            pwm_freq_hz: 20e3,
            duty_max: 0.5,
            open_loop_duty: 0.5,
            handoff_rpm: 80.0,
            open_loop_accel_rpm_s: 400.0,
            bridge_accel_rpm_s: 1000.0,
            speed_gain: 4.0,
            encoder_counts: ENCODER_COUNTS,
            max_speed_rpm: 1500.0,
            noise: NoiseConfig::for_rated_voltage(12.0),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.acquisition_rate_hz > 0.0) {
            return Err(Error::Config("acquisition_rate_hz must be > 0".into()));
        }
        if self.substeps == 0 {
            return Err(Error::Config("substeps must be >= 1".into()));
        }
        if !(self.handoff_rpm > 0.0)
            || !(self.open_loop_accel_rpm_s > 0.0)
            || !(self.bridge_accel_rpm_s > 0.0)
        {
            return Err(Error::Config("ramp parameters must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.duty_max) || !(0.0..=1.0).contains(&self.open_loop_duty) {
            return Err(Error::Config("duty limits must lie in [0, 1]".into()));
        }
        if self.encoder_counts == 0 {
            return Err(Error::Config("encoder_counts must be >= 1".into()));
        }
        if self.noise.measurement_sigma < 0.0
            || self.noise.ripple_amplitude < 0.0
            || self.noise.spur_amplitude < 0.0
        {
            return Err(Error::Config("noise amplitudes must be >= 0".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn substep_dt(&self) -> f64 {
        1.0 / (self.acquisition_rate_hz * self.substeps as f64)
    }
}

/// One acquisition-rate trace sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub time: f64,
    /// Noisy raw terminal voltages `[V_A, V_B, V_C]`.
    pub v_raw: [f64; 3],
    /// True mechanical angle, degrees.
    pub mech_deg: f64,
    /// Encoder reading, degrees.
    pub enc_deg: f64,
    /// True speed, rpm.
    pub speed_rpm: f64,
    /// Commutation sequence number for the sample's electrical angle.
    pub seq: u8,
}

/// Ground-truth trace at the acquisition rate.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveTrace {
    pub samples: Vec<TraceSample>,
    pub acquisition_period: f64,
    pub pole_pairs: u32,
    /// End of the open-loop ramp (commutation handoff), seconds.
    pub handoff_time: f64,
    /// Start of profile tracking, seconds.
    pub profile_start_time: f64,
    pub seed: u64,
}

// Complex-recurrence oscillator: one rotation per substep.
#[derive(Debug, Clone, Copy)]
struct Osc {
    c: f64,
    s: f64,
    dc: f64,
    ds: f64,
}

impl Osc {
    fn new(freq_hz: f64, dt: f64) -> Self {
        let w = 2.0 * PI * freq_hz * dt;
        Self {
            c: 1.0,
            s: 0.0,
            dc: cos(w),
            ds: sin(w),
        }
    }

    #[inline]
    fn advance(&mut self) {
        let c = self.c * self.dc - self.s * self.ds;
        let s = self.s * self.dc + self.c * self.ds;
        self.c = c;
        self.s = s;
    }
}

// 120-degree phase offsets so the disturbances survive the virtual-neutral
// subtraction.
const PHASE_COS: [f64; 3] = [1.0, -0.5, -0.5];
const PHASE_SIN: [f64; 3] = [0.0, 0.866_025_403_784_438_6, -0.866_025_403_784_438_6];

/// Stepping drive simulator.
pub struct Simulator {
    params: MotorParams,
    cfg: SimConfig,
    profile: SpeedProfile,
    state: DriveState,
    theta_unwrapped: f64,
    commanded_elec: f64,
    rng: Rng,
    ripple: Osc,
    spur: Osc,
    last_raw: [f64; 3],
    t_handoff: f64,
    t_profile_start: f64,
    seed: u64,
}

impl Simulator {
    pub fn new(
        profile: SpeedProfile,
        params: MotorParams,
        cfg: SimConfig,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        profile.validate()?;
        if profile.max_speed() > cfg.max_speed_rpm {
            return Err(Error::Config(format!(
                "profile commands {} rpm, above the simulator limit {}",
                profile.max_speed(),
                cfg.max_speed_rpm
            )));
        }
        let t_handoff = cfg.handoff_rpm / cfg.open_loop_accel_rpm_s;
        let start = profile.speed_at(0.0).max(cfg.handoff_rpm);
        let t_bridge = (start - cfg.handoff_rpm).abs() / cfg.bridge_accel_rpm_s;
        let dt = cfg.substep_dt();
        Ok(Self {
            state: DriveState::at_rest(),
            theta_unwrapped: 0.0,
            commanded_elec: 0.0,
            rng: Rng::seed_from(seed),
            ripple: Osc::new(cfg.pwm_freq_hz, dt),
            spur: Osc::new(cfg.noise.spur_freq_hz, dt),
            last_raw: [0.0; 3],
            t_handoff,
            t_profile_start: t_handoff + t_bridge,
            seed,
            params,
            cfg,
            profile,
        })
    }

    pub fn state(&self) -> &DriveState {
        &self.state
    }

    pub fn params(&self) -> &MotorParams {
        &self.params
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn handoff_time(&self) -> f64 {
        self.t_handoff
    }

    pub fn profile_start_time(&self) -> f64 {
        self.t_profile_start
    }

    /// Completed mechanical revolutions since the start of the run.
    pub fn revolutions(&self) -> f64 {
        self.theta_unwrapped / 360.0
    }

    /// Current mechanical cycle index (0-based).
    pub fn mech_cycle(&self) -> u32 {
        floor(self.theta_unwrapped / 360.0) as u32
    }

    /// Commanded speed at time `t`, rpm.
    pub fn reference_rpm(&self, t: f64) -> f64 {
        if t < self.t_handoff {
            self.cfg.open_loop_accel_rpm_s * t
        } else if t < self.t_profile_start {
            let start = self.profile.speed_at(0.0).max(self.cfg.handoff_rpm);
            let dir = if start >= self.cfg.handoff_rpm {
                1.0
            } else {
                -1.0
            };
            self.cfg.handoff_rpm + dir * self.cfg.bridge_accel_rpm_s * (t - self.t_handoff)
        } else {
            self.profile
                .speed_at(t - self.t_profile_start)
                .max(self.cfg.handoff_rpm)
        }
    }

    /// Regulator: gate command for a sequence step and a speed feedback
    /// value. Sensor-based and estimator-based operation share this path.
    pub fn gate_for(&self, seq: u8, speed_feedback_rpm: f64) -> Result<GateCommand> {
        let info = step_info(seq)?;
        let w_ref = rpm_to_rad_s(self.reference_rpm(self.state.time));
        let w_est = rpm_to_rad_s(speed_feedback_rpm);
        let ke = self.params.bemf_constant;
        let i_ff = (self.params.load_torque + self.params.viscous_friction * w_ref) / (2.0 * ke);
        let duty = (ke * w_ref
            + self.params.phase_resistance * i_ff
            + self.cfg.speed_gain * ke * (w_ref - w_est))
            / self.params.rated_voltage;
        Ok(GateCommand {
            pair: Some((info.high, info.low)),
            duty: duty.clamp(0.0, self.cfg.duty_max),
        })
    }

    /// Sensor-based gate for the current tick: commanded stepping during
    /// the open-loop ramp, rotor-slaved commutation afterwards.
    pub fn internal_gate(&self) -> Result<GateCommand> {
        if self.state.time < self.t_handoff {
            let seq = commutation_step(wrap360(self.commanded_elec))?.seq;
            let info = step_info(seq)?;
            Ok(GateCommand {
                pair: Some((info.high, info.low)),
                duty: self.cfg.open_loop_duty,
            })
        } else {
            let seq = commutation_step(self.state.elec_angle)?.seq;
            self.gate_for(seq, self.state.speed_rpm)
        }
    }

    /// Advance one acquisition tick under `gate`, feeding every substep's
    /// noisy raw measurement to `tap`.
    pub fn tick_with<T: FnMut(f64, [f64; 3])>(
        &mut self,
        gate: &GateCommand,
        mut tap: T,
    ) -> Result<TraceSample> {
        let dt = self.cfg.substep_dt();
        for _ in 0..self.cfg.substeps {
            let prev_mech = self.state.mech_angle;
            self.state = step_dynamics(&self.state, gate, dt, &self.params)?;
            let mut dm = self.state.mech_angle - prev_mech;
            if dm < 0.0 {
                dm += 360.0;
            }
            self.theta_unwrapped += dm;
            self.commanded_elec += rpm_to_rad_s(self.reference_rpm(self.state.time))
                * (180.0 / PI)
                * self.params.pole_pairs as f64
                * dt;

            self.ripple.advance();
            self.spur.advance();
            let clean = terminal_voltages(
                self.state.elec_angle,
                self.state.speed_rpm,
                gate,
                &self.params,
            );
            let n = &self.cfg.noise;
            let mut v = [0.0; 3];
            for x in 0..3 {
                let ripple = n.ripple_amplitude
                    * (self.ripple.s * PHASE_COS[x] + self.ripple.c * PHASE_SIN[x]);
                let spur =
                    n.spur_amplitude * (self.spur.s * PHASE_COS[x] + self.spur.c * PHASE_SIN[x]);
                v[x] = clean[x] + ripple + spur + n.measurement_sigma * self.rng.gaussian();
            }
            self.last_raw = v;
            tap(self.state.time, v);
        }
        Ok(self.sample())
    }

    /// Advance one tick with internal sensor-based control.
    pub fn tick<T: FnMut(f64, [f64; 3])>(&mut self, tap: T) -> Result<TraceSample> {
        let gate = self.internal_gate()?;
        self.tick_with(&gate, tap)
    }

    fn sample(&self) -> TraceSample {
        TraceSample {
            time: self.state.time,
            v_raw: self.last_raw,
            mech_deg: self.state.mech_angle,
            enc_deg: encoder_read(self.state.mech_angle, self.cfg.encoder_counts),
            speed_rpm: self.state.speed_rpm,
            seq: commutation_step(self.state.elec_angle)
                .map(|s| s.seq)
                .unwrap_or(1),
        }
    }
}

/// Run a full profile with sensor-based control and materialize the trace
/// at the acquisition rate. Deterministic for a fixed seed.
pub fn run_profile(
    profile: &SpeedProfile,
    params: &MotorParams,
    cfg: &SimConfig,
    seed: u64,
) -> Result<DriveTrace> {
    let mut sim = Simulator::new(profile.clone(), params.clone(), cfg.clone(), seed)?;
    let total = sim.profile_start_time() + profile.duration;
    let ticks = (total * cfg.acquisition_rate_hz) as usize;
    let mut samples = Vec::with_capacity(ticks);
    for _ in 0..ticks {
        samples.push(sim.tick(|_, _| {})?);
    }
    Ok(DriveTrace {
        samples,
        acquisition_period: 1.0 / cfg.acquisition_rate_hz,
        pole_pairs: params.pole_pairs,
        handoff_time: sim.handoff_time(),
        profile_start_time: sim.profile_start_time(),
        seed,
    })
}
