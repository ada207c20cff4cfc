//! Workbench configuration: one JSON file with a section per subsystem.
//!
//! Every field is optional; omitted values take the built-in defaults, so
//! an empty file (or none at all) runs the stock motor. The effective,
//! fully resolved configuration is echoed into every output directory for
//! reproducibility.

use serde::{Deserialize, Serialize};

use bldc_core::features::FeatureScaling;
use bldc_core::mlp::{BatchMode, TrainConfig};
use bldc_core::motor::{MotorParams, NoiseConfig, SimConfig};
use bldc_core::pipeline::PipelineConfig;
use bldc_core::signal::ConditioningConfig;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct MotorSection {
    pub rated_voltage: f64,
    pub pole_pairs: u32,
    pub phase_resistance: f64,
    pub phase_inductance: f64,
    pub mutual_inductance: f64,
    pub bemf_constant: f64,
    pub rotor_inertia: f64,
    pub viscous_friction: f64,
    pub rated_torque: f64,
    pub load_torque: f64,
}

impl Default for MotorSection {
    fn default() -> Self {
        let p = MotorParams::maxon_ec45();
        Self {
            rated_voltage: p.rated_voltage,
            pole_pairs: p.pole_pairs,
            phase_resistance: p.phase_resistance,
            phase_inductance: p.phase_inductance,
            mutual_inductance: p.mutual_inductance,
            bemf_constant: p.bemf_constant,
            rotor_inertia: p.rotor_inertia,
            viscous_friction: p.viscous_friction,
            rated_torque: p.rated_torque,
            load_torque: p.load_torque,
        }
    }
}

impl MotorSection {
    pub fn to_params(&self) -> MotorParams {
        MotorParams {
            rated_voltage: self.rated_voltage,
            pole_pairs: self.pole_pairs,
            phase_resistance: self.phase_resistance,
            phase_inductance: self.phase_inductance,
            mutual_inductance: self.mutual_inductance,
            bemf_constant: self.bemf_constant,
            rotor_inertia: self.rotor_inertia,
            viscous_friction: self.viscous_friction,
            rated_torque: self.rated_torque,
            load_torque: self.load_torque,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    pub acquisition_rate_hz: f64,
    pub substeps: u32,
    pub pwm_freq_hz: f64,
    pub duty_max: f64,
    pub open_loop_duty: f64,
    pub handoff_rpm: f64,
    pub open_loop_accel_rpm_s: f64,
    pub bridge_accel_rpm_s: f64,
    pub speed_gain: f64,
    pub encoder_counts: u32,
    pub max_speed_rpm: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        let c = SimConfig::default();
        Self {
            acquisition_rate_hz: c.acquisition_rate_hz,
            substeps: c.substeps,
            pwm_freq_hz: c.pwm_freq_hz,
            duty_max: c.duty_max,
            open_loop_duty: c.open_loop_duty,
            handoff_rpm: c.handoff_rpm,
            open_loop_accel_rpm_s: c.open_loop_accel_rpm_s,
            bridge_accel_rpm_s: c.bridge_accel_rpm_s,
            speed_gain: c.speed_gain,
            encoder_counts: c.encoder_counts,
            max_speed_rpm: c.max_speed_rpm,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub measurement_sigma: f64,
    pub ripple_amplitude: f64,
    pub spur_amplitude: f64,
    pub spur_freq_hz: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let n = NoiseConfig::for_rated_voltage(MotorParams::maxon_ec45().rated_voltage);
        Self {
            measurement_sigma: n.measurement_sigma,
            ripple_amplitude: n.ripple_amplitude,
            spur_amplitude: n.spur_amplitude,
            spur_freq_hz: n.spur_freq_hz,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ConditioningSection {
    pub diff_gain: f64,
    pub lp1_cutoff: f64,
    pub lp2_cutoff: f64,
    pub clamp_range: f64,
    pub adc_bits: u32,
    pub adc_rate: f64,
    pub output_scale: f64,
}

impl Default for ConditioningSection {
    fn default() -> Self {
        let c = ConditioningConfig::default();
        Self {
            diff_gain: c.diff_gain,
            lp1_cutoff: c.lp1_cutoff,
            lp2_cutoff: c.lp2_cutoff,
            clamp_range: c.clamp_range,
            adc_bits: c.adc_bits,
            adc_rate: c.adc_rate,
            output_scale: c.output_scale,
        }
    }
}

impl ConditioningSection {
    pub fn to_config(&self) -> ConditioningConfig {
        ConditioningConfig {
            diff_gain: self.diff_gain,
            lp1_cutoff: self.lp1_cutoff,
            lp2_cutoff: self.lp2_cutoff,
            clamp_range: self.clamp_range,
            adc_bits: self.adc_bits,
            adc_rate: self.adc_rate,
            output_scale: self.output_scale,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    pub voltage_scale: f64,
    pub pair_agc: bool,
    pub dt_scale: f64,
    pub ratio_scale: f64,
    pub speed_scale: f64,
}

impl Default for ScalingSection {
    fn default() -> Self {
        let s = FeatureScaling::default();
        Self {
            voltage_scale: s.voltage_scale,
            pair_agc: s.pair_agc,
            dt_scale: s.dt_scale,
            ratio_scale: s.ratio_scale,
            speed_scale: s.speed_scale,
        }
    }
}

impl ScalingSection {
    pub fn to_scaling(&self) -> FeatureScaling {
        FeatureScaling {
            voltage_scale: self.voltage_scale,
            pair_agc: self.pair_agc,
            dt_scale: self.dt_scale,
            ratio_scale: self.ratio_scale,
            speed_scale: self.speed_scale,
        }
    }

    pub fn from_scaling(s: &FeatureScaling) -> Self {
        Self {
            voltage_scale: s.voltage_scale,
            pair_agc: s.pair_agc,
            dt_scale: s.dt_scale,
            ratio_scale: s.ratio_scale,
            speed_scale: s.speed_scale,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub feature_stride: usize,
    pub ratio_window: usize,
    pub unknown_threshold: f64,
    pub debounce: usize,
    pub commutation_margin_deg: f64,
    pub loss_of_lock_limit: usize,
    pub settle_time: f64,
    pub scaling: ScalingSection,
}

impl Default for PipelineSection {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            feature_stride: p.feature_stride,
            ratio_window: p.ratio_window,
            unknown_threshold: p.unknown_threshold,
            debounce: p.debounce,
            commutation_margin_deg: p.commutation_margin_deg,
            loss_of_lock_limit: p.loss_of_lock_limit,
            settle_time: p.settle_time,
            scaling: ScalingSection::default(),
        }
    }
}

impl PipelineSection {
    pub fn to_config(&self) -> PipelineConfig {
        PipelineConfig {
            feature_stride: self.feature_stride,
            ratio_window: self.ratio_window,
            unknown_threshold: self.unknown_threshold,
            scaling: self.scaling.to_scaling(),
            debounce: self.debounce,
            commutation_margin_deg: self.commutation_margin_deg,
            loss_of_lock_limit: self.loss_of_lock_limit,
            settle_time: self.settle_time,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// "full" or a mini-batch size.
    pub batch: String,
    pub early_stop_patience: usize,
    /// Train/validation/test fractions.
    pub split: [f64; 3],
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            learning_rate: 0.3,
            max_epochs: 1200,
            batch: "mini:1024".to_string(),
            early_stop_patience: 150,
            split: [0.40, 0.10, 0.50],
        }
    }
}

impl TrainSection {
    pub fn to_config(&self, seed: u64) -> Result<TrainConfig> {
        let batch_mode = if self.batch == "full" {
            BatchMode::Full
        } else if let Some(size) = self.batch.strip_prefix("mini:") {
            BatchMode::Mini(
                size.parse()
                    .map_err(|_| CliError::data(format!("bad batch size in \"{}\"", self.batch)))?,
            )
        } else {
            return Err(CliError::data(format!(
                "batch must be \"full\" or \"mini:<size>\", got \"{}\"",
                self.batch
            )));
        };
        Ok(TrainConfig {
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            batch_mode,
            early_stop_patience: self.early_stop_patience,
            split_fractions: (self.split[0], self.split[1], self.split[2]),
            seed,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub position: TrainSection,
    pub speed: TrainSection,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            position: TrainSection::default(),
            speed: TrainSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub speeds: Vec<f64>,
    pub cycles: f64,
    /// Keep one estimate sample in `keep_every` for the trace files.
    pub keep_every: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            speeds: vec![125.0, 175.0, 325.0, 475.0, 600.0, 725.0, 850.0],
            cycles: 100.0,
            keep_every: 20,
        }
    }
}

/// Top-level configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct WorkbenchConfig {
    /// Default seed; a `--seed` flag overrides it.
    pub seed: Option<u64>,
    pub motor: MotorSection,
    pub drive: DriveSection,
    pub noise: NoiseSection,
    pub conditioning: ConditioningSection,
    pub pipeline: PipelineSection,
    pub training: TrainingSection,
    pub eval: EvalSection,
}

impl WorkbenchConfig {
    pub fn load(path: Option<&std::path::Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::data(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::data(format!("bad config {}: {e}", p.display())))
            }
        }
    }

    /// Seed precedence: command-line flag, then config file, then 42.
    pub fn resolve_seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(42)
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            acquisition_rate_hz: self.drive.acquisition_rate_hz,
            substeps: self.drive.substeps,
            pwm_freq_hz: self.drive.pwm_freq_hz,
            duty_max: self.drive.duty_max,
            open_loop_duty: self.drive.open_loop_duty,
            handoff_rpm: self.drive.handoff_rpm,
            open_loop_accel_rpm_s: self.drive.open_loop_accel_rpm_s,
            bridge_accel_rpm_s: self.drive.bridge_accel_rpm_s,
            speed_gain: self.drive.speed_gain,
            encoder_counts: self.drive.encoder_counts,
            max_speed_rpm: self.drive.max_speed_rpm,
            noise: NoiseConfig {
                measurement_sigma: self.noise.measurement_sigma,
                ripple_amplitude: self.noise.ripple_amplitude,
                spur_amplitude: self.noise.spur_amplitude,
                spur_freq_hz: self.noise.spur_freq_hz,
            },
        }
    }

    /// Write the fully resolved configuration into an output directory.
    pub fn echo_to(&self, out_dir: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(out_dir.join("config.json"), text + "\n")?;
        Ok(())
    }
}
