//! Electrical and mechanical constants of the simulated machine.

use alloc::format;

use crate::error::{Error, Result};

/// Machine constants.
///
/// The defaults model a 12 V, 30 W, 8-pole-pair wye-wound motor
/// (Maxon EC 45 class). The back-EMF constant is derived from the rated
/// voltage and the speed implied by the 30 W / 53.2 mNm rating; mutual
/// inductance defaults to zero so the per-phase inductance term is
/// `L - M = L`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotorParams {
    /// Supply rail magnitude, volts.
    pub rated_voltage: f64,
    /// Rotor pole pairs `K_p`.
    pub pole_pairs: u32,
    /// Per-phase stator resistance, ohms.
    pub phase_resistance: f64,
    /// Per-phase self inductance, henries.
    pub phase_inductance: f64,
    /// Mutual inductance between phases, henries.
    pub mutual_inductance: f64,
    /// Back-EMF constant, volt-seconds per mechanical radian.
    pub bemf_constant: f64,
    /// Rotor inertia, kg·m².
    pub rotor_inertia: f64,
    /// Viscous friction, N·m·s per radian.
    pub viscous_friction: f64,
    /// Rated torque, N·m.
    pub rated_torque: f64,
    /// Constant shaft load torque, N·m.
    pub load_torque: f64,
}

impl MotorParams {
    /// 12 V / 30 W / 8 pole pairs, loaded with 35 mNm.
    pub fn maxon_ec45() -> Self {
        // Rated speed from the power and torque ratings: 30 W / 53.2 mNm.
        let rated_speed = 30.0 / 53.2e-3; // rad/s
        Self {
            rated_voltage: 12.0,
            pole_pairs: 8,
            phase_resistance: 1.4,
            phase_inductance: 0.56e-3,
            mutual_inductance: 0.0,
            bemf_constant: 12.0 / rated_speed,
            rotor_inertia: 92.5e-7, // 92.5 g·cm²
            viscous_friction: 2.0e-6,
            rated_torque: 53.2e-3,
            load_torque: 35.0e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rated_voltage", self.rated_voltage),
            ("phase_resistance", self.phase_resistance),
            ("phase_inductance", self.phase_inductance),
            ("bemf_constant", self.bemf_constant),
            ("rotor_inertia", self.rotor_inertia),
            ("viscous_friction", self.viscous_friction),
            ("rated_torque", self.rated_torque),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.pole_pairs == 0 {
            return Err(Error::Config("pole_pairs must be >= 1".into()));
        }
        if self.mutual_inductance < 0.0 || !self.mutual_inductance.is_finite() {
            return Err(Error::Config(format!(
                "mutual_inductance must be >= 0, got {}",
                self.mutual_inductance
            )));
        }
        if self.load_torque < 0.0 || !self.load_torque.is_finite() {
            return Err(Error::Config(format!(
                "load_torque must be >= 0, got {}",
                self.load_torque
            )));
        }
        if self.phase_inductance <= self.mutual_inductance {
            return Err(Error::Config(format!(
                "phase_inductance ({}) must exceed mutual_inductance ({})",
                self.phase_inductance, self.mutual_inductance
            )));
        }
        Ok(())
    }

    /// Effective series inductance of one phase, `L - M`.
    #[inline]
    pub fn series_inductance(&self) -> f64 {
        self.phase_inductance - self.mutual_inductance
    }

    /// No-load speed at the rated rail, rad/s (`V / k_e`).
    #[inline]
    pub fn no_load_speed(&self) -> f64 {
        self.rated_voltage / self.bemf_constant
    }
}

impl Default for MotorParams {
    fn default() -> Self {
        Self::maxon_ec45()
    }
}
