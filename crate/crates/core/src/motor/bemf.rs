//! Trapezoidal back-EMF.

use super::params::MotorParams;
use crate::num::{rpm_to_rad_s, wrap360};

/// Per-unit trapezoidal shape over one electrical period: +1 flat top for
/// 120 degrees, linear 60-degree ramps, -1 flat bottom for 120 degrees.
///
/// Aligned so that each commutation step conducts two phases sitting on
/// opposite flat tops.
#[inline]
pub fn trapezoid_shape(elec_angle_deg: f64) -> f64 {
    let t = wrap360(elec_angle_deg);
    if t < 120.0 {
        1.0
    } else if t < 180.0 {
        1.0 - (t - 120.0) / 30.0
    } else if t < 300.0 {
        -1.0
    } else {
        -1.0 + (t - 300.0) / 30.0
    }
}

/// Back-EMF of the three phases, volts.
///
/// Each phase is `k_e * w_mech * shape(theta_e - offset)` with the phases
/// offset by 120 electrical degrees.
pub fn bemf(elec_angle_deg: f64, speed_rpm: f64, params: &MotorParams) -> [f64; 3] {
    let w = rpm_to_rad_s(speed_rpm);
    let amp = params.bemf_constant * w;
    [
        amp * trapezoid_shape(elec_angle_deg),
        amp * trapezoid_shape(elec_angle_deg - 120.0),
        amp * trapezoid_shape(elec_angle_deg - 240.0),
    ]
}
