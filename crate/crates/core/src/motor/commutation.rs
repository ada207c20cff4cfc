//! Six-step commutation sequence for clockwise rotation.
//!
//! Each 60-degree electrical step drives one phase high and one low through
//! a pair of inverter transistors while the third phase floats. Ranges are
//! half-open `[60(n-1), 60n)` so every angle maps to exactly one step.

use alloc::format;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    A,
    B,
    C,
}

impl Phase {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Phase::A => 0,
            Phase::B => 1,
            Phase::C => 2,
        }
    }
}

/// One row of the commutation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepInfo {
    /// Sequence number, 1-6.
    pub seq: u8,
    /// Phase driven by the high-side transistor.
    pub high: Phase,
    /// Phase driven by the low-side transistor.
    pub low: Phase,
    /// Floating phase.
    pub floating: Phase,
    /// High-side transistor number (Q1/Q3/Q5).
    pub high_transistor: u8,
    /// Low-side transistor number (Q2/Q4/Q6).
    pub low_transistor: u8,
}

const TABLE: [StepInfo; 6] = [
    StepInfo {
        seq: 1,
        high: Phase::A,
        low: Phase::B,
        floating: Phase::C,
        high_transistor: 1,
        low_transistor: 4,
    },
    StepInfo {
        seq: 2,
        high: Phase::A,
        low: Phase::C,
        floating: Phase::B,
        high_transistor: 1,
        low_transistor: 6,
    },
    StepInfo {
        seq: 3,
        high: Phase::B,
        low: Phase::C,
        floating: Phase::A,
        high_transistor: 3,
        low_transistor: 6,
    },
    StepInfo {
        seq: 4,
        high: Phase::B,
        low: Phase::A,
        floating: Phase::C,
        high_transistor: 3,
        low_transistor: 2,
    },
    StepInfo {
        seq: 5,
        high: Phase::C,
        low: Phase::A,
        floating: Phase::B,
        high_transistor: 5,
        low_transistor: 2,
    },
    StepInfo {
        seq: 6,
        high: Phase::C,
        low: Phase::B,
        floating: Phase::A,
        high_transistor: 5,
        low_transistor: 4,
    },
];

/// Table row for a sequence number in 1-6.
pub fn step_info(seq: u8) -> Result<StepInfo> {
    if !(1..=6).contains(&seq) {
        return Err(Error::Domain(format!("sequence number {seq} outside 1-6")));
    }
    Ok(TABLE[seq as usize - 1])
}

/// Map an electrical angle in `[0, 360)` to its commutation step.
pub fn commutation_step(elec_angle_deg: f64) -> Result<StepInfo> {
    if !elec_angle_deg.is_finite() || !(0.0..360.0).contains(&elec_angle_deg) {
        return Err(Error::Domain(format!(
            "electrical angle {elec_angle_deg} outside [0, 360)"
        )));
    }
    let n = (elec_angle_deg / 60.0) as usize;
    Ok(TABLE[n.min(5)])
}
