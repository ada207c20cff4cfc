//! BLDC machine model: six-step inverter drive, trapezoidal back-EMF,
//! electrical/mechanical dynamics, encoder model and speed profiles.

mod bemf;
mod commutation;
mod dynamics;
mod params;
mod profile;
mod sim;

pub use bemf::{bemf, trapezoid_shape};
pub use commutation::{commutation_step, step_info, Phase, StepInfo};
pub use dynamics::{step_dynamics, DriveState, GateCommand};
pub use params::MotorParams;
pub use profile::{ProfileKind, SpeedProfile};
pub use sim::{
    encoder_read, run_profile, DriveTrace, NoiseConfig, SimConfig, Simulator, TraceSample,
    ENCODER_COUNTS,
};
