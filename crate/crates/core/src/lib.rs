//! Simulation and sensorless estimation core for three-phase BLDC drives.
//!
//! The crate models a PWM-driven BLDC motor under six-step commutation,
//! the analog conditioning chain that prepares terminal phase voltages for
//! acquisition, and a neural estimation pipeline that recovers rotor
//! position and speed from those voltages alone:
//!
//! - [`motor`] — electrical/mechanical dynamics, six-step drive, encoder
//!   model and speed profiles.
//! - [`signal`] — virtual-neutral measurement, filtering, clamping and
//!   A/D quantization of the raw terminal voltages.
//! - [`vsn`] — the 12-state-per-electrical-cycle rotor labelling scheme
//!   and its sine/cosine training labels.
//! - [`features`] — voltage-product position features and windowed
//!   speed-ratio features.
//! - [`mlp`] — a small three-layer perceptron with backpropagation
//!   training, used for both estimators.
//! - [`estimator`] — angle reconstruction, state classification and the
//!   stateful position/speed estimators.
//! - [`metrics`] — confusion counts, F-score, MAE and per-speed reports.
//! - [`pipeline`] — dataset construction, streaming evaluation and the
//!   sensorless drive loop.
//!
//! `no_std` builds (with `alloc`) are supported through the `libm`
//! feature; the companion workbench crate carries all file formats and
//! the command-line interface.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("bldc-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod error;
pub mod estimator;
pub mod features;
pub mod metrics;
pub mod mlp;
pub mod motor;
pub mod num;
pub mod pipeline;
pub mod signal;
pub mod vsn;

pub use error::Error;
