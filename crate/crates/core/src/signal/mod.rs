//! Analog front-end model and A/D acquisition.

mod chain;
mod filter;

pub use chain::{
    condition, dequantize, quantize, virtual_neutral, ConditionedSample, ConditioningConfig,
    FilterCoeffs, SignalChain,
};
pub use filter::{Biquad, FirstOrderLp};
