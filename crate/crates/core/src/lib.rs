//! Simulation and verification toolkit for fractional Brownian motion,
//! its Volterra kernel calculus, and SDEs driven by fBm with singular
//! (local-time) drift.

pub mod bound_eval;
pub mod error;
pub mod experiment;
pub mod fbm;
pub mod flow_regularity;
pub mod frac_calc;
pub mod girsanov;
pub mod kernel_ops;
pub mod quad;
pub mod rng;
pub mod scalar;
pub mod shuffle_algebra;
pub mod skew_sde;
pub mod stats;

#[cfg(test)]
mod oracle;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision aliases of the generic types.
pub type SampledFunctionF64 = frac_calc::SampledFunction<f64>;
pub type FracOrderF64 = frac_calc::FracOrder<f64>;
pub type HurstF64 = fbm::HurstParam<f64>;
pub type TimeGridF64 = fbm::TimeGrid<f64>;
pub type PathBatchF64 = fbm::PathBatch<f64>;
pub type SkewConfigF64 = skew_sde::SkewConfig<f64>;
pub type MollifiedDriftF64 = skew_sde::MollifiedDrift<f64>;
pub type FlowDerivativeEstimateF64 = flow_regularity::FlowDerivativeEstimate<f64>;
pub type SobolevEstimateF64 = flow_regularity::SobolevEstimate<f64>;
pub type BoundParamsF64 = bound_eval::BoundParams<f64>;
pub type MeanEstimateF64 = stats::MeanEstimate<f64>;

/// Single-precision aliases.
pub type SampledFunctionF32 = frac_calc::SampledFunction<f32>;
pub type PathBatchF32 = fbm::PathBatch<f32>;
pub type TimeGridF32 = fbm::TimeGrid<f32>;
