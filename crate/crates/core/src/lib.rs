//! Monte Carlo `(ε, δ)`-randomized approximation schemes for the mean of a positive
//! random variable with known relative spread `c = sd/mean`.
//!
//! The crate provides:
//!
//! * sample-size [`plan`]s for the plain mean, classic median of means, and the uniformly
//!   scaled median of means, which needs roughly `6.96 (c/ε)² ln(δ⁻¹)` draws instead of
//!   `19.35 (c/ε)² ln(δ⁻¹)`;
//! * the [`estimators`] that consume those plans;
//! * [`lemmas`], a numerical certificate for the tail bounds the plans rely on;
//! * seedable test [`distributions`] and a failure-rate [`harness`].
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`). The `*64` aliases below fix it
//! to `f64`, which is what the harness and CLI use.

pub mod certify;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod lemmas;
pub mod num;
pub mod output;
pub mod plan;
pub mod rng;
pub mod search;
pub mod source;
pub mod special;

pub use error::{Error, Result};
pub use estimators::{estimate, mean_estimate, median, mom_estimate, sample_mean, scaled_median_estimate};
pub use num::Real;
pub use plan::{mean_plan, mom_plan, plan_for, scaled_plan, EstimatorKind, SamplingPlan, TailForm};
pub use rng::RngStream;
pub use source::SampleSource;

pub type Accuracy64 = plan::Accuracy<f64>;
pub type RelativeSpread64 = plan::RelativeSpread<f64>;
pub type Estimate64 = estimators::Estimate<f64>;
pub type EstimatorConfig64 = estimators::EstimatorConfig<f64>;
pub type DistributionSpec64 = distributions::DistributionSpec<f64>;
pub type DistributionSource64 = distributions::DistributionSource<f64>;
pub type TwoPointSpec64 = lemmas::TwoPointSpec<f64>;
pub type AlphaBound64 = lemmas::AlphaBound<f64>;

pub type Accuracy32 = plan::Accuracy<f32>;
pub type RelativeSpread32 = plan::RelativeSpread<f32>;
pub type Estimate32 = estimators::Estimate<f32>;
pub type EstimatorConfig32 = estimators::EstimatorConfig<f32>;
pub type DistributionSpec32 = distributions::DistributionSpec<f32>;
pub type TwoPointSpec32 = lemmas::TwoPointSpec<f32>;

/// Crate version, embedded in structured output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
