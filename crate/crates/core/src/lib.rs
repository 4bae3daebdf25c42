//! Fair strikes of discretely sampled variance swaps under the fully
//! correlated Heston-CIR stochastic volatility / stochastic rate model.
//!
//! Two independent routes are provided:
//!
//! * [`pricer::fair_strike`], a semi-closed-form approximation built from the
//!   exponential-affine transform coefficients in [`charfn`] and the moment
//!   approximations in [`moments`];
//! * [`mc::simulate_strike`], a full-truncation Euler Monte Carlo estimator
//!   of the same expectation under the `T`-forward measure.

pub mod charfn;
pub mod error;
pub mod mc;
pub mod model;
pub mod moments;
pub mod ode;
pub mod pricer;
pub mod ratecurve;

pub use error::{Error, ErrorClass, Result};
pub use mc::{simulate_strike, McConfig, McEstimate};
pub use model::{CorrelationFactor, ModelParams, ParamFile, SwapContract};
pub use moments::{MeanConvention, MomentCurves};
pub use pricer::{fair_strike, IntervalQuote, Numerics, StrikeQuote};
