//! Semiparametric estimation in a two-component regression model where one
//! component is fully known and the other has an unknown intercept, slope and
//! symmetric error law.
//!
//! The estimator minimises an empirical symmetry contrast `dₙ(p, α, β)` built
//! from kernel and Monte-Carlo estimates of the θ-transformed data, then
//! recovers the unknown error density and cdf by plug-in.

pub mod contrast;
pub mod density;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod gaussian;
pub mod model;
pub mod quad;
pub mod rng;
pub mod special;

pub use contrast::{ContrastConfig, ContrastContext, HValue};
pub use density::{BandwidthRule, KernelSpec};
pub use error::{Error, Result};
pub use estimator::{EstimateReport, Objective, OptimConfig};
pub use gaussian::GaussianModelSpec;
pub use model::{DistSpec, ParamBox, Sample, Theta, Vartheta};
