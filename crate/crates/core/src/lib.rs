//! Quantile-conditional dependence statistics.
//!
//! The crate estimates covariance and correlation of random variables
//! restricted to *quantile sets*: the event that every coordinate lies
//! between two of its own quantiles. Vanishing conditional correlation on
//! every such set is equivalent to independence, so these estimators double
//! as building blocks for independence tests.
//!
//! Module map:
//!
//! - [`special_fn`]: normal CDF/PDF/quantile, Gauss–Legendre rules, seeded streams.
//! - [`quantile`]: quantile splits, ranks, empirical quantiles, membership masks.
//! - [`cond_stats`]: conditional moments, correlation matrices, projection probes.
//! - [`analytic`]: closed-form and quadrature reference values.
//! - [`timeseries`]: lagged pairs and the conditional autocorrelation function.
//! - [`inference`]: Monte-Carlo null calibration, split-grid scans, test reports.
//! - [`synth`]: seeded synthetic data generators.

pub mod analytic;
pub mod cond_stats;
mod error;
pub mod inference;
pub mod quantile;
pub mod special_fn;
pub mod synth;
pub mod timeseries;

pub use error::{Error, Result};
pub use quantile::{ConditionMask, QuantileBox, QuantileSplit, SampleMatrix};
