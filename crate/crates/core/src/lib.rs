//! Robust inference for multiple step-stress accelerated life tests on
//! non-destructive one-shot devices with Weibull lifetimes.
//!
//! Minimum density power divergence estimators (the MLE is the `β = 0`
//! member) with sandwich covariances, confidence intervals for lifetime
//! characteristics, Wald-type tests, influence functions, data-driven tuning
//! and a seeded Monte Carlo engine.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod datasets;
pub mod dpd;
pub mod error;
pub mod influence;
pub mod lifetime;
pub mod model;
pub mod montecarlo;
pub mod report;
pub mod special;
pub mod tuning;
pub mod wald;

pub use error::{Error, Result};
pub use model::{IntervalData, ModelParams, StressPlan};
