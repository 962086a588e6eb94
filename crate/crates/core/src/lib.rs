//! Gradient-boosted decision trees for imbalanced binary classification,
//! with the metrics, resampling, tuning and experiment harness around them.

pub mod cli;
pub mod data;
pub mod error;
pub mod gbt;
pub mod harness;
pub mod metrics;
pub mod rng;
pub mod sampling;
pub mod tuning;

pub use error::{Error, Result};
