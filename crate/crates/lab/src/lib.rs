//! Experiment harness for the defocusing NLS laboratory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod fit;
pub mod report;
pub mod sweep;

pub use config::{ConfigError, ExperimentConfig, ExperimentName};
pub use fit::RateFit;
pub use report::{Check, ExperimentReport, Table};
