//! Batch front end for `tspower`: reads a netlist and a source description,
//! runs the analysis and writes CSV/JSON reports.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

pub use config::{AnalysisConfig, OutputFormat, Overrides};
pub use error::CliError;
