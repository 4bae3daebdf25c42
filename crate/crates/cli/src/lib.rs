//! Batch front-end: reads a flat JSON parameter file, runs formula / Monte
//! Carlo / sweep / comparison workflows and renders text tables, CSV and a
//! JSON run report.

pub mod commands;
pub mod output;
pub mod report;

use std::path::PathBuf;

use thiserror::Error;
use varswap_core::ErrorClass;

pub use commands::{
    run_compare, run_mc, run_price, run_sweep, CompareArgs, McArgs, PriceArgs, SweepArgs,
    SweepParam,
};
pub use report::{ReportRow, RunReport};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read config {path}: {source}")]
    ConfigIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse config {path}: {source}")]
    ConfigParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Pricing(#[from] varswap_core::Error),

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::ConfigIo { .. } | CliError::ConfigParse { .. } => {
                EXIT_USAGE
            }
            CliError::Pricing(e) => match e.class() {
                ErrorClass::Validation => EXIT_VALIDATION,
                ErrorClass::Numerical => EXIT_NUMERICAL,
            },
            CliError::Output { .. } => 1,
        }
    }
}
