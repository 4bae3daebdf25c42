use serde::{Deserialize, Serialize};
use varswap_core::{McConfig, McEstimate, Numerics, ParamFile, StrikeQuote};

/// Everything needed to reproduce a run, plus its results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    /// The command line as invoked.
    pub command: Vec<String>,
    pub parameters: ParamFile,
    pub numerics: Numerics,
    pub mc: Option<McConfig>,
    pub rows: Vec<ReportRow>,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportRow {
    Formula {
        n_obs: usize,
        quote: StrikeQuote,
    },
    MonteCarlo {
        n_obs: usize,
        estimate: McEstimate,
    },
    Sweep {
        param: String,
        value: f64,
        n_obs: usize,
        strike: Option<f64>,
        error: Option<String>,
    },
    Compare {
        n_obs: usize,
        strike_formula: f64,
        estimate: Option<McEstimate>,
        rel_error: Option<f64>,
    },
}

impl RunReport {
    pub fn new(command: Vec<String>, parameters: ParamFile, numerics: Numerics) -> Self {
        RunReport {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            parameters,
            numerics,
            mc: None,
            rows: Vec::new(),
            elapsed_secs: 0.0,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}
