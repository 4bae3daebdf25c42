use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::{info, warn};
use varswap_core::{
    fair_strike, simulate_strike, McConfig, ModelParams, Numerics, ParamFile, SwapContract,
};

use crate::report::{ReportRow, RunReport};
use crate::CliError;

/// Options shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Common {
    pub config: PathBuf,
    /// Observation counts to price; empty means the config's `n_obs`.
    pub n_obs: Vec<usize>,
    pub numerics: Numerics,
    /// The invocation, echoed into the report.
    pub command: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct PriceArgs {
    pub common: Common,
}

#[derive(Debug, Clone)]
pub struct McArgs {
    pub common: Common,
    pub mc: McConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Rho13,
    Rho23,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Rho13 => "rho13",
            SweepParam::Rho23 => "rho23",
        }
    }

    fn apply(self, params: &mut ModelParams, value: f64) {
        match self {
            SweepParam::Rho13 => params.rho13 = value,
            SweepParam::Rho23 => params.rho23 = value,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rho13" => Ok(SweepParam::Rho13),
            "rho23" => Ok(SweepParam::Rho23),
            other => Err(format!(
                "unknown sweep parameter '{other}' (expected rho13 or rho23)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub common: Common,
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CompareArgs {
    pub common: Common,
    pub mc: McConfig,
    pub skip_mc: bool,
}

pub fn load_config(path: &Path) -> Result<ParamFile, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::ConfigIo {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::ConfigParse {
        path: path.to_path_buf(),
        source,
    })
}

struct Setup {
    file: ParamFile,
    params: ModelParams,
    contracts: Vec<SwapContract>,
}

fn setup(common: &Common) -> Result<Setup, CliError> {
    let file = load_config(&common.config)?;
    let params = file.model().validate()?;
    // The config's own contract must be valid even when --n overrides it.
    let base = file.contract()?;
    let contracts = if common.n_obs.is_empty() {
        vec![base]
    } else {
        common
            .n_obs
            .iter()
            .map(|&n| SwapContract::new(file.maturity, n))
            .collect::<Result<_, _>>()?
    };
    Ok(Setup {
        file,
        params,
        contracts,
    })
}

pub fn run_price(args: &PriceArgs) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let s = setup(&args.common)?;
    let mut report = RunReport::new(args.common.command.clone(), s.file, args.common.numerics);
    for contract in &s.contracts {
        let quote = fair_strike(&s.params, contract, &args.common.numerics)?;
        info!(
            "N={} strike={}",
            contract.n_obs, quote.strike_variance_points
        );
        report.rows.push(ReportRow::Formula {
            n_obs: contract.n_obs,
            quote,
        });
    }
    report.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

pub fn run_mc(args: &McArgs) -> Result<RunReport, CliError> {
    let start = Instant::now();
    args.mc.validate()?;
    let s = setup(&args.common)?;
    let mut report = RunReport::new(args.common.command.clone(), s.file, args.common.numerics);
    report.mc = Some(args.mc);
    for contract in &s.contracts {
        let estimate = simulate_strike(&s.params, contract, &args.mc)?;
        info!(
            "N={} mc={} se={} ({:.2}s)",
            contract.n_obs, estimate.strike_estimate, estimate.std_error, estimate.elapsed_secs
        );
        report.rows.push(ReportRow::MonteCarlo {
            n_obs: contract.n_obs,
            estimate,
        });
    }
    report.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

pub fn run_sweep(args: &SweepArgs) -> Result<RunReport, CliError> {
    let start = Instant::now();
    if args.values.is_empty() {
        return Err(CliError::Usage(
            "--values must list at least one value".into(),
        ));
    }
    let s = setup(&args.common)?;
    let mut report = RunReport::new(args.common.command.clone(), s.file, args.common.numerics);
    for &value in &args.values {
        let mut params = s.params;
        args.param.apply(&mut params, value);
        let validated = params.validate();
        for contract in &s.contracts {
            let outcome = validated.as_ref().map_err(|e| e.to_string()).and_then(|p| {
                fair_strike(p, contract, &args.common.numerics)
                    .map(|q| q.strike_variance_points)
                    .map_err(|e| e.to_string())
            });
            let (strike, error) = match outcome {
                Ok(k) => (Some(k), None),
                Err(e) => {
                    warn!("{}={} N={}: {}", args.param, value, contract.n_obs, e);
                    (None, Some(e))
                }
            };
            report.rows.push(ReportRow::Sweep {
                param: args.param.name().to_string(),
                value,
                n_obs: contract.n_obs,
                strike,
                error,
            });
        }
    }
    report.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

pub fn run_compare(args: &CompareArgs) -> Result<RunReport, CliError> {
    let start = Instant::now();
    if !args.skip_mc {
        args.mc.validate()?;
    }
    let s = setup(&args.common)?;
    let mut report = RunReport::new(args.common.command.clone(), s.file, args.common.numerics);
    if !args.skip_mc {
        report.mc = Some(args.mc);
    }
    for contract in &s.contracts {
        let formula =
            fair_strike(&s.params, contract, &args.common.numerics)?.strike_variance_points;
        let estimate = if args.skip_mc {
            None
        } else {
            Some(simulate_strike(&s.params, contract, &args.mc)?)
        };
        let rel_error = estimate.map(|e| ((e.strike_estimate - formula) / formula).abs());
        report.rows.push(ReportRow::Compare {
            n_obs: contract.n_obs,
            strike_formula: formula,
            estimate,
            rel_error,
        });
    }
    report.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(report)
}
