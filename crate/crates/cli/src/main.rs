use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use varswap_cli::commands::Common;
use varswap_cli::output;
use varswap_cli::{
    run_compare, run_mc, run_price, run_sweep, CliError, CompareArgs, McArgs, PriceArgs, ReportRow,
    RunReport, SweepArgs, SweepParam,
};
use varswap_core::mc::{DEFAULT_PATHS, DEFAULT_STEPS_PER_INTERVAL};
use varswap_core::{McConfig, MeanConvention, Numerics};

#[derive(Parser)]
#[command(
    name = "varswap",
    version,
    about = "Variance swap fair strikes under Heston-CIR"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Semi-closed-form strikes.
    Price(CommonOpts),
    /// Monte Carlo strikes with standard errors.
    Mc {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        mc: McOpts,
    },
    /// Formula strikes over a grid of one correlation parameter.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// rho13 or rho23.
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Formula and Monte Carlo side by side with relative error.
    Compare {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        mc: McOpts,
        /// Leave the Monte Carlo columns empty.
        #[arg(long)]
        skip_mc: bool,
    },
}

#[derive(Args)]
struct CommonOpts {
    /// Flat JSON parameter file.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated observation counts; defaults to the config's n_obs.
    #[arg(long)]
    n: Option<String>,
    /// RK4 steps per sampling interval.
    #[arg(long, default_value_t = varswap_core::charfn::DEFAULT_ODE_STEPS)]
    ode_steps: usize,
    /// Use the full long-run mean in the square-root fit.
    #[arg(long)]
    full_mean: bool,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run report path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct McOpts {
    #[arg(long, default_value_t = DEFAULT_PATHS)]
    paths: usize,
    /// Euler steps per sampling interval.
    #[arg(long, default_value_t = DEFAULT_STEPS_PER_INTERVAL)]
    steps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

impl McOpts {
    fn config(&self) -> McConfig {
        McConfig {
            n_paths: self.paths,
            steps_per_interval: self.steps,
            seed: self.seed,
            workers: self.workers,
        }
    }
}

fn parse_list<T: FromStr>(flag: &str, raw: &str) -> Result<Vec<T>, CliError> {
    let items: Vec<&str> = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(CliError::Usage(format!(
            "--{flag} must list at least one value"
        )));
    }
    items
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Usage(format!("--{flag}: cannot parse '{s}'")))
        })
        .collect()
}

type Render = fn(&[ReportRow]) -> String;

struct Outputs<'a> {
    out: Option<&'a Path>,
    json: Option<&'a Path>,
}

fn common(opts: &CommonOpts, argv: &[String]) -> Result<Common, CliError> {
    let n_obs = match &opts.n {
        Some(raw) => parse_list("n", raw)?,
        None => Vec::new(),
    };
    let numerics = Numerics {
        ode_steps: opts.ode_steps,
        mean_convention: if opts.full_mean {
            MeanConvention::Full
        } else {
            MeanConvention::Simplified
        },
        ..Numerics::default()
    };
    Ok(Common {
        config: opts.config.clone(),
        n_obs,
        numerics,
        command: argv.to_vec(),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: Cli, argv: &[String]) -> Result<(), CliError> {
    let (report, csv, outputs): (RunReport, Render, Outputs) = match &cli.command {
        Command::Price(opts) => {
            let args = PriceArgs {
                common: common(opts, argv)?,
            };
            (run_price(&args)?, output::price_csv, outputs(opts))
        }
        Command::Mc { common: opts, mc } => {
            let args = McArgs {
                common: common(opts, argv)?,
                mc: mc.config(),
            };
            (run_mc(&args)?, output::mc_csv, outputs(opts))
        }
        Command::Sweep {
            common: opts,
            param,
            values,
        } => {
            let args = SweepArgs {
                common: common(opts, argv)?,
                param: *param,
                values: parse_list("values", values)?,
            };
            (run_sweep(&args)?, output::sweep_csv, outputs(opts))
        }
        Command::Compare {
            common: opts,
            mc,
            skip_mc,
        } => {
            let args = CompareArgs {
                common: common(opts, argv)?,
                mc: mc.config(),
                skip_mc: *skip_mc,
            };
            (run_compare(&args)?, output::compare_csv, outputs(opts))
        }
    };

    let csv = csv(&report.rows);
    let json = report.to_json().expect("run report serializes to JSON") + "\n";
    if let Some(path) = outputs.out {
        write_file(path, &csv)?;
    }
    if let Some(path) = outputs.json {
        write_file(path, &json)?;
    }
    print!("{}", output::table(&csv));
    eprintln!("elapsed {:.3}s", report.elapsed_secs);
    Ok(())
}

fn outputs(opts: &CommonOpts) -> Outputs<'_> {
    Outputs {
        out: opts.out.as_deref(),
        json: opts.json.as_deref(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
