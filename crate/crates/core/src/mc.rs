//! Monte Carlo estimate of the fair strike under the `T`-forward measure.
//!
//! The state `(ln S, v, r)` is stepped with full-truncation Euler:
//!
//! ```text
//! d ln S = (r - rho13 B eta sqrt(r v) - v/2) dt + sqrt(v) dW1
//! dv     = (kappa* (theta* - v) - rho23 sigma B eta sqrt(r v)) dt + sigma sqrt(v) dW2
//! dr     = (alpha* beta* - (alpha* + B eta^2) r) dt + eta sqrt(r) dW3
//! ```
//!
//! with `B = B(t, T)` and `v`, `r` replaced by their positive parts wherever
//! they enter a drift or a diffusion. Each path draws from its own ChaCha8
//! stream keyed by `(seed, path index)`, and per-path results are reduced in
//! index order, so estimates are bit-identical for any worker count.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CorrelationFactor, ModelParams, SwapContract};
use crate::pricer::VARIANCE_POINTS;
use crate::ratecurve::BondCoefficient;

pub const DEFAULT_PATHS: usize = 200_000;
pub const DEFAULT_STEPS_PER_INTERVAL: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub steps_per_interval: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: DEFAULT_PATHS,
            steps_per_interval: DEFAULT_STEPS_PER_INTERVAL,
            seed: 42,
            workers: None,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidMcConfig("n_paths must be at least 1".into()));
        }
        if self.steps_per_interval == 0 {
            return Err(Error::InvalidMcConfig(
                "steps_per_interval must be at least 1".into(),
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidMcConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    /// Sample mean of realized variance, in variance points.
    pub strike_estimate: f64,
    /// Standard error of the mean, in variance points.
    pub std_error: f64,
    pub n_paths: usize,
    pub steps_per_interval: usize,
    pub seed: u64,
    pub elapsed_secs: f64,
}

/// Annualized realized variance of an observed path, in variance points:
/// `AF/N * sum_j ((S_j - S_{j-1}) / S_{j-1})^2 * 100^2`.
pub fn realized_variance(observations: &[f64], contract: &SwapContract) -> Result<f64> {
    if observations.len() != contract.n_obs + 1 {
        return Err(Error::InvalidContract(format!(
            "expected {} observations, got {}",
            contract.n_obs + 1,
            observations.len()
        )));
    }
    if let Some((index, &value)) = observations
        .iter()
        .enumerate()
        .find(|(_, &s)| !(s > 0.0 && s.is_finite()))
    {
        return Err(Error::NonPositiveObservation { index, value });
    }
    let sum: f64 = observations
        .windows(2)
        .map(|w| {
            let ret = (w[1] - w[0]) / w[0];
            ret * ret
        })
        .sum();
    Ok(contract.af() / contract.n_obs as f64 * sum * VARIANCE_POINTS)
}

/// splitmix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn path_seed(seed: u64, path: usize) -> u64 {
    splitmix64(seed ^ splitmix64(path as u64))
}

struct PathEngine {
    params: ModelParams,
    factor: CorrelationFactor,
    n_obs: usize,
    steps_per_interval: usize,
    h: f64,
    sqrt_h: f64,
    /// `B(t, T)` at the left end of every Euler step.
    bond: Vec<f64>,
    /// `AF / N * 100^2`.
    scale: f64,
}

impl PathEngine {
    fn new(params: &ModelParams, contract: &SwapContract, config: &McConfig) -> Result<Self> {
        let factor = params.cholesky()?;
        let total = contract.n_obs * config.steps_per_interval;
        let h = contract.maturity / total as f64;
        let coefficient = BondCoefficient::new(params.alpha_star, params.eta);
        let bond = (0..total)
            .map(|k| coefficient.eval(contract.maturity - k as f64 * h))
            .collect();
        Ok(PathEngine {
            params: *params,
            factor,
            n_obs: contract.n_obs,
            steps_per_interval: config.steps_per_interval,
            h,
            sqrt_h: h.sqrt(),
            bond,
            scale: contract.af() / contract.n_obs as f64 * VARIANCE_POINTS,
        })
    }

    fn run(&self, seed: u64, path: usize) -> Result<f64> {
        let p = &self.params;
        let mut rng = ChaCha8Rng::seed_from_u64(path_seed(seed, path));
        let (h, sqrt_h) = (self.h, self.sqrt_h);
        let rho13_eta = p.rho13 * p.eta;
        let rho23_sigma_eta = p.rho23 * p.sigma * p.eta;
        let kappa_theta = p.kappa_star * p.theta_star;
        let alpha_beta = p.alpha_star * p.beta_star;
        let eta2 = p.eta * p.eta;

        let (mut x, mut v, mut r) = (0.0f64, p.v0, p.r0);
        let mut sum_sq = 0.0;
        let mut step = 0;
        for obs in 1..=self.n_obs {
            let x_prev = x;
            for _ in 0..self.steps_per_interval {
                let z: [f64; 3] = [
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                ];
                let dw = self.factor.apply(z);
                let b = self.bond[step];
                let vp = v.max(0.0);
                let rp = r.max(0.0);
                let sv = vp.sqrt();
                let sr = rp.sqrt();
                let cross = b * sv * sr;
                x += (rp - rho13_eta * cross - 0.5 * vp) * h + sv * sqrt_h * dw[0];
                v += (kappa_theta - p.kappa_star * vp - rho23_sigma_eta * cross) * h
                    + p.sigma * sv * sqrt_h * dw[1];
                r +=
                    (alpha_beta - (p.alpha_star + b * eta2) * rp) * h + p.eta * sr * sqrt_h * dw[2];
                step += 1;
            }
            let ret = (x - x_prev).exp_m1();
            if !(ret.is_finite() && v.is_finite() && r.is_finite()) {
                return Err(Error::NonFinitePath {
                    path,
                    observation: obs,
                });
            }
            sum_sq += ret * ret;
        }
        Ok(self.scale * sum_sq)
    }
}

/// Monte Carlo fair strike with its standard error.
pub fn simulate_strike(
    params: &ModelParams,
    contract: &SwapContract,
    config: &McConfig,
) -> Result<McEstimate> {
    params.check_pricing_inputs()?;
    let contract = contract.validate()?;
    config.validate()?;
    let start = Instant::now();
    let engine = PathEngine::new(params, &contract, config)?;

    let simulate = || -> Result<Vec<f64>> {
        (0..config.n_paths)
            .into_par_iter()
            .map(|path| engine.run(config.seed, path))
            .collect()
    };
    let samples = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidMcConfig(e.to_string()))?
            .install(simulate)?,
        None => simulate()?,
    };

    let (mean, std_error) = mean_and_std_error(&samples);
    Ok(McEstimate {
        strike_estimate: mean,
        std_error,
        n_paths: config.n_paths,
        steps_per_interval: config.steps_per_interval,
        seed: config.seed,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

/// Two-pass mean and standard error, summed in index order.
fn mean_and_std_error(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = samples.iter().map(|s| (s - mean) * (s - mean)).sum();
    (mean, (ss / (n - 1.0) / n).sqrt())
}
