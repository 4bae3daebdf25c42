//! Semi-closed-form fair strike.
//!
//! For each interval `j` the conditional expectation of the squared simple
//! return given the state at `t_{j-1}` is
//!
//! ```text
//! G_j(v, r) = exp(C~ + D~ v + E~ r) - 2 exp(C^ + E^ r) + 1
//! ```
//!
//! with `~` the coefficients at `w = -2i` and `^` those at `w = -i`, all at
//! `tau = dt`. The first interval starts from the known state `(v0, r0)`;
//! later intervals average over the state at `t_{j-1}` using normal
//! approximations of `v` and `r` and the lognormal moment identity. The
//! strike is `K = 100^2 / T * sum_j G_j`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfn::{omega_linear, omega_squared, CoefficientSolver, Interval, DEFAULT_ODE_STEPS};
use crate::error::{Error, Result};
use crate::model::{ModelParams, SwapContract};
use crate::moments::{MeanConvention, MomentCurves, NormalStateApprox};

/// Variance points per unit of annualized variance.
pub const VARIANCE_POINTS: f64 = 100.0 * 100.0;

const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    /// RK4 steps per sampling interval.
    pub ode_steps: usize,
    pub mean_convention: MeanConvention,
    /// Solve intervals on the rayon pool. Results do not depend on this.
    pub parallel: bool,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            ode_steps: DEFAULT_ODE_STEPS,
            mean_convention: MeanConvention::Simplified,
            parallel: true,
        }
    }
}

/// Coefficients of one interval at `tau = dt` (real parts).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalCoefficients {
    pub c_tilde: f64,
    pub d_tilde: f64,
    pub e_tilde: f64,
    pub c_hat: f64,
    pub e_hat: f64,
}

impl IntervalCoefficients {
    pub const ZERO: IntervalCoefficients = IntervalCoefficients {
        c_tilde: 0.0,
        d_tilde: 0.0,
        e_tilde: 0.0,
        c_hat: 0.0,
        e_hat: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalQuote {
    pub j: usize,
    pub g_value: f64,
    pub coefficients: IntervalCoefficients,
    /// Set when the approximation produced a negative expected square.
    pub breakdown: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub ode_steps: usize,
    pub mean_convention: MeanConvention,
    /// Largest imaginary part dropped from any coefficient.
    pub max_imag: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrikeQuote {
    pub n_obs: usize,
    pub maturity: f64,
    /// Fair strike in variance points.
    pub strike_variance_points: f64,
    pub intervals: Vec<IntervalQuote>,
    pub diagnostics: Diagnostics,
}

impl StrikeQuote {
    /// `100^2 / T * sum_j G_j`, recomputed from the breakdown.
    pub fn recomputed_strike(&self) -> f64 {
        let sum: f64 = self.intervals.iter().map(|q| q.g_value).sum();
        VARIANCE_POINTS / self.maturity * sum
    }

    /// Strike scaled by a notional, for display.
    pub fn notional_value(&self, notional: f64) -> f64 {
        self.strike_variance_points * notional
    }
}

fn checked_exp(exponent: f64) -> Result<f64> {
    if !exponent.is_finite() || exponent > MAX_EXPONENT {
        return Err(Error::Overflow { exponent });
    }
    Ok(exponent.exp())
}

/// `G_j` at a known state `(v, r)`.
pub fn inner_g(nu: f64, r: f64, k: &IntervalCoefficients) -> Result<f64> {
    let squared = checked_exp(k.c_tilde + k.d_tilde * nu + k.e_tilde * r)?;
    let linear = checked_exp(k.c_hat + k.e_hat * r)?;
    Ok(squared - 2.0 * linear + 1.0)
}

/// `E[G_j(v(t_{j-1}), r(t_{j-1}))]` with `v`, `r` approximated as jointly
/// normal with correlation `rho23`.
pub fn outer_g(
    k: &IntervalCoefficients,
    nu: NormalStateApprox,
    r: NormalStateApprox,
    rho23: f64,
) -> Result<f64> {
    let mean_y = k.d_tilde * nu.mean + k.e_tilde * r.mean;
    let var_y = k.d_tilde * k.d_tilde * nu.variance
        + k.e_tilde * k.e_tilde * r.variance
        + 2.0 * k.d_tilde * k.e_tilde * rho23 * (nu.variance * r.variance).sqrt();
    let squared = checked_exp(k.c_tilde + mean_y + 0.5 * var_y)?;
    let linear = checked_exp(k.c_hat + k.e_hat * r.mean + 0.5 * k.e_hat * k.e_hat * r.variance)?;
    Ok(squared - 2.0 * linear + 1.0)
}

struct Solved {
    coefficients: IntervalCoefficients,
    max_imag: f64,
}

fn solve_interval(solver: &CoefficientSolver<'_>, interval: Interval) -> Result<Solved> {
    let (ct, dt, et) = solver.solve(omega_squared(), interval)?.at_end();
    let (ch, _, eh) = solver.solve(omega_linear(), interval)?.at_end();
    let max_imag = [ct, dt, et, ch, eh]
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    Ok(Solved {
        coefficients: IntervalCoefficients {
            c_tilde: ct.re,
            d_tilde: dt.re,
            e_tilde: et.re,
            c_hat: ch.re,
            e_hat: eh.re,
        },
        max_imag,
    })
}

/// Fair strike `K = E^T[RV]` in variance points.
pub fn fair_strike(
    params: &ModelParams,
    contract: &SwapContract,
    numerics: &Numerics,
) -> Result<StrikeQuote> {
    params.check_pricing_inputs()?;
    let contract = contract.validate()?;
    let moments = MomentCurves::new(params, numerics.mean_convention)?;
    let solver = CoefficientSolver::new(params, &moments, contract.maturity, numerics.ode_steps)?;

    let quote_interval = |j: usize| -> Result<(IntervalQuote, f64)> {
        let interval = Interval::new(
            contract.observation_time(j - 1),
            contract.observation_time(j),
        );
        let solved = solve_interval(&solver, interval)?;
        let k = &solved.coefficients;
        let g_value = if j == 1 {
            inner_g(params.v0, params.r0, k)?
        } else {
            let t = interval.start;
            outer_g(
                k,
                moments.variance.normal_moments(t)?,
                moments.rate.normal_moments(t)?,
                params.rho23,
            )?
        };
        let quote = IntervalQuote {
            j,
            g_value,
            coefficients: *k,
            breakdown: g_value < 0.0,
        };
        Ok((quote, solved.max_imag))
    };

    let solved: Vec<(IntervalQuote, f64)> = if numerics.parallel {
        (1..=contract.n_obs)
            .into_par_iter()
            .map(quote_interval)
            .collect::<Result<_>>()?
    } else {
        (1..=contract.n_obs)
            .map(quote_interval)
            .collect::<Result<_>>()?
    };

    let mut warnings = Vec::new();
    let mut max_imag: f64 = 0.0;
    let mut intervals = Vec::with_capacity(solved.len());
    for (quote, imag) in solved {
        if quote.breakdown {
            let msg = format!(
                "interval {}: negative expected squared return {:e}; approximation breakdown",
                quote.j, quote.g_value
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        max_imag = max_imag.max(imag);
        intervals.push(quote);
    }

    // Fixed sequential order for reproducibility.
    let sum: f64 = intervals.iter().map(|q| q.g_value).sum();
    Ok(StrikeQuote {
        n_obs: contract.n_obs,
        maturity: contract.maturity,
        strike_variance_points: VARIANCE_POINTS / contract.maturity * sum,
        intervals,
        diagnostics: Diagnostics {
            ode_steps: numerics.ode_steps,
            mean_convention: numerics.mean_convention,
            max_imag,
            warnings,
        },
    })
}
