//! Moment approximations for the square-root (CIR-type) state processes.
//!
//! For a process `dx = k (xbar - x) dt + c sqrt(x) dW` started at `x0` the
//! scaled non-central chi-square law gives
//!
//! ```text
//! q(t)   = c^2 (1 - e^{-k t}) / (4k)
//! l      = 4 k xbar / c^2
//! phi(t) = 4 k x0 e^{-k t} / (c^2 (1 - e^{-k t}))
//! ```
//!
//! Everything below is evaluated through the products `q l = xbar (1 - e^{-kt})`
//! and `q phi = x0 e^{-kt}`, which stay finite as `t -> 0` and in the
//! zero-volatility limit (`c = 0`, where `l` and `phi` are infinite).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Which state variable a moment query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Variance,
    Rate,
}

/// Mean of the square-root processes used inside the product moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanConvention {
    /// Exponential fit `m + p e^{-Q t}`.
    #[default]
    Simplified,
    /// The full square-root expression `Lambda(t)`.
    Full,
}

/// Normal approximation `N(mean, variance)` of the state at a fixed time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalStateApprox {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, Copy)]
struct Parts {
    q: f64,
    /// `q l`
    reverting: f64,
    /// `q phi`
    memory: f64,
}

impl Parts {
    fn mean(&self) -> f64 {
        self.reverting + self.memory
    }
}

/// Moment curves of one square-root process together with the fitted
/// constants `m`, `p`, `Q` of the simplified mean of its square root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtProcess {
    speed: f64,
    level: f64,
    vol: f64,
    x0: f64,
    m: f64,
    p: f64,
    decay: f64,
}

impl SqrtProcess {
    pub fn new(speed: f64, level: f64, vol: f64, x0: f64) -> Result<Self> {
        for (name, v) in [("speed", speed), ("level", level), ("initial state", x0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::MomentUndefined(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(vol.is_finite() && vol >= 0.0) {
            return Err(Error::MomentUndefined(format!(
                "volatility must be >= 0, got {vol}"
            )));
        }
        let radicand = level - vol * vol / (8.0 * speed);
        if radicand <= 0.0 {
            return Err(Error::MomentUndefined(format!(
                "long-run level {level} does not exceed vol^2/(8 k) = {}",
                vol * vol / (8.0 * speed)
            )));
        }
        let m = radicand.sqrt();
        let p = x0.sqrt() - m;
        let mut process = SqrtProcess {
            speed,
            level,
            vol,
            x0,
            m,
            p,
            decay: 0.0,
        };
        if p != 0.0 {
            let ratio = (process.lambda_at(1.0) - m) / p;
            if ratio <= 0.0 || !ratio.is_finite() {
                return Err(Error::MomentUndefined(format!(
                    "log argument of the decay rate is non-positive ({ratio})"
                )));
            }
            process.decay = -ratio.ln();
        }
        Ok(process)
    }

    pub fn variance_process(params: &ModelParams) -> Result<Self> {
        Self::new(
            params.kappa_star,
            params.theta_star,
            params.sigma,
            params.v0,
        )
    }

    pub fn rate_process(params: &ModelParams) -> Result<Self> {
        Self::new(params.alpha_star, params.beta_star, params.eta, params.r0)
    }

    fn parts(&self, t: f64) -> Parts {
        let e = (-self.speed * t).exp();
        let one_minus_e = -(-self.speed * t).exp_m1();
        Parts {
            q: self.vol * self.vol * one_minus_e / (4.0 * self.speed),
            reverting: self.level * one_minus_e,
            memory: self.x0 * e,
        }
    }

    pub fn q(&self, t: f64) -> f64 {
        self.parts(t).q
    }

    /// Degrees-of-freedom constant `l`; infinite when the volatility is zero.
    pub fn l(&self) -> f64 {
        4.0 * self.speed * self.level / (self.vol * self.vol)
    }

    pub fn phi(&self, t: f64) -> f64 {
        let parts = self.parts(t);
        parts.memory / parts.q
    }

    /// Fitted constants `(m, p, Q)` of the simplified mean.
    pub fn fit(&self) -> (f64, f64, f64) {
        (self.m, self.p, self.decay)
    }

    /// `Lambda(t)`, the approximate `E[sqrt(x(t))]`; `t > 0`.
    pub fn lambda(&self, t: f64) -> Result<f64> {
        require_positive_time(t)?;
        Ok(self.lambda_at(t))
    }

    /// Unchecked `Lambda(t)`, continuous at `t = 0` where it equals `sqrt(x0)`.
    pub fn lambda_at(&self, t: f64) -> f64 {
        let parts = self.parts(t);
        let mean = parts.mean();
        // q (phi - 1) + q l + q l / (2 (l + phi))
        (mean - parts.q + parts.q * parts.reverting / (2.0 * mean)).sqrt()
    }

    /// `m + p e^{-Q t}`; `t >= 0`.
    pub fn lambda_tilde(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::MomentUndefined(format!(
                "time must be >= 0, got {t}"
            )));
        }
        Ok(self.lambda_tilde_at(t))
    }

    #[inline]
    pub fn lambda_tilde_at(&self, t: f64) -> f64 {
        self.m + self.p * (-self.decay * t).exp()
    }

    /// Approximate `Var[sqrt(x(t))] = q - q l / (2 (l + phi))`; `t > 0`.
    pub fn sqrt_variance(&self, t: f64) -> Result<f64> {
        require_positive_time(t)?;
        Ok(self.sqrt_variance_at(t))
    }

    /// Unchecked variant, equal to 0 at `t = 0`.
    pub fn sqrt_variance_at(&self, t: f64) -> f64 {
        let parts = self.parts(t);
        let mean = parts.mean();
        (parts.q - parts.q * parts.reverting / (2.0 * mean)).max(0.0)
    }

    /// Normal approximation `N(q (l + phi), q^2 (2l + 4 phi))`; `t > 0`.
    pub fn normal_moments(&self, t: f64) -> Result<NormalStateApprox> {
        require_positive_time(t)?;
        let parts = self.parts(t);
        Ok(NormalStateApprox {
            mean: parts.mean(),
            variance: parts.q * (2.0 * parts.reverting + 4.0 * parts.memory),
        })
    }
}

fn require_positive_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::MomentUndefined(format!("time must be > 0, got {t}")))
    }
}

/// Moment curves for both state processes plus the correlation assumed
/// between `sqrt(v)` and `sqrt(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCurves {
    pub variance: SqrtProcess,
    pub rate: SqrtProcess,
    /// Instantaneous correlation of `sqrt(v)` and `sqrt(r)`; defaults to `rho23`.
    pub rho_prod: f64,
    pub convention: MeanConvention,
}

impl MomentCurves {
    pub fn new(params: &ModelParams, convention: MeanConvention) -> Result<Self> {
        Ok(MomentCurves {
            variance: SqrtProcess::variance_process(params)?,
            rate: SqrtProcess::rate_process(params)?,
            rho_prod: params.rho23,
            convention,
        })
    }

    pub fn with_rho_prod(mut self, rho_prod: f64) -> Self {
        self.rho_prod = rho_prod;
        self
    }

    pub fn process(&self, which: Process) -> &SqrtProcess {
        match which {
            Process::Variance => &self.variance,
            Process::Rate => &self.rate,
        }
    }

    pub fn sqrt_variance(&self, which: Process, t: f64) -> Result<f64> {
        self.process(which).sqrt_variance(t)
    }

    pub fn normal_moments(&self, which: Process, t: f64) -> Result<NormalStateApprox> {
        self.process(which).normal_moments(t)
    }

    /// `E[sqrt(v(t)) sqrt(r(t))] = rho_prod sqrt(Var Var') + E E'`.
    ///
    /// Defined for `t >= 0`; at `t = 0` it is `sqrt(v0 r0)`.
    pub fn product_moment(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::MomentUndefined(format!(
                "time must be >= 0, got {t}"
            )));
        }
        Ok(self.product_moment_at(t))
    }

    #[inline]
    pub fn product_moment_at(&self, t: f64) -> f64 {
        let means = match self.convention {
            MeanConvention::Simplified => {
                self.variance.lambda_tilde_at(t) * self.rate.lambda_tilde_at(t)
            }
            MeanConvention::Full => self.variance.lambda_at(t) * self.rate.lambda_at(t),
        };
        if self.rho_prod == 0.0 {
            return means;
        }
        let cov = (self.variance.sqrt_variance_at(t) * self.rate.sqrt_variance_at(t)).sqrt();
        self.rho_prod * cov + means
    }
}
