//! Model and contract parameters for the correlated Heston-CIR hybrid.
//!
//! Under the risk-neutral measure the state follows
//!
//! ```text
//! dS/S = r dt + sqrt(v) dW1
//! dv   = kappa* (theta* - v) dt + sigma sqrt(v) dW2
//! dr   = alpha* (beta* - r) dt + eta sqrt(r) dW3
//! ```
//!
//! with `d<Wi, Wj> = rho_ij dt`. All parameters are supplied directly in
//! risk-neutral form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Risk-neutral Heston-CIR parameters plus initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kappa_star: f64,
    pub theta_star: f64,
    pub sigma: f64,
    pub alpha_star: f64,
    pub beta_star: f64,
    pub eta: f64,
    pub rho12: f64,
    pub rho13: f64,
    pub rho23: f64,
    pub v0: f64,
    pub r0: f64,
    pub s0: f64,
}

impl ModelParams {
    /// Baseline parameter set used across the examples and regression tests.
    pub fn baseline() -> Self {
        ModelParams {
            kappa_star: 2.0,
            theta_star: 0.05,
            sigma: 0.1,
            alpha_star: 1.2,
            beta_star: 0.05,
            eta: 0.01,
            rho12: -0.4,
            rho13: 0.5,
            rho23: 0.5,
            v0: 0.05,
            r0: 0.05,
            s0: 1.0,
        }
    }

    /// Full validation: positivity, both Feller conditions and a positive
    /// semi-definite correlation matrix. Returns the parameters unchanged.
    pub fn validate(self) -> Result<Self> {
        for (name, value) in self.named_positive() {
            positive(name, value)?;
        }
        positive("sigma", self.sigma)?;
        positive("eta", self.eta)?;
        self.check_feller()?;
        check_correlations(self.rho12, self.rho13, self.rho23)?;
        Ok(self)
    }

    /// Looser check used by the pricing entry points: the vol-of-vol and the
    /// rate volatility may be zero, which selects the deterministic limit of
    /// the corresponding square-root process.
    pub fn check_pricing_inputs(&self) -> Result<()> {
        for (name, value) in self.named_positive() {
            positive(name, value)?;
        }
        non_negative("sigma", self.sigma)?;
        non_negative("eta", self.eta)?;
        self.check_feller()?;
        check_correlations(self.rho12, self.rho13, self.rho23)?;
        Ok(())
    }

    pub fn correlation_matrix(&self) -> [[f64; 3]; 3] {
        correlation_matrix(self.rho12, self.rho13, self.rho23)
    }

    pub fn cholesky(&self) -> Result<CorrelationFactor> {
        cholesky_factor(self.rho12, self.rho13, self.rho23)
    }

    fn named_positive(&self) -> [(&'static str, f64); 7] {
        [
            ("kappa_star", self.kappa_star),
            ("theta_star", self.theta_star),
            ("alpha_star", self.alpha_star),
            ("beta_star", self.beta_star),
            ("v0", self.v0),
            ("r0", self.r0),
            ("s0", self.s0),
        ]
    }

    fn check_feller(&self) -> Result<()> {
        let lhs = 2.0 * self.kappa_star * self.theta_star;
        let rhs = self.sigma * self.sigma;
        if lhs < rhs {
            return Err(Error::FellerVariance { lhs, rhs });
        }
        let lhs = 2.0 * self.alpha_star * self.beta_star;
        let rhs = self.eta * self.eta;
        if lhs < rhs {
            return Err(Error::FellerRate { lhs, rhs });
        }
        Ok(())
    }
}

/// Convenience wrapper around [`ModelParams::validate`].
pub fn validate_params(raw: ModelParams) -> Result<ModelParams> {
    raw.validate()
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveParameter { name, value })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveParameter { name, value })
    }
}

const PSD_TOLERANCE: f64 = 1e-12;

fn check_correlations(rho12: f64, rho13: f64, rho23: f64) -> Result<()> {
    for (name, value) in [("rho12", rho12), ("rho13", rho13), ("rho23", rho23)] {
        if !value.is_finite() || !(-1.0..=1.0).contains(&value) {
            return Err(Error::CorrelationOutOfRange { name, value });
        }
    }
    // With a unit diagonal and |rho| <= 1 the 2x2 principal minors are
    // non-negative, so PSD reduces to the sign of the determinant.
    let determinant = correlation_determinant(rho12, rho13, rho23);
    if determinant < -PSD_TOLERANCE {
        return Err(Error::CorrelationNotPsd { determinant });
    }
    Ok(())
}

fn correlation_determinant(rho12: f64, rho13: f64, rho23: f64) -> f64 {
    1.0 - rho12 * rho12 - rho13 * rho13 - rho23 * rho23 + 2.0 * rho12 * rho13 * rho23
}

pub fn correlation_matrix(rho12: f64, rho13: f64, rho23: f64) -> [[f64; 3]; 3] {
    [
        [1.0, rho12, rho13],
        [rho12, 1.0, rho23],
        [rho13, rho23, 1.0],
    ]
}

/// Lower-triangular factor `L` with `L L^T` equal to the correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationFactor {
    rows: [[f64; 3]; 3],
}

impl CorrelationFactor {
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.rows
    }

    /// Maps independent standard normals onto correlated ones.
    #[inline]
    pub fn apply(&self, z: [f64; 3]) -> [f64; 3] {
        let l = &self.rows;
        [
            l[0][0] * z[0],
            l[1][0] * z[0] + l[1][1] * z[1],
            l[2][0] * z[0] + l[2][1] * z[1] + l[2][2] * z[2],
        ]
    }

    /// `L L^T`.
    pub fn reconstruct(&self) -> [[f64; 3]; 3] {
        let l = &self.rows;
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| l[i][k] * l[j][k]).sum();
            }
        }
        out
    }
}

/// Closed-form Cholesky factor of the 3x3 correlation matrix.
///
/// Requires strict positive definiteness; `|rho12| = 1` or a vanishing
/// third pivot is rejected.
pub fn cholesky_factor(rho12: f64, rho13: f64, rho23: f64) -> Result<CorrelationFactor> {
    check_correlations(rho12, rho13, rho23)?;
    let pivot2 = 1.0 - rho12 * rho12;
    if pivot2 <= 0.0 {
        return Err(Error::CorrelationSingular("1 - rho12^2 <= 0"));
    }
    let l22 = pivot2.sqrt();
    let l32 = (rho23 - rho13 * rho12) / l22;
    let pivot3 = 1.0 - rho13 * rho13 - l32 * l32;
    if pivot3 <= 0.0 {
        return Err(Error::CorrelationSingular("third Cholesky pivot <= 0"));
    }
    Ok(CorrelationFactor {
        rows: [
            [1.0, 0.0, 0.0],
            [rho12, l22, 0.0],
            [rho13, l32, pivot3.sqrt()],
        ],
    })
}

/// Swap terms: maturity, number of equally spaced observations and notional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapContract {
    pub maturity: f64,
    pub n_obs: usize,
    pub notional: f64,
}

impl SwapContract {
    pub fn new(maturity: f64, n_obs: usize) -> Result<Self> {
        Self {
            maturity,
            n_obs,
            notional: 1.0,
        }
        .validate()
    }

    pub fn with_notional(mut self, notional: f64) -> Result<Self> {
        self.notional = notional;
        self.validate()
    }

    pub fn validate(self) -> Result<Self> {
        if !(self.maturity.is_finite() && self.maturity > 0.0) {
            return Err(Error::InvalidContract(format!(
                "maturity must be positive, got {}",
                self.maturity
            )));
        }
        if self.n_obs == 0 {
            return Err(Error::InvalidContract("n_obs must be at least 1".into()));
        }
        if !self.notional.is_finite() {
            return Err(Error::InvalidContract("notional must be finite".into()));
        }
        Ok(self)
    }

    /// Sampling interval `T / N`.
    pub fn dt(&self) -> f64 {
        self.maturity / self.n_obs as f64
    }

    /// Annualization factor `N / T`, so that `af * dt == 1`.
    pub fn af(&self) -> f64 {
        self.n_obs as f64 / self.maturity
    }

    /// Observation date `t_j = j * dt`.
    pub fn observation_time(&self, j: usize) -> f64 {
        if j == self.n_obs {
            self.maturity
        } else {
            j as f64 * self.dt()
        }
    }
}

/// Flat JSON parameter file: model parameters plus the contract keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub kappa_star: f64,
    pub theta_star: f64,
    pub sigma: f64,
    pub alpha_star: f64,
    pub beta_star: f64,
    pub eta: f64,
    pub rho12: f64,
    pub rho13: f64,
    pub rho23: f64,
    pub v0: f64,
    pub r0: f64,
    pub s0: f64,
    pub maturity: f64,
    pub n_obs: usize,
}

impl ParamFile {
    pub fn model(&self) -> ModelParams {
        ModelParams {
            kappa_star: self.kappa_star,
            theta_star: self.theta_star,
            sigma: self.sigma,
            alpha_star: self.alpha_star,
            beta_star: self.beta_star,
            eta: self.eta,
            rho12: self.rho12,
            rho13: self.rho13,
            rho23: self.rho23,
            v0: self.v0,
            r0: self.r0,
            s0: self.s0,
        }
    }

    pub fn contract(&self) -> Result<SwapContract> {
        SwapContract::new(self.maturity, self.n_obs)
    }

    pub fn from_parts(model: &ModelParams, maturity: f64, n_obs: usize) -> Self {
        ParamFile {
            kappa_star: model.kappa_star,
            theta_star: model.theta_star,
            sigma: model.sigma,
            alpha_star: model.alpha_star,
            beta_star: model.beta_star,
            eta: model.eta,
            rho12: model.rho12,
            rho13: model.rho13,
            rho23: model.rho23,
            v0: model.v0,
            r0: model.r0,
            s0: model.s0,
            maturity,
            n_obs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn baseline_is_accepted() {
        let p = ModelParams::baseline();
        assert_eq!(validate_params(p).unwrap(), p);
    }

    #[test]
    fn feller_variance_violation() {
        let p = ModelParams {
            sigma: 0.8,
            ..ModelParams::baseline()
        };
        match validate_params(p) {
            Err(Error::FellerVariance { lhs, rhs }) => {
                assert_abs_diff_eq!(lhs, 0.2, epsilon = 1e-15);
                assert_abs_diff_eq!(rhs, 0.64, epsilon = 1e-15);
            }
            other => panic!("expected Feller error, got {other:?}"),
        }
    }

    #[test]
    fn feller_rate_violation() {
        let p = ModelParams {
            eta: 0.5,
            ..ModelParams::baseline()
        };
        assert!(matches!(validate_params(p), Err(Error::FellerRate { .. })));
    }

    #[test]
    fn negative_parameter_is_rejected() {
        let p = ModelParams {
            kappa_star: -1.0,
            ..ModelParams::baseline()
        };
        assert!(matches!(
            validate_params(p),
            Err(Error::NonPositiveParameter {
                name: "kappa_star",
                ..
            })
        ));
        let p = ModelParams {
            s0: 0.0,
            ..ModelParams::baseline()
        };
        assert!(validate_params(p).is_err());
    }

    #[test]
    fn zero_vol_only_passes_the_pricing_check() {
        let p = ModelParams {
            sigma: 0.0,
            eta: 0.0,
            ..ModelParams::baseline()
        };
        assert!(validate_params(p).is_err());
        assert!(p.check_pricing_inputs().is_ok());
    }

    #[test]
    fn correlation_out_of_range() {
        let p = ModelParams {
            rho13: 1.2,
            ..ModelParams::baseline()
        };
        assert!(matches!(
            validate_params(p),
            Err(Error::CorrelationOutOfRange { name: "rho13", .. })
        ));
    }

    // Eigenvalues of the equicorrelation matrix are 1 + 2 rho and 1 - rho
    // (twice): 2.98 and 0.01 for rho = 0.99. For (0.9, -0.9, 0.9) the
    // determinant is 1 - 3 * 0.81 - 2 * 0.729 = -2.888, so one eigenvalue
    // is negative.
    #[test]
    fn psd_checks() {
        let p = ModelParams {
            rho12: 0.99,
            rho13: 0.99,
            rho23: 0.99,
            ..ModelParams::baseline()
        };
        assert!(validate_params(p).is_ok());

        let p = ModelParams {
            rho12: 0.9,
            rho13: -0.9,
            rho23: 0.9,
            ..ModelParams::baseline()
        };
        match validate_params(p) {
            Err(Error::CorrelationNotPsd { determinant }) => {
                assert_abs_diff_eq!(determinant, -2.888, epsilon = 1e-12)
            }
            other => panic!("expected PSD error, got {other:?}"),
        }
    }

    #[test]
    fn cholesky_identity() {
        let l = cholesky_factor(0.0, 0.0, 0.0).unwrap();
        assert_eq!(
            l.matrix(),
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        );
    }

    #[test]
    fn cholesky_baseline_row() {
        let l = cholesky_factor(-0.4, 0.5, 0.5).unwrap().matrix();
        assert_abs_diff_eq!(l[2][0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(l[2][1], 0.7 / 0.84f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(l[2][1], 0.763_762_615_8, epsilon = 1e-9);
        assert_abs_diff_eq!(
            l[2][2],
            (1.0 - 0.25 - 0.49 / 0.84f64).sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(l[2][2], 0.408_248_290_5, epsilon = 1e-9);
    }

    #[test]
    fn cholesky_rejects_singular() {
        assert!(matches!(
            cholesky_factor(1.0, 0.0, 0.0),
            Err(Error::CorrelationSingular(_))
        ));
        // rank-one: all ones
        assert!(cholesky_factor(0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn contract_sampling() {
        let c = SwapContract::new(1.0, 52).unwrap();
        assert_abs_diff_eq!(c.af() * c.dt(), 1.0, epsilon = 1e-15);
        assert_eq!(c.observation_time(52), 1.0);
        assert!(SwapContract::new(1.0, 0).is_err());
        assert!(SwapContract::new(0.0, 4).is_err());
    }

    #[test]
    fn param_file_rejects_unknown_keys() {
        let json = r#"{"kappa_star":2,"theta_star":0.05,"sigma":0.1,"alpha_star":1.2,
            "beta_star":0.05,"eta":0.01,"rho12":-0.4,"rho13":0.5,"rho23":0.5,
            "v0":0.05,"r0":0.05,"s0":1,"maturity":1,"n_obs":4}"#;
        let pf: ParamFile = serde_json::from_str(json).unwrap();
        assert_eq!(pf.model(), ModelParams::baseline());
        let bad = json.replace("\"n_obs\":4", "\"n_obs\":4,\"extra\":1");
        assert!(serde_json::from_str::<ParamFile>(&bad).is_err());
        let missing = json.replace("\"sigma\":0.1,", "");
        assert!(serde_json::from_str::<ParamFile>(&missing).is_err());
    }

    proptest! {
        #[test]
        fn validate_is_idempotent(
            kappa in 0.1f64..5.0, theta in 0.01f64..0.2, alpha in 0.1f64..3.0,
            beta in 0.01f64..0.1, r12 in -0.9f64..0.9, r13 in -0.5f64..0.5,
        ) {
            let p = ModelParams {
                kappa_star: kappa,
                theta_star: theta,
                sigma: (2.0 * kappa * theta).sqrt() * 0.9,
                alpha_star: alpha,
                beta_star: beta,
                eta: (2.0 * alpha * beta).sqrt() * 0.5,
                rho12: r12,
                rho13: r13,
                rho23: 0.0,
                ..ModelParams::baseline()
            };
            if let Ok(v) = validate_params(p) {
                prop_assert_eq!(validate_params(v).unwrap(), v);
                prop_assert!(2.0 * v.kappa_star * v.theta_star >= v.sigma * v.sigma);
                prop_assert!(2.0 * v.alpha_star * v.beta_star >= v.eta * v.eta);
            }
        }
    }
}
