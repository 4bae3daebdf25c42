//! Rate exposure `B(t, T)` of the CIR zero-coupon bond `P = A e^{-B r}`.

use crate::error::{Error, Result};

/// Evaluator for `B(t, T)` at fixed `alpha*` and `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondCoefficient {
    alpha_star: f64,
    gamma: f64,
}

impl BondCoefficient {
    pub fn new(alpha_star: f64, eta: f64) -> Self {
        BondCoefficient {
            alpha_star,
            gamma: (alpha_star * alpha_star + 2.0 * eta * eta).sqrt(),
        }
    }

    /// Checked evaluation; requires `0 <= t <= maturity`.
    pub fn b(&self, t: f64, maturity: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= maturity && maturity.is_finite()) {
            return Err(Error::InvalidTime { t, maturity });
        }
        Ok(self.eval(maturity - t))
    }

    /// `B` as a function of time to maturity. Negative inputs are clamped to 0.
    ///
    /// The closed form `2(e^{g s} - 1) / (2g + (alpha + g)(e^{g s} - 1))` is
    /// divided through by `e^{g s}` so large horizons do not overflow.
    #[inline]
    pub fn eval(&self, time_to_maturity: f64) -> f64 {
        let s = time_to_maturity.max(0.0);
        let decay = (-self.gamma * s).exp();
        let growth = -(-self.gamma * s).exp_m1();
        2.0 * growth / (2.0 * self.gamma * decay + (self.alpha_star + self.gamma) * growth)
    }
}

/// `B(t, T)` for the CIR short rate with speed `alpha_star` and volatility `eta`.
pub fn cir_b(t: f64, maturity: f64, alpha_star: f64, eta: f64) -> Result<f64> {
    BondCoefficient::new(alpha_star, eta).b(t, maturity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Backward integration of the bond Riccati `dB/ds = 1 - alpha B - eta^2 B^2 / 2`
    /// in time to maturity `s`, with `B(0) = 0`.
    fn riccati_oracle(s: f64, alpha: f64, eta: f64) -> f64 {
        let f = |b: f64| 1.0 - alpha * b - 0.5 * eta * eta * b * b;
        let n = 4000;
        let h = s / n as f64;
        let mut b = 0.0;
        for _ in 0..n {
            let k1 = f(b);
            let k2 = f(b + 0.5 * h * k1);
            let k3 = f(b + 0.5 * h * k2);
            let k4 = f(b + h * k3);
            b += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        b
    }

    #[test]
    fn vanishes_at_maturity() {
        assert_eq!(cir_b(1.0, 1.0, 1.2, 0.01).unwrap(), 0.0);
        assert_eq!(cir_b(3.5, 3.5, 0.3, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn one_year_baseline() {
        let b = cir_b(0.0, 1.0, 1.2, 0.01).unwrap();
        assert_abs_diff_eq!(b, 0.5823, epsilon = 5e-5);
        assert_abs_diff_eq!(b, riccati_oracle(1.0, 1.2, 0.01), epsilon = 1e-12);
    }

    #[test]
    fn zero_eta_limit() {
        for &(t, big_t) in &[(0.0, 1.0), (0.3, 2.0), (1.9, 2.0)] {
            let b = cir_b(t, big_t, 1.2, 0.0).unwrap();
            let expected = (1.0 - (-1.2f64 * (big_t - t)).exp()) / 1.2;
            assert_abs_diff_eq!(b, expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_bad_times() {
        assert!(cir_b(1.1, 1.0, 1.2, 0.01).is_err());
        assert!(cir_b(-0.1, 1.0, 1.2, 0.01).is_err());
    }

    #[test]
    fn long_horizon_is_finite() {
        let b = cir_b(0.0, 5000.0, 1.2, 0.01).unwrap();
        let g = (1.44f64 + 2e-4).sqrt();
        assert_abs_diff_eq!(b, 2.0 / (1.2 + g), epsilon = 1e-14);
    }

    #[test]
    fn matches_riccati_monotone_and_bounded_on_grid() {
        for &(alpha, eta) in &[(1.2, 0.01), (0.5, 0.3), (3.0, 0.8)] {
            let coef = BondCoefficient::new(alpha, eta);
            let big_t = 2.0;
            let mut prev = f64::INFINITY;
            for i in 0..20 {
                let t = i as f64 * 0.1;
                let b = coef.b(t, big_t).unwrap();
                assert_abs_diff_eq!(b, riccati_oracle(big_t - t, alpha, eta), epsilon = 1e-10);
                assert!(b > 0.0 && b < prev);
                assert!(b <= big_t - t);
                prev = b;
            }
        }
    }
}
