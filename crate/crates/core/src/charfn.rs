//! Coefficients of the exponential-affine transform
//! `U~(w, v, r, tau) = exp(C(w,tau) + D(w,tau) v + E(w,tau) r) U~(w, v, r, 0)`
//! over one sampling interval `[t_{j-1}, t_j]`, with `tau = t_j - t`.
//!
//! `D` solves a constant-coefficient Riccati equation and is available in
//! closed form. `E` and `C` have time-dependent coefficients through the
//! bond exposure `B(t, T)` and the product moment `E[sqrt(v) sqrt(r)]`, and
//! are integrated jointly with RK4:
//!
//! ```text
//! dE/dtau = eta^2 E^2 / 2 - (alpha* + B eta^2) E + w i
//! dC/dtau = kappa* theta* D + alpha* beta* E
//!         + rho13 eta M w i (E - B) + rho23 sigma eta M D (E - B)
//! ```
//!
//! where `B = B(t_j - tau, T)` against the swap maturity `T` and
//! `M = E[sqrt(v) sqrt(r)]` at calendar time `t_j - tau`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::moments::MomentCurves;
use crate::ode::{rk4, uniform_grid};
use crate::ratecurve::BondCoefficient;

/// Default number of RK4 steps per sampling interval.
pub const DEFAULT_ODE_STEPS: usize = 256;

const DEGENERACY_TOL: f64 = 1e-14;
const SINGULARITY_TOL: f64 = 1e-12;

/// Transform variable paired with the squared-return payoff term.
pub fn omega_squared() -> Complex64 {
    Complex64::new(0.0, -2.0)
}

/// Transform variable paired with the linear payoff term.
pub fn omega_linear() -> Complex64 {
    Complex64::new(0.0, -1.0)
}

/// Closed-form `D(w, tau)` for a fixed transform variable.
#[derive(Debug, Clone, Copy)]
pub struct DClosedForm {
    b: Complex64,
    /// `a + b`
    plus: Complex64,
    /// `a - b`, computed as `-sigma^2 (w^2 + w i) / (a + b)`
    minus: Complex64,
    /// `(a - b) / sigma^2 = -(w^2 + w i) / (a + b)`
    minus_scaled: Complex64,
    sigma2: f64,
    degenerate: bool,
}

impl DClosedForm {
    pub fn new(omega: Complex64, params: &ModelParams) -> Result<Self> {
        let i = Complex64::i();
        let sigma = params.sigma;
        let sigma2 = sigma * sigma;
        let forcing = omega * omega + omega * i;
        let a = params.kappa_star - params.rho12 * sigma * omega * i;
        let b = (a * a + sigma2 * forcing).sqrt();
        let plus = a + b;
        if plus.norm() < DEGENERACY_TOL {
            return Err(Error::Singularity { tau: 0.0 });
        }
        let minus_scaled = -forcing / plus;
        let minus = minus_scaled * sigma2;
        Ok(DClosedForm {
            b,
            plus,
            minus,
            minus_scaled,
            sigma2,
            degenerate: minus.norm() < DEGENERACY_TOL,
        })
    }

    /// The pair `(a, b)` of the closed form.
    pub fn a_b(&self) -> (Complex64, Complex64) {
        ((self.plus + self.minus) * 0.5, self.b)
    }

    /// `D = ((a + b) / sigma^2) (1 - e^{b tau}) / (1 - g e^{b tau})`, `g = (a+b)/(a-b)`.
    ///
    /// When `a - b` vanishes (zero forcing, or `sigma = 0`) the algebraically
    /// identical form `((a - b)/sigma^2) (1 - e^{-b tau}) / (1 - e^{-b tau} / g)`
    /// is used instead.
    pub fn eval(&self, tau: f64) -> Result<Complex64> {
        if !self.degenerate && (self.b * tau).re < 700.0 {
            let g = self.plus / self.minus;
            let growth = (self.b * tau).exp();
            let denom = 1.0 - g * growth;
            if denom.norm() < SINGULARITY_TOL {
                return Err(Error::Singularity { tau });
            }
            return Ok(self.plus / self.sigma2 * (1.0 - growth) / denom);
        }
        let g_inv = self.minus / self.plus;
        let decay = (-self.b * tau).exp();
        let denom = 1.0 - g_inv * decay;
        if denom.norm() < SINGULARITY_TOL {
            return Err(Error::Singularity { tau });
        }
        Ok(self.minus_scaled * (1.0 - decay) / denom)
    }
}

/// Convenience wrapper: `D(w, tau)` from the closed form.
pub fn d_closed_form(omega: Complex64, tau: f64, params: &ModelParams) -> Result<Complex64> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::InvalidTime {
            t: tau,
            maturity: f64::INFINITY,
        });
    }
    DClosedForm::new(omega, params)?.eval(tau)
}

/// A sampling interval `[start, end] = [t_{j-1}, t_j]` in calendar time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Self {
        Interval { start, end }
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// The triple `(C, D, E)` on a uniform `tau` grid over `[0, dt]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCoefficients {
    pub omega: Complex64,
    pub tau_grid: Vec<f64>,
    pub c: Vec<Complex64>,
    pub d: Vec<Complex64>,
    pub e: Vec<Complex64>,
    /// Interval expiry `t_j`.
    pub anchor: f64,
    pub swap_maturity: f64,
}

impl AffineCoefficients {
    /// `(C, D, E)` at `tau = dt`.
    pub fn at_end(&self) -> (Complex64, Complex64, Complex64) {
        let n = self.tau_grid.len() - 1;
        (self.c[n], self.d[n], self.e[n])
    }
}

/// Integrates `E` and `C` for one interval. Holds everything that does not
/// depend on the transform variable.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientSolver<'a> {
    params: &'a ModelParams,
    moments: &'a MomentCurves,
    bond: BondCoefficient,
    swap_maturity: f64,
    steps: usize,
}

impl<'a> CoefficientSolver<'a> {
    pub fn new(
        params: &'a ModelParams,
        moments: &'a MomentCurves,
        swap_maturity: f64,
        steps: usize,
    ) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidContract(format!(
                "at least 2 ODE steps per interval required, got {steps}"
            )));
        }
        if !(swap_maturity > 0.0 && swap_maturity.is_finite()) {
            return Err(Error::InvalidTime {
                t: swap_maturity,
                maturity: swap_maturity,
            });
        }
        Ok(CoefficientSolver {
            params,
            moments,
            bond: BondCoefficient::new(params.alpha_star, params.eta),
            swap_maturity,
            steps,
        })
    }

    fn check_interval(&self, interval: Interval) -> Result<()> {
        let slack = 1e-12 * self.swap_maturity;
        if !(interval.length() > 0.0
            && interval.start >= -slack
            && interval.end <= self.swap_maturity + slack)
        {
            return Err(Error::InvalidTime {
                t: interval.end,
                maturity: self.swap_maturity,
            });
        }
        Ok(())
    }

    /// `B(t_j - tau, T)`.
    #[inline]
    fn bond_at(&self, expiry: f64, tau: f64) -> f64 {
        self.bond.eval(self.swap_maturity - (expiry - tau))
    }

    #[inline]
    fn e_rhs(&self, omega_i: Complex64, b: f64, e: Complex64) -> Complex64 {
        let eta2 = self.params.eta * self.params.eta;
        0.5 * eta2 * e * e - (self.params.alpha_star + b * eta2) * e + omega_i
    }

    /// `E` alone on the interval's `tau` grid.
    pub fn solve_e(&self, omega: Complex64, interval: Interval) -> Result<Vec<Complex64>> {
        self.check_interval(interval)?;
        let omega_i = omega * Complex64::i();
        let expiry = interval.end;
        let out = rk4(
            |tau, y: &[Complex64; 1]| Ok([self.e_rhs(omega_i, self.bond_at(expiry, tau), y[0])]),
            [Complex64::new(0.0, 0.0)],
            0.0,
            interval.length(),
            self.steps,
        )?;
        Ok(out.into_iter().map(|y| y[0]).collect())
    }

    /// Full triple for one interval, `E` and `C` integrated jointly so that
    /// the `C` quadrature sees `E` at every RK4 stage.
    pub fn solve(&self, omega: Complex64, interval: Interval) -> Result<AffineCoefficients> {
        self.check_interval(interval)?;
        let p = self.params;
        let omega_i = omega * Complex64::i();
        let d_form = DClosedForm::new(omega, p)?;
        let expiry = interval.end;
        let rho13_eta = p.rho13 * p.eta;
        let rho23_sigma_eta = p.rho23 * p.sigma * p.eta;

        let rhs = |tau: f64, y: &[Complex64; 2]| -> Result<[Complex64; 2]> {
            let [e, _] = *y;
            let d = d_form.eval(tau)?;
            let b = self.bond_at(expiry, tau);
            let t = (expiry - tau).max(0.0);
            let m = self.moments.product_moment_at(t);
            let de = self.e_rhs(omega_i, b, e);
            let dc = p.kappa_star * p.theta_star * d
                + p.alpha_star * p.beta_star * e
                + rho13_eta * m * omega_i * (e - b)
                + rho23_sigma_eta * m * d * (e - b);
            Ok([de, dc])
        };

        let dt = interval.length();
        let states = rk4(rhs, [Complex64::new(0.0, 0.0); 2], 0.0, dt, self.steps)?;
        let tau_grid = uniform_grid(0.0, dt, self.steps);
        let d = tau_grid
            .iter()
            .map(|&tau| d_form.eval(tau))
            .collect::<Result<Vec<_>>>()?;
        let (e, c) = states.into_iter().map(|[e, c]| (e, c)).unzip();
        Ok(AffineCoefficients {
            omega,
            tau_grid,
            c,
            d,
            e,
            anchor: expiry,
            swap_maturity: self.swap_maturity,
        })
    }
}

/// `E` on the interval grid; see [`CoefficientSolver::solve_e`].
pub fn solve_e(
    omega: Complex64,
    interval: Interval,
    swap_maturity: f64,
    params: &ModelParams,
    moments: &MomentCurves,
    steps: usize,
) -> Result<Vec<Complex64>> {
    CoefficientSolver::new(params, moments, swap_maturity, steps)?.solve_e(omega, interval)
}

/// `(C, D, E)` on the interval grid; see [`CoefficientSolver::solve`].
pub fn solve_c(
    omega: Complex64,
    interval: Interval,
    swap_maturity: f64,
    params: &ModelParams,
    moments: &MomentCurves,
    steps: usize,
) -> Result<AffineCoefficients> {
    CoefficientSolver::new(params, moments, swap_maturity, steps)?.solve(omega, interval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::MeanConvention;
    use approx::assert_abs_diff_eq;

    fn baseline() -> (ModelParams, MomentCurves) {
        let p = ModelParams::baseline();
        let m = MomentCurves::new(&p, MeanConvention::Simplified).unwrap();
        (p, m)
    }

    /// Direct RK4 on `dD/dtau = sigma^2 D^2 / 2 + (rho12 w sigma i - kappa) D - (w^2 + w i)/2`.
    fn d_by_rk4(omega: Complex64, tau: f64, p: &ModelParams) -> Complex64 {
        let i = Complex64::i();
        let f = |d: Complex64| {
            0.5 * p.sigma * p.sigma * d * d + (p.rho12 * omega * p.sigma * i - p.kappa_star) * d
                - 0.5 * (omega * omega + omega * i)
        };
        let n = 2000;
        let h = tau / n as f64;
        let mut d = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let k1 = f(d);
            let k2 = f(d + 0.5 * h * k1);
            let k3 = f(d + 0.5 * h * k2);
            let k4 = f(d + h * k3);
            d += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        d
    }

    #[test]
    fn d_closed_form_matches_riccati() {
        let p = ModelParams::baseline();
        for omega in [omega_linear(), omega_squared()] {
            for &tau in &[0.05, 0.25, 1.0] {
                let d = d_closed_form(omega, tau, &p).unwrap();
                let oracle = d_by_rk4(omega, tau, &p);
                assert!((d - oracle).norm() < 1e-8, "{omega} {tau}: {d} vs {oracle}");
                assert!(d.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn d_quarter_year_squared_term() {
        let p = ModelParams::baseline();
        let form = DClosedForm::new(omega_squared(), &p).unwrap();
        let (a, b) = form.a_b();
        assert_abs_diff_eq!(a.re, 2.08, epsilon = 1e-14);
        assert_abs_diff_eq!(b.re, 4.3064f64.sqrt(), epsilon = 1e-14);
        let d = form.eval(0.25).unwrap();
        assert_abs_diff_eq!(
            d.re,
            d_by_rk4(omega_squared(), 0.25, &p).re,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(d.re, 0.1953, epsilon = 5e-4);
    }

    #[test]
    fn d_vanishes_for_linear_term_and_at_origin() {
        let p = ModelParams::baseline();
        for &tau in &[0.0, 0.1, 0.7, 3.0] {
            assert_eq!(
                d_closed_form(omega_linear(), tau, &p).unwrap(),
                Complex64::new(0.0, 0.0)
            );
        }
        assert_eq!(d_closed_form(omega_squared(), 0.0, &p).unwrap().norm(), 0.0);
        assert_eq!(
            d_closed_form(Complex64::new(0.7, 0.3), 0.0, &p)
                .unwrap()
                .norm(),
            0.0
        );
    }

    #[test]
    fn d_zero_vol_limit() {
        let p = ModelParams {
            sigma: 0.0,
            ..ModelParams::baseline()
        };
        let d = d_closed_form(omega_squared(), 0.25, &p).unwrap();
        assert_abs_diff_eq!(d.re, (1.0 - (-0.5f64).exp()) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn d_general_complex_omega() {
        let p = ModelParams::baseline();
        let omega = Complex64::new(1.3, -0.4);
        let d = d_closed_form(omega, 0.5, &p).unwrap();
        assert!((d - d_by_rk4(omega, 0.5, &p)).norm() < 1e-8);
    }

    #[test]
    fn e_vanishes_for_zero_omega() {
        let (p, m) = baseline();
        let e = solve_e(
            Complex64::new(0.0, 0.0),
            Interval::new(0.0, 0.25),
            1.0,
            &p,
            &m,
            64,
        )
        .unwrap();
        assert!(e.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn e_zero_eta_closed_form() {
        let p = ModelParams {
            eta: 0.0,
            ..ModelParams::baseline()
        };
        let m = MomentCurves::new(&p, MeanConvention::Simplified).unwrap();
        let e = solve_e(omega_squared(), Interval::new(0.5, 0.75), 1.0, &p, &m, 256).unwrap();
        let expected = 2.0 * (1.0 - (-1.2f64 * 0.25).exp()) / 1.2;
        assert_abs_diff_eq!(e.last().unwrap().re, expected, epsilon = 1e-12);
    }

    #[test]
    fn e_linear_term_is_real_positive() {
        let (p, m) = baseline();
        let e = solve_e(omega_linear(), Interval::new(0.75, 1.0), 1.0, &p, &m, 256).unwrap();
        assert!(e[1..].iter().all(|v| v.re > 0.0 && v.im.abs() < 1e-12));
        assert!(e.last().unwrap().re < 0.25);
    }

    #[test]
    fn c_reduces_to_e_quadrature_without_cross_correlations() {
        let p = ModelParams {
            rho13: 0.0,
            rho23: 0.0,
            ..ModelParams::baseline()
        };
        let m = MomentCurves::new(&p, MeanConvention::Simplified).unwrap();
        let steps = 256;
        let coeffs = solve_c(omega_linear(), Interval::new(0.25, 0.5), 1.0, &p, &m, steps).unwrap();
        // Composite Simpson on the E grid.
        let h = 0.25 / steps as f64;
        let e = &coeffs.e;
        let mut integral = e[0].re + e[steps].re;
        for (k, v) in e.iter().enumerate().take(steps).skip(1) {
            integral += if k % 2 == 1 { 4.0 } else { 2.0 } * v.re;
        }
        integral *= h / 3.0;
        let (c, _, _) = coeffs.at_end();
        assert_abs_diff_eq!(c.re, p.alpha_star * p.beta_star * integral, epsilon = 1e-12);
    }

    #[test]
    fn initial_conditions_and_grid() {
        let (p, m) = baseline();
        let coeffs = solve_c(omega_squared(), Interval::new(0.0, 0.25), 1.0, &p, &m, 32).unwrap();
        assert_eq!(coeffs.tau_grid.len(), 33);
        assert_eq!(coeffs.tau_grid[0], 0.0);
        assert_eq!(*coeffs.tau_grid.last().unwrap(), 0.25);
        assert!(coeffs.tau_grid.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(
            coeffs.c[0].norm() + coeffs.d[0].norm() + coeffs.e[0].norm(),
            0.0
        );
        let (c, d, e) = coeffs.at_end();
        for v in [c, d, e] {
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let (p, m) = baseline();
        assert!(solve_e(omega_linear(), Interval::new(0.0, 0.25), 1.0, &p, &m, 1).is_err());
        assert!(solve_e(omega_linear(), Interval::new(0.9, 1.2), 1.0, &p, &m, 8).is_err());
        assert!(solve_e(omega_linear(), Interval::new(0.5, 0.5), 1.0, &p, &m, 8).is_err());
    }

    #[test]
    fn c_is_continuous_in_cross_correlations() {
        let (p, m) = baseline();
        let base = solve_c(omega_squared(), Interval::new(0.5, 0.75), 1.0, &p, &m, 64)
            .unwrap()
            .at_end()
            .0;
        for bump in [
            ModelParams {
                rho13: p.rho13 + 1e-6,
                ..p
            },
            ModelParams {
                rho23: p.rho23 + 1e-6,
                ..p
            },
        ] {
            let mb = MomentCurves::new(&bump, MeanConvention::Simplified).unwrap();
            let c = solve_c(
                omega_squared(),
                Interval::new(0.5, 0.75),
                1.0,
                &bump,
                &mb,
                64,
            )
            .unwrap()
            .at_end()
            .0;
            assert!((c - base).norm() < 1e-7);
        }
    }
}
