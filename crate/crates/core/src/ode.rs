//! Fixed-step classical Runge-Kutta for small complex systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Integrates `y' = f(t, y)` from `t0` to `t1` in `steps` equal steps and
/// returns the state at every grid point (`steps + 1` entries).
///
/// The right-hand side may fail; a non-finite state aborts the integration
/// with the grid time at which it appeared.
pub fn rk4<const N: usize, F>(
    mut f: F,
    y0: [Complex64; N],
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Vec<[Complex64; N]>>
where
    F: FnMut(f64, &[Complex64; N]) -> Result<[Complex64; N]>,
{
    assert!(steps > 0, "rk4 needs at least one step");
    let h = (t1 - t0) / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push(y);
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = f(t, &y)?;
        let k2 = f(t + 0.5 * h, &axpy(&y, 0.5 * h, &k1))?;
        let k3 = f(t + 0.5 * h, &axpy(&y, 0.5 * h, &k2))?;
        let t_next = if i + 1 == steps { t1 } else { t + h };
        let k4 = f(t_next, &axpy(&y, h, &k3))?;
        for n in 0..N {
            y[n] += (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]) * (h / 6.0);
        }
        if y.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::IntegrationFailure { tau: t_next });
        }
        out.push(y);
    }
    Ok(out)
}

#[inline]
fn axpy<const N: usize>(y: &[Complex64; N], a: f64, k: &[Complex64; N]) -> [Complex64; N] {
    let mut out = *y;
    for n in 0..N {
        out[n] += k[n] * a;
    }
    out
}

/// Uniform grid on `[t0, t1]` matching [`rk4`]'s output.
pub fn uniform_grid(t0: f64, t1: f64, steps: usize) -> Vec<f64> {
    let h = (t1 - t0) / steps as f64;
    (0..=steps)
        .map(|i| if i == steps { t1 } else { t0 + i as f64 * h })
        .collect()
}
