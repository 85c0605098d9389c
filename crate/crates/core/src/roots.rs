//! Root finding for monotone scalar maps: bracketed bisection followed by a
//! safeguarded secant polish.

use crate::error::{Error, Result};

/// Stopping rule for [`bisect_secant`].
#[derive(Debug, Clone, Copy)]
pub struct RootTolerance {
    /// Bisection stops once the bracket is narrower than `switch_width * |x|`.
    pub switch_width: f64,
    /// Absolute tolerance on the residual.
    pub residual: f64,
    /// Relative tolerance on the abscissa.
    pub x_rel: f64,
    pub max_iterations: usize,
}

impl Default for RootTolerance {
    fn default() -> Self {
        Self {
            switch_width: 1e-6,
            residual: 1e-14,
            x_rel: 4.0 * f64::EPSILON,
            max_iterations: 200,
        }
    }
}

/// Finds `x` in `[lo, hi]` with `g(x) = 0`, given `g(lo) <= 0 <= g(hi)`.
pub fn bisect_secant<G>(g: G, mut lo: f64, mut hi: f64, tol: RootTolerance) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let mut g_lo = g(lo)?;
    let mut g_hi = g(hi)?;
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo > 0.0 || g_hi < 0.0 {
        return Err(Error::Numeric(format!(
            "root not bracketed: g({lo}) = {g_lo}, g({hi}) = {g_hi}"
        )));
    }

    let mut iterations = 0;
    while hi - lo > tol.switch_width * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid)?;
        if g_mid.abs() <= tol.residual {
            return Ok(mid);
        }
        if g_mid < 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
        iterations += 1;
        if iterations > tol.max_iterations {
            return Err(Error::Numeric("bisection did not converge".into()));
        }
    }

    // secant from the current bracket, falling back to bisection when the
    // step leaves it
    let (mut x0, mut g0, mut x1, mut g1) = (lo, g_lo, hi, g_hi);
    for _ in 0..tol.max_iterations {
        let mut x2 = x1 - g1 * (x1 - x0) / (g1 - g0);
        if !(x2 > lo && x2 < hi) {
            x2 = 0.5 * (lo + hi);
        }
        let g2 = g(x2)?;
        if g2 < 0.0 {
            lo = x2;
        } else {
            hi = x2;
        }
        if g2.abs() <= tol.residual || (x2 - x1).abs() <= tol.x_rel * x2.abs() {
            return Ok(x2);
        }
        (x0, g0, x1, g1) = (x1, g1, x2, g2);
        if hi - lo <= tol.x_rel * hi.abs() {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::Numeric("secant polish did not converge".into()))
}
