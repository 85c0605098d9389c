use serde::Serialize;

use super::{Jet, WarpFunction};
use crate::error::{Error, Result};
use crate::fit::{lin_spaced, log_spaced};
use crate::serde_util;

/// Relative slack in the pinching comparisons, absorbing rounding in
/// exactly pinched regions (e.g. `ε* = 2/6` on the round sphere).
pub const PINCH_TOLERANCE: f64 = 1e-12;

/// Curvature of `ds² + f² g_{S²}` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvaturePoint {
    pub s: f64,
    /// Areal radius `f(s)`.
    pub areal: f64,
    /// Sectional curvature of planes containing `∂s`: `-f''/f`.
    pub k_rad: f64,
    /// Sectional curvature of the tangent planes of the spheres: `(1 - f'²)/f²`.
    pub k_tan: f64,
    /// `Ric(∂s, ∂s) = -2f''/f`.
    pub ric_rad: f64,
    /// Tangential Ricci eigenvalue `-f''/f + (1 - f'²)/f²`.
    pub ric_tan: f64,
    /// `-4f''/f + 2(1 - f'²)/f²`.
    pub scalar: f64,
}

impl CurvaturePoint {
    fn from_jet(s: f64, j: Jet) -> Self {
        let k_rad = -j.d2f / j.f;
        let k_tan = (1.0 - j.df * j.df) / (j.f * j.f);
        Self {
            s,
            areal: j.f,
            k_rad,
            k_tan,
            ric_rad: 2.0 * k_rad,
            ric_tan: k_rad + k_tan,
            scalar: 4.0 * k_rad + 2.0 * k_tan,
        }
    }

    pub fn min_ricci(&self) -> f64 {
        self.ric_rad.min(self.ric_tan)
    }

    /// `|R - (Ric_rad + 2 Ric_tan)|`.
    pub fn trace_residual(&self) -> f64 {
        (self.scalar - (self.ric_rad + 2.0 * self.ric_tan)).abs()
    }
}

pub fn curvature_at(metric: &WarpFunction, s: f64) -> Result<CurvaturePoint> {
    Ok(CurvaturePoint::from_jet(s, metric.jet(s)?))
}

/// Curvature with `f'`, `f''` replaced by fourth-order central differences
/// of `f` alone. Test oracle for [`curvature_at`].
pub fn finite_difference_curvature_oracle(
    metric: &WarpFunction,
    s: f64,
    h: f64,
) -> Result<CurvaturePoint> {
    if !(h > 0.0) || h < 1e3 * f64::EPSILON * s.abs().max(1.0) {
        return Err(Error::Numeric(format!(
            "finite-difference step {h} underflows at s = {s}"
        )));
    }
    let f = |x: f64| metric.value(x);
    let (fm2, fm1, f0, fp1, fp2) = (
        f(s - 2.0 * h)?,
        f(s - h)?,
        f(s)?,
        f(s + h)?,
        f(s + 2.0 * h)?,
    );
    let df = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    let d2f = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    Ok(CurvaturePoint::from_jet(s, Jet { f: f0, df, d2f }))
}

/// Best pinching constant at a point: `min(Ric)/R` where `R > 0`; where
/// `R = 0` pinching reduces to `Ric >= 0`, encoded as `+∞` (holds) or
/// `-∞` (fails). `R < 0` always fails.
pub fn epsilon_star(c: &CurvaturePoint) -> f64 {
    let min = c.min_ricci();
    let scale = c.ric_rad.abs().max(c.ric_tan.abs());
    if c.scalar.abs() <= PINCH_TOLERANCE * scale || c.scalar == 0.0 {
        if min >= -PINCH_TOLERANCE * scale {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else if c.scalar > 0.0 {
        min / c.scalar
    } else {
        f64::NEG_INFINITY
    }
}

/// Whether `Ric >= 0` and `Ric >= ε R g` hold at a point.
pub fn pinched_at(c: &CurvaturePoint, epsilon: f64) -> bool {
    let scale = c.ric_rad.abs().max(c.ric_tan.abs());
    c.min_ricci() >= -PINCH_TOLERANCE * scale
        && epsilon_star(c) >= epsilon * (1.0 - PINCH_TOLERANCE)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginSample {
    pub s: f64,
    #[serde(serialize_with = "serde_util::extended")]
    pub epsilon_star: f64,
    pub min_ricci: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinchReport {
    pub epsilon_requested: f64,
    pub s_range: [f64; 2],
    pub pass: bool,
    /// Smallest failing radius, refined by bisection to 1e-6.
    pub first_failure_s: Option<f64>,
    #[serde(serialize_with = "serde_util::extended_opt")]
    pub epsilon_star_at_failure: Option<f64>,
    /// Smallest sampled `ε*`.
    #[serde(serialize_with = "serde_util::extended")]
    pub min_epsilon_star: f64,
    pub margin_curve: Vec<MarginSample>,
}

pub fn check_pinching(
    metric: &WarpFunction,
    epsilon: f64,
    s_range: (f64, f64),
    n_samples: usize,
) -> Result<PinchReport> {
    let (lo, hi) = s_range;
    if n_samples < 2 {
        return Err(Error::Usage(
            "pinching check needs at least 2 samples".into(),
        ));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            reason: "pinching constant must be positive",
        });
    }
    if !(hi > lo) {
        return Err(Error::Usage(format!("empty pinching range [{lo}, {hi}]")));
    }
    metric.check_domain(lo)?;
    metric.check_domain(hi)?;

    let grid = if lo > 0.0 {
        log_spaced(lo, hi, n_samples)
    } else {
        lin_spaced(lo, hi, n_samples)
    };
    let mut margin_curve = Vec::with_capacity(grid.len());
    for &s in &grid {
        let c = curvature_at(metric, s)?;
        margin_curve.push(MarginSample {
            s,
            epsilon_star: epsilon_star(&c),
            min_ricci: c.min_ricci(),
        });
    }
    let ok = |s: f64| -> Result<bool> { Ok(pinched_at(&curvature_at(metric, s)?, epsilon)) };

    let mut first_failure_s = None;
    for (k, &s) in grid.iter().enumerate() {
        if ok(s)? {
            continue;
        }
        let witness = if k == 0 {
            s
        } else {
            let (mut a, mut b) = (grid[k - 1], s);
            while b - a > 1e-6 {
                let mid = 0.5 * (a + b);
                if ok(mid)? {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            b
        };
        first_failure_s = Some(witness);
        break;
    }
    let epsilon_star_at_failure = first_failure_s
        .map(|s| curvature_at(metric, s).map(|c| epsilon_star(&c)))
        .transpose()?;
    let min_epsilon_star = margin_curve
        .iter()
        .map(|m| m.epsilon_star)
        .fold(f64::INFINITY, f64::min);

    Ok(PinchReport {
        epsilon_requested: epsilon,
        s_range: [lo, hi],
        pass: first_failure_s.is_none(),
        first_failure_s,
        epsilon_star_at_failure,
        min_epsilon_star,
        margin_curve,
    })
}
