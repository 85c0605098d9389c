use std::f64::consts::PI;

use serde::Serialize;

use super::WarpFunction;
use crate::error::{Error, Result};
use crate::fit::{least_squares, log_spaced};
use crate::quadrature::integrate_panels;

const VOLUME_REL_TOL: f64 = 1e-12;

/// `Vol(B_r) = core + 4π ∫_{s_min}^{r} f² ds`, balls centred at the pole (or
/// at the inner boundary for boundary-start profiles).
pub fn volume_ball(metric: &WarpFunction, r: f64) -> Result<f64> {
    let start = metric.domain_start();
    if r == start {
        return Ok(metric.core_volume());
    }
    metric.check_domain(r)?;
    let q = integrate_panels(
        |s| {
            let f = metric.jet_unchecked(s).f;
            f * f
        },
        start,
        r,
        &metric.breakpoints(),
        VOLUME_REL_TOL,
    )?;
    Ok(metric.core_volume() + 4.0 * PI * q.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    /// Fitted `α` with `Vol(B_r) ~ r^{1+α}`.
    pub alpha_fit: f64,
    /// Smallest `κ` with `κ⁻¹ r^{1+α} <= Vol(B_r) <= κ r^{1+α}` on the window.
    pub c_vol_fit: f64,
    /// Asymptotic volume ratio `(3/4π) Vol(B_r)/r³` at the window's outer end;
    /// only for pole-smooth profiles with `α ≈ 2`.
    pub avr: Option<f64>,
    pub fit_window: [f64; 2],
    pub n_points: usize,
}

pub fn growth_fit(
    metric: &WarpFunction,
    r_lo: f64,
    r_hi: f64,
    n_points: usize,
) -> Result<GrowthReport> {
    if n_points < 3 {
        return Err(Error::Usage(format!(
            "degenerate growth window: {n_points} points (need at least 3)"
        )));
    }
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return Err(Error::Usage(format!(
            "growth window [{r_lo}, {r_hi}] must satisfy 0 < r_lo < r_hi"
        )));
    }
    let radii = log_spaced(r_lo, r_hi, n_points);
    let volumes = radii
        .iter()
        .map(|&r| volume_ball(metric, r))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = volumes.iter().map(|v| v.ln()).collect();
    let line = least_squares(&xs, &ys)?;
    let alpha_fit = line.slope - 1.0;
    let c_vol_fit = radii
        .iter()
        .zip(&volumes)
        .map(|(r, v)| {
            let q = v / r.powf(line.slope);
            q.max(1.0 / q)
        })
        .fold(1.0, f64::max);
    let avr = (metric.pole_smooth() && (1.98..=2.02).contains(&alpha_fit))
        .then(|| 3.0 / (4.0 * PI) * volumes[volumes.len() - 1] / r_hi.powi(3));
    Ok(GrowthReport {
        alpha_fit,
        c_vol_fit,
        avr,
        fit_window: [r_lo, r_hi],
        n_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_ball() {
        let v = volume_ball(&WarpFunction::flat(), 2.0).unwrap();
        assert!((v - 32.0 * PI / 3.0).abs() < 1e-12 * v);
    }

    #[test]
    fn power_volume_closed_form() {
        let m = WarpFunction::power(1.0, 0.8).unwrap();
        for r in [10.0, 37.0, 100.0] {
            let v = volume_ball(&m, r).unwrap();
            let exact = 4.0 * PI * r.powf(2.6) / 2.6;
            assert!((v / exact - 1.0).abs() < 1e-9, "r = {r}");
        }
    }

    #[test]
    fn core_volume_is_added() {
        let m = WarpFunction::schwarzschild(1.0)
            .unwrap()
            .with_core_volume(5.0);
        assert_eq!(volume_ball(&m, 0.0).unwrap(), 5.0);
        assert!(volume_ball(&m, 1.0).unwrap() > 5.0);
    }

    #[test]
    fn degenerate_window_is_usage_error() {
        let flat = WarpFunction::flat();
        assert!(matches!(
            growth_fit(&flat, 10.0, 100.0, 2),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            growth_fit(&flat, 10.0, 10.0, 5),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn flat_growth_and_avr() {
        let g = growth_fit(&WarpFunction::flat(), 10.0, 1000.0, 16).unwrap();
        assert!((g.alpha_fit - 2.0).abs() < 1e-9);
        assert!((g.avr.unwrap() - 1.0).abs() < 1e-9);
        assert!((g.c_vol_fit - 4.0 * PI / 3.0).abs() < 1e-6);
    }

    #[test]
    fn bare_cone_has_no_avr() {
        let g = growth_fit(&WarpFunction::cone(0.5).unwrap(), 10.0, 1000.0, 8).unwrap();
        assert!((g.alpha_fit - 2.0).abs() < 1e-9);
        assert!(g.avr.is_none());
    }
}
