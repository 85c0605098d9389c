//! Level-set functionals of `w` on round spheres:
//!
//! ```text
//! F(t) = ∫ H|∇w| - |∇w|² dμ,   G(t) = ∫ |∇w|² dμ,   W(t) = ∫ H² dμ,
//! F'(t) = -∫ |∇^⊤|∇w||²/|∇w|² + Ric(ν,ν) + |h̊|² + ½(H - 2|∇w|)² dμ.
//! ```
//!
//! `H` and `|∇w|` are constant on each level sphere, so every surface
//! integral is a product with the area. The tangential-gradient and
//! traceless terms of `F'` vanish identically and are not evaluated.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::lin_spaced;
use crate::metric::{curvature_at, epsilon_star, CurvaturePoint, WarpFunction};
use crate::potential::{LevelSet, PotentialSolution};

/// Slack for identities evaluated in closed form.
pub const ALGEBRAIC_TOLERANCE: f64 = 1e-9;
/// Relative tolerance for finite-difference derivatives.
pub const DIFFERENCE_TOLERANCE: f64 = 1e-4;
/// `∫ H² dμ` of a round sphere in Euclidean space.
pub const WILLMORE_THRESHOLD: f64 = 16.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalSample {
    pub t: f64,
    pub s: f64,
    pub area: f64,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    pub grad_w: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub willmore: f64,
    #[serde(rename = "dF_explicit")]
    pub df_explicit: f64,
    pub ncap_t: f64,
}

impl FunctionalSample {
    /// Builds a sample from a level set and the curvature at its radius.
    pub fn from_level(level: &LevelSet, curvature: &CurvaturePoint) -> Self {
        let (area, h, g) = (level.area, level.mean_curvature, level.grad_w);
        Self {
            t: level.t,
            s: level.s,
            area,
            mean_curvature: h,
            grad_w: g,
            f: area * (h * g - g * g),
            g: area * g * g,
            willmore: area * h * h,
            df_explicit: explicit_df_from(level, curvature.ric_rad),
            ncap_t: area * g / (4.0 * PI),
        }
    }
}

/// `-area · [Ric(ν,ν) + ½(H - 2|∇w|)²]`.
pub fn explicit_df_from(level: &LevelSet, ric_rad: f64) -> f64 {
    let gap = level.mean_curvature - 2.0 * level.grad_w;
    -level.area * (ric_rad + 0.5 * gap * gap)
}

pub fn sample_at(sol: &PotentialSolution, t: f64) -> Result<FunctionalSample> {
    let level = sol.level_set(t)?;
    let curvature = curvature_at(sol.metric(), level.s)?;
    Ok(FunctionalSample::from_level(&level, &curvature))
}

pub fn explicit_df(sol: &PotentialSolution, t: f64) -> Result<f64> {
    sample_at(sol, t).map(|s| s.df_explicit)
}

/// Samples on a uniform level grid `0 = t_0 < … < t_{n-1} = t_max`.
#[derive(Debug, Clone)]
pub struct FunctionalSeries {
    metric: WarpFunction,
    s0: f64,
    dt: f64,
    samples: Vec<FunctionalSample>,
}

pub const CSV_HEADER: [&str; 10] = [
    "t",
    "s",
    "area",
    "H",
    "grad_w",
    "F",
    "G",
    "willmore",
    "dF_explicit",
    "ncap_t",
];

impl FunctionalSeries {
    pub fn build(sol: &PotentialSolution, t_max: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Usage(format!(
                "series needs at least 3 levels, got {n}"
            )));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::Usage(format!("t_max must be positive, got {t_max}")));
        }
        let grid = lin_spaced(0.0, t_max, n);
        let samples = grid
            .par_iter()
            .map(|&t| sample_at(sol, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            metric: sol.metric().clone(),
            s0: sol.s0(),
            dt: t_max / (n - 1) as f64,
            samples,
        })
    }

    /// Rebuilds a series from precomputed samples (used for fault injection
    /// in the verification suites).
    pub fn from_samples(
        metric: WarpFunction,
        s0: f64,
        samples: Vec<FunctionalSample>,
    ) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::Usage("series needs at least 3 samples".into()));
        }
        let dt = samples[1].t - samples[0].t;
        let uniform = samples
            .windows(2)
            .all(|w| ((w[1].t - w[0].t) / dt - 1.0).abs() < 1e-9 && w[1].s > w[0].s);
        if !(dt > 0.0 && uniform) {
            return Err(Error::Usage(
                "samples must lie on a uniform increasing level grid".into(),
            ));
        }
        Ok(Self {
            metric,
            s0,
            dt,
            samples,
        })
    }

    pub fn samples(&self) -> &[FunctionalSample] {
        &self.samples
    }

    pub fn metric(&self) -> &WarpFunction {
        &self.metric
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }

    pub fn column(&self, pick: impl Fn(&FunctionalSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(pick).collect()
    }

    /// Writes the series as CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Numeric(format!("csv write failed: {e}"));
        w.write_record(CSV_HEADER).map_err(io)?;
        for s in &self.samples {
            let row = [
                s.t,
                s.s,
                s.area,
                s.mean_curvature,
                s.grad_w,
                s.f,
                s.g,
                s.willmore,
                s.df_explicit,
                s.ncap_t,
            ];
            w.write_record(row.iter().map(|v| format!("{v:.16e}")))
                .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::Numeric(format!("csv flush failed: {e}")))?;
        Ok(())
    }
}

/// Second-order finite differences on a uniform grid: central in the
/// interior, one-sided three-point stencils at the ends.
pub fn differentiate(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3, "need at least 3 values to differentiate");
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dt);
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * dt);
    }
    d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dt);
    d
}

/// Whether `Ric >= 0` at `n` log-spaced radii of `[lo, hi]` and at `extra`.
pub fn ricci_nonnegative(
    metric: &WarpFunction,
    lo: f64,
    hi: f64,
    n: usize,
    extra: &[f64],
) -> Result<bool> {
    let start = if lo > 0.0 { lo } else { hi * 1e-6 };
    let grid = crate::fit::log_spaced(start, hi, n.max(2));
    for &s in grid.iter().chain(extra).chain(std::iter::once(&lo)) {
        let c = curvature_at(metric, s)?;
        let scale = c.ric_rad.abs().max(c.ric_tan.abs());
        if c.min_ricci() < -crate::metric::PINCH_TOLERANCE * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    /// `Ric >= 0` on `[s0, s(t_max)]`.
    pub hypothesis_met: bool,
    /// `F(t_{i+1}) <= F(t_i) + 1e-7` everywhere; `None` when unmet.
    pub monotone: Option<bool>,
    pub max_increase: f64,
    pub derivative_match: bool,
    /// Max of `|dF_fd - dF_explicit| / max(1, |dF_explicit|)` at interior nodes.
    pub max_derivative_error: f64,
    pub worst_t: f64,
}

pub fn check_monotonicity(series: &FunctionalSeries) -> Result<MonotonicityReport> {
    let samples = series.samples();
    let s_hi = samples.last().expect("non-empty").s;
    let radii = series.column(|s| s.s);
    let hypothesis_met = ricci_nonnegative(series.metric(), series.s0(), s_hi, 256, &radii)?;

    let f = series.column(|s| s.f);
    let max_increase = f
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let monotone = hypothesis_met.then_some(max_increase <= 1e-7);

    let fd = differentiate(&f, series.dt());
    let (mut worst, mut worst_t) = (0.0f64, samples[0].t);
    for i in 1..samples.len() - 1 {
        let exact = samples[i].df_explicit;
        let err = (fd[i] - exact).abs() / exact.abs().max(1.0);
        if err > worst {
            worst = err;
            worst_t = samples[i].t;
        }
    }
    Ok(MonotonicityReport {
        hypothesis_met,
        monotone,
        max_increase,
        derivative_match: worst <= DIFFERENCE_TOLERANCE,
        max_derivative_error: worst,
        worst_t,
    })
}

/// Max over interior nodes of `|G'_fd - (G - F)| / max(1, |F|)`.
pub fn check_g_ode(series: &FunctionalSeries) -> f64 {
    let g = series.column(|s| s.g);
    let dg = differentiate(&g, series.dt());
    let samples = series.samples();
    (1..samples.len() - 1)
        .map(|i| {
            let s = &samples[i];
            (dg[i] - (s.g - s.f)).abs() / s.f.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GenusZeroCheck {
    /// Pointwise pinching with the requested constant fails on the level set.
    HypothesisUnmet {
        #[serde(serialize_with = "crate::serde_util::extended")]
        epsilon_star: f64,
    },
    Evaluated {
        lhs: f64,
        rhs: f64,
        pass: bool,
    },
}

/// `2∫Ric(ν,ν) dμ >= ε(16π - ∫H² dμ)` on the level set `{w = t}`.
pub fn genus_zero_inequality_check(
    sol: &PotentialSolution,
    t: f64,
    epsilon: f64,
) -> Result<GenusZeroCheck> {
    let level = sol.level_set(t)?;
    genus_zero_on_level(sol.metric(), &level, epsilon)
}

pub fn genus_zero_on_level(
    metric: &WarpFunction,
    level: &LevelSet,
    epsilon: f64,
) -> Result<GenusZeroCheck> {
    let c = curvature_at(metric, level.s)?;
    if !crate::metric::pinched_at(&c, epsilon) {
        return Ok(GenusZeroCheck::HypothesisUnmet {
            epsilon_star: epsilon_star(&c),
        });
    }
    let willmore = level.area * level.mean_curvature * level.mean_curvature;
    let lhs = 2.0 * level.area * c.ric_rad;
    let rhs = epsilon * (WILLMORE_THRESHOLD - willmore);
    Ok(GenusZeroCheck::Evaluated {
        lhs,
        rhs,
        pass: lhs >= rhs - ALGEBRAIC_TOLERANCE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryWillmore {
    pub willmore: f64,
    /// `∫_{∂Ω} H² dμ < 16π`, strict up to a relative 1e-12 rounding band.
    pub below_threshold: bool,
}

pub fn boundary_willmore(sol: &PotentialSolution) -> Result<BoundaryWillmore> {
    let level = sol.level_set(0.0)?;
    let willmore = level.area * level.mean_curvature * level.mean_curvature;
    Ok(BoundaryWillmore {
        willmore,
        below_threshold: willmore < WILLMORE_THRESHOLD * (1.0 - 1e-12),
    })
}
