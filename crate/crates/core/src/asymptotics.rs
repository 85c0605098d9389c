//! Long-time behaviour along the level sets of `w`: decay of `F`, the
//! polynomial decay exponent of `u`, the coarea and Hölder steps, and the
//! closing exponent comparison that rules out pinched metrics with
//! superquadratic volume growth.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{least_squares, log_spaced};
use crate::functionals::{boundary_willmore, FunctionalSeries, WILLMORE_THRESHOLD};
use crate::metric::{
    check_pinching, curvature_at, growth_fit, pinched_at, PinchReport, WarpFunction,
};
use crate::potential::{solve_potential, ExteriorDomain, PotentialSolution};
use crate::quadrature::integrate_panels;
use crate::serde_util;

/// Absolute slack of the pointwise differential inequality for `F`.
pub const POINTWISE_TOLERANCE: f64 = 1e-9;
/// Step in `t` for the coarea finite differences.
const COAREA_STEP: f64 = 1e-3;
/// Number of radii in the decay-exponent fit.
const LI_YAU_POINTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayStatus {
    Verified,
    Violated,
    ThresholdNotReached,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// Pinching held on the sampled range.
    pub hypothesis_met: bool,
    /// `8πε / (2 + 2ε)`.
    pub threshold: f64,
    /// First grid level with `F <= threshold`.
    pub t_tilde: Option<f64>,
    /// `4π e^{2 t̃}`.
    pub decay_constant: Option<f64>,
    /// Least-squares slope of `log F` over the tail; `None` when `F` does
    /// not decay or is not positive there.
    pub decay_rate: Option<f64>,
    pub status: DecayStatus,
    /// `F(t) <= C e^{-2t}` for every grid level `t >= t̃`.
    pub pass: bool,
    /// Levels where pinching holds at `s(t)` and the genus-zero branch
    /// `F' <= ε(2F - 8π)` was checked.
    pub pointwise_checked: usize,
    pub pointwise_violations: usize,
    /// Largest `F' - ε(2F - 8π)` among checked levels.
    pub max_pointwise_excess: Option<f64>,
}

impl DecayFit {
    pub fn pointwise_pass(&self) -> bool {
        self.pointwise_violations == 0
    }
}

pub fn decay_check(series: &FunctionalSeries, epsilon: f64, pinch: &PinchReport) -> DecayFit {
    let samples = series.samples();
    let threshold = 8.0 * PI * epsilon / (2.0 + 2.0 * epsilon);

    let mut checked = 0;
    let mut violations = 0;
    let mut max_excess: Option<f64> = None;
    for s in samples {
        let pinched = curvature_at(series.metric(), s.s)
            .map(|c| pinched_at(&c, epsilon))
            .unwrap_or(false);
        if !pinched {
            continue;
        }
        let excess = s.df_explicit - epsilon * (2.0 * s.f - 8.0 * PI);
        checked += 1;
        if excess > POINTWISE_TOLERANCE {
            violations += 1;
        }
        max_excess = Some(max_excess.map_or(excess, |m| m.max(excess)));
    }

    let first = samples.iter().position(|s| s.f <= threshold);
    let t_tilde = first.map(|i| samples[i].t);
    let decay_constant = t_tilde.map(|t| 4.0 * PI * (2.0 * t).exp());
    let (status, pass) = match (first, decay_constant) {
        (Some(i), Some(c)) => {
            let ok = samples[i..]
                .iter()
                .all(|s| s.f <= c * (-2.0 * s.t).exp() * (1.0 + 1e-9));
            let status = if ok {
                DecayStatus::Verified
            } else {
                DecayStatus::Violated
            };
            (status, ok)
        }
        _ => (DecayStatus::ThresholdNotReached, false),
    };

    let tail = &samples[first.unwrap_or(samples.len() / 2)..];
    let decay_rate = decay_exponent(tail);

    DecayFit {
        hypothesis_met: pinch.pass,
        threshold,
        t_tilde,
        decay_constant,
        decay_rate,
        status,
        pass,
        pointwise_checked: checked,
        pointwise_violations: violations,
        max_pointwise_excess: max_excess,
    }
}

fn decay_exponent(tail: &[crate::functionals::FunctionalSample]) -> Option<f64> {
    if tail.len() < 3 || tail.iter().any(|s| !(s.f > 0.0)) {
        return None;
    }
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.f), hi.max(s.f))
        });
    if hi - lo <= 1e-9 * hi {
        return None;
    }
    let ts: Vec<f64> = tail.iter().map(|s| s.t).collect();
    let logs: Vec<f64> = tail.iter().map(|s| s.f.ln()).collect();
    least_squares(&ts, &logs).ok().map(|l| l.slope)
}

/// How the decay window of `u` is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialCoordinate {
    /// Riemannian distance `s` from the pole (or inner boundary).
    Distance,
    /// Areal radius `f(s)`.
    Areal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiYauFit {
    /// Slope of `log u` against `log r`; `1 - α` for a tail `f ~ c s^{α/2}`.
    pub exponent: f64,
    pub window: [f64; 2],
    pub coordinate: RadialCoordinate,
    pub n_points: usize,
}

pub fn li_yau_fit(
    sol: &PotentialSolution,
    r_lo: f64,
    r_hi: f64,
    coordinate: RadialCoordinate,
) -> Result<LiYauFit> {
    if !(r_lo > 0.0 && r_hi > r_lo && r_hi.is_finite()) {
        return Err(Error::Usage(format!(
            "decay window [{r_lo}, {r_hi}] must satisfy 0 < r_lo < r_hi"
        )));
    }
    let radii = log_spaced(r_lo, r_hi, LI_YAU_POINTS);
    let mut xs = Vec::with_capacity(radii.len());
    let mut ys = Vec::with_capacity(radii.len());
    for &r in &radii {
        let s = match coordinate {
            RadialCoordinate::Distance => r,
            RadialCoordinate::Areal => sol.metric().arclength_at_areal(r)?,
        };
        if s < sol.s0() {
            return Err(Error::Usage(format!(
                "decay window reaches s = {s} inside the boundary s0 = {}",
                sol.s0()
            )));
        }
        xs.push(r.ln());
        ys.push(sol.u(s)?.ln());
    }
    Ok(LiYauFit {
        exponent: least_squares(&xs, &ys)?.slope,
        window: [r_lo, r_hi],
        coordinate,
        n_points: radii.len(),
    })
}

/// `Vol({w <= t}) - Vol(Ω) = 4π ∫_{s0}^{s(t)} f² ds`.
pub fn sublevel_volume(sol: &PotentialSolution, t: f64) -> Result<f64> {
    let metric = sol.metric();
    let s = sol.level_radius(t)?;
    if s == sol.s0() {
        return Ok(0.0);
    }
    let q = integrate_panels(
        |x| {
            let f = metric.jet(x).map(|j| j.f).unwrap_or(f64::NAN);
            f * f
        },
        sol.s0(),
        s,
        &metric.breakpoints(),
        1e-13,
    )?;
    Ok(4.0 * PI * q.value)
}

/// Max over `t_grid` of the relative gap between `d/dt Vol({w <= t})`
/// (five-point differences) and `∫|∇w|⁻¹ dμ = area / |∇w|`.
pub fn coarea_check(sol: &PotentialSolution, t_grid: &[f64]) -> Result<f64> {
    let h = COAREA_STEP;
    let vol = |t: f64| sublevel_volume(sol, t);
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        let dv = if t >= 2.0 * h {
            (vol(t - 2.0 * h)? - 8.0 * vol(t - h)? + 8.0 * vol(t + h)? - vol(t + 2.0 * h)?)
                / (12.0 * h)
        } else {
            (-25.0 * vol(t)? + 48.0 * vol(t + h)? - 36.0 * vol(t + 2.0 * h)?
                + 16.0 * vol(t + 3.0 * h)?
                - 3.0 * vol(t + 4.0 * h)?)
                / (12.0 * h)
        };
        let level = sol.level_set(t)?;
        let exact = level.area / level.grad_w;
        worst = worst.max((dv / exact - 1.0).abs());
    }
    Ok(worst)
}

/// Max over `t_grid` of `|lhs/rhs - 1|` with `lhs = e^{3t} ncap(∂Ω)³` and
/// `rhs = (4π)⁻³ (∫|∇w|⁻¹)(∫|∇w|²)²`. Equality holds on round level sets.
pub fn holder_chain_check(sol: &PotentialSolution, t_grid: &[f64]) -> Result<f64> {
    let ncap = sol.ncap();
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        let level = sol.level_set(t)?;
        let (a, g) = (level.area, level.grad_w);
        let lhs = (3.0 * t).exp() * ncap.powi(3);
        let rhs = (a / g) * (a * g * g).powi(2) / (4.0 * PI).powi(3);
        worst = worst.max((lhs / rhs - 1.0).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefuteConfig {
    pub epsilon: f64,
    pub t_max: f64,
    /// Levels in the functional series behind the decay constant.
    pub n_levels: usize,
    pub pinch_samples: usize,
    /// Defaults to `[max(10, 10 s0), 100 max(10, 10 s0)]`.
    pub growth_window: Option<[f64; 2]>,
    pub growth_points: usize,
    pub chain_points: usize,
}

impl Default for RefuteConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            t_max: 8.0,
            n_levels: 401,
            pinch_samples: 512,
            growth_window: None,
            growth_points: 32,
            chain_points: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinchingVerdict {
    pub pass: bool,
    pub epsilon: f64,
    pub s_range: [f64; 2],
    pub witness_s: Option<f64>,
    #[serde(serialize_with = "serde_util::extended_opt")]
    pub epsilon_star_at_witness: Option<f64>,
    #[serde(serialize_with = "serde_util::extended")]
    pub min_epsilon_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthVerdict {
    pub alpha_fit: f64,
    pub c_vol_fit: f64,
    pub fit_window: [f64; 2],
    /// `α > 4/3`.
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryVerdict {
    pub willmore: f64,
    pub threshold: f64,
    /// `willmore < 16π`.
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaSource {
    /// `4π e^{2t̃}` from the decay threshold level.
    DecayThreshold,
    /// `sup G(t) e^{2t}` over the sampled levels.
    EmpiricalSup,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainPoint {
    pub t: f64,
    /// `R_t = s(t)`.
    pub radius: f64,
    pub ln_lhs: f64,
    #[serde(serialize_with = "serde_util::extended")]
    pub ln_rhs: f64,
    #[serde(serialize_with = "serde_util::extended")]
    pub lhs: f64,
    #[serde(serialize_with = "serde_util::extended")]
    pub rhs: f64,
    pub lhs_exceeds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainEvaluation {
    /// All three verdicts pass; otherwise the comparison is evaluated with
    /// constants calibrated on a metric that violates the hypotheses.
    pub hypotheses_hold: bool,
    pub evaluated: bool,
    pub note: String,
    /// `(α + 1)/(α - 1)`.
    pub exponent: Option<f64>,
    /// `7 - (α + 1)/(α - 1)`, positive exactly when `α > 4/3`.
    pub exponent_gap: Option<f64>,
    pub ncap: f64,
    pub kappa_g: f64,
    pub kappa_g_source: KappaSource,
    pub kappa_vol: f64,
    /// Empirical `max s(t)^{α-1} e^{-t}`; the Li–Yau constant itself is
    /// not calibrated.
    pub kappa_li_yau: Option<f64>,
    #[serde(serialize_with = "serde_util::extended_opt")]
    pub ln_kappa: Option<f64>,
    pub decay: DecayFit,
    pub points: Vec<ChainPoint>,
    /// Smallest sampled level with `lhs > rhs`.
    pub crossing_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefutationReport {
    pub pinching: PinchingVerdict,
    pub growth: GrowthVerdict,
    pub boundary_willmore: BoundaryVerdict,
    pub chain: ChainEvaluation,
    pub conclusion: String,
}

pub const CONTRADICTION: &str = "CONTRADICTION — inconsistent inputs";

pub fn refute(domain: &ExteriorDomain, config: &RefuteConfig) -> Result<RefutationReport> {
    if !(config.epsilon > 0.0 && config.epsilon <= 1.0 / 3.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: config.epsilon,
            reason: "pinching constant must lie in (0, 1/3]",
        });
    }
    let sol = solve_potential(domain)?;
    let metric = domain.metric();
    let s0 = domain.s0();
    let s_max = sol.level_radius(config.t_max)?;
    let window = config.growth_window.unwrap_or_else(|| {
        let lo = (10.0 * s0).max(10.0);
        [lo, 100.0 * lo]
    });

    let (pinch, growth) = rayon::join(
        || check_pinching(metric, config.epsilon, (s0, s_max), config.pinch_samples),
        || growth_fit(metric, window[0], window[1], config.growth_points),
    );
    let (pinch, growth) = (pinch?, growth?);
    let boundary = boundary_willmore(&sol)?;

    let pinching = PinchingVerdict {
        pass: pinch.pass,
        epsilon: config.epsilon,
        s_range: pinch.s_range,
        witness_s: pinch.first_failure_s,
        epsilon_star_at_witness: pinch.epsilon_star_at_failure,
        min_epsilon_star: pinch.min_epsilon_star,
    };
    let growth_verdict = GrowthVerdict {
        alpha_fit: growth.alpha_fit,
        c_vol_fit: growth.c_vol_fit,
        fit_window: growth.fit_window,
        pass: growth.alpha_fit > 4.0 / 3.0,
    };
    let boundary_verdict = BoundaryVerdict {
        willmore: boundary.willmore,
        threshold: WILLMORE_THRESHOLD,
        pass: boundary.below_threshold,
    };
    let hypotheses_hold = pinching.pass && growth_verdict.pass && boundary_verdict.pass;

    let series = FunctionalSeries::build(&sol, config.t_max, config.n_levels)?;
    let decay = decay_check(&series, config.epsilon, &pinch);
    let chain = closing_comparison(
        &sol,
        &series,
        decay,
        growth.alpha_fit,
        growth.c_vol_fit,
        config,
        hypotheses_hold,
    )?;

    let conclusion = conclude(&pinching, &growth_verdict, &boundary_verdict, metric);
    Ok(RefutationReport {
        pinching,
        growth: growth_verdict,
        boundary_willmore: boundary_verdict,
        chain,
        conclusion,
    })
}

fn conclude(
    pinching: &PinchingVerdict,
    growth: &GrowthVerdict,
    boundary: &BoundaryVerdict,
    metric: &WarpFunction,
) -> String {
    let mut failures = Vec::new();
    if !pinching.pass {
        failures.push("pinching fails".to_string());
    }
    if !growth.pass {
        failures.push("growth fails".to_string());
    }
    if !boundary.pass {
        let borderline = (boundary.willmore / WILLMORE_THRESHOLD - 1.0).abs() < 1e-9;
        if borderline && pinching.min_epsilon_star == f64::INFINITY {
            failures.push(format!(
                "boundary condition fails (willmore = 16π on a {} metric with R = 0: the flat case)",
                metric.kind_name()
            ));
        } else {
            failures.push("boundary condition fails".to_string());
        }
    }
    if failures.is_empty() {
        CONTRADICTION.to_string()
    } else {
        failures.join("; ")
    }
}

fn closing_comparison(
    sol: &PotentialSolution,
    series: &FunctionalSeries,
    decay: DecayFit,
    alpha: f64,
    kappa_vol: f64,
    config: &RefuteConfig,
    hypotheses_hold: bool,
) -> Result<ChainEvaluation> {
    let ncap = sol.ncap();
    let empirical = series
        .samples()
        .iter()
        .map(|s| s.g * (2.0 * s.t).exp())
        .fold(0.0, f64::max);
    let (kappa_g, kappa_g_source) = match decay.decay_constant {
        Some(c) if c >= empirical => (c, KappaSource::DecayThreshold),
        _ => (empirical, KappaSource::EmpiricalSup),
    };

    let mut chain = ChainEvaluation {
        hypotheses_hold,
        evaluated: false,
        note: String::new(),
        exponent: None,
        exponent_gap: None,
        ncap,
        kappa_g,
        kappa_g_source,
        kappa_vol,
        kappa_li_yau: None,
        ln_kappa: None,
        decay,
        points: Vec::new(),
        crossing_t: None,
    };
    if !(alpha > 1.0) {
        chain.note = format!("fitted growth exponent {alpha} <= 1: comparison undefined");
        return Ok(chain);
    }
    let p = (alpha + 1.0) / (alpha - 1.0);
    chain.exponent = Some(p);
    chain.exponent_gap = Some(7.0 - p);

    let levels = log_spaced(
        0.01 * config.t_max,
        config.t_max,
        config.chain_points.max(2),
    );
    let radii = levels
        .iter()
        .map(|&t| sol.level_radius(t))
        .collect::<Result<Vec<_>>>()?;
    let kappa_ly = levels
        .iter()
        .zip(&radii)
        .map(|(t, r)| r.powf(alpha - 1.0) * (-t).exp())
        .fold(0.0, f64::max);
    chain.kappa_li_yau = Some(kappa_ly);

    let ln_kappa = 7f64.ln() + 2.0 * kappa_g.ln() + kappa_vol.ln() + p * kappa_ly.ln()
        - 3.0 * (4.0 * PI * ncap).ln();
    chain.ln_kappa = Some(ln_kappa);

    for (&t, &radius) in levels.iter().zip(&radii) {
        let ln_lhs = 7.0 * t + (-(-7.0 * t).exp()).ln_1p();
        let ln_rhs = ln_kappa + p * t;
        let exceeds = ln_lhs > ln_rhs;
        if exceeds && chain.crossing_t.is_none() {
            chain.crossing_t = Some(t);
        }
        chain.points.push(ChainPoint {
            t,
            radius,
            ln_lhs,
            ln_rhs,
            lhs: ln_lhs.exp(),
            rhs: ln_rhs.exp(),
            lhs_exceeds: exceeds,
        });
    }
    chain.evaluated = true;
    chain.note = if hypotheses_hold {
        "hypotheses hold on the sampled window".to_string()
    } else {
        "constants calibrated on a metric violating at least one hypothesis; \
         the Li–Yau constant is empirical"
            .to_string()
    };
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::lin_spaced;

    fn solve(m: WarpFunction, s0: f64) -> PotentialSolution {
        solve_potential(&ExteriorDomain::new(m, s0).unwrap()).unwrap()
    }

    #[test]
    fn flat_li_yau_is_newtonian() {
        let sol = solve(WarpFunction::flat(), 1.0);
        let fit = li_yau_fit(&sol, 10.0, 1000.0, RadialCoordinate::Distance).unwrap();
        assert!((fit.exponent + 1.0).abs() < 1e-9);
    }

    #[test]
    fn li_yau_rejects_bad_windows() {
        let sol = solve(WarpFunction::flat(), 1.0);
        assert!(li_yau_fit(&sol, 10.0, 10.0, RadialCoordinate::Distance).is_err());
        assert!(li_yau_fit(&sol, 0.5, 10.0, RadialCoordinate::Distance).is_err());
    }

    #[test]
    fn flat_coarea_and_holder() {
        let sol = solve(WarpFunction::flat(), 1.0);
        let grid = lin_spaced(0.0, 5.0, 11);
        assert!(coarea_check(&sol, &grid).unwrap() < 1e-6);
        assert!(holder_chain_check(&sol, &grid).unwrap() < 1e-10);
    }

    #[test]
    fn sublevel_volume_of_flat_shell() {
        let sol = solve(WarpFunction::flat(), 1.0);
        let v = sublevel_volume(&sol, 1.0).unwrap();
        let exact = 4.0 * PI / 3.0 * (3.0f64.exp() - 1.0);
        assert!((v / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_decay_is_skipped() {
        let sol = solve(WarpFunction::flat(), 1.0);
        let series = FunctionalSeries::build(&sol, 5.0, 51).unwrap();
        let pinch = check_pinching(sol.metric(), 0.1, (1.0, 100.0), 16).unwrap();
        let d = decay_check(&series, 0.1, &pinch);
        assert!(d.hypothesis_met);
        assert_eq!(d.status, DecayStatus::ThresholdNotReached);
        assert!(d.decay_rate.is_none());
        assert_eq!(d.pointwise_checked, 51);
        assert!(d.pointwise_pass());
    }

    #[test]
    fn power_decay_rate() {
        let sol = solve(WarpFunction::power(1.0, 0.8).unwrap(), 1.0);
        let series = FunctionalSeries::build(&sol, 5.0, 101).unwrap();
        let pinch = check_pinching(sol.metric(), 0.01, (1.0, 100.0), 64).unwrap();
        let d = decay_check(&series, 0.01, &pinch);
        assert!((d.decay_rate.unwrap() + 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn cone_refutation() {
        let domain = ExteriorDomain::new(WarpFunction::cone(0.5).unwrap(), 1.0).unwrap();
        let r = refute(&domain, &RefuteConfig::default()).unwrap();
        assert!(!r.pinching.pass);
        assert_eq!(r.pinching.epsilon_star_at_witness, Some(0.0));
        assert!(r.growth.pass && r.boundary_willmore.pass);
        assert_eq!(r.conclusion, "pinching fails");
    }

    #[test]
    fn flat_refutation() {
        let domain = ExteriorDomain::new(WarpFunction::flat(), 1.0).unwrap();
        let r = refute(&domain, &RefuteConfig::default()).unwrap();
        assert!(r.pinching.pass && r.growth.pass);
        assert!(!r.boundary_willmore.pass);
        assert!(r.conclusion.starts_with("boundary condition fails"));
    }

    #[test]
    fn report_field_names() {
        let domain = ExteriorDomain::new(WarpFunction::cone(0.5).unwrap(), 1.0).unwrap();
        let r = refute(&domain, &RefuteConfig::default()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            [
                "boundary_willmore",
                "chain",
                "conclusion",
                "growth",
                "pinching"
            ]
        );
    }

    #[test]
    fn epsilon_above_trace_bound_is_rejected() {
        let domain = ExteriorDomain::new(WarpFunction::flat(), 1.0).unwrap();
        let config = RefuteConfig {
            epsilon: 0.5,
            ..RefuteConfig::default()
        };
        assert!(matches!(
            refute(&domain, &config),
            Err(Error::InvalidParameter {
                name: "epsilon",
                ..
            })
        ));
    }
}
