//! Exterior harmonic potential of a round ball in a radial model.
//!
//! For `Ω = {s <= s0}` the problem `Δu = 0`, `u = 1` on `∂Ω`, `u → 0` at
//! infinity reduces to `(f² u')' = 0`, solved by
//!
//! ```text
//! u(s) = I(s) / I(s0),   I(s) = ∫_s^∞ f(σ)⁻² dσ,
//! ```
//!
//! and `w = -log u` solves `Δw = |∇w|²` with `|∇w| = f⁻² / I`. The level
//! set `{w = t}` is the round sphere `s = s(t)` with `t(s) = log(I(s0)/I(s))`;
//! its outward normal `ν = ∇w/|∇w|` is `∂s`.

use std::f64::consts::PI;

use log::debug;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::WarpFunction;
use crate::quadrature::integrate;
use crate::roots::{bisect_secant, RootTolerance};

/// The tail law must match `f` to this relative accuracy at the cut.
pub const TAIL_LAW_TOLERANCE: f64 = 1e-6;
/// The analytic tail beyond the cut must be below this fraction of `I`.
pub const TAIL_FRACTION_TOLERANCE: f64 = 1e-10;
/// Radius where the ladder gives up on the tail-fraction condition.
const MAX_CUT: f64 = 1e150;
const SEGMENT_REL_TOL: f64 = 1e-13;

/// Where the improper integral was truncated, and whether both truncation
/// conditions were met.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    pub s_cut: f64,
    pub law_mismatch: f64,
    pub tail_fraction: f64,
    pub law_condition_met: bool,
    pub tail_condition_met: bool,
}

/// Quadrature of `f⁻²` on a geometric ladder of radii, summed from the cut
/// inward so that `I` at every rung carries no cancellation.
#[derive(Debug, Clone)]
struct Ladder {
    rungs: Vec<f64>,
    /// `I(rung)`.
    tail_values: Vec<f64>,
    truncation: Truncation,
}

fn inverse_square(metric: &WarpFunction) -> impl Fn(f64) -> f64 + '_ {
    move |s| {
        let f = metric.jet_unchecked(s).f;
        1.0 / (f * f)
    }
}

impl Ladder {
    fn build(metric: &WarpFunction, start: f64) -> Result<Self> {
        let law = metric.tail_law();
        if law.exponent <= 0.5 {
            return Err(Error::Nonparabolic { beta: law.exponent });
        }
        let onset = metric.tail_onset();
        let mut breaks: Vec<f64> = metric
            .breakpoints()
            .into_iter()
            .filter(|&b| b > start)
            .collect();
        breaks.reverse();

        let integrand = inverse_square(metric);
        let mut rungs = vec![start];
        let mut segments = Vec::new();
        let mut inner = 0.0;
        let truncation = loop {
            let s = *rungs.last().expect("non-empty");
            if s >= onset && s > 0.0 {
                let mismatch = metric.tail_mismatch(s);
                let tail = law.integral_beyond(s)?;
                let fraction = tail / (inner + tail);
                let law_ok = mismatch <= TAIL_LAW_TOLERANCE;
                let tail_ok = fraction <= TAIL_FRACTION_TOLERANCE;
                if (law_ok && tail_ok) || (law_ok && s >= MAX_CUT) {
                    break Truncation {
                        s_cut: s,
                        law_mismatch: mismatch,
                        tail_fraction: fraction,
                        law_condition_met: law_ok,
                        tail_condition_met: tail_ok,
                    };
                }
                if s >= MAX_CUT {
                    return Err(Error::Numeric(format!(
                        "tail law never matches the profile: mismatch {mismatch:e} at s = {s:e}"
                    )));
                }
            }
            let mut next = (2.0 * s).max(s + 1.0);
            if let Some(&b) = breaks.last() {
                if b <= next {
                    next = b;
                    breaks.pop();
                }
            }
            let q = integrate(&integrand, s, next, 0.0, SEGMENT_REL_TOL)?;
            inner += q.value;
            segments.push(q.value);
            rungs.push(next);
        };

        let mut tail_values = vec![0.0; rungs.len()];
        let last = rungs.len() - 1;
        tail_values[last] = law.integral_beyond(rungs[last])?;
        for k in (0..last).rev() {
            tail_values[k] = tail_values[k + 1] + segments[k];
        }
        debug!(
            "{} ladder from s = {start}: s_cut = {:e}, law mismatch {:e} (ok: {}), tail fraction {:e} (ok: {})",
            metric.kind_name(),
            truncation.s_cut,
            truncation.law_mismatch,
            truncation.law_condition_met,
            truncation.tail_fraction,
            truncation.tail_condition_met,
        );
        Ok(Self {
            rungs,
            tail_values,
            truncation,
        })
    }

    fn s_cut(&self) -> f64 {
        self.truncation.s_cut
    }

    /// `I(s)` for `s` below the cut.
    fn eval(&self, metric: &WarpFunction, s: f64) -> Result<f64> {
        let k = self.rungs.partition_point(|&r| r <= s);
        if k > 0 && s == self.rungs[k - 1] {
            return Ok(self.tail_values[k - 1]);
        }
        if k >= self.rungs.len() {
            return Err(Error::Numeric(format!(
                "radius {s} lies beyond the truncation radius {}",
                self.s_cut()
            )));
        }
        let q = integrate(
            inverse_square(metric),
            s,
            self.rungs[k],
            0.0,
            SEGMENT_REL_TOL,
        )?;
        Ok(q.value + self.tail_values[k])
    }
}

/// `I(s) = ∫_s^∞ f⁻² dσ`: adaptive quadrature out to the truncation radius
/// plus the analytic tail `c⁻² S^{1-2β}/(2β-1)`.
pub fn tail_integral(metric: &WarpFunction, s: f64) -> Result<f64> {
    metric.check_domain(s)?;
    Ok(Ladder::build(metric, s)?.tail_values[0])
}

/// `Ω = {s <= s0}` with round boundary `∂Ω = {s = s0}`.
#[derive(Debug, Clone)]
pub struct ExteriorDomain {
    metric: WarpFunction,
    s0: f64,
}

impl ExteriorDomain {
    pub fn new(metric: WarpFunction, s0: f64) -> Result<Self> {
        metric.check_domain(s0)?;
        Ok(Self { metric, s0 })
    }

    pub fn metric(&self) -> &WarpFunction {
        &self.metric
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }
}

/// One level set `∂Ω_t = {w = t}`, a round sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelSet {
    pub t: f64,
    pub s: f64,
    pub areal: f64,
    pub area: f64,
    /// `H = 2f'/f` with respect to `ν = ∂s`.
    pub mean_curvature: f64,
    pub grad_w: f64,
    pub genus: u32,
    /// `|h̊|`: zero, the sphere is umbilic.
    pub traceless_second_fundamental_form_norm: f64,
    /// `|∇^⊤|∇w||`: zero, `|∇w|` is constant on the sphere.
    pub tangential_grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct PotentialSolution {
    domain: ExteriorDomain,
    ladder: Ladder,
    i0: f64,
}

/// Relative tolerance of the construction-time check of `(f² u')' = 0`.
pub const HARMONIC_CHECK_TOLERANCE: f64 = 1e-6;

pub fn solve_potential(domain: &ExteriorDomain) -> Result<PotentialSolution> {
    let ladder = Ladder::build(&domain.metric, domain.s0)?;
    let i0 = ladder.tail_values[0];
    let sol = PotentialSolution {
        domain: domain.clone(),
        ladder,
        i0,
    };
    let residual = sol.harmonic_flux_residual()?;
    if residual > HARMONIC_CHECK_TOLERANCE {
        return Err(Error::Numeric(format!(
            "radial harmonic identity (f² u')' = 0 violated: relative residual {residual:e}"
        )));
    }
    Ok(sol)
}

impl PotentialSolution {
    pub fn domain(&self) -> &ExteriorDomain {
        &self.domain
    }

    pub fn metric(&self) -> &WarpFunction {
        &self.domain.metric
    }

    pub fn s0(&self) -> f64 {
        self.domain.s0
    }

    pub fn truncation(&self) -> Truncation {
        self.ladder.truncation
    }

    /// `I(s0)`.
    pub fn boundary_tail(&self) -> f64 {
        self.i0
    }

    /// Normalized capacity `ncap₂(∂Ω) = (1/4π) ∫_{∂Ω} |∇w| dμ = 1/I(s0)`.
    pub fn ncap(&self) -> f64 {
        1.0 / self.i0
    }

    pub fn tail_integral(&self, s: f64) -> Result<f64> {
        self.metric().check_domain(s)?;
        self.ladder.eval(self.metric(), s)
    }

    pub fn u(&self, s: f64) -> Result<f64> {
        Ok(self.tail_integral(s)? / self.i0)
    }

    /// `w = -log u`, equal to the level parameter `t(s)`.
    pub fn w(&self, s: f64) -> Result<f64> {
        Ok((self.i0 / self.tail_integral(s)?).ln())
    }

    /// `|∇w| = f⁻² / I`, never obtained by differencing `w`.
    pub fn grad_w(&self, s: f64) -> Result<f64> {
        let f = self.metric().value(s)?;
        Ok(1.0 / (f * f * self.tail_integral(s)?))
    }

    /// The radius `s(t)` of `{w = t}`.
    pub fn level_radius(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Usage(format!(
                "level must be finite and >= 0, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(self.s0());
        }
        let rungs = &self.ladder.rungs;
        let level_at = |k: usize| (self.i0 / self.ladder.tail_values[k]).ln();
        let k = (1..rungs.len())
            .find(|&k| level_at(k) >= t)
            .ok_or_else(|| {
                Error::Numeric(format!(
                    "level t = {t} lies beyond the truncation radius {:e} (t = {})",
                    self.ladder.s_cut(),
                    level_at(rungs.len() - 1)
                ))
            })?;
        let tol = RootTolerance {
            residual: 1e-14 * t.max(1.0),
            ..RootTolerance::default()
        };
        bisect_secant(|s| Ok(self.w(s)? - t), rungs[k - 1], rungs[k], tol)
    }

    pub fn level_set(&self, t: f64) -> Result<LevelSet> {
        let s = self.level_radius(t)?;
        self.level_set_at_radius(t, s)
    }

    /// The level set through radius `s` (its level is `w(s)`).
    pub fn level_set_through(&self, s: f64) -> Result<LevelSet> {
        self.level_set_at_radius(self.w(s)?, s)
    }

    fn level_set_at_radius(&self, t: f64, s: f64) -> Result<LevelSet> {
        let j = self.metric().jet(s)?;
        let tail = self.tail_integral(s)?;
        Ok(LevelSet {
            t,
            s,
            areal: j.f,
            area: 4.0 * PI * j.f * j.f,
            mean_curvature: 2.0 * j.df / j.f,
            grad_w: 1.0 / (j.f * j.f * tail),
            genus: 0,
            traceless_second_fundamental_form_norm: 0.0,
            tangential_grad_norm: 0.0,
        })
    }

    /// Radii of the diagnostic grid, at levels 1/4 .. 4.
    pub fn diagnostic_radii(&self) -> Result<Vec<f64>> {
        [0.25, 0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&t| self.level_radius(t))
            .collect()
    }

    fn fd_step(&self, s: f64) -> f64 {
        1e-3 * (s - self.metric().domain_start()).min(s)
    }

    fn fd_derivative<F: Fn(f64) -> Result<f64>>(&self, g: F, s: f64) -> Result<f64> {
        let h = self.fd_step(s);
        Ok((g(s - 2.0 * h)? - 8.0 * g(s - h)? + 8.0 * g(s + h)? - g(s + 2.0 * h)?) / (12.0 * h))
    }

    /// Max over the diagnostic grid of `|f² u' · I(s0) + 1|`, the relative
    /// deviation of the flux `f² u'` from its constant value, with `u'`
    /// from finite differences of `u`.
    pub fn harmonic_flux_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for s in self.diagnostic_radii()? {
            let du = self.fd_derivative(|x| self.u(x), s)?;
            let f = self.metric().value(s)?;
            worst = worst.max((f * f * du * self.i0 + 1.0).abs());
        }
        Ok(worst)
    }

    /// Relative residual of `|∇w| = -u'/u` at `s`, `u'` by differences.
    pub fn grad_w_residual(&self, s: f64) -> Result<f64> {
        let du = self.fd_derivative(|x| self.u(x), s)?;
        let g = self.grad_w(s)?;
        Ok((g + du / self.u(s)?).abs() / g)
    }

    /// Relative residual of the radial form `w'' + (2f'/f) w' = (w')²` of
    /// `Δw = |∇w|²`, with `w' = |∇w|` and `w''` by differences of `|∇w|`.
    pub fn moser_residual(&self, s: f64) -> Result<f64> {
        let j = self.metric().jet(s)?;
        let dw = self.grad_w(s)?;
        let d2w = self.fd_derivative(|x| self.grad_w(x), s)?;
        Ok((d2w + 2.0 * j.df / j.f * dw - dw * dw).abs() / (dw * dw))
    }

    /// `(1/4π) ∫_{M∖Ω} |∇u|² dVol`, integrated on the same ladder.
    pub fn dirichlet_capacity(&self) -> Result<f64> {
        let metric = self.metric();
        let i0 = self.i0;
        let energy = |s: f64| {
            let f = metric.jet_unchecked(s).f;
            let du = 1.0 / (f * f * i0);
            du * du * f * f
        };
        let rungs = &self.ladder.rungs;
        let mut total = 0.0;
        for w in rungs.windows(2) {
            total += integrate(energy, w[0], w[1], 0.0, SEGMENT_REL_TOL)?.value;
        }
        let tail = metric.tail_law().integral_beyond(self.ladder.s_cut())?;
        Ok(total + tail / (i0 * i0))
    }
}

/// Max over `t_grid` of `|ncap(∂Ω_t) e^{-t} / ncap(∂Ω) - 1|`, with
/// `ncap(∂Ω_t) = (1/4π) · area · |∇w|` evaluated on the level set.
pub fn capacity_scaling_check(sol: &PotentialSolution, t_grid: &[f64]) -> Result<f64> {
    let ncap0 = sol.ncap();
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        let level = sol.level_set(t)?;
        let ncap_t = level.area * level.grad_w / (4.0 * PI);
        worst = worst.max((ncap_t * (-t).exp() / ncap0 - 1.0).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn tail_integral_examples() {
        assert!(rel(tail_integral(&WarpFunction::flat(), 2.0).unwrap(), 0.5) < 1e-9);
        let cone = WarpFunction::cone(0.5).unwrap();
        assert!(rel(tail_integral(&cone, 1.0).unwrap(), 4.0) < 1e-9);
        let p = WarpFunction::power(1.0, 0.8).unwrap();
        assert!(rel(tail_integral(&p, 1.0).unwrap(), 1.0 / 0.6) < 1e-9);
    }

    #[test]
    fn nonparabolic_profile_is_rejected() {
        let p = WarpFunction::power(1.0, 0.4).unwrap();
        assert_eq!(
            tail_integral(&p, 1.0),
            Err(Error::Nonparabolic { beta: 0.4 })
        );
        let d = ExteriorDomain::new(p, 1.0).unwrap();
        assert!(matches!(
            solve_potential(&d),
            Err(Error::Nonparabolic { .. })
        ));
    }

    #[test]
    fn truncation_conditions_are_met_on_catalog_profiles() {
        for m in [
            WarpFunction::flat(),
            WarpFunction::power(1.0, 0.8).unwrap(),
            WarpFunction::schwarzschild(1.0).unwrap(),
            WarpFunction::sphere_cap_blend(0.1, 0.1, 0.5).unwrap(),
        ] {
            let sol = solve_potential(&ExteriorDomain::new(m, 1.0).unwrap()).unwrap();
            let tr = sol.truncation();
            assert!(tr.law_condition_met && tr.tail_condition_met, "{tr:?}");
        }
    }

    #[test]
    fn flat_potential_is_newtonian() {
        let sol =
            solve_potential(&ExteriorDomain::new(WarpFunction::flat(), 1.0).unwrap()).unwrap();
        assert!(rel(sol.ncap(), 1.0) < 1e-12);
        for s in [1.0, 2.0, 10.0, 1e4] {
            assert!(rel(sol.u(s).unwrap(), 1.0 / s) < 1e-11);
            assert!((sol.w(s).unwrap() - s.ln()).abs() < 1e-11);
        }
        assert_eq!(sol.u(1.0).unwrap(), 1.0);
        assert_eq!(sol.w(1.0).unwrap(), 0.0);
        assert!((sol.level_radius(1.0).unwrap() - std::f64::consts::E).abs() < 1e-10);
        assert_eq!(sol.level_radius(0.0).unwrap(), 1.0);
    }

    #[test]
    fn schwarzschild_capacity_is_the_mass() {
        let m = WarpFunction::schwarzschild(1.0).unwrap();
        let sol = solve_potential(&ExteriorDomain::new(m.clone(), 0.0).unwrap()).unwrap();
        assert!((sol.ncap() - 1.0).abs() < 1e-9, "{}", sol.ncap());
        // u(r) = 1 - sqrt(1 - 2m/r) in areal radius
        for r in [2.5, 4.0, 30.0, 500.0] {
            let s = m.arclength_at_areal(r).unwrap();
            let exact = 1.0 - (1.0 - 2.0 / r).sqrt();
            assert!(rel(sol.u(s).unwrap(), exact) < 1e-9, "r = {r}");
        }
    }

    #[test]
    fn cone_capacity() {
        let sol =
            solve_potential(&ExteriorDomain::new(WarpFunction::cone(0.5).unwrap(), 1.0).unwrap())
                .unwrap();
        assert!(rel(sol.ncap(), 0.25) < 1e-12);
        assert!(rel(sol.u(3.0).unwrap(), 1.0 / 3.0) < 1e-11);
    }

    #[test]
    fn power_level_radius() {
        let sol = solve_potential(
            &ExteriorDomain::new(WarpFunction::power(1.0, 0.8).unwrap(), 1.0).unwrap(),
        )
        .unwrap();
        let s = sol.level_radius(0.6).unwrap();
        assert!((s - std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn negative_level_is_rejected() {
        let sol =
            solve_potential(&ExteriorDomain::new(WarpFunction::flat(), 1.0).unwrap()).unwrap();
        assert!(sol.level_radius(-1.0).is_err());
        assert!(sol.level_radius(f64::NAN).is_err());
    }

    #[test]
    fn pole_cannot_be_the_boundary() {
        assert!(ExteriorDomain::new(WarpFunction::flat(), 0.0).is_err());
    }

    #[test]
    fn dirichlet_energy_matches_flux() {
        let m = WarpFunction::schwarzschild(1.0).unwrap();
        let sol = solve_potential(&ExteriorDomain::new(m, 0.5).unwrap()).unwrap();
        assert!(rel(sol.dirichlet_capacity().unwrap(), sol.ncap()) < 1e-9);
    }
}
