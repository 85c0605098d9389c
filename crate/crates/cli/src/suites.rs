//! Verification suites: each check reports a measured value against a
//! tolerance, or marks itself unmet when its hypothesis fails.

use std::time::{Duration, Instant};

use clap::ValueEnum;
use pinchlab_core::asymptotics::{
    coarea_check, decay_check, holder_chain_check, li_yau_fit, refute, DecayStatus,
    RadialCoordinate, CONTRADICTION, POINTWISE_TOLERANCE,
};
use pinchlab_core::fit::lin_spaced;
use pinchlab_core::functionals::{
    check_g_ode, check_monotonicity, ricci_nonnegative, FunctionalSample, FunctionalSeries,
    DIFFERENCE_TOLERANCE,
};
use pinchlab_core::metric::{
    check_pinching, curvature_at, finite_difference_curvature_oracle, CurvaturePoint, Profile,
};
use pinchlab_core::potential::{capacity_scaling_check, ExteriorDomain, PotentialSolution};
use serde::Serialize;

use crate::config::{ScenarioConfig, Suite};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The hypothesis of the check does not hold for this scenario.
    Unmet,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Unmet => "UNMET",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub scenario: String,
    pub name: String,
    pub status: Status,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
    /// Wall time; kept out of JSON so that result files are reproducible.
    #[serde(skip)]
    pub runtime: Duration,
}

impl SuiteResult {
    pub fn id(&self) -> String {
        format!("{}/{}", self.scenario, self.name)
    }
}

/// Deliberate corruptions used to check that the suites catch bugs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Flip the sign of `Ric(ν,ν)` in the explicit derivative of `F`.
    RicRadSign,
}

fn inject(series: FunctionalSeries, fault: Fault) -> Result<FunctionalSeries, CliError> {
    match fault {
        Fault::RicRadSign => {
            let metric = series.metric().clone();
            let samples = series
                .samples()
                .iter()
                .map(|s| {
                    let ric = curvature_at(&metric, s.s)?.ric_rad;
                    let gap = s.mean_curvature - 2.0 * s.grad_w;
                    Ok(FunctionalSample {
                        df_explicit: -s.area * (-ric + 0.5 * gap * gap),
                        ..*s
                    })
                })
                .collect::<pinchlab_core::Result<Vec<_>>>()?;
            Ok(FunctionalSeries::from_samples(
                metric,
                series.s0(),
                samples,
            )?)
        }
    }
}

/// One metric and boundary radius under test.
pub struct Target<'a> {
    pub name: String,
    pub domain: ExteriorDomain,
    pub sol: PotentialSolution,
    pub config: &'a ScenarioConfig,
}

struct Recorder<'a> {
    suite: Suite,
    scenario: &'a str,
    out: Vec<SuiteResult>,
    clock: Instant,
}

impl Recorder<'_> {
    fn push(
        &mut self,
        name: &str,
        status: Status,
        value: Option<f64>,
        tolerance: Option<f64>,
        detail: String,
    ) {
        self.out.push(SuiteResult {
            suite: self.suite,
            scenario: self.scenario.to_string(),
            name: name.to_string(),
            status,
            value,
            tolerance,
            detail,
            runtime: self.clock.elapsed(),
        });
        self.clock = Instant::now();
    }

    fn bound(&mut self, name: &str, value: f64, tolerance: f64) {
        let status = if value <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        self.push(name, status, Some(value), Some(tolerance), String::new());
    }

    fn unmet(&mut self, name: &str, detail: String) {
        self.push(name, Status::Unmet, None, None, detail);
    }
}

pub fn run(
    target: &Target,
    suite: Suite,
    fault: Option<Fault>,
) -> Result<Vec<SuiteResult>, CliError> {
    let cfg = target.config;
    let needs_series = [Suite::Identities, Suite::Monotonicity, Suite::Decay]
        .iter()
        .any(|&s| suite.includes(s));
    let series = if needs_series {
        let series = FunctionalSeries::build(&target.sol, cfg.t_max, cfg.fine_levels())?;
        Some(match fault {
            Some(f) => inject(series, f)?,
            None => series,
        })
    } else {
        None
    };

    let mut results = Vec::new();
    for part in [
        Suite::Identities,
        Suite::Monotonicity,
        Suite::Decay,
        Suite::Chain,
    ] {
        if !suite.includes(part) {
            continue;
        }
        let mut rec = Recorder {
            suite: part,
            scenario: &target.name,
            out: Vec::new(),
            clock: Instant::now(),
        };
        match part {
            Suite::Identities => identities(&mut rec, target, series.as_ref().expect("built"))?,
            Suite::Monotonicity => monotonicity(&mut rec, series.as_ref().expect("built"))?,
            Suite::Decay => decay(&mut rec, target, series.as_ref().expect("built"))?,
            Suite::Chain => chain(&mut rec, target)?,
            Suite::All => unreachable!(),
        }
        results.extend(rec.out);
    }
    Ok(results)
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn curvature_gap(a: &CurvaturePoint, b: &CurvaturePoint) -> f64 {
    [
        relative(a.k_rad, b.k_rad),
        relative(a.k_tan, b.k_tan),
        relative(a.ric_rad, b.ric_rad),
        relative(a.ric_tan, b.ric_tan),
        relative(a.scalar, b.scalar),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn identities(
    rec: &mut Recorder,
    target: &Target,
    series: &FunctionalSeries,
) -> Result<(), CliError> {
    let sol = &target.sol;
    let metric = sol.metric();
    let samples = series.samples();
    let stride = (samples.len() / 200).max(1);
    let radii: Vec<f64> = samples.iter().step_by(stride).map(|s| s.s).collect();

    let mut trace = 0.0f64;
    for &s in &radii {
        let c = curvature_at(metric, s)?;
        trace = trace.max(c.trace_residual() / c.scalar.abs().max(1.0));
    }
    rec.bound("trace_identity", trace, 1e-12);

    let start = metric.domain_start();
    let mut oracle = 0.0f64;
    for &s in radii.iter().filter(|&&s| s >= start + 0.05) {
        let h = (1e-3 * s).min(1e-3);
        let exact = curvature_at(metric, s)?;
        let fd = finite_difference_curvature_oracle(metric, s, h)?;
        oracle = oracle.max(curvature_gap(&exact, &fd));
    }
    rec.bound("curvature_oracle", oracle, 1e-5);

    rec.bound("harmonic_flux", sol.harmonic_flux_residual()?, 1e-6);
    let dirichlet = sol.dirichlet_capacity()?;
    rec.bound(
        "capacity_expressions",
        (dirichlet / sol.ncap() - 1.0).abs(),
        1e-9,
    );

    let grid = lin_spaced(0.0, series.t_max(), 51);
    rec.bound(
        "capacity_scaling",
        capacity_scaling_check(sol, &grid)?,
        1e-6,
    );

    let willmore_excess = samples
        .iter()
        .map(|s| (s.f - s.willmore / 4.0) / s.willmore.abs().max(1.0))
        .fold(f64::NEG_INFINITY, f64::max);
    rec.bound("willmore_bounds_f", willmore_excess.max(0.0), 1e-12);

    rec.bound("g_ode", check_g_ode(series), DIFFERENCE_TOLERANCE);
    let m = check_monotonicity(series)?;
    rec.bound(
        "explicit_derivative",
        m.max_derivative_error,
        DIFFERENCE_TOLERANCE,
    );

    let coarse = lin_spaced(0.0, series.t_max(), 21);
    rec.bound("coarea", coarea_check(sol, &coarse)?, 1e-4);
    rec.bound("holder_equality", holder_chain_check(sol, &coarse)?, 1e-6);
    Ok(())
}

fn ricci_window(series: &FunctionalSeries) -> Result<bool, CliError> {
    let radii = series.column(|s| s.s);
    let hi = *radii.last().expect("non-empty");
    Ok(ricci_nonnegative(
        series.metric(),
        series.s0(),
        hi,
        256,
        &radii,
    )?)
}

fn monotonicity(rec: &mut Recorder, series: &FunctionalSeries) -> Result<(), CliError> {
    let m = check_monotonicity(series)?;
    if m.hypothesis_met {
        rec.bound("f_monotone", m.max_increase.max(0.0), 1e-7);
    } else {
        rec.unmet("f_monotone", "Ric >= 0 fails on the window".into());
    }
    if ricci_window(series)? {
        let worst = series
            .samples()
            .iter()
            .map(|s| (-s.g).max(s.g - s.f))
            .fold(f64::NEG_INFINITY, f64::max);
        rec.bound("g_between_zero_and_f", worst.max(0.0), 1e-9);
    } else {
        rec.unmet(
            "g_between_zero_and_f",
            "Ric >= 0 fails on the window".into(),
        );
    }
    Ok(())
}

fn decay(rec: &mut Recorder, target: &Target, series: &FunctionalSeries) -> Result<(), CliError> {
    let cfg = target.config;
    let s_hi = series.samples().last().expect("non-empty").s;
    let pinch = check_pinching(
        series.metric(),
        cfg.epsilon,
        (series.s0(), s_hi),
        cfg.pinch_samples,
    )?;
    let d = decay_check(series, cfg.epsilon, &pinch);

    if d.pointwise_checked == 0 {
        rec.unmet(
            "decay_pointwise",
            format!("pinching with epsilon = {} holds on no level", cfg.epsilon),
        );
    } else {
        let status = if d.pointwise_pass() {
            Status::Pass
        } else {
            Status::Fail
        };
        rec.push(
            "decay_pointwise",
            status,
            d.max_pointwise_excess,
            Some(POINTWISE_TOLERANCE),
            format!(
                "{} levels checked, {} violations",
                d.pointwise_checked, d.pointwise_violations
            ),
        );
    }

    if !d.hypothesis_met {
        let witness = pinch
            .first_failure_s
            .map_or(String::new(), |s| format!(" at s = {s}"));
        rec.unmet("decay_bound", format!("pinching fails{witness}"));
    } else {
        let detail = format!("threshold = {:.6e}, t_tilde = {:?}", d.threshold, d.t_tilde);
        match d.status {
            DecayStatus::Verified => {
                rec.push("decay_bound", Status::Pass, d.decay_rate, None, detail)
            }
            DecayStatus::Violated => {
                rec.push("decay_bound", Status::Fail, d.decay_rate, None, detail)
            }
            DecayStatus::ThresholdNotReached => rec.unmet(
                "decay_bound",
                format!(
                    "F stays above the threshold {:.6e} up to t_max",
                    d.threshold
                ),
            ),
        }
    }

    let beta = series.metric().tail_law().exponent;
    let coordinate = match series.metric().profile() {
        Profile::Schwarzschild { .. } => RadialCoordinate::Areal,
        _ => RadialCoordinate::Distance,
    };
    let lo = (10.0 * series.s0()).max(10.0);
    let fit = li_yau_fit(&target.sol, lo, 100.0 * lo, coordinate)?;
    let expected = 1.0 - 2.0 * beta;
    let tolerance = 0.02 * expected.abs();
    let error = (fit.exponent - expected).abs();
    rec.push(
        "li_yau_exponent",
        if error <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        },
        Some(error),
        Some(tolerance),
        format!(
            "exponent {:.6} against 1 - 2 beta = {expected:.6}",
            fit.exponent
        ),
    );
    Ok(())
}

fn chain(rec: &mut Recorder, target: &Target) -> Result<(), CliError> {
    let report = refute(&target.domain, &target.config.refute_config())?;
    let status = if report.conclusion == CONTRADICTION {
        Status::Fail
    } else {
        Status::Pass
    };
    rec.push(
        "refutation",
        status,
        report.chain.exponent_gap,
        None,
        report.conclusion.clone(),
    );
    Ok(())
}
