//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Expected values come from closed forms derived by hand
//! for each profile, evaluated here independently of the library.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use pinchlab_core::asymptotics::{
    coarea_check, holder_chain_check, li_yau_fit, refute, RadialCoordinate, RefuteConfig,
    CONTRADICTION,
};
use pinchlab_core::catalog::standard_catalog;
use pinchlab_core::fit::lin_spaced;
use pinchlab_core::functionals::{
    boundary_willmore, check_g_ode, check_monotonicity, genus_zero_on_level, ricci_nonnegative,
    FunctionalSeries, GenusZeroCheck,
};
use pinchlab_core::metric::{curvature_at, WarpFunction};
use pinchlab_core::potential::{
    capacity_scaling_check, solve_potential, ExteriorDomain, PotentialSolution,
};
use pinchlab_core::Result;

/// Levels on `[0, 5]` with step 0.005.
const LEVELS: usize = 1001;
const T_MAX: f64 = 5.0;

/// Step 0.0005, for the second-order difference check of `F'`.
const FINE_LEVELS: usize = 10001;

/// The catalog's round cap: `f = sin s` on `[0, 0.85]`.
fn sphere_cap() -> WarpFunction {
    standard_catalog()
        .into_iter()
        .find(|e| e.name == "sphere_cap")
        .expect("catalog has a sphere cap")
        .metric
}

fn solve(metric: WarpFunction, s0: f64) -> Result<PotentialSolution> {
    solve_potential(&ExteriorDomain::new(metric, s0)?)
}

fn series(metric: WarpFunction, s0: f64) -> Result<FunctionalSeries> {
    FunctionalSeries::build(&solve(metric, s0)?, T_MAX, LEVELS)
}

/// Every catalog instance with `s0 = 1`, plus the Schwarzschild horizon and
/// a boundary inside the round cap.
fn scenarios() -> Vec<(String, WarpFunction, f64)> {
    let mut out: Vec<_> = standard_catalog()
        .into_iter()
        .map(|e| (e.name.to_string(), e.metric, 1.0))
        .collect();
    out.push((
        "schwarzschild horizon".into(),
        WarpFunction::schwarzschild(1.0).unwrap(),
        0.0,
    ));
    out.push(("sphere_cap inner".into(), sphere_cap(), 0.2));
    out
}

type Outcome = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome);

fn flat_baseline() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ncap_err: f64 = 0.0;
    for s0 in [0.5, 1.0, 2.0] {
        let sol = solve(WarpFunction::flat(), s0)?;
        ncap_err = ncap_err.max((sol.ncap() - s0).abs());
        let ser = FunctionalSeries::build(&sol, T_MAX, LEVELS)?;
        for s in ser.samples() {
            worst = worst
                .max((s.f - 4.0 * PI).abs())
                .max((s.g - 4.0 * PI).abs())
                .max((s.willmore - 16.0 * PI).abs());
        }
    }
    Ok((
        worst <= 1e-7 && ncap_err <= 1e-8,
        format!("max |F-4π|,|G-4π|,|W-16π| = {worst:.2e}; max |ncap - s0| = {ncap_err:.2e}"),
    ))
}

fn cone_half() -> Outcome {
    let a: f64 = 0.5;
    let mut worst: f64 = 0.0;
    let mut worst_df: f64 = 0.0;
    let mut ncap_err: f64 = 0.0;
    for s0 in [0.5, 1.0, 2.0] {
        let sol = solve(WarpFunction::cone(a)?, s0)?;
        ncap_err = ncap_err.max((sol.ncap() - a * a * s0).abs());
        let ser = FunctionalSeries::build(&sol, T_MAX, LEVELS)?;
        for s in ser.samples() {
            worst = worst
                .max((s.f - 4.0 * PI * a * a).abs())
                .max((s.g - 4.0 * PI * a * a).abs())
                .max((s.willmore - 16.0 * PI * a * a).abs());
            worst_df = worst_df.max(s.df_explicit.abs());
        }
    }
    Ok((
        worst <= 1e-7 && ncap_err <= 1e-7 && worst_df <= 1e-9,
        format!(
            "max functional error {worst:.2e}; ncap error {ncap_err:.2e}; max |dF| {worst_df:.2e}"
        ),
    ))
}

fn power_closed_forms() -> Outcome {
    let ser = series(WarpFunction::power(1.0, 0.8)?, 1.0)?;
    let mut worst: f64 = 0.0;
    for s in ser.samples() {
        let decay = (-2.0 * s.t / 3.0).exp();
        worst = worst
            .max((s.f / (2.4 * PI * decay) - 1.0).abs())
            .max((s.g / (1.44 * PI * decay) - 1.0).abs());
    }
    let ode = check_g_ode(&ser);
    let df0 = ser.samples()[0].df_explicit;
    let df_err = (df0 + 1.6 * PI).abs();
    Ok((
        worst <= 1e-6 && ode <= 1e-5 && df_err <= 1e-6,
        format!("max rel F,G error {worst:.2e}; G' = G - F residual {ode:.2e}; |dF(0) + 1.6π| = {df_err:.2e}"),
    ))
}

fn capacity_scaling() -> Outcome {
    let grid = lin_spaced(0.0, T_MAX, 51);
    let mut worst: (f64, String) = (0.0, String::new());
    for (name, metric, s0) in scenarios() {
        let dev = capacity_scaling_check(&solve(metric, s0)?, &grid)?;
        if dev >= worst.0 {
            worst = (dev, name);
        }
    }
    Ok((
        worst.0 <= 1e-6,
        format!(
            "max |ncap(t)e^-t/ncap(0) - 1| = {:.2e} ({})",
            worst.0, worst.1
        ),
    ))
}

fn schwarzschild() -> Outcome {
    let m = WarpFunction::schwarzschild(1.0)?;
    let mut r_max: f64 = 0.0;
    for s in lin_spaced(0.0, 20.0, 401)
        .into_iter()
        .chain(lin_spaced(20.0, 1e4, 200))
    {
        r_max = r_max.max(curvature_at(&m, s)?.scalar.abs());
    }
    let sol = solve(m, 0.0)?;
    let ncap_err = (sol.ncap() - 1.0).abs();
    let ser = FunctionalSeries::build(&sol, T_MAX, 11)?;
    let f0_err = (ser.samples()[0].f + PI).abs();
    Ok((
        r_max <= 1e-8 && ncap_err <= 1e-6 && f0_err <= 1e-6,
        format!("max |R| = {r_max:.2e}; |ncap - 1| = {ncap_err:.2e}; |F(0) + π| = {f0_err:.2e}"),
    ))
}

fn derivative_formula() -> Outcome {
    let mut worst: (f64, String) = (0.0, String::new());
    for (name, metric, s0) in scenarios() {
        let fine = FunctionalSeries::build(&solve(metric, s0)?, T_MAX, FINE_LEVELS)?;
        let report = check_monotonicity(&fine)?;
        if report.max_derivative_error >= worst.0 {
            worst = (
                report.max_derivative_error,
                format!("{name} at t = {:.3}", report.worst_t),
            );
        }
    }
    Ok((
        worst.0 <= 1e-4,
        format!(
            "max |dF_fd - dF_explicit| / max(1, |dF|) = {:.2e} ({})",
            worst.0, worst.1
        ),
    ))
}

fn functional_bounds() -> Outcome {
    let mut willmore_violations = 0;
    let mut ordering_violations = 0;
    let mut ordered_metrics = 0;
    for (_, metric, s0) in scenarios() {
        let ser = series(metric.clone(), s0)?;
        let radii = ser.column(|s| s.s);
        let s_hi = *radii.last().unwrap();
        let ric_ok = ricci_nonnegative(&metric, s0, s_hi, 256, &radii)?;
        if ric_ok {
            ordered_metrics += 1;
        }
        for s in ser.samples() {
            if s.f > s.willmore / 4.0 + 1e-12 * s.willmore.abs().max(1.0) {
                willmore_violations += 1;
            }
            if ric_ok && !(s.g >= 0.0 && s.g <= s.f + 1e-9) {
                ordering_violations += 1;
            }
        }
    }
    Ok((
        willmore_violations == 0 && ordering_violations == 0,
        format!(
            "F <= W/4 violations {willmore_violations}; 0 <= G <= F violations \
             {ordering_violations} over {ordered_metrics} metrics with Ric >= 0"
        ),
    ))
}

fn sphere_genus_zero() -> Outcome {
    let metric = sphere_cap();
    let sol = solve(metric.clone(), 0.1)?;
    let mut pass = true;
    let mut detail = Vec::new();
    for s in [0.3f64, 0.5, 0.8] {
        let level = sol.level_set_through(s)?;
        let sin2 = s.sin().powi(2);
        match genus_zero_on_level(&metric, &level, 1.0 / 3.0)? {
            GenusZeroCheck::Evaluated { lhs, rhs, .. } => {
                let ratio = lhs / rhs;
                let lhs_err = (lhs / (16.0 * PI * sin2) - 1.0).abs();
                let rhs_err = (rhs / (16.0 * PI / 3.0 * sin2) - 1.0).abs();
                pass &=
                    lhs >= rhs && (ratio - 3.0).abs() <= 1e-6 && lhs_err <= 1e-6 && rhs_err <= 1e-6;
                detail.push(format!("s={s}: ratio {ratio:.9}"));
            }
            GenusZeroCheck::HypothesisUnmet { epsilon_star } => {
                pass = false;
                detail.push(format!("s={s}: not pinched (ε* = {epsilon_star})"));
            }
        }
    }
    Ok((pass, detail.join("; ")))
}

fn small_sphere_willmore() -> Outcome {
    let mut pass = true;
    let mut previous = f64::INFINITY;
    let mut detail = Vec::new();
    for s0 in [0.05f64, 0.1, 0.2] {
        let sol = solve(sphere_cap(), s0)?;
        let b = boundary_willmore(&sol)?;
        let err = (b.willmore - 16.0 * PI * s0.cos().powi(2)).abs();
        pass &= err <= 1e-7 && b.below_threshold && b.willmore < previous;
        previous = b.willmore;
        detail.push(format!(
            "s0={s0}: W/16π = {:.9} (err {err:.1e})",
            b.willmore / (16.0 * PI)
        ));
    }
    Ok((pass, detail.join("; ")))
}

fn li_yau_exponent() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for beta in [0.7f64, 0.8, 0.9, 1.0] {
        let sol = solve(WarpFunction::power(1.0, beta)?, 1.0)?;
        let fit = li_yau_fit(&sol, 10.0, 1000.0, RadialCoordinate::Distance)?;
        let exact = 1.0 - 2.0 * beta;
        let rel = (fit.exponent / exact - 1.0).abs();
        pass &= rel <= 0.02;
        detail.push(format!("β={beta}: {:.6} vs {exact:.1}", fit.exponent));
    }
    Ok((pass, detail.join("; ")))
}

fn coarea_and_holder() -> Outcome {
    let grid = lin_spaced(0.0, T_MAX, 26);
    let (mut coarea, mut holder) = ((0.0f64, String::new()), (0.0f64, String::new()));
    for (name, metric, s0) in scenarios() {
        let sol = solve(metric, s0)?;
        let c = coarea_check(&sol, &grid)?;
        let h = holder_chain_check(&sol, &grid)?;
        if c >= coarea.0 {
            coarea = (c, name.clone());
        }
        if h >= holder.0 {
            holder = (h, name);
        }
    }
    Ok((
        coarea.0 <= 1e-4 && holder.0 <= 1e-6,
        format!(
            "coarea residual {:.2e} ({}); Hölder deviation {:.2e} ({})",
            coarea.0, coarea.1, holder.0, holder.1
        ),
    ))
}

fn refutation_soundness() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    let config = RefuteConfig::default();
    for entry in standard_catalog() {
        for s0 in [0.5, 1.0, 2.0] {
            let report = refute(&ExteriorDomain::new(entry.metric.clone(), s0)?, &config)?;
            if report.conclusion == CONTRADICTION {
                pass = false;
                notes.push(format!("{} s0={s0}: full pass", entry.name));
            }
            match entry.name {
                "cone" | "power" => {
                    let witnessed = report.pinching.witness_s.is_some()
                        && report
                            .pinching
                            .epsilon_star_at_witness
                            .is_some_and(f64::is_finite);
                    if report.conclusion != "pinching fails" || !witnessed {
                        pass = false;
                        notes.push(format!("{} s0={s0}: {}", entry.name, report.conclusion));
                    }
                }
                "flat" => {
                    let w = report.boundary_willmore.willmore;
                    if (w - 16.0 * PI).abs() > 1e-9
                        || !report.conclusion.starts_with("boundary condition fails")
                    {
                        pass = false;
                        notes.push(format!("flat s0={s0}: willmore {w}, {}", report.conclusion));
                    }
                }
                _ => {}
            }
        }
    }
    if notes.is_empty() {
        notes.push("no consistent configuration among 21 scenarios".into());
    }
    Ok((pass, notes.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("flat baseline", flat_baseline),
        ("cone a = 0.5", cone_half),
        ("power β = 0.8 closed forms", power_closed_forms),
        ("capacity scaling", capacity_scaling),
        ("schwarzschild m = 1", schwarzschild),
        ("explicit derivative of F", derivative_formula),
        ("F <= W/4 and 0 <= G <= F", functional_bounds),
        ("genus-zero inequality on the round cap", sphere_genus_zero),
        ("small-sphere Willmore energy", small_sphere_willmore),
        ("Li–Yau decay exponent", li_yau_exponent),
        ("coarea and Hölder saturation", coarea_and_holder),
        ("refutation soundness", refutation_soundness),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(outcome) => outcome,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
