use std::f64::consts::PI;

use pinchlab_core::asymptotics::{
    coarea_check, decay_check, holder_chain_check, li_yau_fit, refute, RadialCoordinate,
    RefuteConfig,
};
use pinchlab_core::fit::lin_spaced;
use pinchlab_core::functionals::FunctionalSeries;
use pinchlab_core::metric::{check_pinching, WarpFunction};
use pinchlab_core::potential::{solve_potential, ExteriorDomain, PotentialSolution};

fn solve(metric: WarpFunction, s0: f64) -> PotentialSolution {
    solve_potential(&ExteriorDomain::new(metric, s0).unwrap()).unwrap()
}

#[test]
fn schwarzschild_decays_like_newton_in_areal_radius() {
    let sol = solve(WarpFunction::schwarzschild(1.0).unwrap(), 0.0);
    let fit = li_yau_fit(&sol, 50.0, 500.0, RadialCoordinate::Areal).unwrap();
    assert!((fit.exponent + 1.0).abs() <= 0.02, "{}", fit.exponent);
    // u = 1 - sqrt(1 - 2m/r) in areal radius, independently of the solver.
    for r in [3.0f64, 10.0, 100.0] {
        let s = sol.metric().arclength_at_areal(r).unwrap();
        let exact = 1.0 - (1.0 - 2.0 / r).sqrt();
        assert!((sol.u(s).unwrap() / exact - 1.0).abs() <= 1e-8, "r = {r}");
    }
}

#[test]
fn power_li_yau_exponent() {
    let sol = solve(WarpFunction::power(1.0, 0.8).unwrap(), 1.0);
    let fit = li_yau_fit(&sol, 10.0, 1000.0, RadialCoordinate::Distance).unwrap();
    assert!((fit.exponent + 0.6).abs() <= 0.012);
}

#[test]
fn coarea_and_holder_on_power_and_cone() {
    let grid = lin_spaced(0.0, 5.0, 21);
    for metric in [
        WarpFunction::power(1.0, 0.8).unwrap(),
        WarpFunction::cone(0.5).unwrap(),
    ] {
        let sol = solve(metric, 1.0);
        assert!(coarea_check(&sol, &grid).unwrap() <= 1e-6);
        assert!(holder_chain_check(&sol, &grid).unwrap() <= 1e-8);
    }
    let sol = solve(WarpFunction::schwarzschild(1.0).unwrap(), 0.0);
    assert!(holder_chain_check(&sol, &grid).unwrap() <= 1e-6);
}

#[test]
fn power_pointwise_decay_inequality_with_window_epsilon() {
    let sol = solve(WarpFunction::power(1.0, 0.8).unwrap(), 1.0);
    let series = FunctionalSeries::build(&sol, 3.0, 301).unwrap();
    let s_hi = series.samples().last().unwrap().s;
    let probe = check_pinching(sol.metric(), 1e-6, (1.0, s_hi), 512).unwrap();
    let epsilon = probe.min_epsilon_star * (1.0 - 1e-9);
    assert!(epsilon > 0.0);
    let pinch = check_pinching(sol.metric(), epsilon, (1.0, s_hi), 512).unwrap();
    let d = decay_check(&series, epsilon, &pinch);
    assert_eq!(d.pointwise_checked, series.samples().len());
    assert!(d.pointwise_pass(), "{:?}", d.max_pointwise_excess);
    // Hand check at t = 0: F' = -1.6π and ε(2F - 8π) = ε(4.8π - 8π).
    assert!(-1.6 * PI <= epsilon * (4.8 * PI - 8.0 * PI));
}

#[test]
fn sphere_cap_pointwise_decay_inequality() {
    let cap = WarpFunction::sphere_cap_blend(0.85, 0.5, 0.5).unwrap();
    let sol = solve(cap, 0.1);
    let t_cap = sol.w(0.8).unwrap();
    let series = FunctionalSeries::build(&sol, t_cap, 101).unwrap();
    let pinch = check_pinching(sol.metric(), 1.0 / 3.0, (0.1, 0.8), 64).unwrap();
    let d = decay_check(&series, 1.0 / 3.0, &pinch);
    assert!(pinch.pass);
    assert_eq!(d.pointwise_checked, 101);
    assert!(d.pointwise_pass());
}

#[test]
fn power_refutation_fails_pinching_only() {
    let domain = ExteriorDomain::new(WarpFunction::power(1.0, 0.8).unwrap(), 1.0).unwrap();
    let r = refute(&domain, &RefuteConfig::default()).unwrap();
    assert!((r.growth.alpha_fit - 1.6).abs() <= 1e-6);
    assert!(r.growth.pass && r.boundary_willmore.pass);
    assert!(!r.pinching.pass);
    let eps_star = r.pinching.epsilon_star_at_witness.unwrap();
    assert!(eps_star < 0.1 && eps_star > 0.0);
    assert_eq!(r.conclusion, "pinching fails");
    let gap = r.chain.exponent_gap.unwrap();
    assert!((gap - (7.0 - 2.6 / 0.6)).abs() < 1e-4);
}

#[test]
fn refutation_reports_are_deterministic() {
    let domain = ExteriorDomain::new(WarpFunction::cone(0.5).unwrap(), 2.0).unwrap();
    let a = serde_json::to_string(&refute(&domain, &RefuteConfig::default()).unwrap()).unwrap();
    let b = serde_json::to_string(&refute(&domain, &RefuteConfig::default()).unwrap()).unwrap();
    assert_eq!(a, b);
}
