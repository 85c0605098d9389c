use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use pinchlab_core::asymptotics::{self, RefutationReport};
use pinchlab_core::catalog::{kind_spec, standard_catalog, MetricSpec, KINDS};
use pinchlab_core::functionals::{boundary_willmore, BoundaryWillmore, FunctionalSeries};
use pinchlab_core::metric::{growth_fit, GrowthReport, WarpFunction};
use pinchlab_core::potential::{solve_potential, ExteriorDomain, Truncation};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ScenarioArgs, ScenarioConfig, Suite};
use crate::suites::{self, Fault, Status, SuiteResult, Target};
use crate::CliError;

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Failure(format!("cannot write {}: {e}", path.display()))
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Failure(format!("serialisation failed: {e}")))?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_error(p, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Failure(format!("stdout: {e}"))),
    }
}

/// `kind(name=value,...)` with schema defaults filled in.
fn label(spec: &MetricSpec) -> Result<String, CliError> {
    let params = spec.resolved_params()?;
    if params.is_empty() {
        return Ok(spec.kind.clone());
    }
    let inner: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    Ok(format!("{}({})", spec.kind, inner.join(",")))
}

fn growth_window(cfg: &ScenarioConfig) -> [f64; 2] {
    cfg.growth_window.unwrap_or_else(|| {
        let lo = (10.0 * cfg.s0).max(10.0);
        [lo, 100.0 * lo]
    })
}

pub fn catalog(json: bool) -> Result<(), CliError> {
    if json {
        return write_json(None, &KINDS);
    }
    let mut out = String::new();
    for k in KINDS {
        out.push_str(&format!("{:<18} {}\n", k.kind, k.profile));
        for p in k.parameters {
            let default = p
                .default
                .map_or(String::new(), |d| format!(" [default {d}]"));
            out.push_str(&format!(
                "  {:<14} {} ({}){default}\n",
                p.name, p.description, p.constraint
            ));
        }
        if k.needs_path {
            out.push_str(&format!("  {:<14} CSV file with header `s,f`\n", "path"));
        }
    }
    print!("{out}");
    Ok(())
}

#[derive(Serialize)]
struct MetricSummary {
    kind: String,
    label: String,
    parameters: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    config: &'a ScenarioConfig,
    metric: MetricSummary,
    ncap: f64,
    truncation: Truncation,
    levels: usize,
    series_csv: String,
    growth: Option<GrowthReport>,
    growth_error: Option<String>,
    boundary_willmore: BoundaryWillmore,
}

pub fn solve(
    args: &ScenarioArgs,
    csv: Option<PathBuf>,
    summary: Option<PathBuf>,
) -> Result<(), CliError> {
    let cfg = args.resolve()?;
    let csv_path = csv
        .or_else(|| cfg.outputs.series_csv.clone())
        .unwrap_or_else(|| PathBuf::from("series.csv"));
    let summary_path = summary
        .or_else(|| cfg.outputs.summary_json.clone())
        .unwrap_or_else(|| PathBuf::from("summary.json"));

    let metric = cfg.metric.build()?;
    let domain = ExteriorDomain::new(metric.clone(), cfg.s0)?;
    let sol = solve_potential(&domain)?;
    info!("ncap = {}", sol.ncap());
    let series = FunctionalSeries::build(&sol, cfg.t_max, cfg.levels)?;
    let file = File::create(&csv_path).map_err(|e| io_error(&csv_path, e))?;
    series.write_csv(BufWriter::new(file))?;

    let window = growth_window(&cfg);
    let (growth, growth_error) = match growth_fit(&metric, window[0], window[1], cfg.growth_points)
    {
        Ok(g) => (Some(g), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = SolveSummary {
        config: &cfg,
        metric: MetricSummary {
            kind: cfg.metric.kind.clone(),
            label: label(&cfg.metric)?,
            parameters: cfg.metric.resolved_params()?,
        },
        ncap: sol.ncap(),
        truncation: sol.truncation(),
        levels: cfg.levels,
        series_csv: csv_path.display().to_string(),
        growth,
        growth_error,
        boundary_willmore: boundary_willmore(&sol)?,
    };
    write_json(Some(&summary_path), &report)?;
    println!("series: {}", csv_path.display());
    println!("summary: {}", summary_path.display());
    Ok(())
}

fn targets(cfg: &ScenarioConfig, catalog: bool) -> Result<Vec<(String, WarpFunction)>, CliError> {
    if catalog {
        Ok(standard_catalog()
            .into_iter()
            .map(|e| (e.name.to_string(), e.metric))
            .collect())
    } else {
        Ok(vec![(label(&cfg.metric)?, cfg.metric.build()?)])
    }
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    config: &'a ScenarioConfig,
    suite: Suite,
    fault: Option<String>,
    passed: usize,
    unmet: usize,
    failed: usize,
    results: &'a [SuiteResult],
}

pub fn verify(
    args: &ScenarioArgs,
    suite: Option<Suite>,
    catalog: bool,
    fault: Option<Fault>,
    json: Option<PathBuf>,
) -> Result<(), CliError> {
    let cfg = args.resolve()?;
    let suite = suite.unwrap_or(cfg.suite);
    let json = json.or_else(|| cfg.outputs.results_json.clone());

    let results: Vec<SuiteResult> = targets(&cfg, catalog)?
        .into_par_iter()
        .map(|(name, metric)| {
            let domain = ExteriorDomain::new(metric, cfg.s0)?;
            let sol = solve_potential(&domain)?;
            let target = Target {
                name,
                domain,
                sol,
                config: &cfg,
            };
            suites::run(&target, suite, fault)
        })
        .collect::<Result<Vec<_>, CliError>>()?
        .into_iter()
        .flatten()
        .collect();

    let count = |s: Status| results.iter().filter(|r| r.status == s).count();
    let (passed, unmet, failed) = (
        count(Status::Pass),
        count(Status::Unmet),
        count(Status::Fail),
    );
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3e}"));
    let mut out = String::new();
    for r in &results {
        out.push_str(&format!(
            "{:<5} {:<44} value {:>10}  tol {:>9}  {:>8.1} ms  {}\n",
            r.status.label(),
            r.id(),
            fmt(r.value),
            fmt(r.tolerance),
            r.runtime.as_secs_f64() * 1e3,
            r.detail
        ));
    }
    out.push_str(&format!(
        "verify: {} checks, {passed} pass, {unmet} unmet, {failed} fail\n",
        results.len()
    ));
    print!("{out}");

    if let Some(path) = &json {
        let doc = VerifyOutput {
            config: &cfg,
            suite,
            fault: fault.map(|f| format!("{f:?}")),
            passed,
            unmet,
            failed,
            results: &results,
        };
        write_json(Some(path), &doc)?;
    }
    if failed > 0 {
        let names: Vec<String> = results
            .iter()
            .filter(|r| r.status == Status::Fail)
            .map(SuiteResult::id)
            .collect();
        return Err(CliError::Failure(format!(
            "failed checks: {}",
            names.join(", ")
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct RefuteOutput<'a> {
    config: &'a ScenarioConfig,
    metric: String,
    report: RefutationReport,
}

pub fn refute(args: &ScenarioArgs, out: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = args.resolve()?;
    let out = out.or_else(|| cfg.outputs.report_json.clone());
    let domain = ExteriorDomain::new(cfg.metric.build()?, cfg.s0)?;
    let report = asymptotics::refute(&domain, &cfg.refute_config())?;
    info!("conclusion: {}", report.conclusion);
    let doc = RefuteOutput {
        config: &cfg,
        metric: label(&cfg.metric)?,
        report,
    };
    write_json(out.as_deref(), &doc)?;
    if out.is_some() {
        println!("conclusion: {}", doc.report.conclusion);
    }
    Ok(())
}

fn parse_axis(text: &str) -> Result<(String, Vec<f64>), CliError> {
    let (name, values) = text.split_once('=').ok_or_else(|| {
        CliError::Usage(format!("grid axis must be NAME=v1,v2,..., got `{text}`"))
    })?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("grid axis `{name}`: `{v}`: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((name.trim().to_string(), values))
}

fn apply(cfg: &mut ScenarioConfig, name: &str, value: f64) {
    match name {
        "s0" => cfg.s0 = value,
        "epsilon" => cfg.epsilon = value,
        "t_max" => cfg.t_max = value,
        _ => {
            cfg.metric.params.insert(name.to_string(), value);
        }
    }
}

#[derive(Serialize)]
struct SweepRow {
    index: usize,
    point: BTreeMap<String, f64>,
    metric: String,
    s0: f64,
    epsilon: f64,
    status: &'static str,
    message: Option<String>,
    ncap: Option<f64>,
    alpha_fit: Option<f64>,
    boundary_willmore: Option<f64>,
    pinching_pass: Option<bool>,
    growth_pass: Option<bool>,
    boundary_pass: Option<bool>,
    conclusion: Option<String>,
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    base: &'a ScenarioConfig,
    axes: Vec<(String, Vec<f64>)>,
    rows: Vec<SweepRow>,
}

pub fn sweep(args: &ScenarioArgs, grid: &[String], out: Option<PathBuf>) -> Result<(), CliError> {
    let base = args.merge()?;
    let axes = grid
        .iter()
        .map(|g| parse_axis(g))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = kind_spec(&base.metric.kind)?;
    for (name, _) in &axes {
        let known = ["s0", "epsilon", "t_max"].contains(&name.as_str())
            || spec.parameters.iter().any(|p| p.name == name);
        if !known {
            return Err(CliError::Usage(format!(
                "grid axis `{name}` is neither s0, epsilon, t_max nor a `{}` parameter",
                base.metric.kind
            )));
        }
    }

    // Row-major product, first axis slowest.
    let mut points: Vec<Vec<(String, f64)>> = vec![Vec::new()];
    for (name, values) in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((name.clone(), v));
                    q
                })
            })
            .collect();
    }
    let configs = points
        .iter()
        .map(|p| {
            let mut cfg = base.clone();
            for (name, v) in p {
                apply(&mut cfg, name, *v);
            }
            cfg.validate().map(|_| cfg)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rows: Vec<SweepRow> = configs
        .par_iter()
        .zip(points.par_iter())
        .enumerate()
        .map(|(index, (cfg, point))| sweep_row(index, cfg, point))
        .collect();
    info!("sweep: {} scenarios", rows.len());
    write_json(
        out.as_deref(),
        &SweepOutput {
            base: &base,
            axes,
            rows,
        },
    )
}

fn sweep_row(index: usize, cfg: &ScenarioConfig, point: &[(String, f64)]) -> SweepRow {
    let mut row = SweepRow {
        index,
        point: point.iter().cloned().collect(),
        metric: label(&cfg.metric).unwrap_or_else(|_| cfg.metric.kind.clone()),
        s0: cfg.s0,
        epsilon: cfg.epsilon,
        status: "ok",
        message: None,
        ncap: None,
        alpha_fit: None,
        boundary_willmore: None,
        pinching_pass: None,
        growth_pass: None,
        boundary_pass: None,
        conclusion: None,
    };
    let run = || -> Result<(f64, RefutationReport), CliError> {
        let domain = ExteriorDomain::new(cfg.metric.build()?, cfg.s0)?;
        let ncap = solve_potential(&domain)?.ncap();
        Ok((ncap, asymptotics::refute(&domain, &cfg.refute_config())?))
    };
    match run() {
        Ok((ncap, r)) => {
            row.ncap = Some(ncap);
            row.alpha_fit = Some(r.growth.alpha_fit);
            row.boundary_willmore = Some(r.boundary_willmore.willmore);
            row.pinching_pass = Some(r.pinching.pass);
            row.growth_pass = Some(r.growth.pass);
            row.boundary_pass = Some(r.boundary_willmore.pass);
            row.conclusion = Some(r.conclusion);
        }
        Err(e) => {
            row.status = match e {
                CliError::Precondition(_) => "precondition",
                CliError::Usage(_) => "invalid",
                CliError::Failure(_) => "failure",
            };
            row.message = Some(e.message().to_string());
        }
    }
    row
}
