//! Scenario configuration: a JSON document whose fields can be overridden
//! from the command line.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use pinchlab_core::asymptotics::RefuteConfig;
use pinchlab_core::catalog::MetricSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identities,
    Monotonicity,
    Decay,
    Chain,
    All,
}

impl Suite {
    pub fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub series_csv: Option<PathBuf>,
    pub summary_json: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
    pub results_json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub metric: MetricSpec,
    pub s0: f64,
    /// Pinching constant to test.
    pub epsilon: f64,
    pub t_max: f64,
    /// Levels in the emitted series.
    pub levels: usize,
    /// Level spacing of the series behind the difference checks.
    pub fd_step: f64,
    pub pinch_samples: usize,
    pub growth_window: Option<[f64; 2]>,
    pub growth_points: usize,
    pub chain_points: usize,
    pub suite: Suite,
    pub outputs: Outputs,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let refute = RefuteConfig::default();
        Self {
            metric: MetricSpec::new("flat", &[]),
            s0: 1.0,
            epsilon: refute.epsilon,
            t_max: refute.t_max,
            levels: refute.n_levels,
            fd_step: 5e-4,
            pinch_samples: refute.pinch_samples,
            growth_window: None,
            growth_points: refute.growth_points,
            chain_points: refute.chain_points,
            suite: Suite::All,
            outputs: Outputs::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0 / 3.0) {
            return usage(format!(
                "epsilon must lie in (0, 1/3], got {}",
                self.epsilon
            ));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return usage(format!("t_max must be positive, got {}", self.t_max));
        }
        if !(self.s0 >= 0.0 && self.s0.is_finite()) {
            return usage(format!(
                "s0 must be a finite non-negative radius, got {}",
                self.s0
            ));
        }
        if self.levels < 3 {
            return usage(format!("levels must be at least 3, got {}", self.levels));
        }
        if !(self.fd_step > 0.0 && self.fd_step <= self.t_max / 2.0) {
            return usage(format!(
                "fd_step must lie in (0, t_max/2], got {}",
                self.fd_step
            ));
        }
        if self.pinch_samples < 2 || self.growth_points < 3 || self.chain_points < 2 {
            return usage("pinch_samples >= 2, growth_points >= 3, chain_points >= 2".into());
        }
        self.metric.resolved_params()?;
        Ok(())
    }

    /// Levels of the fine series used by the difference checks.
    pub fn fine_levels(&self) -> usize {
        (self.t_max / self.fd_step).ceil() as usize + 1
    }

    pub fn refute_config(&self) -> RefuteConfig {
        RefuteConfig {
            epsilon: self.epsilon,
            t_max: self.t_max,
            n_levels: self.levels,
            pinch_samples: self.pinch_samples,
            growth_window: self.growth_window,
            growth_points: self.growth_points,
            chain_points: self.chain_points,
        }
    }
}

fn parse_param(text: &str) -> Result<(String, f64), String> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{text}`"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|e| format!("parameter `{name}`: {e}"))?;
    Ok((name.trim().to_string(), value))
}

/// Scenario selection shared by the subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Scenario JSON; the flags below override its fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Metric kind (see `catalog`).
    #[arg(long)]
    pub kind: Option<String>,
    /// Metric parameter, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// CSV with header `s,f` for `user_table`.
    #[arg(long, value_name = "FILE")]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub s0: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub fd_step: Option<f64>,
}

impl ScenarioArgs {
    pub fn resolve(&self) -> Result<ScenarioConfig, CliError> {
        let config = self.merge()?;
        config.validate()?;
        Ok(config)
    }

    /// The config file with the flags applied, not yet validated.
    pub fn merge(&self) -> Result<ScenarioConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(kind) = &self.kind {
            if *kind != config.metric.kind {
                config.metric = MetricSpec::new(kind, &[]);
            }
        }
        for (name, value) in &self.params {
            config.metric.params.insert(name.clone(), *value);
        }
        if let Some(path) = &self.table {
            config.metric.path = Some(path.clone());
        }
        if let Some(v) = self.s0 {
            config.s0 = v;
        }
        if let Some(v) = self.epsilon {
            config.epsilon = v;
        }
        if let Some(v) = self.t_max {
            config.t_max = v;
        }
        if let Some(v) = self.levels {
            config.levels = v;
        }
        if let Some(v) = self.fd_step {
            config.fd_step = v;
        }
        Ok(config)
    }
}
