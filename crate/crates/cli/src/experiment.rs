//! Grid experiments comparing closed forms, exact variances and Monte-Carlo estimates.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Result;
use bp_core::circuit::{estimate_variance, CircuitSpec, MIN_SAMPLES, SIMULATION_LIMIT};
use bp_core::dense::dense_limit;
use bp_core::variance::{closed_form, variance_exact, ClosedForm};
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::inputs::{parse_observable, parse_state, State};
use crate::ConfigError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Gaussian,
    Magic,
    Nonfermionic,
    Custom,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExperimentKind::Gaussian => "gaussian",
            ExperimentKind::Magic => "magic",
            ExperimentKind::Nonfermionic => "nonfermionic",
            ExperimentKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl FromStr for ExperimentKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "magic" => Ok(Self::Magic),
            "nonfermionic" => Ok(Self::Nonfermionic),
            "custom" => Ok(Self::Custom),
            other => Err(ConfigError(format!("unknown experiment {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(ConfigError(format!("unknown format {other:?}"))),
        }
    }
}

fn default_samples() -> usize {
    10_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: Vec<usize>,
    /// `m` for gaussian, `τ` for magic, `j` for nonfermionic; unused for custom.
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Defaults to `n²` per row.
    #[serde(default)]
    pub layers: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Amplitudes of the nonfermionic superposition, default `1/√2` each.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    /// State and observable specs for the custom experiment.
    #[serde(default)]
    pub state: Option<String>,
    #[serde(default)]
    pub observable: Option<String>,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, n: Vec<usize>) -> Self {
        Self {
            experiment,
            n,
            grid: None,
            samples: default_samples(),
            layers: None,
            seed: 0,
            output: None,
            format: Format::Csv,
            alpha: None,
            beta: None,
            state: None,
            observable: None,
            workers: 0,
        }
    }

    fn amplitudes(&self) -> (f64, f64) {
        let s = 0.5f64.sqrt();
        (self.alpha.unwrap_or(s), self.beta.unwrap_or(s))
    }

    /// Grid values for one `n`, defaulting to every admissible index or five angles.
    fn grid_for(&self, n: usize) -> Vec<f64> {
        match (&self.grid, self.experiment) {
            (Some(g), _) => g.clone(),
            (None, ExperimentKind::Magic) => (0..5).map(|k| PI * k as f64 / 4.0).collect(),
            (None, ExperimentKind::Custom) => vec![f64::NAN],
            (None, _) => (1..=n).map(|v| v as f64).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n.is_empty() || self.n.contains(&0) {
            return Err(ConfigError("n list must be nonempty and positive".into()));
        }
        if matches!(&self.grid, Some(g) if g.is_empty()) {
            return Err(ConfigError("grid must be nonempty".into()));
        }
        if self.samples != 0 && self.samples < MIN_SAMPLES {
            return Err(ConfigError(format!("samples must be 0 (skip Monte Carlo) or at least {MIN_SAMPLES}")));
        }
        match self.experiment {
            ExperimentKind::Magic => {
                if let Some(&bad) = self.n.iter().find(|&&n| n % 4 != 0) {
                    return Err(ConfigError(format!("magic experiment needs n divisible by 4, got {bad}")));
                }
            }
            ExperimentKind::Gaussian | ExperimentKind::Nonfermionic => {
                if let Some(g) = &self.grid {
                    if let Some(bad) = g.iter().find(|v| v.fract() != 0.0 || **v < 1.0) {
                        return Err(ConfigError(format!("{} grid holds indices, got {bad}", self.experiment)));
                    }
                }
            }
            ExperimentKind::Custom => {
                if self.state.is_none() || self.observable.is_none() {
                    return Err(ConfigError("custom experiment needs state and observable".into()));
                }
            }
        }
        Ok(())
    }
}

/// One output row; `None` fields are written empty.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub experiment: String,
    pub n: usize,
    pub param: String,
    pub var_closed: Option<f64>,
    pub var_exact: Option<f64>,
    pub var_mc: Option<f64>,
    pub stderr: Option<f64>,
    pub samples: usize,
    pub layers: usize,
    pub seed: u64,
}

struct Point {
    n: usize,
    param: f64,
}

fn format_param(kind: ExperimentKind, v: f64) -> String {
    match kind {
        ExperimentKind::Custom => String::new(),
        ExperimentKind::Magic => format!("{v}"),
        _ => format!("{}", v as usize),
    }
}

fn family(cfg: &ExperimentConfig, p: &Point) -> Result<(State, String, Option<ClosedForm>)> {
    let n = p.n;
    Ok(match cfg.experiment {
        ExperimentKind::Gaussian => {
            let m = p.param as usize;
            (parse_state("zero", Some(n))?, format!("zstring:{m}"), Some(ClosedForm::Gaussian { n, m }))
        }
        ExperimentKind::Magic => {
            let tau = p.param;
            (parse_state(&format!("magic:{tau}"), Some(n))?, "z:1".into(), Some(ClosedForm::Magic { n, tau }))
        }
        ExperimentKind::Nonfermionic => {
            let j = p.param as usize;
            let (alpha, beta) = cfg.amplitudes();
            let state = parse_state(&format!("superposition:{alpha},{beta}"), Some(n))?;
            (state, format!("x:{j}"), Some(ClosedForm::NonFermionic { n, j, alpha, beta }))
        }
        ExperimentKind::Custom => {
            let state = parse_state(cfg.state.as_deref().unwrap_or_default(), Some(n))?;
            (state, cfg.observable.clone().unwrap_or_default(), None)
        }
    })
}

fn run_point(cfg: &ExperimentConfig, p: &Point) -> Row {
    let n = p.n;
    let layers = cfg.layers.unwrap_or(n * n);
    let mut row = Row {
        experiment: cfg.experiment.to_string(),
        n,
        param: format_param(cfg.experiment, p.param),
        var_closed: None,
        var_exact: None,
        var_mc: None,
        stderr: None,
        samples: cfg.samples,
        layers,
        seed: cfg.seed,
    };
    let tag = format!("{} n={n} param={}", row.experiment, row.param);
    let (state, obs_spec, closed) = match family(cfg, p) {
        Ok(v) => v,
        Err(e) => {
            warn!("{tag}: {e:#}");
            return row;
        }
    };
    if let Some(cf) = closed {
        match closed_form(cf) {
            Ok(v) => row.var_closed = Some(v),
            Err(e) => warn!("{tag}: closed form unavailable: {e}"),
        }
    }
    let o = match parse_observable(&obs_spec, n) {
        Ok(o) => o,
        Err(e) => {
            warn!("{tag}: {e:#}");
            return row;
        }
    };
    if n <= dense_limit() {
        match state.density().and_then(|rho| Ok(variance_exact(&rho, &o)?)) {
            Ok(r) => row.var_exact = Some(r.variance),
            Err(e) => warn!("{tag}: exact variance unavailable: {e:#}"),
        }
    } else {
        warn!("{tag}: exact variance skipped, n exceeds the dense limit {}", dense_limit());
    }
    if cfg.samples == 0 {
        return row;
    }
    if n > SIMULATION_LIMIT {
        warn!("{tag}: Monte Carlo skipped, n exceeds {SIMULATION_LIMIT}");
        return row;
    }
    let mc = CircuitSpec::new(n, Some(layers), cfg.seed)
        .map_err(anyhow::Error::from)
        .and_then(|spec| Ok(estimate_variance(&state.input()?, &o, &spec, cfg.samples, cfg.workers)?));
    match mc {
        Ok(est) => {
            row.var_mc = Some(est.var_hat);
            row.stderr = Some(est.stderr_var);
        }
        Err(e) => warn!("{tag}: Monte Carlo failed: {e:#}"),
    }
    row
}

/// Rows ordered by `(n, param)` as listed in the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    cfg.validate()?;
    let mut points = Vec::new();
    for &n in &cfg.n {
        for param in cfg.grid_for(n) {
            points.push(Point { n, param });
        }
    }
    Ok(points.par_iter().map(|p| run_point(cfg, p)).collect())
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes rows; the only line that changes between identical runs is the timestamp.
///
/// CSV starts with a `# generated_at=<unix seconds>` comment; JSON is an object
/// with `generated_at` on its own line followed by `rows`.
pub fn write_rows(rows: &[Row], format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "# generated_at={}", timestamp())?;
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let doc = serde_json::json!({ "generated_at": timestamp(), "rows": rows });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
