//! Monte Carlo harness: sweep configuration, per-point success rates and CSV
//! output.
//!
//! Success rates are estimated under the sampling prior of
//! [`sample_ground_truth`](crate::model::sample_ground_truth) (uniform over
//! oriented ground truths), not as a maximum over ground truths.
//!
//! A config file looks like
//!
//! ```toml
//! seed = 7
//! trials = 50
//! output = "sweep.csv"
//! estimator = { local_search = { restarts = 10 } }
//!
//! [model]
//! kind = "basic"
//! n = 200
//! m = 200
//! theta = 0.2
//! i1 = 4.0          # or alpha1 = ..., beta1 = ...
//! i2 = 0.0
//! beta_base = 0.05
//!
//! [sweep]
//! axis = "p"
//! start = 0.5
//! stop = 2.0
//! steps = 10
//! relative = true   # p values are multiples of the threshold p*
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{exact_recovery, Estimator};
use crate::io::write_atomic;
use crate::model::{generate_instance, AtypicalCounts, ModelKind, ModelParams, SbmParams};
use crate::seed::Seed;
use crate::stats::Proportion;
use crate::thresholds::{graph_quality, model2_achievable_p, model2_converse_p, msp_model1, ThresholdReport};

pub const DEFAULT_BETA_BASE: f64 = 0.05;

pub const CSV_HEADER: [&str; 11] = [
    "axis_name",
    "axis_value",
    "success_rate",
    "ci_low",
    "ci_high",
    "trials",
    "theory_achievable_p",
    "theory_converse_p",
    "regime",
    "elapsed_ms",
    "seed",
];

/// Intra-cluster edge probability giving graph quality `i_target` with the
/// inter-cluster probability fixed at `beta_base`.
pub fn solve_graph_params(i_target: f64, size: usize, beta_base: f64) -> Result<SbmParams> {
    if size < 2 {
        return Err(Error::InvalidParams(format!("graph size {size} must be at least 2")));
    }
    if !(beta_base > 0.0 && beta_base < 1.0) {
        return Err(Error::InvalidParams(format!("beta_base = {beta_base} must lie in (0, 1)")));
    }
    if !(i_target >= 0.0 && i_target.is_finite()) {
        return Err(Error::InvalidParams(format!("graph quality {i_target} must be finite and non-negative")));
    }
    if i_target == 0.0 {
        return Ok(SbmParams::new(beta_base, beta_base));
    }
    let s = size as f64;
    let alpha = (beta_base.sqrt() + (i_target * s.ln() / s).sqrt()).powi(2);
    if alpha >= 1.0 {
        return Err(Error::Infeasible(format!(
            "graph quality {i_target} needs alpha = {alpha:.4} >= 1 at size {size} with beta = {beta_base}"
        )));
    }
    Ok(SbmParams::new(alpha, beta_base))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "p")]
    P,
    I1,
    I2,
    #[serde(rename = "theta")]
    Theta,
    #[serde(rename = "theta_a")]
    ThetaA,
    #[serde(rename = "theta_r")]
    ThetaR,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::P => "p",
            SweepAxis::I1 => "I1",
            SweepAxis::I2 => "I2",
            SweepAxis::Theta => "theta",
            SweepAxis::ThetaA => "theta_a",
            SweepAxis::ThetaR => "theta_r",
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A graph given directly by its edge probabilities or by a target quality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphSpec {
    Probabilities(SbmParams),
    Quality(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub theta_a: Option<f64>,
    #[serde(default)]
    pub theta_r: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub alpha1: Option<f64>,
    #[serde(default)]
    pub beta1: Option<f64>,
    #[serde(default)]
    pub alpha2: Option<f64>,
    #[serde(default)]
    pub beta2: Option<f64>,
    #[serde(default)]
    pub i1: Option<f64>,
    #[serde(default)]
    pub i2: Option<f64>,
    #[serde(default)]
    pub beta_base: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    /// Only for the `p` axis: values are multiples of the threshold `p*`.
    #[serde(default)]
    pub relative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub estimator: Estimator,
    #[serde(default)]
    pub atypical_counts: Option<AtypicalCounts>,
    pub model: ModelSection,
    pub sweep: SweepSection,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ModelSection {
    fn graph(&self, quality: Option<f64>, alpha: Option<f64>, beta: Option<f64>, name: &str) -> Result<GraphSpec> {
        match (quality, alpha, beta) {
            (Some(i), None, None) => Ok(GraphSpec::Quality(i)),
            (None, Some(a), Some(b)) => Ok(GraphSpec::Probabilities(SbmParams::new(a, b))),
            (None, None, None) => Err(config_err(format!("{name} graph needs either i or alpha and beta"))),
            _ => Err(config_err(format!("{name} graph takes either i or alpha and beta, not both"))),
        }
    }

    pub fn social(&self) -> Result<GraphSpec> {
        self.graph(self.i1, self.alpha1, self.beta1, "social")
    }

    pub fn movie(&self) -> Result<GraphSpec> {
        self.graph(self.i2, self.alpha2, self.beta2, "movie")
    }

    pub fn beta_base(&self) -> f64 {
        self.beta_base.unwrap_or(DEFAULT_BETA_BASE)
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let model = &self.model;
        let s = &self.sweep;
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        if s.steps == 0 || !(s.start.is_finite() && s.stop.is_finite()) || s.start > s.stop {
            return Err(config_err(format!("empty sweep range [{}, {}] with {} steps", s.start, s.stop, s.steps)));
        }
        if s.relative && s.axis != SweepAxis::P {
            return Err(config_err("relative sweeps are only defined for the p axis"));
        }
        match (model.kind, s.axis) {
            (ModelKind::Basic, SweepAxis::ThetaA | SweepAxis::ThetaR) => {
                return Err(config_err("the basic model sweeps `theta`, not `theta_a`/`theta_r`"))
            }
            (ModelKind::Atypical, SweepAxis::Theta) => {
                return Err(config_err("the atypical model sweeps `theta_a` or `theta_r`, not `theta`"))
            }
            _ => {}
        }
        if s.axis != SweepAxis::P && model.p.is_none() {
            return Err(config_err("model.p is required unless sweeping p"));
        }
        let social = model.social();
        let movie = model.movie();
        match s.axis {
            SweepAxis::I1 if model.alpha1.is_some() || model.beta1.is_some() => {
                return Err(config_err("sweeping I1 sets the social graph; drop alpha1/beta1"))
            }
            SweepAxis::I2 if model.alpha2.is_some() || model.beta2.is_some() => {
                return Err(config_err("sweeping I2 sets the movie graph; drop alpha2/beta2"))
            }
            SweepAxis::I1 => {
                movie?;
            }
            SweepAxis::I2 => {
                social?;
            }
            _ => {
                social?;
                movie?;
            }
        }
        if let Some(b) = model.beta_base {
            if !(b > 0.0 && b < 1.0) {
                return Err(config_err(format!("beta_base = {b} must lie in (0, 1)")));
            }
        }
        // the first point must be a well-formed model
        let first = self.axis_values()[0];
        match self.point_params(first) {
            Ok(_) | Err(Error::Infeasible(_)) => Ok(()),
            Err(e) => Err(config_err(e.to_string())),
        }
    }

    /// Evenly spaced axis values from `start` to `stop` inclusive.
    pub fn axis_values(&self) -> Vec<f64> {
        let s = &self.sweep;
        if s.steps == 1 {
            return vec![s.start];
        }
        (0..s.steps)
            .map(|k| {
                let t = k as f64 / (s.steps - 1) as f64;
                s.start * (1.0 - t) + s.stop * t
            })
            .collect()
    }

    /// Model parameters at one axis value. Points that cannot be realized
    /// (graph quality out of reach, sample probability above one) give
    /// [`Error::Infeasible`].
    pub fn point_params(&self, axis_value: f64) -> Result<ModelParams> {
        let model = &self.model;
        let axis = self.sweep.axis;
        let pick = |a: SweepAxis, fixed: Option<f64>| if axis == a { Some(axis_value) } else { fixed };
        let realize = |spec: GraphSpec, size: usize| match spec {
            GraphSpec::Probabilities(g) => Ok(g),
            GraphSpec::Quality(i) => solve_graph_params(i, size, model.beta_base()),
        };
        let social = match axis {
            SweepAxis::I1 => GraphSpec::Quality(axis_value),
            _ => model.social()?,
        };
        let movie = match axis {
            SweepAxis::I2 => GraphSpec::Quality(axis_value),
            _ => model.movie()?,
        };
        let social = realize(social, model.n)?;
        let movie = realize(movie, model.m)?;
        let p0 = if axis == SweepAxis::P && !self.sweep.relative { axis_value } else { model.p.unwrap_or(0.0) };
        let mut params = match model.kind {
            ModelKind::Basic => {
                let theta = pick(SweepAxis::Theta, model.theta).ok_or_else(|| config_err("basic model needs theta"))?;
                if model.theta_a.is_some() || model.theta_r.is_some() {
                    return Err(config_err("basic model takes theta, not theta_a/theta_r"));
                }
                ModelParams::basic(model.n, model.m, theta, social, movie, p0.min(1.0))?
            }
            ModelKind::Atypical => {
                if model.theta.is_some() {
                    return Err(config_err("atypical model takes theta_a and theta_r, not theta"));
                }
                let a = pick(SweepAxis::ThetaA, model.theta_a).ok_or_else(|| config_err("atypical model needs theta_a"))?;
                let r = pick(SweepAxis::ThetaR, model.theta_r).ok_or_else(|| config_err("atypical model needs theta_r"))?;
                ModelParams::atypical(model.n, model.m, a, r, social, movie, p0.min(1.0))?
            }
        };
        let p = if axis == SweepAxis::P && self.sweep.relative {
            let report = Theory::of(&params)?;
            match report.achievable {
                Some(p_star) => axis_value * p_star,
                None => return Err(Error::Infeasible("threshold p* is undefined at these parameters".into())),
            }
        } else {
            p0
        };
        if p > 1.0 {
            return Err(Error::Infeasible(format!("sample probability {p} exceeds 1")));
        }
        params.p = p;
        params.validate()?;
        Ok(params)
    }

    pub fn atypical_counts(&self) -> AtypicalCounts {
        match (self.model.kind, self.atypical_counts) {
            (ModelKind::Basic, _) => AtypicalCounts::none(),
            (ModelKind::Atypical, Some(c)) => c,
            (ModelKind::Atypical, None) => AtypicalCounts::UniformRandom,
        }
    }

    pub fn point_seed(&self, index: usize) -> Seed {
        Seed(self.seed).derive_indexed("point", index as u64)
    }
}

/// Theory columns: sharp thresholds at `ε = 0` for the point's parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theory {
    pub i1: f64,
    pub i2: f64,
    pub achievable: Option<f64>,
    pub converse: Option<f64>,
    pub report: ThresholdReport,
}

fn quality(g: SbmParams, size: usize) -> Result<f64> {
    if g.alpha == g.beta {
        return Ok(0.0);
    }
    Ok(graph_quality(g.alpha, g.beta, size)?.value())
}

impl Theory {
    pub fn of(params: &ModelParams) -> Result<Self> {
        let i1 = quality(params.social, params.n)?;
        let i2 = quality(params.movie, params.m)?;
        let (n, m) = (params.n, params.m);
        let (report, converse) = match params.kind {
            ModelKind::Basic => {
                let r = msp_model1(n, m, i1, i2, params.theta_action, 0.0)?;
                let c = r.p_value;
                (r, c)
            }
            ModelKind::Atypical => {
                let (a, r) = (params.theta_action, params.theta_romance);
                let c = model2_converse_p(n, m, i1, i2, a, r, 0.0)?.p_value;
                (model2_achievable_p(n, m, i1, i2, a, r, 0.0)?, c)
            }
        };
        Ok(Theory { i1, i2, achievable: report.p_value, converse, report })
    }

    pub fn regime_label(&self) -> &'static str {
        if self.report.feasible {
            self.report.regime.as_str()
        } else {
            "infeasible"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRow {
    pub axis_value: f64,
    /// `None` for points that could not be realized.
    pub outcome: Option<Proportion>,
    pub theory_achievable_p: Option<f64>,
    pub theory_converse_p: Option<f64>,
    pub regime: String,
    pub elapsed_ms: u64,
    pub seed: Seed,
}

/// Runs `trials` independent generate, estimate and recovery-check rounds.
pub fn run_point(config: &ExperimentConfig, axis_value: f64, seed: Seed) -> Result<PointRow> {
    let start = Instant::now();
    let params = match config.point_params(axis_value) {
        Ok(p) => p,
        Err(Error::Infeasible(_)) => {
            return Ok(PointRow {
                axis_value,
                outcome: None,
                theory_achievable_p: None,
                theory_converse_p: None,
                regime: "infeasible".into(),
                elapsed_ms: start.elapsed().as_millis() as u64,
                seed,
            })
        }
        Err(e) => return Err(e),
    };
    let theory = Theory::of(&params)?;
    let counts = config.atypical_counts();
    let estimator = config.estimator;
    let successes: Result<Vec<bool>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let trial = seed.derive_indexed("trial", t as u64);
            let (xi, obs) = generate_instance(&params, counts, trial)?;
            let xi_hat = estimator.estimate(&obs, &params, trial.derive("estimator"))?;
            exact_recovery(&xi_hat, &xi)
        })
        .collect();
    let successes = successes?.into_iter().filter(|&s| s).count();
    Ok(PointRow {
        axis_value,
        outcome: Some(Proportion::new(successes, config.trials)),
        theory_achievable_p: theory.achievable,
        theory_converse_p: theory.converse,
        regime: theory.regime_label().into(),
        elapsed_ms: start.elapsed().as_millis() as u64,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub axis: SweepAxis,
    pub rows: Vec<PointRow>,
}

impl ExperimentResult {
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in &self.rows {
            let o = row.outcome.as_ref();
            w.write_record([
                self.axis.as_str().to_string(),
                row.axis_value.to_string(),
                opt(o.map(|o| o.rate)),
                opt(o.map(|o| o.ci_low)),
                opt(o.map(|o| o.ci_high)),
                o.map(|o| o.trials.to_string()).unwrap_or_default(),
                opt(row.theory_achievable_p),
                opt(row.theory_converse_p),
                row.regime.clone(),
                row.elapsed_ms.to_string(),
                row.seed.value().to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv_string()?.as_bytes())
    }

    /// Human-readable summary, one line per point.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let _ = match &row.outcome {
                Some(o) => writeln!(
                    out,
                    "{} = {:<10.4} success {:.3} [{:.3}, {:.3}]  p* = {}  {}",
                    self.axis,
                    row.axis_value,
                    o.rate,
                    o.ci_low,
                    o.ci_high,
                    row.theory_achievable_p.map_or("-".into(), |p| format!("{p:.4}")),
                    row.regime
                ),
                None => writeln!(out, "{} = {:<10.4} infeasible", self.axis, row.axis_value),
            };
        }
        out
    }
}

/// Runs every point of the sweep in axis order and, when the config names an
/// output path, writes the CSV.
pub fn run_sweep(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let rows = config
        .axis_values()
        .into_iter()
        .enumerate()
        .map(|(k, v)| run_point(config, v, config.point_seed(k)))
        .collect::<Result<Vec<_>>>()?;
    let result = ExperimentResult { axis: config.sweep.axis, rows };
    if let Some(path) = &config.output {
        result.write_csv(path)?;
    }
    Ok(result)
}
