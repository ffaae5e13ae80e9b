//! `gsmc`: generate instances, run estimators, evaluate thresholds and bounds,
//! and run Monte Carlo sweeps.
//!
//! Exit codes: 0 on success, 2 on a configuration or input error, 3 when the
//! requested parameters are infeasible, 1 on I/O failures.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use gsmc::bounds::{pairwise_error_bound, type_class_count, ln_type_class_count, union_bound_total, TypeClassOverlap};
use gsmc::estimators::{exact_recovery, Estimator};
use gsmc::experiments::{run_sweep, ExperimentConfig, Theory};
use gsmc::io::{write_atomic, Instance};
use gsmc::likelihood::neg_log_likelihood;
use gsmc::model::{generate_instance, AtypicalCounts, GroundTruth, ModelKind, ModelParams};
use gsmc::thresholds::{model2_achievable_p, model2_converse_p, msp_model1, ThresholdReport};
use gsmc::{Error, Seed};

#[derive(Parser)]
#[command(name = "gsmc", version, about = "Community detection and matrix completion with graph side information")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a ground truth and observation and write an instance file.
    Generate(GenerateArgs),
    /// Run an estimator on an instance file.
    Estimate(EstimateArgs),
    /// Print the sample-probability threshold for the given parameters.
    Threshold(ThresholdArgs),
    /// Print the union bound and, optionally, one pairwise bound.
    Bound(BoundArgs),
    /// Run a Monte Carlo sweep.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorKind {
    Exhaustive,
    LocalSearch,
}

#[derive(Args)]
struct GenerateArgs {
    /// Parameter file with a `[params]` table.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance file to write (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Instance file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "local-search")]
    estimator: EstimatorKind,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    /// Personalization probability (both genres).
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    theta_a: Option<f64>,
    #[arg(long)]
    theta_r: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    i1: f64,
    #[arg(long, default_value_t = 0.0)]
    i2: f64,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Report the converse bound instead of the achievability bound.
    #[arg(long)]
    converse: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Basic,
    Atypical,
}

#[derive(Args)]
struct BoundArgs {
    /// Parameter file with a `[params]` table.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    #[arg(long, default_value_t = 0)]
    t_aa: usize,
    #[arg(long, default_value_t = 0)]
    t_rr: usize,
    #[arg(long, default_value_t = 0)]
    t_ar: usize,
    #[arg(long, default_value_t = 0)]
    t_ra: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output path; without either the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    params: ModelParams,
    #[serde(default)]
    atypical_counts: Option<AtypicalCounts>,
}

fn read_params(path: &Path) -> Result<ParamsFile, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn bits(labels: &[bool]) -> String {
    labels.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn to_text<T: Serialize>(value: &T) -> Result<String, Error> {
    toml::to_string(value).map_err(|e| Error::Format(e.to_string()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn generate(args: GenerateArgs) -> Result<(), Error> {
    let file = read_params(&args.config)?;
    let counts = match (file.params.kind, file.atypical_counts) {
        (ModelKind::Basic, _) => AtypicalCounts::none(),
        (ModelKind::Atypical, c) => c.unwrap_or(AtypicalCounts::UniformRandom),
    };
    let (xi, obs) = generate_instance(&file.params, counts, Seed(args.seed))?;
    let instance = Instance::new(file.params, Some(xi), obs)?;
    emit(&instance.to_toml_string()?, args.out.as_deref())
}

#[derive(Serialize)]
struct EstimateReport {
    estimator: String,
    men: String,
    action: String,
    atypical: String,
    neg_log_likelihood: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_recovery: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truth_neg_log_likelihood: Option<f64>,
}

fn estimate(args: EstimateArgs) -> Result<(), Error> {
    let instance = Instance::read(&args.config).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("{}: {io}", args.config.display())),
        e => e,
    })?;
    let estimator = match args.estimator {
        EstimatorKind::Exhaustive => Estimator::Exhaustive,
        EstimatorKind::LocalSearch => Estimator::LocalSearch { restarts: args.restarts },
    };
    let (params, obs) = (&instance.params, &instance.observation);
    let xi_hat: GroundTruth = estimator.estimate(obs, params, Seed(args.seed))?;
    let (exact, truth_nll) = match &instance.truth {
        Some(xi) => (Some(exact_recovery(&xi_hat, xi)?), Some(neg_log_likelihood(xi, obs, params)?)),
        None => (None, None),
    };
    let report = EstimateReport {
        estimator: estimator.to_string(),
        men: bits(xi_hat.man_labels()),
        action: bits(xi_hat.action_labels()),
        atypical: bits(xi_hat.atypical_labels()),
        neg_log_likelihood: neg_log_likelihood(&xi_hat, obs, params)?,
        exact_recovery: exact,
        truth_neg_log_likelihood: truth_nll,
    };
    emit(&to_text(&report)?, None)
}

#[derive(Serialize)]
struct ThresholdText {
    model: ModelKind,
    bound: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_value: Option<f64>,
    feasible: bool,
    exceeds_one: bool,
    regime: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    dominant_term: Option<String>,
    terms: toml::Table,
}

fn term_name<T: Serialize>(t: &T) -> String {
    // unit variants serialize to their snake_case name
    match toml::Value::try_from(t) {
        Ok(toml::Value::String(s)) => s,
        _ => String::new(),
    }
}

fn threshold_text(model: ModelKind, bound: &'static str, report: &ThresholdReport) -> ThresholdText {
    ThresholdText {
        model,
        bound,
        p_value: report.p_value,
        feasible: report.feasible,
        exceeds_one: report.exceeds_one,
        regime: if report.feasible { report.regime.to_string() } else { "infeasible".into() },
        dominant_term: report.dominant_term.map(|t| term_name(&t)),
        terms: report.terms.iter().map(|(t, v)| (term_name(t), toml::Value::Float(*v))).collect(),
    }
}

fn threshold(args: ThresholdArgs) -> Result<bool, Error> {
    let kind = match args.model {
        Some(ModelArg::Basic) => ModelKind::Basic,
        Some(ModelArg::Atypical) => ModelKind::Atypical,
        None if args.theta_a.is_some() || args.theta_r.is_some() => ModelKind::Atypical,
        None => ModelKind::Basic,
    };
    let bound = if args.converse { "converse" } else { "achievable" };
    let report = match kind {
        ModelKind::Basic => {
            let theta = match (args.theta, args.theta_a, args.theta_r) {
                (Some(t), None, None) => t,
                _ => return Err(Error::Config("the basic model takes --theta only".into())),
            };
            let eps = if args.converse { -args.epsilon } else { args.epsilon };
            msp_model1(args.n, args.m, args.i1, args.i2, theta, eps)?
        }
        ModelKind::Atypical => {
            let (a, r) = match (args.theta, args.theta_a, args.theta_r) {
                (None, Some(a), Some(r)) => (a, r),
                (Some(t), None, None) => (t, t),
                _ => return Err(Error::Config("the atypical model takes --theta-a and --theta-r".into())),
            };
            if args.converse {
                model2_converse_p(args.n, args.m, args.i1, args.i2, a, r, args.epsilon)?
            } else {
                model2_achievable_p(args.n, args.m, args.i1, args.i2, a, r, args.epsilon)?
            }
        }
    };
    emit(&to_text(&threshold_text(kind, bound, &report))?, None)?;
    Ok(report.feasible)
}

#[derive(Serialize)]
struct BoundText {
    i1: f64,
    i2: f64,
    union_bound: f64,
    ln_union_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairwise: Option<PairwiseText>,
}

#[derive(Serialize)]
struct PairwiseText {
    overlap: TypeClassOverlap,
    bound: f64,
    exponent: f64,
    underflow: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    class_size: Option<String>,
    ln_class_size: f64,
}

fn bound(args: BoundArgs) -> Result<(), Error> {
    let file = read_params(&args.config)?;
    let params = &file.params;
    let theory = Theory::of(params)?;
    let union = union_bound_total(params, theory.i1, theory.i2)?;
    let pairwise = match (args.k1, args.k2) {
        (None, None) => None,
        (k1, k2) => {
            let overlap = TypeClassOverlap {
                k1: k1.unwrap_or(0),
                k2: k2.unwrap_or(0),
                t_aa: args.t_aa,
                t_rr: args.t_rr,
                t_ar: args.t_ar,
                t_ra: args.t_ra,
            };
            let b = pairwise_error_bound(&overlap, params, theory.i1, theory.i2)?;
            Some(PairwiseText {
                overlap,
                bound: b.value,
                exponent: b.exponent,
                underflow: b.underflow,
                class_size: type_class_count(&overlap, params)?.map(|c| c.to_string()),
                ln_class_size: ln_type_class_count(&overlap, params)?,
            })
        }
    };
    let text = BoundText {
        i1: theory.i1,
        i2: theory.i2,
        union_bound: union.total,
        ln_union_bound: union.ln_total,
        pairwise,
    };
    emit(&to_text(&text)?, None)
}

fn sweep(args: SweepArgs) -> Result<(), Error> {
    let mut config = ExperimentConfig::read(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.out.is_some() {
        config.output = args.out;
    }
    let Format::Csv = args.format;
    let to_stdout = config.output.is_none();
    let result = run_sweep(&config)?;
    if to_stdout {
        emit(&result.to_csv_string()?, None)?;
    } else {
        eprint!("{}", result.summary());
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => 3,
        Error::Io(_) | Error::Csv(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("gsmc: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Estimate(a) => estimate(a),
        Command::Threshold(a) => match threshold(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(3),
            Err(e) => Err(e),
        },
        Command::Bound(a) => bound(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gsmc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
