//! Command-line interface: synthetic data generation, regularization paths,
//! certified MIP solves, evaluation, and benchmark scenarios.
//!
//! Exit codes: 0 success (including gap-reached certificates), 2 usage or
//! data errors, 3 solver budget exhausted. All stochastic commands require
//! an explicit seed. JSON outputs carry `"schema": 1` and are byte-identical
//! across reruns except for the `wall_time_s` field. `RAYON_NUM_THREADS`
//! overrides the worker-thread count.

mod scenarios;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use l0class::cd::{FitOptions, Solution};
use l0class::data::{
    gen_synthetic, gen_validation_response, load_csv, load_svmlight, standardize, Dataset,
    Standardize, SyntheticSpec,
};
use l0class::local_search::{cd_with_local_search, LocalSearchOptions, SwapOptions};
use l0class::loss::{LossKind, PenaltyParams, DEFAULT_SMOOTHING};
use l0class::metrics::{auc, recovery_report};
use l0class::mip::{iga_solve, MipOptions, MipStatus};
use l0class::path::{fit_path, tune_on_validation, Algorithm, GridSpec, PathOptions};

#[derive(Parser)]
#[command(name = "l0class", version, about = "Sparse linear classification with l0/l1/l2 penalties")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic instance: training data, validation labels, and
    /// the planted coefficients.
    Synth(SynthArgs),
    /// Fit a regularization path over a (lambda0, lambda_q) grid.
    Path(PathArgs),
    /// Solve one penalty configuration to certified optimality.
    Mip(MipArgs),
    /// Evaluate a fitted model: AUC, and support recovery when the planted
    /// coefficients are given.
    Eval(EvalArgs),
    /// Run a built-in benchmark scenario over a list of seeds.
    Bench(BenchArgs),
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    Budget(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Budget(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Data(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<l0class::Error> for CliError {
    fn from(e: l0class::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(format!("json error: {e}"))
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::from_default_env()
        .filter_level(level)
        .init();

    let outcome = match cli.cmd {
        Cmd::Synth(args) => cmd_synth(args),
        Cmd::Path(args) => cmd_path(args),
        Cmd::Mip(args) => cmd_mip(args),
        Cmd::Eval(args) => cmd_eval(args),
        Cmd::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.code());
        }
    }
}

// ---------------------------------------------------------------------------
// shared data/loss plumbing
// ---------------------------------------------------------------------------

#[derive(Args, Clone)]
struct DataArgs {
    /// Input data file.
    #[arg(long)]
    data: PathBuf,
    /// Input format; inferred from the extension when omitted
    /// (.svm/.svmlight/.libsvm are sparse, everything else is csv).
    #[arg(long, value_parser = ["csv", "svmlight"])]
    format: Option<String>,
    /// The csv file has a header row.
    #[arg(long)]
    has_header: bool,
    /// 0-based index of the label column in csv input.
    #[arg(long, default_value_t = 0)]
    label_column: usize,
    /// Standardization applied after loading.
    #[arg(long, default_value = "none", value_parser = ["none", "unit-l2", "center-and-unit-l2"])]
    standardize: String,
    /// Append a penalized all-ones column (no unpenalized intercept is
    /// fitted anywhere; this column is shrunk and selected like any other).
    #[arg(long)]
    add_constant_column: bool,
}

impl DataArgs {
    fn load(&self) -> CliResult<Dataset> {
        let format = match &self.format {
            Some(f) => f.clone(),
            None => {
                let ext = self
                    .data
                    .extension()
                    .and_then(|e| e.to_str())
                    .unwrap_or("")
                    .to_ascii_lowercase();
                if matches!(ext.as_str(), "svm" | "svmlight" | "libsvm") {
                    "svmlight".into()
                } else {
                    "csv".into()
                }
            }
        };
        let d = match format.as_str() {
            "csv" => load_csv(&self.data, self.has_header, self.label_column)?,
            "svmlight" => load_svmlight(&self.data)?,
            other => return Err(CliError::Usage(format!("unknown format '{other}'"))),
        };
        let mode = match self.standardize.as_str() {
            "none" => Standardize::None,
            "unit-l2" => Standardize::UnitL2,
            "center-and-unit-l2" => Standardize::CenterAndUnitL2,
            other => return Err(CliError::Usage(format!("unknown standardization '{other}'"))),
        };
        let d = standardize(&d, mode)?;
        if self.add_constant_column {
            log::warn!(
                "appending a penalized all-ones column as feature {}; it is regularized like any other coordinate",
                d.p() + 1
            );
            Ok(d.with_constant_column())
        } else {
            Ok(d)
        }
    }
}

fn parse_loss(name: &str, mu: f64) -> CliResult<LossKind> {
    match name {
        "logistic" => Ok(LossKind::Logistic),
        "squared-hinge" => Ok(LossKind::SquaredHinge),
        "smoothed-hinge" => LossKind::smoothed_hinge(mu).map_err(|e| CliError::Usage(e.to_string())),
        other => Err(CliError::Usage(format!(
            "unknown loss '{other}'; supported: logistic, squared-hinge, smoothed-hinge"
        ))),
    }
}

fn parse_f64_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("cannot parse '{t}' as a number")))
        })
        .collect()
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

#[derive(Args)]
struct SynthArgs {
    /// Synthetic-spec JSON file
    /// `{n, p, correlation: {kind, param}, k_dagger, s | snr, response_model, seed?}`.
    #[arg(long, conflicts_with_all = ["n", "p"])]
    spec: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    /// Correlation structure: identity, exponential:RHO, equicorrelated:C.
    #[arg(long, default_value = "identity")]
    correlation: String,
    #[arg(long, default_value_t = 1)]
    k_dagger: usize,
    /// Bernoulli-logistic signal scale (the default response model).
    #[arg(long)]
    s: Option<f64>,
    /// Sign-noise signal-to-noise ratio (selects the sign-noise model).
    #[arg(long, conflicts_with = "s")]
    snr: Option<f64>,
    /// Seed (mandatory unless the spec file carries one).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for train.csv, val_labels.csv, beta_dagger.json.
    #[arg(long)]
    out: PathBuf,
    /// Seed for the validation label draw; defaults to the data seed (the
    /// draws use separate streams either way).
    #[arg(long)]
    validation_seed: Option<u64>,
}

#[derive(Deserialize)]
struct SpecFile {
    #[serde(flatten)]
    spec: SyntheticSpec,
    seed: Option<u64>,
}

#[derive(Serialize)]
struct SynthSummary<'a> {
    schema: u32,
    spec: &'a SyntheticSpec,
    seed: u64,
    validation_seed: u64,
    train: String,
    val_labels: String,
    beta_dagger: String,
    wall_time_s: f64,
}

#[derive(Serialize, Deserialize)]
struct BetaFile {
    schema: u32,
    p: usize,
    coefficients: Vec<(usize, f64)>,
}

fn parse_correlation(s: &str) -> CliResult<l0class::data::Correlation> {
    use l0class::data::Correlation;
    let (kind, param) = match s.split_once(':') {
        Some((k, p)) => (k, Some(p)),
        None => (s, None),
    };
    let parse = |p: Option<&str>| -> CliResult<f64> {
        p.ok_or_else(|| CliError::Usage(format!("correlation '{kind}' needs a parameter like {kind}:0.5")))?
            .parse()
            .map_err(|_| CliError::Usage(format!("cannot parse correlation parameter in '{s}'")))
    };
    match kind {
        "identity" => Ok(Correlation::Identity),
        "exponential" => Ok(Correlation::Exponential(parse(param)?)),
        "equicorrelated" => Ok(Correlation::Equicorrelated(parse(param)?)),
        other => Err(CliError::Usage(format!(
            "unknown correlation '{other}'; supported: identity, exponential:RHO, equicorrelated:C"
        ))),
    }
}

fn cmd_synth(args: SynthArgs) -> CliResult<i32> {
    let start = Instant::now();
    let (spec, file_seed) = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let file: SpecFile = serde_json::from_str(&text)?;
            (file.spec, file.seed)
        }
        None => {
            use l0class::data::ResponseModel;
            let n = args.n.ok_or_else(|| CliError::Usage("--n is required".into()))?;
            let p = args.p.ok_or_else(|| CliError::Usage("--p is required".into()))?;
            let response_model = match (args.s, args.snr) {
                (_, Some(snr)) => ResponseModel::SignNoise { snr },
                (Some(s), None) => ResponseModel::BernoulliLogistic { s },
                (None, None) => ResponseModel::BernoulliLogistic { s: 1.0 },
            };
            (
                SyntheticSpec {
                    n,
                    p,
                    correlation: parse_correlation(&args.correlation)?,
                    k_dagger: args.k_dagger,
                    response_model,
                },
                None,
            )
        }
    };
    let seed = args.seed.or(file_seed).ok_or_else(|| {
        CliError::Usage("--seed is required: stochastic commands demand an explicit seed".into())
    })?;
    let validation_seed = args.validation_seed.unwrap_or(seed);

    spec.validate()?;
    let (d, beta_dagger) = gen_synthetic(&spec, seed)?;
    let y_val = gen_validation_response(&d, &beta_dagger, &spec, validation_seed)?;

    std::fs::create_dir_all(&args.out).map_err(|e| {
        CliError::Data(format!("cannot create output directory {}: {e}", args.out.display()))
    })?;
    let train_path = args.out.join("train.csv");
    let val_path = args.out.join("val_labels.csv");
    let beta_path = args.out.join("beta_dagger.json");

    // train.csv: label first, then features; load back with --label-column 0
    {
        let mut w = csv::Writer::from_path(&train_path).map_err(|e| CliError::Data(e.to_string()))?;
        let cols: Vec<Vec<f64>> = (0..d.p()).map(|j| d.column(j).to_dense(d.n())).collect();
        for i in 0..d.n() {
            let mut rec = Vec::with_capacity(d.p() + 1);
            rec.push(format!("{}", d.y()[i] as i64));
            for col in &cols {
                rec.push(format!("{}", col[i]));
            }
            w.write_record(&rec).map_err(|e| CliError::Data(e.to_string()))?;
        }
        w.flush()?;
    }
    {
        let mut w = csv::Writer::from_path(&val_path).map_err(|e| CliError::Data(e.to_string()))?;
        for y in &y_val {
            w.write_record([format!("{}", *y as i64)])
                .map_err(|e| CliError::Data(e.to_string()))?;
        }
        w.flush()?;
    }
    write_json(
        &beta_path,
        &BetaFile {
            schema: 1,
            p: d.p(),
            coefficients: beta_dagger
                .iter()
                .enumerate()
                .filter(|(_, b)| **b != 0.0)
                .map(|(j, b)| (j, *b))
                .collect(),
        },
    )?;

    let summary = SynthSummary {
        schema: 1,
        spec: &spec,
        seed,
        validation_seed,
        train: train_path.display().to_string(),
        val_labels: val_path.display().to_string(),
        beta_dagger: beta_path.display().to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(0)
}

// ---------------------------------------------------------------------------
// path
// ---------------------------------------------------------------------------

#[derive(Args)]
struct PathArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "logistic")]
    loss: String,
    /// Smoothing parameter of the smoothed hinge.
    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    mu: f64,
    /// Fitting algorithm.
    #[arg(long, default_value = "cd", value_parser = ["cd", "cd+ls"])]
    algo: String,
    #[arg(long, default_value_t = 100)]
    n_lambda0: usize,
    /// Smallest lambda0 as a fraction of lambda0_max.
    #[arg(long, default_value_t = 0.001)]
    ratio: f64,
    /// Explicit lambda0 grid (comma-separated); overrides the generated one.
    #[arg(long)]
    l0_values: Option<String>,
    /// lambda1 values (comma-separated).
    #[arg(long, default_value = "0")]
    l1: String,
    /// lambda2 values (comma-separated).
    #[arg(long, default_value = "0")]
    l2: String,
    /// Disable dynamic lambda0 selection.
    #[arg(long)]
    no_dynamic: bool,
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_cycles: usize,
    #[arg(long, default_value_t = 1.05)]
    gamma: f64,
    /// Cycle coordinates by descending initial gradient magnitude.
    #[arg(long)]
    partially_greedy: bool,
    /// Correlation screening on the cold-start fit.
    #[arg(long)]
    screen: bool,
    /// Accept the best improving swap per round instead of the first.
    #[arg(long)]
    swap_best_of_round: bool,
    /// Exhaustive swap search instead of the restricted-gradient heuristic.
    #[arg(long)]
    swap_exhaustive: bool,
    /// Fit (lambda1, lambda2) slices in parallel.
    #[arg(long)]
    parallel: bool,
    /// Validation labels (fixed design: same features, fresh labels).
    #[arg(long)]
    validation_labels: Option<PathBuf>,
    /// Separate validation dataset (same format flags as --data).
    #[arg(long, conflicts_with = "validation_labels")]
    validation_data: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct PathEntryJson {
    lambda0: f64,
    lambda1: f64,
    lambda2: f64,
    support: Vec<usize>,
    coefficients: Vec<(usize, f64)>,
    objective: f64,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    val_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    auc: Option<f64>,
    warm_start_from: Option<usize>,
    skipped_lambda0: Vec<f64>,
}

#[derive(Serialize)]
struct PathJson {
    schema: u32,
    loss: String,
    p: usize,
    entries: Vec<PathEntryJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    selected: Option<usize>,
    wall_time_s: f64,
}

fn loss_name(kind: LossKind) -> String {
    match kind {
        LossKind::Logistic => "logistic".into(),
        LossKind::SquaredHinge => "squared-hinge".into(),
        LossKind::SmoothedHinge { mu } => format!("smoothed-hinge:{mu}"),
    }
}

fn fit_options(args: &PathArgs) -> FitOptions {
    FitOptions {
        rel_tol: args.rel_tol,
        max_full_cycles: args.max_cycles,
        gamma: args.gamma,
        cycle_order: if args.partially_greedy {
            l0class::cd::CycleOrder::PartiallyGreedy
        } else {
            l0class::cd::CycleOrder::Natural
        },
        screen: args.screen,
        ..FitOptions::default()
    }
}

fn swap_options(args: &PathArgs) -> SwapOptions {
    SwapOptions {
        mode: if args.swap_exhaustive {
            l0class::local_search::SwapMode::Exhaustive
        } else {
            l0class::local_search::SwapMode::Heuristic
        },
        best_of_round: args.swap_best_of_round,
        ..SwapOptions::default()
    }
}

fn cmd_path(args: PathArgs) -> CliResult<i32> {
    let start = Instant::now();
    let d = args.data.load()?;
    let kind = parse_loss(&args.loss, args.mu)?;
    let algorithm = match args.algo.as_str() {
        "cd" => Algorithm::Cd,
        "cd+ls" => Algorithm::CdLocalSearch,
        other => return Err(CliError::Usage(format!("unknown algorithm '{other}'"))),
    };

    let grid = GridSpec {
        n_lambda0: args.n_lambda0,
        lambda0_ratio: args.ratio,
        lambda0_values: match &args.l0_values {
            Some(s) => Some(parse_f64_list(s)?),
            None => None,
        },
        lambda1_values: parse_f64_list(&args.l1)?,
        lambda2_values: parse_f64_list(&args.l2)?,
        dynamic: !args.no_dynamic,
    };
    grid.validate()?;
    let opts = PathOptions {
        fit: fit_options(&args),
        swap: swap_options(&args),
        parallel: args.parallel,
    };
    let path = fit_path(&d, kind, &grid, algorithm, &opts)?;

    // optional validation tuning
    let validation: Option<Dataset> = if let Some(vl) = &args.validation_labels {
        let labels = read_label_file(vl)?;
        if labels.len() != d.n() {
            return Err(CliError::Data(format!(
                "validation labels have {} rows, expected {}",
                labels.len(),
                d.n()
            )));
        }
        let cols = (0..d.p()).map(|j| d.column(j).clone()).collect();
        Some(Dataset::new(cols, labels)?)
    } else if let Some(vd) = &args.validation_data {
        let mut va = args.data.clone();
        va.data = vd.clone();
        Some(va.load()?)
    } else {
        None
    };

    let (selected, table) = match &validation {
        Some(d_val) => {
            let (best, rows) = tune_on_validation(&path, d_val)?;
            (Some(best), Some(rows))
        }
        None => (None, None),
    };

    let entries: Vec<PathEntryJson> = path
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let row = table.as_ref().map(|t| &t[i]);
            PathEntryJson {
                lambda0: e.params.lambda0,
                lambda1: e.params.lambda1,
                lambda2: e.params.lambda2,
                support: e.solution.support(),
                coefficients: e.solution.beta.clone(),
                objective: e.solution.objectives.penalized,
                converged: e.solution.diagnostics.converged,
                val_loss: row.map(|r| r.val_loss),
                auc: row.and_then(|r| r.auc),
                warm_start_from: e.warm_start_from,
                skipped_lambda0: e.skipped_lambda0.clone(),
            }
        })
        .collect();

    let out = PathJson {
        schema: 1,
        loss: loss_name(kind),
        p: d.p(),
        entries,
        selected,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_json(&args.out, &out)?;
    println!(
        "wrote {} entries to {}{}",
        out.entries.len(),
        args.out.display(),
        match selected {
            Some(i) => format!(" (selected entry {i})"),
            None => String::new(),
        }
    );
    Ok(0)
}

fn read_label_file(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    let mut zero_seen = false;
    let mut neg_seen = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| CliError::Data(format!("row {}: bad label '{line}'", i + 1)))?;
        if v == 0.0 {
            zero_seen = true;
        } else if v == -1.0 {
            neg_seen = true;
        } else if v != 1.0 {
            return Err(CliError::Data(format!("row {}: label {v} not in {{-1,+1}} or {{0,1}}", i + 1)));
        }
        out.push(v);
    }
    if zero_seen && neg_seen {
        return Err(CliError::Data("mixed 0 and -1 label encodings".into()));
    }
    for v in &mut out {
        if *v == 0.0 {
            *v = -1.0;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// mip
// ---------------------------------------------------------------------------

#[derive(Args)]
struct MipArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "logistic")]
    loss: String,
    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    mu: f64,
    #[arg(long)]
    l0: f64,
    #[arg(long, default_value_t = 0.0)]
    l1: f64,
    #[arg(long, default_value_t = 0.0)]
    l2: f64,
    /// Warm-start path JSON; defaults to an internal CD + local-search fit.
    #[arg(long)]
    warm_start: Option<PathBuf>,
    /// Entry index within the warm-start path (default: its selected entry,
    /// else the entry with the closest lambda0).
    #[arg(long)]
    warm_index: Option<usize>,
    /// Certified-gap target.
    #[arg(long, default_value_t = 1e-6)]
    gap: f64,
    #[arg(long, default_value_t = 10_000)]
    node_budget: usize,
    #[arg(long, default_value_t = 100)]
    max_iga_iters: usize,
    /// Integrality indices added per iteration (largest fractional z).
    #[arg(long, default_value_t = 10)]
    max_add: usize,
    /// Alternative expansion rule: add every fractional z at or above this
    /// cutoff.
    #[arg(long)]
    frac_cutoff: Option<f64>,
    /// Big-M override (default: 1.2 x the warm start's sup-norm).
    #[arg(long)]
    big_m: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct CertificateJson {
    schema: u32,
    objective: f64,
    lower_bound: f64,
    gap: f64,
    support: Vec<usize>,
    big_m: f64,
    nodes: usize,
    iga_iterations: usize,
    status: MipStatus,
    wall_time_s: f64,
}

fn cmd_mip(args: MipArgs) -> CliResult<i32> {
    let start = Instant::now();
    let d = args.data.load()?;
    let kind = parse_loss(&args.loss, args.mu)?;
    let lam = PenaltyParams::new(args.l0, args.l1, args.l2)?;

    let warm: Solution = match &args.warm_start {
        Some(path) => {
            let model = read_model_entry(path, args.warm_index)?;
            if model.p != d.p() {
                return Err(CliError::Data(format!(
                    "warm start has p = {}, data has p = {}",
                    model.p,
                    d.p()
                )));
            }
            Solution::from_sparse(&d, kind, &lam, model.coefficients, Default::default())
        }
        None => cd_with_local_search(&d, kind, &lam, None, &LocalSearchOptions::default()),
    };

    let opts = MipOptions {
        gap_tol: args.gap,
        node_budget: args.node_budget,
        max_iga_iters: args.max_iga_iters,
        max_add_per_iter: args.max_add,
        frac_cutoff: args.frac_cutoff,
        big_m: args.big_m,
        ..MipOptions::default()
    };
    let res = iga_solve(&d, kind, &lam, &warm, &opts)?;

    let cert = CertificateJson {
        schema: 1,
        objective: res.upper_bound,
        lower_bound: res.lower_bound,
        gap: res.gap,
        support: res.beta.iter().map(|(j, _)| *j).collect(),
        big_m: res.big_m,
        nodes: res.nodes_explored,
        iga_iterations: res.iga_iterations,
        status: res.status,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_json(&args.out, &cert)?;
    println!("{}", serde_json::to_string_pretty(&cert)?);
    match res.status {
        MipStatus::Optimal | MipStatus::GapReached => Ok(0),
        MipStatus::BudgetExhausted => Err(CliError::Budget(format!(
            "node budget exhausted; honest bounds written to {} (gap {:.3e})",
            args.out.display(),
            res.gap
        ))),
    }
}

struct ModelEntry {
    p: usize,
    coefficients: Vec<(usize, f64)>,
}

/// Reads a model from a path JSON (one entry, `--index`-selected or the
/// tuned selection) or from a beta file `{p, coefficients}`.
fn read_model_entry(path: &Path, index: Option<usize>) -> CliResult<ModelEntry> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if let Some(entries) = value.get("entries").and_then(|e| e.as_array()) {
        let idx = index
            .or_else(|| value.get("selected").and_then(|s| s.as_u64()).map(|s| s as usize))
            .ok_or_else(|| {
                CliError::Usage(
                    "path file has no 'selected' entry; pass an explicit entry index".into(),
                )
            })?;
        let entry = entries
            .get(idx)
            .ok_or_else(|| CliError::Usage(format!("entry index {idx} out of range")))?;
        let p = value
            .get("p")
            .and_then(|p| p.as_u64())
            .ok_or_else(|| CliError::Data("path file lacks 'p'".into()))? as usize;
        let coefficients = parse_coefficients(entry.get("coefficients"))?;
        Ok(ModelEntry { p, coefficients })
    } else {
        let beta: BetaFile = serde_json::from_str(&text)?;
        Ok(ModelEntry {
            p: beta.p,
            coefficients: beta.coefficients,
        })
    }
}

fn parse_coefficients(v: Option<&serde_json::Value>) -> CliResult<Vec<(usize, f64)>> {
    let arr = v
        .and_then(|c| c.as_array())
        .ok_or_else(|| CliError::Data("model entry lacks 'coefficients'".into()))?;
    arr.iter()
        .map(|pair| {
            let pair = pair
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| CliError::Data("coefficient pairs must be [index, value]".into()))?;
            let j = pair[0]
                .as_u64()
                .ok_or_else(|| CliError::Data("bad coefficient index".into()))? as usize;
            let b = pair[1]
                .as_f64()
                .ok_or_else(|| CliError::Data("bad coefficient value".into()))?;
            Ok((j, b))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

#[derive(Args)]
struct EvalArgs {
    /// Model file: a path JSON (with --index or a tuned selection) or a
    /// coefficients JSON.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    index: Option<usize>,
    #[command(flatten)]
    data: DataArgs,
    /// Planted coefficients JSON for recovery metrics.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct EvalJson {
    schema: u32,
    auc: f64,
    support_size: usize,
    f1: Option<f64>,
    precision: Option<f64>,
    recall: Option<f64>,
    false_positives: Option<usize>,
    wall_time_s: f64,
}

fn cmd_eval(args: EvalArgs) -> CliResult<i32> {
    let start = Instant::now();
    let d = args.data.load()?;
    let model = read_model_entry(&args.model, args.index)?;
    if model.p != d.p() {
        return Err(CliError::Data(format!(
            "model has p = {}, data has p = {}",
            model.p,
            d.p()
        )));
    }
    let scores = d.scores(&model.coefficients);
    let auc_val = auc(&scores, d.y())?;

    let recovery = match &args.truth {
        Some(path) => {
            let truth: BetaFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            if truth.p != d.p() {
                return Err(CliError::Data(format!(
                    "truth has p = {}, data has p = {}",
                    truth.p,
                    d.p()
                )));
            }
            let mut dense = vec![0.0; truth.p];
            for (j, b) in truth.coefficients {
                dense[j] = b;
            }
            let sol = Solution {
                beta: model.coefficients.clone(),
                p: model.p,
                objectives: l0class::loss::Objectives {
                    penalized: 0.0,
                    regularized: 0.0,
                    loss: 0.0,
                },
                diagnostics: Default::default(),
            };
            Some(recovery_report(&sol, &dense))
        }
        None => None,
    };

    let out = EvalJson {
        schema: 1,
        auc: auc_val,
        support_size: model.coefficients.iter().filter(|(_, b)| *b != 0.0).count(),
        f1: recovery.and_then(|r| r.f1),
        precision: recovery.and_then(|r| r.precision),
        recall: recovery.and_then(|r| r.recall),
        false_positives: recovery.and_then(|r| r.false_positives),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&out)?;
    println!("{text}");
    if let Some(path) = &args.out {
        write_json(path, &out)?;
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

#[derive(Args)]
struct BenchArgs {
    /// Scenario name; `--scenario list` prints the registry.
    #[arg(long)]
    scenario: String,
    /// Comma-separated seed list (mandatory).
    #[arg(long)]
    seeds: Option<String>,
    /// Output directory for per-seed and aggregate csv tables.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_bench(args: BenchArgs) -> CliResult<i32> {
    if args.scenario == "list" {
        for s in scenarios::registry() {
            println!("{}: {}", s.name, s.describe());
        }
        return Ok(0);
    }
    let scenario = scenarios::registry()
        .into_iter()
        .find(|s| s.name == args.scenario)
        .ok_or_else(|| {
            let names: Vec<&str> = scenarios::registry().iter().map(|s| s.name).collect();
            CliError::Usage(format!(
                "unknown scenario '{}'; available: {}",
                args.scenario,
                names.join(", ")
            ))
        })?;
    let seeds: Vec<u64> = match &args.seeds {
        Some(s) => s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| CliError::Usage(format!("bad seed '{t}'")))
            })
            .collect::<CliResult<Vec<u64>>>()?,
        None => {
            return Err(CliError::Usage(
                "--seeds is required: stochastic commands demand explicit seeds".into(),
            ))
        }
    };
    if seeds.is_empty() {
        return Err(CliError::Usage("need at least one seed".into()));
    }

    std::fs::create_dir_all(&args.out)?;
    let rows = scenarios::run(&scenario, &seeds);

    // per-seed table
    let per_seed_path = args.out.join(format!("{}_per_seed.csv", scenario.name));
    {
        let mut w = csv::Writer::from_path(&per_seed_path).map_err(|e| CliError::Data(e.to_string()))?;
        w.write_record(["scenario", "method", "seed", "val_loss", "auc", "f1", "fp", "support_size"])
            .map_err(|e| CliError::Data(e.to_string()))?;
        for r in &rows {
            w.write_record([
                scenario.name.to_string(),
                r.method.clone(),
                r.seed.to_string(),
                format!("{}", r.val_loss),
                format!("{}", r.auc),
                format!("{}", r.f1),
                format!("{}", r.false_positives),
                format!("{}", r.support_size),
            ])
            .map_err(|e| CliError::Data(e.to_string()))?;
        }
        w.flush()?;
    }

    // aggregate table: mean (and stderr when more than one seed)
    let agg_path = args.out.join(format!("{}_aggregate.csv", scenario.name));
    {
        let mut w = csv::Writer::from_path(&agg_path).map_err(|e| CliError::Data(e.to_string()))?;
        let multi = seeds.len() > 1;
        if multi {
            w.write_record(["scenario", "method", "metric", "mean", "stderr"])
                .map_err(|e| CliError::Data(e.to_string()))?;
        } else {
            w.write_record(["scenario", "method", "metric", "mean"])
                .map_err(|e| CliError::Data(e.to_string()))?;
        }
        let methods: Vec<String> = {
            let mut m: Vec<String> = rows.iter().map(|r| r.method.clone()).collect();
            m.dedup();
            m
        };
        for method in methods {
            let sub: Vec<&scenarios::BenchRow> =
                rows.iter().filter(|r| r.method == method).collect();
            for (metric, get) in [
                ("val_loss", &(|r: &scenarios::BenchRow| r.val_loss) as &dyn Fn(&scenarios::BenchRow) -> f64),
                ("auc", &|r| r.auc),
                ("f1", &|r| r.f1),
                ("fp", &|r| r.false_positives as f64),
                ("support_size", &|r| r.support_size as f64),
            ] {
                let vals: Vec<f64> = sub.iter().map(|r| get(r)).collect();
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                let mut rec = vec![
                    scenario.name.to_string(),
                    method.clone(),
                    metric.to_string(),
                    format!("{mean}"),
                ];
                if multi {
                    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                        / (vals.len() - 1) as f64;
                    let stderr = (var / vals.len() as f64).sqrt();
                    rec.push(format!("{stderr}"));
                }
                w.write_record(&rec).map_err(|e| CliError::Data(e.to_string()))?;
            }
        }
        w.flush()?;
    }

    let mut summary = String::new();
    let _ = writeln!(summary, "scenario {} over {} seeds:", scenario.name, seeds.len());
    let _ = writeln!(summary, "  per-seed:  {}", per_seed_path.display());
    let _ = writeln!(summary, "  aggregate: {}", agg_path.display());
    print!("{summary}");
    Ok(0)
}
