//! Command-line interface.
//!
//! Every command writes its outputs plus a `*.manifest.json` recording the
//! full argument vector and resolved parameters; `replay` re-executes a
//! manifest and reproduces the same output bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use locality_core::blackbox::RandomForestParams;
use locality_core::data::{generate_half_moons, train_test_split};
use locality_core::fidelity::{auc, select_instances, FidelityConfig, Metric};
use locality_core::surrogate::{explain, BoundarySearch, ExplainerConfig, KernelShape, Method, Reference};
use locality_core::{Dataset, FeatureStats, Scorer};
use serde::Serialize;

use crate::benchmark::{self, BenchmarkConfig, DatasetSpec};
use crate::csv_io::{load_csv, standardize, write_bytes, write_dataset};
use crate::error::{AppError, Result, EXIT_OK};
use crate::model_io::{load_forest, save_forest};
use crate::parallel::{fidelity_reports, train_forest};
use crate::report::{
    manifest_path, to_json_bytes, write_heatmap, write_json, ExplanationJson, Manifest, ReportJson, SweepJson,
};

#[derive(Debug, Parser)]
#[command(name = "locality", version, about = "Local surrogate explanations and local fidelity benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a half-moons dataset as CSV.
    Generate(GenerateArgs),
    /// Keep the numeric columns of a CSV (optionally z-scored).
    Preprocess(PreprocessArgs),
    /// Train a random forest and report its held-out AUC.
    Train(TrainArgs),
    /// Explain one instance.
    Explain(ExplainArgs),
    /// Local fidelity of an explainer over the test split.
    Fidelity(FidelityArgs),
    /// LIME / LIME-K / LS comparison over several datasets.
    Benchmark(BenchmarkArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Serialize)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0.3)]
    noise: f64,
    #[arg(long, env = "LOCALITY_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct PreprocessArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    target: String,
    /// Z-score every kept column with its own mean and standard deviation.
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize, Clone)]
struct DataArgs {
    /// Dataset CSV.
    #[arg(long)]
    data: PathBuf,
    /// Target column.
    #[arg(long, default_value = "label")]
    target: String,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    /// Seed for the split (and, for `train`, the forest).
    #[arg(long, env = "LOCALITY_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 200)]
    trees: usize,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 1)]
    min_samples_leaf: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum MethodArg {
    Lime,
    LimeK,
    Ls,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lime => Method::Lime,
            MethodArg::LimeK => Method::LimeK,
            MethodArg::Ls => Method::Ls,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum KernelArg {
    Lime,
    Rbf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum MetricArg {
    Auc,
    Accuracy,
}

#[derive(Debug, Args, Serialize, Clone)]
struct ExplainerArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// LIME kernel width (default 0.75 * sqrt(d) for lime, 0.5 for lime-k).
    #[arg(long)]
    kernel_width: Option<f64>,
    #[arg(long, value_enum, default_value = "lime")]
    kernel: KernelArg,
    /// LS training-ball radius as a fraction of the query's data scale.
    #[arg(long, default_value_t = 0.3)]
    r_sx: f64,
    #[arg(long, default_value_t = 5000)]
    n_samples: usize,
    /// Ridge penalty (default 1 for LIME variants, 1e-3 for LS).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    gs_n_per_step: usize,
    /// Boundary-search step as a fraction of the data scale.
    #[arg(long, default_value_t = 0.01)]
    gs_step: f64,
    /// Boundary-search cap as a multiple of the data scale.
    #[arg(long, default_value_t = 2.0)]
    gs_max_radius: f64,
    /// Explainer seed.
    #[arg(long, default_value_t = 0)]
    explain_seed: u64,
}

impl ExplainerArgs {
    fn config(&self) -> ExplainerConfig {
        let method = Method::from(self.method);
        let mut cfg = match method {
            Method::Lime => ExplainerConfig::lime(self.explain_seed),
            Method::LimeK => ExplainerConfig::lime_k(0.5, self.explain_seed),
            Method::Ls => ExplainerConfig::ls(self.r_sx, self.explain_seed),
        };
        if let Some(w) = self.kernel_width {
            cfg.kernel_width = Some(w);
        }
        cfg.kernel = match self.kernel {
            KernelArg::Lime => KernelShape::Lime,
            KernelArg::Rbf => KernelShape::Rbf,
        };
        cfg.n_samples = self.n_samples;
        if let Some(l) = self.lambda {
            cfg.ridge_lambda = l;
        }
        cfg.boundary_search = BoundarySearch {
            n_per_step: self.gs_n_per_step,
            step_fraction: self.gs_step,
            max_radius_fraction: self.gs_max_radius,
        };
        cfg
    }
}

#[derive(Debug, Args, Serialize)]
struct ExplainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    explainer: ExplainerArgs,
    /// Row of the test split to explain.
    #[arg(long, conflicts_with = "point", required_unless_present = "point")]
    index: Option<usize>,
    /// Comma-separated coordinates to explain.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Option<Vec<f64>>,
    /// Output JSON (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct FidelityArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    explainer: ExplainerArgs,
    #[arg(long, default_value_t = 0.3)]
    r_fid: f64,
    #[arg(long, default_value_t = 1000)]
    n_eval: usize,
    #[arg(long, value_enum, default_value = "auc")]
    metric: MetricArg,
    /// Evaluation seed.
    #[arg(long, default_value_t = 0)]
    eval_seed: u64,
    /// Cap on evaluated test rows (seed-pinned subsample).
    #[arg(long)]
    max_eval_instances: Option<usize>,
    /// Heatmap CSV: instance coordinates and score.
    #[arg(long)]
    heatmap: Option<PathBuf>,
    /// Comma-separated radius fractions for a sweep.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,
    /// Sweep output JSON (defaults to `<out>.sweep.json`).
    #[arg(long)]
    sweep_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct BenchmarkArgs {
    /// `moons` or `name=path[:target]`; repeatable.
    #[arg(long = "dataset", required = true)]
    datasets: Vec<String>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, env = "LOCALITY_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.2])]
    r_fid: Vec<f64>,
    #[arg(long, default_value_t = 0.3)]
    r_sx: f64,
    #[arg(long, default_value_t = 5000)]
    n_samples: usize,
    #[arg(long, default_value_t = 1000)]
    n_eval: usize,
    #[arg(long, default_value_t = 200)]
    trees: usize,
    #[arg(long, default_value_t = 200)]
    max_eval_instances: usize,
    #[arg(long, default_value_t = 1000)]
    moons_n: usize,
    #[arg(long, default_value_t = 0.3)]
    moons_noise: f64,
    /// `name=width`; repeatable.
    #[arg(long = "lime-k-width")]
    lime_k_widths: Vec<String>,
    /// Multipliers of sqrt(d) tried when no width is given.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.25, 0.5, 1.0, 2.0])]
    lime_k_grid: Vec<f64>,
    /// Leave CSV features on their original scale.
    #[arg(long)]
    no_standardize: bool,
}

#[derive(Debug, Args, Serialize)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, &argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, argv: &[String]) -> Result<()> {
    let started = Instant::now();
    let ctx = RunContext { argv, started };
    match command {
        Command::Generate(a) => generate(&a, &ctx),
        Command::Preprocess(a) => preprocess(&a, &ctx),
        Command::Train(a) => train(&a, &ctx),
        Command::Explain(a) => explain_cmd(&a, &ctx),
        Command::Fidelity(a) => fidelity(&a, &ctx),
        Command::Benchmark(a) => benchmark_cmd(&a, &ctx),
        Command::Replay(a) => replay(&a),
    }
}

struct RunContext<'a> {
    argv: &'a [String],
    started: Instant,
}

impl RunContext<'_> {
    fn manifest<P: Serialize>(
        &self,
        command: &str,
        params: &P,
        seeds: &[(&str, u64)],
        inputs: &[&Path],
        outputs: &[&Path],
        manifest_at: &Path,
    ) -> Result<()> {
        let manifest = Manifest {
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            argv: self.argv.to_vec(),
            parameters: serde_json::to_value(params)
                .map_err(|source| AppError::Json { path: manifest_at.into(), source })?,
            seeds: seeds.iter().map(|(k, v)| ((*k).to_string(), *v)).collect::<BTreeMap<_, _>>(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            duration_secs: self.started.elapsed().as_secs_f64(),
        };
        write_json(&manifest_path(manifest_at), &manifest)
    }
}

fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

fn generate(a: &GenerateArgs, ctx: &RunContext) -> Result<()> {
    if a.n < 2 {
        return Err(usage(format!("--n must be at least 2, got {}", a.n)));
    }
    let data = generate_half_moons(a.n, a.noise, a.seed)?;
    write_dataset(&data, &a.out)?;
    ctx.manifest("generate", a, &[("seed", a.seed)], &[], &[&a.out], &a.out)
}

fn preprocess(a: &PreprocessArgs, ctx: &RunContext) -> Result<()> {
    let mut data = load_csv(&a.input, &a.target, true)?;
    if a.standardize {
        data = standardize(&data, &FeatureStats::of(&data))?;
    }
    write_dataset(&data, &a.out)?;
    ctx.manifest("preprocess", a, &[], &[&a.input], &[&a.out], &a.out)
}

fn split(a: &DataArgs) -> Result<(Dataset, Dataset)> {
    let data = load_csv(&a.data, &a.target, true)?;
    Ok(train_test_split(&data, a.test_fraction, a.seed)?)
}

fn train(a: &TrainArgs, ctx: &RunContext) -> Result<()> {
    if a.trees == 0 {
        return Err(usage("--trees must be at least 1"));
    }
    if a.min_samples_leaf == 0 {
        return Err(usage("--min-samples-leaf must be at least 1"));
    }
    let (train, test) = split(&a.data)?;
    let params = RandomForestParams {
        n_trees: a.trees,
        max_depth: a.max_depth,
        min_samples_leaf: a.min_samples_leaf,
        seed: a.data.seed,
        ..Default::default()
    };
    let forest = train_forest(&train, &params)?;
    let scores: Vec<f64> = test.rows().map(|r| forest.score(r)).collect();
    let test_auc = auc(&scores, test.labels())?;
    save_forest(&forest, &a.out)?;
    println!("test_auc {test_auc:.6}");
    ctx.manifest("train", a, &[("seed", a.data.seed)], &[&a.data.data], &[&a.out], &a.out)
}

fn explain_cmd(a: &ExplainArgs, ctx: &RunContext) -> Result<()> {
    let forest = load_forest(&a.model)?;
    let (train, test) = split(&a.data)?;
    let x: Vec<f64> = match (&a.point, a.index) {
        (Some(p), _) => p.clone(),
        (None, Some(i)) if i < test.len() => test.row(i).to_vec(),
        (None, Some(i)) => return Err(usage(format!("--index {i} out of range for {} test rows", test.len()))),
        (None, None) => return Err(usage("one of --index or --point is required")),
    };
    let cfg = a.explainer.config();
    let reference = Reference::new(train);
    let explanation = explain(&forest, &x, &reference, &cfg)?;
    let json = ExplanationJson::from(&explanation);
    match &a.out {
        Some(out) => {
            write_json(out, &json)?;
            ctx.manifest(
                "explain",
                a,
                &[("split", a.data.seed), ("explain", cfg.seed)],
                &[&a.model, &a.data.data],
                &[out],
                out,
            )
        }
        None => {
            let bytes = to_json_bytes(&json, Path::new("<stdout>"))?;
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

fn fidelity(a: &FidelityArgs, ctx: &RunContext) -> Result<()> {
    let forest = load_forest(&a.model)?;
    let (train, test) = split(&a.data)?;
    let cfg = a.explainer.config();
    let reference = Reference::new(train);
    let fid = FidelityConfig {
        r_fid_fraction: a.r_fid,
        n_eval: a.n_eval,
        seed: a.eval_seed,
        metric: match a.metric {
            MetricArg::Auc => Metric::Auc,
            MetricArg::Accuracy => Metric::Accuracy,
        },
    };
    fid.validate().map_err(|e| usage(e.to_string()))?;
    let indices = match a.max_eval_instances {
        Some(m) => select_instances(test.len(), m, a.eval_seed),
        None => (0..test.len()).collect(),
    };
    let report = fidelity_reports(&forest, &reference, &cfg, &test, &indices, &[a.r_fid], &fid)?.remove(0);
    write_json(&a.out, &ReportJson::new(cfg.method.name(), &report))?;
    let mut outputs: Vec<&Path> = vec![&a.out];
    if let Some(h) = &a.heatmap {
        write_heatmap(h, &test, &report)?;
        outputs.push(h);
    }
    let sweep_path = a.sweep_out.clone().unwrap_or_else(|| {
        let mut name = a.out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".sweep.json");
        a.out.with_file_name(name)
    });
    if let Some(fractions) = &a.sweep {
        if fractions.is_empty()
            || fractions.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(usage("--sweep fractions must be strictly increasing"));
        }
        let reports = fidelity_reports(&forest, &reference, &cfg, &test, &indices, fractions, &fid)?;
        write_json(&sweep_path, &SweepJson::from_reports(cfg.method.name(), &reports))?;
        outputs.push(&sweep_path);
    }
    ctx.manifest(
        "fidelity",
        a,
        &[("split", a.data.seed), ("explain", cfg.seed), ("eval", a.eval_seed)],
        &[&a.model, &a.data.data],
        &outputs,
        &a.out,
    )?;
    if report.mean.is_none() {
        return Err(AppError::AllSkipped);
    }
    Ok(())
}

fn benchmark_cmd(a: &BenchmarkArgs, ctx: &RunContext) -> Result<()> {
    let datasets = a.datasets.iter().map(|s| DatasetSpec::parse(s)).collect::<Result<Vec<_>>>()?;
    let lime_k_widths = a
        .lime_k_widths
        .iter()
        .map(|s| {
            let (name, w) =
                s.split_once('=').ok_or_else(|| usage(format!("--lime-k-width `{s}` must be name=width")))?;
            let w: f64 = w.parse().map_err(|_| usage(format!("bad width in `{s}`")))?;
            Ok((name.to_string(), w))
        })
        .collect::<Result<Vec<_>>>()?;
    let cfg = BenchmarkConfig {
        datasets,
        seed: a.seed,
        r_fid: a.r_fid.clone(),
        r_sx: a.r_sx,
        n_samples: a.n_samples,
        n_eval: a.n_eval,
        n_trees: a.trees,
        max_eval_instances: a.max_eval_instances,
        moons_n: a.moons_n,
        moons_noise: a.moons_noise,
        standardize_csv: !a.no_standardize,
        lime_k_widths,
        lime_k_grid: a.lime_k_grid.clone(),
        ..Default::default()
    };
    let table = benchmark::run(&cfg)?;
    let csv_path = a.out_dir.join("table.csv");
    let json_path = a.out_dir.join("table.json");
    let inst_path = a.out_dir.join("per_instance.csv");
    write_bytes(&csv_path, &table.to_csv())?;
    write_json(&json_path, &table)?;
    write_bytes(&inst_path, &table.per_instance_csv())?;
    for d in &table.datasets {
        match &d.error {
            Some(e) => println!("{}: FAILED ({e})", d.name),
            None => {
                for r in &d.results {
                    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
                    println!("{} r_fid={} {:<6} {} ({})", d.name, r.r_fid, r.method, fmt(r.mean), fmt(r.std));
                }
            }
        }
    }
    let inputs: Vec<PathBuf> = cfg
        .datasets
        .iter()
        .filter_map(|d| match d {
            DatasetSpec::Csv { path, .. } => Some(path.clone()),
            DatasetSpec::HalfMoons => None,
        })
        .collect();
    let inputs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    ctx.manifest(
        "benchmark",
        &(a, &cfg),
        &[("seed", a.seed)],
        &inputs,
        &[&csv_path, &json_path, &inst_path],
        &a.out_dir,
    )
}

fn replay(a: &ReplayArgs) -> Result<()> {
    let bytes = std::fs::read(&a.manifest).map_err(|e| AppError::io(&a.manifest, e))?;
    let manifest: Manifest =
        serde_json::from_slice(&bytes).map_err(|source| AppError::Json { path: a.manifest.clone(), source })?;
    if manifest.argv.get(1).is_some_and(|c| c == "replay") {
        return Err(usage("refusing to replay a replay"));
    }
    let cli = Cli::try_parse_from(&manifest.argv).map_err(|e| usage(e.to_string()))?;
    dispatch(cli.command, &manifest.argv)
}
