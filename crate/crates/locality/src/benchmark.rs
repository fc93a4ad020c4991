//! Comparative benchmark: for each dataset, split, train a 200-tree forest
//! and report mean (std) local fidelity of LIME, LIME-K and Local Surrogate
//! over the test split at one or more radius fractions.

use std::path::PathBuf;

use locality_core::blackbox::RandomForestParams;
use locality_core::data::{generate_half_moons, train_test_split};
use locality_core::fidelity::{auc, mean_std, select_instances, FidelityConfig, FidelityReport};
use locality_core::rng::{derive_seed, Domain};
use locality_core::surrogate::{default_kernel_width, ExplainerConfig, Method, Reference};
use locality_core::{Dataset, FeatureStats, RandomForest, Scorer};
use serde::Serialize;

use crate::csv_io::{format_float, load_csv, standardize};
use crate::error::{AppError, Result};
use crate::parallel::{fidelity_reports, train_forest};
use crate::report::InstanceJson;

/// Where a benchmark dataset comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    /// Generated half moons.
    HalfMoons,
    /// User-supplied CSV.
    Csv {
        /// Name used in reports.
        name: String,
        /// File location.
        path: PathBuf,
        /// Target column.
        target: String,
    },
}

impl DatasetSpec {
    /// Parses `moons` or `name=path[:target]` (target defaults to `label`).
    pub fn parse(s: &str) -> Result<Self> {
        if s == "moons" || s == "half-moons" {
            return Ok(Self::HalfMoons);
        }
        let (name, rest) = s
            .split_once('=')
            .ok_or_else(|| AppError::Usage(format!("dataset `{s}` must be `moons` or `name=path[:target]`")))?;
        let (path, target) = match rest.rsplit_once(':') {
            Some((p, t)) if !t.is_empty() && !t.contains('/') => (p, t),
            _ => (rest, "label"),
        };
        if name.is_empty() || path.is_empty() {
            return Err(AppError::Usage(format!("dataset `{s}` has an empty name or path")));
        }
        Ok(Self::Csv { name: name.into(), path: path.into(), target: target.into() })
    }

    /// Name used in reports.
    pub fn name(&self) -> &str {
        match self {
            Self::HalfMoons => "moons",
            Self::Csv { name, .. } => name,
        }
    }
}

/// Resolved benchmark parameters; serialised verbatim into the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkConfig {
    #[serde(skip)]
    pub datasets: Vec<DatasetSpec>,
    pub seed: u64,
    pub test_fraction: f64,
    pub n_trees: usize,
    pub n_samples: usize,
    pub n_eval: usize,
    pub r_fid: Vec<f64>,
    pub r_sx: f64,
    pub max_eval_instances: usize,
    pub moons_n: usize,
    pub moons_noise: f64,
    pub standardize_csv: bool,
    /// Explicit LIME-K widths by dataset name.
    pub lime_k_widths: Vec<(String, f64)>,
    /// Grid multipliers of `sqrt(d)` searched when no width is given.
    pub lime_k_grid: Vec<f64>,
    /// Training rows used to score each grid width.
    pub grid_instances: usize,
    /// Radius fraction at which grid widths are compared.
    pub grid_r_fid: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            datasets: vec![DatasetSpec::HalfMoons],
            seed: 0,
            test_fraction: 0.2,
            n_trees: 200,
            n_samples: 5000,
            n_eval: 1000,
            r_fid: vec![0.05, 0.2],
            r_sx: 0.3,
            max_eval_instances: 200,
            moons_n: 1000,
            moons_noise: 0.3,
            standardize_csv: true,
            lime_k_widths: Vec::new(),
            lime_k_grid: vec![0.1, 0.25, 0.5, 1.0, 2.0],
            grid_instances: 30,
            grid_r_fid: 0.05,
        }
    }
}

impl BenchmarkConfig {
    /// Checks ranges that the core would otherwise reject per dataset.
    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(AppError::Usage(m));
        if self.datasets.is_empty() {
            return usage("at least one dataset is required".into());
        }
        if self.n_trees == 0 || self.n_samples == 0 || self.n_eval < 2 || self.max_eval_instances == 0 {
            return usage("trees, samples, eval points and eval instances must be positive".into());
        }
        if self.r_fid.is_empty() || self.r_fid.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
            return usage("r_fid fractions must lie in (0, 1]".into());
        }
        if !(self.r_sx > 0.0 && self.r_sx <= 1.0) {
            return usage(format!("r_sx {} outside (0, 1]", self.r_sx));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return usage(format!("test fraction {} outside (0, 1)", self.test_fraction));
        }
        if self.lime_k_grid.is_empty()
            || self.lime_k_grid.iter().any(|g| g.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater))
        {
            return usage("LIME-K grid must contain positive multipliers".into());
        }
        Ok(())
    }
}

/// Reference mean (std) local fidelity for datasets with a known row.
pub fn reference_row(name: &str) -> Option<[(Method, f64, f64); 3]> {
    let row = |l: (f64, f64), k: (f64, f64), s: (f64, f64)| {
        [(Method::Lime, l.0, l.1), (Method::LimeK, k.0, k.1), (Method::Ls, s.0, s.1)]
    };
    match name {
        "moons" => Some(row((0.89, 0.07), (0.96, 0.06), (0.97, 0.03))),
        "cancer" => Some(row((0.86, 0.07), (0.87, 0.07), (0.96, 0.02))),
        "credit" => Some(row((0.67, 0.21), (0.70, 0.18), (0.85, 0.12))),
        "news" => Some(row((0.64, 0.10), (0.67, 0.10), (0.79, 0.07))),
        "tennis" => Some(row((0.85, 0.12), (0.83, 0.13), (0.98, 0.02))),
        _ => None,
    }
}

/// Tolerance on reference means: 0.05 for half moons, 0.07 otherwise.
pub fn reference_tolerance(name: &str) -> f64 {
    if name == "moons" {
        0.05
    } else {
        0.07
    }
}

/// Aggregate for one (method, radius) pair.
#[derive(Debug, Clone, Serialize)]
pub struct MethodResult {
    pub method: String,
    pub r_fid: f64,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub n_scored: usize,
    pub n_skipped: usize,
    pub kernel_width: Option<f64>,
    #[serde(skip)]
    pub report: Option<FidelityReport>,
}

/// One dataset's block of the table.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetResult {
    pub name: String,
    pub n_train: usize,
    pub n_test: usize,
    pub dim: usize,
    pub test_auc: Option<f64>,
    pub n_eval_instances: usize,
    pub lime_k_width: Option<f64>,
    pub lime_k_width_source: Option<String>,
    pub results: Vec<MethodResult>,
    /// Radii whose three means all fall within tolerance of the reference row.
    pub r_fid_matching_reference: Vec<f64>,
    pub error: Option<String>,
}

impl DatasetResult {
    fn failed(name: &str, error: String) -> Self {
        Self {
            name: name.into(),
            n_train: 0,
            n_test: 0,
            dim: 0,
            test_auc: None,
            n_eval_instances: 0,
            lime_k_width: None,
            lime_k_width_source: None,
            results: Vec::new(),
            r_fid_matching_reference: Vec::new(),
            error: Some(error),
        }
    }

    /// Result for `method` at radius `r_fid`.
    pub fn get(&self, method: Method, r_fid: f64) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == method.name() && r.r_fid == r_fid)
    }
}

/// Whole benchmark output.
#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkTable {
    pub datasets: Vec<DatasetResult>,
}

impl BenchmarkTable {
    /// Dataset block by name.
    pub fn get(&self, name: &str) -> Option<&DatasetResult> {
        self.datasets.iter().find(|d| d.name == name)
    }

    /// Long-format CSV: one row per (dataset, r_fid, method).
    pub fn to_csv(&self) -> Vec<u8> {
        let mut out = String::from("dataset,r_fid,method,mean,std,n_scored,n_skipped,kernel_width,test_auc,error\n");
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        for d in &self.datasets {
            if let Some(e) = &d.error {
                out.push_str(&format!("{},,,,,,,,,{}\n", d.name, csv_quote(e)));
                continue;
            }
            for r in &d.results {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},\n",
                    d.name,
                    format_float(r.r_fid),
                    r.method,
                    opt(r.mean),
                    opt(r.std),
                    r.n_scored,
                    r.n_skipped,
                    opt(r.kernel_width),
                    opt(d.test_auc),
                ));
            }
        }
        out.into_bytes()
    }

    /// Per-instance scores: one row per (dataset, r_fid, method, instance).
    pub fn per_instance_csv(&self) -> Vec<u8> {
        let mut out = String::from("dataset,r_fid,method,index,score,reason\n");
        for d in &self.datasets {
            for r in &d.results {
                let Some(report) = &r.report else { continue };
                for s in &report.per_instance {
                    let j = InstanceJson::from(s);
                    let score = s.outcome.score().map_or_else(|| "skip".to_string(), format_float);
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        d.name,
                        format_float(r.r_fid),
                        r.method,
                        s.index,
                        score,
                        j.reason.map(|r| csv_quote(&r)).unwrap_or_default()
                    ));
                }
            }
        }
        out.into_bytes()
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Runs every dataset; a failing dataset yields a block with `error` set.
pub fn run(cfg: &BenchmarkConfig) -> Result<BenchmarkTable> {
    cfg.validate()?;
    let datasets = cfg
        .datasets
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            run_dataset(cfg, spec, k as u64).unwrap_or_else(|e| DatasetResult::failed(spec.name(), e.to_string()))
        })
        .collect();
    Ok(BenchmarkTable { datasets })
}

fn load(cfg: &BenchmarkConfig, spec: &DatasetSpec, seed: u64) -> Result<(Dataset, Dataset)> {
    match spec {
        DatasetSpec::HalfMoons => {
            let data = generate_half_moons(cfg.moons_n, cfg.moons_noise, seed)?;
            Ok(train_test_split(&data, cfg.test_fraction, seed)?)
        }
        DatasetSpec::Csv { path, target, .. } => {
            let data = load_csv(path, target, true)?;
            let (train, test) = train_test_split(&data, cfg.test_fraction, seed)?;
            if cfg.standardize_csv {
                let stats = FeatureStats::of(&train);
                Ok((standardize(&train, &stats)?, standardize(&test, &stats)?))
            } else {
                Ok((train, test))
            }
        }
    }
}

/// Runs one dataset; `position` only seeds the dataset's own streams.
pub fn run_dataset(cfg: &BenchmarkConfig, spec: &DatasetSpec, position: u64) -> Result<DatasetResult> {
    let name = spec.name();
    let seed = derive_seed(cfg.seed, Domain::Split, position);
    let (train, test) = load(cfg, spec, seed)?;
    let params = RandomForestParams { n_trees: cfg.n_trees, seed, ..Default::default() };
    let forest = train_forest(&train, &params)?;
    let test_scores: Vec<f64> = test.rows().map(|r| forest.score(r)).collect();
    let test_auc = auc(&test_scores, test.labels()).ok();

    let reference = Reference::new(train);
    let indices = select_instances(test.len(), cfg.max_eval_instances, seed);
    let fid = FidelityConfig { n_eval: cfg.n_eval, ..FidelityConfig::new(cfg.r_fid[0], seed) };

    let (width, source) = lime_k_width(cfg, name, &forest, &reference, seed)?;
    let d = reference.data.dim();
    let mut methods = vec![
        ExplainerConfig { n_samples: cfg.n_samples, ..ExplainerConfig::lime(seed) },
        ExplainerConfig { n_samples: cfg.n_samples, ..ExplainerConfig::lime_k(width, seed) },
        ExplainerConfig { n_samples: cfg.n_samples, ..ExplainerConfig::ls(cfg.r_sx, seed) },
    ];
    for m in &mut methods {
        m.seed = derive_seed(seed, Domain::Explain, m.method as u64);
    }

    let mut results = Vec::new();
    for explainer in &methods {
        let reports = fidelity_reports(&forest, &reference, explainer, &test, &indices, &cfg.r_fid, &fid)?;
        for report in reports {
            let n_scored = report.per_instance.len() - report.n_skipped;
            results.push(MethodResult {
                method: explainer.method.name().into(),
                r_fid: report.r_fid_fraction,
                mean: report.mean,
                std: report.std_dev,
                n_scored,
                n_skipped: report.n_skipped,
                kernel_width: (explainer.method != Method::Ls).then(|| explainer.resolved_kernel_width(d)),
                report: Some(report),
            });
        }
    }
    let mut out = DatasetResult {
        name: name.into(),
        n_train: reference.data.len(),
        n_test: test.len(),
        dim: d,
        test_auc,
        n_eval_instances: indices.len(),
        lime_k_width: Some(width),
        lime_k_width_source: Some(source),
        results,
        r_fid_matching_reference: Vec::new(),
        error: None,
    };
    out.r_fid_matching_reference = matching_radii(&out, &cfg.r_fid);
    Ok(out)
}

fn matching_radii(result: &DatasetResult, radii: &[f64]) -> Vec<f64> {
    let Some(row) = reference_row(&result.name) else { return Vec::new() };
    let tol = reference_tolerance(&result.name);
    radii
        .iter()
        .copied()
        .filter(|&r| {
            row.iter()
                .all(|(m, mean, _)| result.get(*m, r).and_then(|x| x.mean).is_some_and(|got| (got - mean).abs() <= tol))
        })
        .collect()
}

/// LIME-K width: explicit flag, else 0.5 for half moons, else the best grid
/// width on a seed-pinned slice of the training rows.
fn lime_k_width(
    cfg: &BenchmarkConfig,
    name: &str,
    forest: &RandomForest,
    reference: &Reference,
    seed: u64,
) -> Result<(f64, String)> {
    if let Some((_, w)) = cfg.lime_k_widths.iter().find(|(n, _)| n == name) {
        return Ok((*w, "flag".into()));
    }
    if name == "moons" {
        return Ok((0.5, "default".into()));
    }
    let d = reference.data.dim();
    let slice = select_instances(reference.data.len(), cfg.grid_instances, derive_seed(seed, Domain::Select, 1));
    let fid = FidelityConfig {
        n_eval: cfg.n_eval,
        ..FidelityConfig::new(cfg.grid_r_fid, derive_seed(seed, Domain::Evaluate, 1))
    };
    let mut best: Option<(f64, f64)> = None;
    for &g in &cfg.lime_k_grid {
        let width = g * (d as f64).sqrt();
        let explainer = ExplainerConfig { n_samples: cfg.n_samples, ..ExplainerConfig::lime_k(width, seed ^ 0x9E37) };
        let reports =
            fidelity_reports(forest, reference, &explainer, &reference.data, &slice, &[cfg.grid_r_fid], &fid)?;
        let scores: Vec<f64> = reports[0].per_instance.iter().filter_map(|s| s.outcome.score()).collect();
        if let Some((mean, _)) = mean_std(&scores) {
            if best.is_none_or(|(_, b)| mean > b) {
                best = Some((width, mean));
            }
        }
    }
    let (width, _) = best.unwrap_or((default_kernel_width(d), f64::NAN));
    Ok((width, "grid".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_spec_parsing() {
        assert_eq!(DatasetSpec::parse("moons").unwrap(), DatasetSpec::HalfMoons);
        assert_eq!(
            DatasetSpec::parse("cancer=data/c.csv:diagnosis").unwrap(),
            DatasetSpec::Csv { name: "cancer".into(), path: "data/c.csv".into(), target: "diagnosis".into() }
        );
        assert_eq!(
            DatasetSpec::parse("x=/tmp/x.csv").unwrap(),
            DatasetSpec::Csv { name: "x".into(), path: "/tmp/x.csv".into(), target: "label".into() }
        );
        assert!(DatasetSpec::parse("nonsense").is_err());
    }

    #[test]
    fn empty_dataset_list_is_usage_error() {
        let cfg = BenchmarkConfig { datasets: vec![], ..Default::default() };
        assert!(matches!(run(&cfg), Err(AppError::Usage(_))));
    }

    #[test]
    fn failures_are_isolated() {
        let cfg = BenchmarkConfig {
            datasets: vec![DatasetSpec::parse("missing=/no/such/file.csv").unwrap()],
            ..Default::default()
        };
        let table = run(&cfg).unwrap();
        assert!(table.datasets[0].error.is_some());
        assert!(String::from_utf8(table.to_csv()).unwrap().contains("missing,"));
    }

    #[test]
    fn small_moons_run_is_reproducible() {
        let cfg = BenchmarkConfig {
            n_trees: 20,
            n_samples: 300,
            n_eval: 200,
            max_eval_instances: 6,
            moons_n: 200,
            ..Default::default()
        };
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.per_instance_csv(), b.per_instance_csv());
        let moons = a.get("moons").unwrap();
        assert_eq!(moons.results.len(), 6);
        assert_eq!(moons.n_eval_instances, 6);
        assert_eq!(moons.lime_k_width, Some(0.5));
    }
}
