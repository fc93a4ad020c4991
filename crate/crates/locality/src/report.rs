//! JSON and CSV shapes written by the CLI. Field order is part of the
//! format: outputs are compared byte-for-byte across reruns.

use std::collections::BTreeMap;
use std::path::Path;

use locality_core::fidelity::{FidelityReport, InstanceOutcome, InstanceScore};
use locality_core::{Dataset, Explanation};
use serde::Serialize;

use crate::csv_io::{format_float, write_bytes};
use crate::error::{AppError, Result};

/// Serialised explanation.
#[derive(Debug, Serialize)]
pub struct ExplanationJson {
    pub method: String,
    pub query: Vec<f64>,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub boundary_point: Option<Vec<f64>>,
    pub boundary_distance: Option<f64>,
    pub kernel_width: Option<f64>,
    pub surrogate_radius: Option<f64>,
    pub seed: u64,
    pub n_samples: usize,
}

impl From<&Explanation> for ExplanationJson {
    fn from(e: &Explanation) -> Self {
        Self {
            method: e.method.name().into(),
            query: e.query.clone(),
            intercept: e.surrogate.intercept,
            coefficients: e.surrogate.coefficients.clone(),
            boundary_point: e.boundary.as_ref().map(|b| b.point().to_vec()),
            boundary_distance: e.boundary.as_ref().map(|b| b.distance_to_query()),
            kernel_width: e.kernel_width,
            surrogate_radius: e.surrogate_radius,
            seed: e.seed,
            n_samples: e.n_samples_used,
        }
    }
}

/// A score, or the literal string `"skip"`.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ScoreCell {
    Score(f64),
    Skip(&'static str),
}

/// One entry of `per_instance`.
#[derive(Debug, Serialize)]
pub struct InstanceJson {
    pub index: usize,
    pub score: ScoreCell,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl From<&InstanceScore> for InstanceJson {
    fn from(s: &InstanceScore) -> Self {
        match &s.outcome {
            InstanceOutcome::Scored(v) => Self { index: s.index, score: ScoreCell::Score(*v), reason: None },
            InstanceOutcome::Skipped(r) => {
                Self { index: s.index, score: ScoreCell::Skip("skip"), reason: Some(r.tag()) }
            }
        }
    }
}

/// Serialised fidelity report.
#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub method: String,
    pub r_fid_fraction: f64,
    pub n_eval: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub n_skipped: usize,
    pub per_instance: Vec<InstanceJson>,
}

impl ReportJson {
    pub fn new(method: &str, report: &FidelityReport) -> Self {
        Self {
            method: method.into(),
            r_fid_fraction: report.r_fid_fraction,
            n_eval: report.n_eval,
            mean: report.mean,
            std: report.std_dev,
            n_skipped: report.n_skipped,
            per_instance: report.per_instance.iter().map(InstanceJson::from).collect(),
        }
    }
}

/// Per-fraction aggregate of a radius sweep.
#[derive(Debug, Serialize)]
pub struct SweepPoint {
    pub fraction: f64,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub n_skipped: usize,
}

/// Per-instance sweep series.
#[derive(Debug, Serialize)]
pub struct SweepSeries {
    pub index: usize,
    pub scores: Vec<Option<f64>>,
}

/// Serialised radius sweep.
#[derive(Debug, Serialize)]
pub struct SweepJson {
    pub method: String,
    pub fractions: Vec<f64>,
    pub n_eval: usize,
    pub aggregate: Vec<SweepPoint>,
    pub per_instance: Vec<SweepSeries>,
}

/// Heatmap rows: the instance coordinates followed by its score.
impl SweepJson {
    pub fn from_reports(method: &str, reports: &[FidelityReport]) -> Self {
        let n_instances = reports.first().map_or(0, |r| r.per_instance.len());
        Self {
            method: method.into(),
            fractions: reports.iter().map(|r| r.r_fid_fraction).collect(),
            n_eval: reports.first().map_or(0, |r| r.n_eval),
            aggregate: reports
                .iter()
                .map(|r| SweepPoint {
                    fraction: r.r_fid_fraction,
                    mean: r.mean,
                    std: r.std_dev,
                    n_skipped: r.n_skipped,
                })
                .collect(),
            per_instance: (0..n_instances)
                .map(|k| SweepSeries {
                    index: reports[0].per_instance[k].index,
                    scores: reports.iter().map(|r| r.per_instance[k].outcome.score()).collect(),
                })
                .collect(),
        }
    }
}

pub fn write_heatmap(path: &Path, eval_set: &Dataset, report: &FidelityReport) -> Result<()> {
    let csv_err = |source| AppError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = eval_set.feature_names().to_vec();
    header.extend(["index".to_string(), "score".to_string()]);
    w.write_record(&header).map_err(csv_err)?;
    for s in &report.per_instance {
        let mut record: Vec<String> = eval_set.row(s.index).iter().map(|v| format_float(*v)).collect();
        record.push(s.index.to_string());
        record.push(s.outcome.score().map_or_else(|| "skip".to_string(), format_float));
        w.write_record(&record).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| AppError::io(path, e.into_error()))?;
    write_bytes(path, &bytes)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T, path: &Path) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| AppError::Json { path: path.into(), source })?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes `value` as pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_bytes(path, &to_json_bytes(value, path)?)
}

/// Record of one CLI run, written next to its outputs.
#[derive(Debug, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub argv: Vec<String>,
    pub parameters: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub duration_secs: f64,
}

/// `<output>.manifest.json` for a file output; `<dir>/manifest.json` for a directory.
pub fn manifest_path(output: &Path) -> std::path::PathBuf {
    if output.is_dir() {
        output.join("manifest.json")
    } else {
        let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        output.with_file_name(name)
    }
}
