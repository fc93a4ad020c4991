//! Local fidelity: how well a surrogate ranks black-box labels inside a ball
//! around the explained instance.
//!
//! Evaluation points are drawn uniformly in `B(x, r)` from a seed stream that
//! the explainers never touch. Ground truth is the hard black-box label and
//! the ranking is the raw surrogate score, so LIME (soft targets) and Local
//! Surrogate (hard targets) are scored the same way.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::blackbox::{BlackBox, Scorer};
use crate::data::{relative_radius, Dataset};
use crate::error::{Error, Result};
use crate::rng::{self, derive_seed, Domain};
use crate::sampling::sample_ball_uniform;
use crate::surrogate::{explain, ExplainerConfig, Reference};

/// Area under the ROC curve (Mann-Whitney form, ties count one half).
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidArgument("scores and labels differ in length".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("scores contain NaN".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));

    // Sum of (doubled) mid-ranks of the positives keeps everything integral.
    let mut rank_sum_x2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j+1; doubled mid-rank is i + j + 2.
        let positives = order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as u128;
        rank_sum_x2 += positives * (i + j + 2) as u128;
        i = j + 1;
    }
    let (p, q) = (n_pos as u128, n_neg as u128);
    let u_x2 = rank_sum_x2 - p * (p + 1);
    Ok(u_x2 as f64 / (2 * p * q) as f64)
}

/// Fraction of points where the surrogate's class matches the label.
pub fn accuracy(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() || scores.is_empty() {
        return Err(Error::InvalidArgument("scores and labels must be non-empty and equal in length".into()));
    }
    let hits = scores.iter().zip(labels).filter(|(s, &l)| u8::from(**s >= 0.5) == l).count();
    Ok(hits as f64 / scores.len() as f64)
}

/// Agreement measure applied inside the fidelity ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    /// ROC AUC of surrogate scores against black-box labels.
    Auc,
    /// Plain agreement of thresholded surrogate scores with black-box labels.
    Accuracy,
}

/// Fidelity evaluation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityConfig {
    /// Ball radius as a fraction of the largest query-to-data distance.
    pub r_fid_fraction: f64,
    /// Points drawn in each ball.
    pub n_eval: usize,
    /// Base seed for evaluation draws.
    pub seed: u64,
    /// Agreement measure.
    pub metric: Metric,
}

impl FidelityConfig {
    /// AUC-based configuration with 1000 evaluation points.
    pub fn new(r_fid_fraction: f64, seed: u64) -> Self {
        Self { r_fid_fraction, n_eval: 1000, seed, metric: Metric::Auc }
    }

    /// Checks the radius fraction and evaluation count.
    pub fn validate(&self) -> Result<()> {
        if !(self.r_fid_fraction > 0.0 && self.r_fid_fraction <= 1.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "r_fid fraction {} outside (0, 1]",
                self.r_fid_fraction
            )));
        }
        if self.n_eval < 2 {
            return Err(Error::InvalidArgument("n_eval must be at least 2".into()));
        }
        Ok(())
    }
}

/// Local fidelity of `surrogate` to `model` in `B(x, r_fid_abs)`.
///
/// Returns `Ok(None)` when the black box assigns a single class to every
/// evaluation point (AUC is undefined there).
pub fn local_fidelity<M, S>(
    model: &M,
    surrogate: &S,
    x: &[f64],
    r_fid_abs: f64,
    cfg: &FidelityConfig,
) -> Result<Option<f64>>
where
    M: BlackBox + ?Sized,
    S: Scorer + ?Sized,
{
    local_fidelity_on_stream(model, surrogate, x, r_fid_abs, cfg, 0)
}

fn local_fidelity_on_stream<M, S>(
    model: &M,
    surrogate: &S,
    x: &[f64],
    r_fid_abs: f64,
    cfg: &FidelityConfig,
    stream: u64,
) -> Result<Option<f64>>
where
    M: BlackBox + ?Sized,
    S: Scorer + ?Sized,
{
    if cfg.n_eval < 2 {
        return Err(Error::InvalidArgument("n_eval must be at least 2".into()));
    }
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: x.len() });
    }
    let stream_seed = derive_seed(cfg.seed, Domain::Evaluate, stream);
    let points = sample_ball_uniform(x, r_fid_abs, cfg.n_eval, stream_seed)?;
    let labels: Vec<u8> = points.iter().map(|p| model.label(p)).collect();
    let ones = labels.iter().filter(|&&l| l == 1).count();
    if ones == 0 || ones == labels.len() {
        return Ok(None);
    }
    let scores: Vec<f64> = points.iter().map(|p| surrogate.score(p)).collect();
    match cfg.metric {
        Metric::Auc => auc(&scores, &labels).map(Some),
        Metric::Accuracy => accuracy(&scores, &labels).map(Some),
    }
}

/// Local fidelity at several relative radii. Fraction `i` draws from
/// evaluation stream `i`; `cfg.r_fid_fraction` is ignored.
pub fn radius_sweep<M, S>(
    model: &M,
    surrogate: &S,
    x: &[f64],
    data: &Dataset,
    fractions: &[f64],
    cfg: &FidelityConfig,
) -> Result<Vec<(f64, Option<f64>)>>
where
    M: BlackBox + ?Sized,
    S: Scorer + ?Sized,
{
    if fractions.is_empty() {
        return Err(Error::InvalidArgument("radius sweep needs at least one fraction".into()));
    }
    if fractions.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(core::cmp::Ordering::Less)) {
        return Err(Error::InvalidArgument("sweep fractions must be strictly increasing".into()));
    }
    fractions
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let r = relative_radius(data, x, f)?;
            Ok((f, local_fidelity_on_stream(model, surrogate, x, r, cfg, i as u64)?))
        })
        .collect()
}

/// Why an instance did not receive a score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SkipReason {
    /// The black box is constant over the evaluation ball.
    SingleClassNeighbourhood,
    /// The explainer failed (boundary not found, one-class sample, ...).
    Explainer(Error),
}

impl SkipReason {
    /// Short machine-readable tag.
    pub fn tag(&self) -> String {
        match self {
            Self::SingleClassNeighbourhood => "single-class-neighbourhood".into(),
            Self::Explainer(Error::BoundaryNotFound { .. }) => "boundary-not-found".into(),
            Self::Explainer(Error::OneClassSample { .. }) => "one-class-sample".into(),
            Self::Explainer(e) => e.to_string(),
        }
    }
}

/// Outcome for one evaluated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InstanceOutcome {
    /// Fidelity score in `[0, 1]`.
    Scored(f64),
    /// No score, with the reason.
    Skipped(SkipReason),
}

impl InstanceOutcome {
    /// The score, if any.
    pub fn score(&self) -> Option<f64> {
        match self {
            Self::Scored(s) => Some(*s),
            Self::Skipped(_) => None,
        }
    }
}

/// One row of a fidelity report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceScore {
    /// Row index in the evaluation set.
    pub index: usize,
    /// Score or skip.
    pub outcome: InstanceOutcome,
}

/// Local fidelity over a set of instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    /// Radius fraction used.
    pub r_fid_fraction: f64,
    /// Evaluation points per ball.
    pub n_eval: usize,
    /// Per-instance outcomes in index order.
    pub per_instance: Vec<InstanceScore>,
    /// Mean over scored instances; `None` when every instance was skipped.
    pub mean: Option<f64>,
    /// Population standard deviation over scored instances.
    pub std_dev: Option<f64>,
    /// Number of skipped instances.
    pub n_skipped: usize,
}

impl FidelityReport {
    /// Aggregates per-instance outcomes.
    pub fn from_instances(r_fid_fraction: f64, n_eval: usize, per_instance: Vec<InstanceScore>) -> Self {
        let scores: Vec<f64> = per_instance.iter().filter_map(|s| s.outcome.score()).collect();
        let n_skipped = per_instance.len() - scores.len();
        let (mean, std_dev) = mean_std(&scores).map_or((None, None), |(m, s)| (Some(m), Some(s)));
        Self { r_fid_fraction, n_eval, per_instance, mean, std_dev, n_skipped }
    }
}

/// Mean and population standard deviation; `None` for an empty slice.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, libm::sqrt(var)))
}

/// Explains instance `index` of the evaluation set and scores the
/// explanation at each radius fraction.
///
/// The explainer seed and the evaluation seed are both derived from the
/// instance index, so instances can be processed in any order. Every
/// fraction reuses evaluation stream 0, so each entry equals what a
/// single-fraction run would report.
pub fn evaluate_instance<M: BlackBox + ?Sized>(
    model: &M,
    reference: &Reference,
    explainer: &ExplainerConfig,
    x: &[f64],
    index: usize,
    fractions: &[f64],
    fid: &FidelityConfig,
) -> Result<Vec<InstanceScore>> {
    let explain_cfg = explainer.with_seed(derive_seed(explainer.seed, Domain::Explain, index as u64));
    let eval_cfg = FidelityConfig { seed: derive_seed(fid.seed, Domain::Evaluate, index as u64), ..fid.clone() };
    let explanation = match explain(model, x, reference, &explain_cfg) {
        Ok(e) => e,
        Err(e @ (Error::BoundaryNotFound { .. } | Error::OneClassSample { .. } | Error::IllConditioned)) => {
            let skip = InstanceOutcome::Skipped(SkipReason::Explainer(e));
            return Ok(fractions.iter().map(|_| InstanceScore { index, outcome: skip.clone() }).collect());
        }
        Err(e) => return Err(e),
    };
    fractions
        .iter()
        .map(|&f| {
            let r = relative_radius(&reference.data, x, f)?;
            let outcome = match local_fidelity(model, &explanation.surrogate, x, r, &eval_cfg)? {
                Some(s) => InstanceOutcome::Scored(s),
                None => InstanceOutcome::Skipped(SkipReason::SingleClassNeighbourhood),
            };
            Ok(InstanceScore { index, outcome })
        })
        .collect()
}

/// Mean local fidelity of an explainer over every row of `eval_set`.
pub fn dataset_fidelity<M: BlackBox + ?Sized>(
    model: &M,
    explainer: &ExplainerConfig,
    eval_set: &Dataset,
    reference: &Reference,
    fid: &FidelityConfig,
) -> Result<FidelityReport> {
    fid.validate()?;
    explainer.validate()?;
    if eval_set.dim() != reference.data.dim() {
        return Err(Error::DimensionMismatch { expected: reference.data.dim(), found: eval_set.dim() });
    }
    let mut per_instance = Vec::with_capacity(eval_set.len());
    for (i, x) in eval_set.rows().enumerate() {
        let mut scores = evaluate_instance(model, reference, explainer, x, i, &[fid.r_fid_fraction], fid)?;
        per_instance.push(scores.remove(0));
    }
    Ok(FidelityReport::from_instances(fid.r_fid_fraction, fid.n_eval, per_instance))
}

/// Deterministic, seed-pinned choice of at most `max` row indices out of `n`,
/// returned in increasing order.
pub fn select_instances(n: usize, max: usize, seed: u64) -> Vec<usize> {
    use rand::seq::index::sample;
    if max >= n {
        return (0..n).collect();
    }
    let mut picked = sample(&mut rng::stream(derive_seed(seed, Domain::Select, 0), 0), n, max).into_vec();
    picked.sort_unstable();
    picked
}
