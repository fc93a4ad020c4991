//! Linear surrogates and the explainers that train them.
//!
//! Both explainers follow the same three steps (sample a neighbourhood, fit
//! a ridge model, read off its coefficients) and differ in where and how the
//! neighbourhood is drawn:
//!
//! * LIME draws from a normal fitted to the whole training set and weights
//!   every draw by an RBF kernel centred on the query; targets are the
//!   black-box probabilities.
//! * Local Surrogate first finds the nearest point of the opposite class,
//!   then draws uniformly in a ball around that point; targets are hard
//!   black-box labels and all draws weigh the same.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::blackbox::{BlackBox, Scorer};
use crate::data::FeatureStats;
use crate::error::{Error, Result};
use crate::linalg::solve_spd;
use crate::rng::{derive_seed, Domain};
use crate::sampling::{
    find_boundary_point, rbf_weights, sample_ball_uniform, sample_global_normal, BoundaryPoint, GrowingSpheresConfig,
};

/// `s(a) = intercept + <coefficients, a>`; the predicted class is `s(a) >= 0.5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSurrogate {
    /// Unpenalised constant term.
    pub intercept: f64,
    /// One weight per feature.
    pub coefficients: Vec<f64>,
    /// Ridge penalty used in the fit.
    pub ridge_lambda: f64,
}

impl LinearSurrogate {
    /// Input dimension.
    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    /// Surrogate class of `a`, after checking its dimension.
    pub fn label(&self, a: &[f64]) -> Result<u8> {
        if a.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.len() });
        }
        Ok(u8::from(self.score(a) >= 0.5))
    }
}

impl Scorer for LinearSurrogate {
    fn score(&self, a: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(a).map(|(c, v)| c * v).sum::<f64>()
    }
}

/// Minimises `sum_i w_i (y_i - b - <c, x_i>)^2 + lambda * ||c||^2` with the
/// intercept `b` left unpenalised.
///
/// Rows are centred on their weighted mean, which removes the intercept from
/// the system; the remaining `d x d` normal equations are solved by Cholesky.
pub fn fit_weighted_ridge(xs: &[Vec<f64>], ys: &[f64], weights: &[f64], lambda: f64) -> Result<LinearSurrogate> {
    let n = xs.len();
    let d = xs.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(Error::InvalidArgument("ridge fit needs at least one feature".into()));
    }
    if ys.len() != n || weights.len() != n {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {n} rows, {} targets, {} weights",
            ys.len(),
            weights.len()
        )));
    }
    if n < d + 1 {
        return Err(Error::InvalidArgument(format!("ridge fit needs at least {} rows, got {n}", d + 1)));
    }
    if let Some(x) = xs.iter().find(|x| x.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: x.len() });
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge penalty must be non-negative, got {lambda}")));
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidArgument("weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater) {
        return Err(Error::InvalidArgument("at least one weight must be positive".into()));
    }

    let mut x_mean = alloc::vec![0.0; d];
    let mut y_mean = 0.0;
    for ((x, y), w) in xs.iter().zip(ys).zip(weights) {
        for (m, v) in x_mean.iter_mut().zip(x) {
            *m += w * v;
        }
        y_mean += w * y;
    }
    x_mean.iter_mut().for_each(|m| *m /= total);
    y_mean /= total;

    let mut gram = alloc::vec![0.0; d * d];
    let mut rhs = alloc::vec![0.0; d];
    let mut centred = alloc::vec![0.0; d];
    for ((x, y), &w) in xs.iter().zip(ys).zip(weights) {
        if w == 0.0 {
            continue;
        }
        for ((c, v), m) in centred.iter_mut().zip(x).zip(&x_mean) {
            *c = v - m;
        }
        let yc = y - y_mean;
        for i in 0..d {
            let wi = w * centred[i];
            rhs[i] += wi * yc;
            for j in 0..=i {
                gram[i * d + j] += wi * centred[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            gram[j * d + i] = gram[i * d + j];
        }
        gram[i * d + i] += lambda;
    }

    let coefficients = solve_spd(&gram, &rhs)?;
    let intercept = y_mean - coefficients.iter().zip(&x_mean).map(|(c, m)| c * m).sum::<f64>();
    Ok(LinearSurrogate { intercept, coefficients, ridge_lambda: lambda })
}

/// Surrogate class of `a` (threshold 0.5, ties to 1).
pub fn surrogate_label(s: &LinearSurrogate, a: &[f64]) -> Result<u8> {
    s.label(a)
}

/// Explanation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Global normal sampling with the default kernel width.
    Lime,
    /// Global normal sampling with a reduced kernel width.
    LimeK,
    /// Boundary-centred uniform sampling.
    Ls,
}

impl Method {
    /// Stable lowercase name, as used on the command line and in reports.
    pub fn name(self) -> &'static str {
        match self {
            Self::Lime => "lime",
            Self::LimeK => "lime-k",
            Self::Ls => "ls",
        }
    }

    /// Inverse of [`Method::name`]; also accepts `lime_k`.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lime" => Some(Self::Lime),
            "lime-k" | "lime_k" => Some(Self::LimeK),
            "ls" => Some(Self::Ls),
            _ => None,
        }
    }
}

/// Shape of the LIME distance kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelShape {
    /// `sqrt(exp(-d^2 / width^2))`, the weighting of the reference LIME
    /// implementation (a Gaussian with standard deviation `width`).
    Lime,
    /// `exp(-d^2 / width^2)`, see [`rbf_weights`].
    Rbf,
}

/// Kernel weights of `samples` around `x` for the given shape.
pub fn kernel_weights(shape: KernelShape, samples: &[Vec<f64>], x: &[f64], width: f64) -> Result<Vec<f64>> {
    match shape {
        KernelShape::Rbf => rbf_weights(samples, x, width),
        // sqrt(exp(-t / w^2)) == exp(-t / (sqrt(2) w)^2), without the early underflow.
        KernelShape::Lime => rbf_weights(samples, x, width * core::f64::consts::SQRT_2),
    }
}

/// Boundary-search settings expressed relative to the query's data scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySearch {
    /// Points drawn per radius.
    pub n_per_step: usize,
    /// Initial radius and radius increment, as a fraction of the data scale.
    pub step_fraction: f64,
    /// Search cap, as a multiple of the data scale.
    pub max_radius_fraction: f64,
}

impl Default for BoundarySearch {
    fn default() -> Self {
        Self { n_per_step: 1000, step_fraction: 0.01, max_radius_fraction: 2.0 }
    }
}

impl BoundarySearch {
    /// Absolute search parameters for a query whose data scale is `data_scale`.
    pub fn resolve(&self, data_scale: f64, seed: u64) -> GrowingSpheresConfig {
        let step = self.step_fraction * data_scale;
        GrowingSpheresConfig {
            n_per_step: self.n_per_step,
            initial_radius: step,
            radius_growth: step,
            max_radius: self.max_radius_fraction * data_scale,
            seed,
        }
    }
}

/// Everything an explainer needs besides the model and the query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainerConfig {
    /// Which explainer to run.
    pub method: Method,
    /// Surrogate training sample size.
    pub n_samples: usize,
    /// RBF width for LIME variants; `None` means `0.75 * sqrt(d)`.
    pub kernel_width: Option<f64>,
    /// Kernel shape for LIME variants.
    pub kernel: KernelShape,
    /// Local Surrogate ball radius as a fraction of the data scale.
    pub surrogate_radius: Option<f64>,
    /// Ridge penalty.
    pub ridge_lambda: f64,
    /// Boundary-search settings (Local Surrogate only).
    pub boundary_search: BoundarySearch,
    /// Base seed.
    pub seed: u64,
}

impl ExplainerConfig {
    /// LIME with the default kernel width, 5000 samples and `lambda = 1`.
    pub fn lime(seed: u64) -> Self {
        Self {
            method: Method::Lime,
            n_samples: 5000,
            kernel_width: None,
            kernel: KernelShape::Lime,
            surrogate_radius: None,
            ridge_lambda: 1.0,
            boundary_search: BoundarySearch::default(),
            seed,
        }
    }

    /// LIME with an explicit kernel width.
    pub fn lime_k(kernel_width: f64, seed: u64) -> Self {
        Self { method: Method::LimeK, kernel_width: Some(kernel_width), ..Self::lime(seed) }
    }

    /// Local Surrogate with ball radius `r_sx` (fraction of the data scale),
    /// 5000 samples and `lambda = 1e-3`.
    pub fn ls(r_sx: f64, seed: u64) -> Self {
        Self {
            method: Method::Ls,
            n_samples: 5000,
            kernel_width: None,
            kernel: KernelShape::Lime,
            surrogate_radius: Some(r_sx),
            ridge_lambda: 1e-3,
            boundary_search: BoundarySearch::default(),
            seed,
        }
    }

    /// Same configuration with another seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// Checks that the fields required by `method` are present and valid.
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
        }
        match self.method {
            Method::Lime => {}
            Method::LimeK => {
                if self.kernel_width.is_none() {
                    return Err(Error::InvalidArgument("lime-k needs an explicit kernel width".into()));
                }
            }
            Method::Ls => match self.surrogate_radius {
                Some(r) if r > 0.0 && r <= 1.0 => {}
                other => {
                    return Err(Error::InvalidArgument(format!("ls needs a surrogate radius in (0, 1], got {other:?}")))
                }
            },
        }
        if let Some(w) = self.kernel_width {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!("kernel width must be positive, got {w}")));
            }
        }
        Ok(())
    }

    /// Kernel width used for a `d`-dimensional problem.
    pub fn resolved_kernel_width(&self, d: usize) -> f64 {
        self.kernel_width.unwrap_or_else(|| default_kernel_width(d))
    }
}

/// `0.75 * sqrt(d)`.
pub fn default_kernel_width(d: usize) -> f64 {
    0.75 * libm::sqrt(d as f64)
}

/// A fitted surrogate together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    /// Explainer that produced this explanation.
    pub method: Method,
    /// Explained instance.
    pub query: Vec<f64>,
    /// Fitted surrogate; its coefficients are the explanation.
    pub surrogate: LinearSurrogate,
    /// Nearest opposite-class point (Local Surrogate only).
    pub boundary: Option<BoundaryPoint>,
    /// RBF width (LIME variants only).
    pub kernel_width: Option<f64>,
    /// Absolute radius of the training ball (Local Surrogate only).
    pub surrogate_radius: Option<f64>,
    /// Number of surrogate training points.
    pub n_samples_used: usize,
    /// Seed the explanation was drawn with.
    pub seed: u64,
}

fn check_query<M: BlackBox + ?Sized>(model: &M, x: &[f64]) -> Result<()> {
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("query has non-finite values".into()));
    }
    Ok(())
}

/// LIME and LIME-K.
pub fn explain_lime<M: BlackBox + ?Sized>(
    model: &M,
    x: &[f64],
    stats: &FeatureStats,
    cfg: &ExplainerConfig,
) -> Result<Explanation> {
    cfg.validate()?;
    if cfg.method == Method::Ls {
        return Err(Error::InvalidArgument("explain_lime called with method ls".into()));
    }
    check_query(model, x)?;
    if stats.dim() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: stats.dim() });
    }
    let width = cfg.resolved_kernel_width(x.len());
    let samples = sample_global_normal(stats, cfg.n_samples, derive_seed(cfg.seed, Domain::Surrogate, 0))?;
    let targets: Vec<f64> = samples.iter().map(|s| model.score(s)).collect();
    let weights = kernel_weights(cfg.kernel, &samples, x, width)?;
    let surrogate = fit_weighted_ridge(&samples, &targets, &weights, cfg.ridge_lambda)?;
    Ok(Explanation {
        method: cfg.method,
        query: x.to_vec(),
        surrogate,
        boundary: None,
        kernel_width: Some(width),
        surrogate_radius: None,
        n_samples_used: cfg.n_samples,
        seed: cfg.seed,
    })
}

/// Local Surrogate: boundary search, uniform ball sample around the boundary
/// point, hard labels, unweighted ridge.
///
/// `data_scale` is the largest distance from `x` to the reference data; both
/// the search steps and the training radius are fractions of it.
pub fn explain_ls<M: BlackBox + ?Sized>(
    model: &M,
    x: &[f64],
    data_scale: f64,
    cfg: &ExplainerConfig,
) -> Result<Explanation> {
    cfg.validate()?;
    if cfg.method != Method::Ls {
        return Err(Error::InvalidArgument(format!("explain_ls called with method {}", cfg.method.name())));
    }
    check_query(model, x)?;
    if !(data_scale > 0.0 && data_scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("data scale must be positive, got {data_scale}")));
    }
    let search = cfg.boundary_search.resolve(data_scale, derive_seed(cfg.seed, Domain::Boundary, 0));
    let boundary = find_boundary_point(model, x, &search)?;

    let radius = cfg.surrogate_radius.expect("validated") * data_scale;
    let samples =
        sample_ball_uniform(boundary.point(), radius, cfg.n_samples, derive_seed(cfg.seed, Domain::Surrogate, 0))?;
    let labels: Vec<f64> = samples.iter().map(|s| f64::from(model.label(s))).collect();
    let ones = labels.iter().filter(|&&l| l == 1.0).count();
    if ones == 0 || ones == labels.len() {
        return Err(Error::OneClassSample { label: u8::from(ones > 0) });
    }
    let weights = alloc::vec![1.0; samples.len()];
    let surrogate = fit_weighted_ridge(&samples, &labels, &weights, cfg.ridge_lambda)?;
    Ok(Explanation {
        method: Method::Ls,
        query: x.to_vec(),
        surrogate,
        boundary: Some(boundary),
        kernel_width: None,
        surrogate_radius: Some(radius),
        n_samples_used: cfg.n_samples,
        seed: cfg.seed,
    })
}

/// Dispatches on `cfg.method` using the reference training data to derive
/// feature statistics (LIME) or the data scale (Local Surrogate).
pub fn explain<M: BlackBox + ?Sized>(
    model: &M,
    x: &[f64],
    reference: &Reference,
    cfg: &ExplainerConfig,
) -> Result<Explanation> {
    match cfg.method {
        Method::Lime | Method::LimeK => explain_lime(model, x, &reference.stats, cfg),
        Method::Ls => {
            let scale = crate::data::relative_radius(&reference.data, x, 1.0)?;
            explain_ls(model, x, scale, cfg)
        }
    }
}

/// Training data an explainer may consult, with its statistics precomputed.
#[derive(Debug, Clone)]
pub struct Reference {
    /// Rows used for feature statistics and radius scaling.
    pub data: crate::data::Dataset,
    /// Statistics of `data`.
    pub stats: FeatureStats,
}

impl Reference {
    /// Wraps `data` and computes its statistics.
    pub fn new(data: crate::data::Dataset) -> Self {
        let stats = FeatureStats::of(&data);
        Self { data, stats }
    }
}
