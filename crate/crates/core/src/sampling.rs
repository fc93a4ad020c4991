//! Instance generation: global normal draws, uniform draws in an l2 ball,
//! RBF weighting, and the expanding-sphere search for the nearest point of
//! the opposite class.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::blackbox::BlackBox;
use crate::data::{distance, squared_distance, FeatureStats};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// `n` independent draws with feature `j ~ Normal(means[j], std_devs[j])`.
///
/// Constant features (zero deviation) are reproduced exactly.
pub fn sample_global_normal(stats: &FeatureStats, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = rng::stream(seed, 0);
    Ok((0..n)
        .map(|_| {
            stats
                .means
                .iter()
                .zip(&stats.std_devs)
                .map(|(m, s)| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m + s * z
                })
                .collect()
        })
        .collect())
}

/// `n` independent draws uniform over the closed ball `B(center, radius)`.
///
/// Direction is a normalised standard Gaussian vector; the distance from the
/// centre is `radius * U^(1/d)`, the inverse CDF of the radial law.
pub fn sample_ball_uniform(center: &[f64], radius: f64, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_ball(center, radius, n)?;
    let mut rng = rng::stream(seed, 0);
    Ok((0..n).map(|_| ball_point(&mut rng, center, radius)).collect())
}

fn check_ball(center: &[f64], radius: f64, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    if center.is_empty() {
        return Err(Error::InvalidArgument("ball centre must have at least one coordinate".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")));
    }
    Ok(())
}

fn ball_point(rng: &mut Rng, center: &[f64], radius: f64) -> Vec<f64> {
    let d = center.len();
    let mut dir: Vec<f64> = Vec::with_capacity(d);
    let norm = loop {
        dir.clear();
        dir.extend((0..d).map(|_| -> f64 { StandardNormal.sample(&mut *rng) }));
        let norm = libm::sqrt(dir.iter().map(|v| v * v).sum::<f64>());
        if norm > 0.0 {
            break norm;
        }
    };
    let u: f64 = rng.random();
    let r = radius * libm::pow(u, 1.0 / d as f64);
    center.iter().zip(&dir).map(|(c, v)| c + r * v / norm).collect()
}

/// RBF weights `exp(-||s - x||^2 / width^2)`, one per sample, in order.
pub fn rbf_weights(samples: &[Vec<f64>], x: &[f64], kernel_width: f64) -> Result<Vec<f64>> {
    if !(kernel_width > 0.0 && kernel_width.is_finite()) {
        return Err(Error::InvalidArgument(format!("kernel width must be positive, got {kernel_width}")));
    }
    let w2 = kernel_width * kernel_width;
    samples
        .iter()
        .map(|s| {
            if s.len() != x.len() {
                return Err(Error::DimensionMismatch { expected: x.len(), found: s.len() });
            }
            Ok(libm::exp(-squared_distance(s, x) / w2))
        })
        .collect()
}

/// Parameters of the expanding-sphere boundary search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowingSpheresConfig {
    /// Points drawn at every radius.
    pub n_per_step: usize,
    /// Radius of the first ball.
    pub initial_radius: f64,
    /// Additive radius increment between steps.
    pub radius_growth: f64,
    /// Largest radius searched.
    pub max_radius: f64,
    /// Base seed; step `k` draws from stream `k`.
    pub seed: u64,
}

impl GrowingSpheresConfig {
    /// Defaults scaled to `data_scale`, the largest distance from the query to
    /// the reference data: 1000 points per step, start and step at 1% of the
    /// scale, cap at twice the scale.
    pub fn for_scale(data_scale: f64, seed: u64) -> Self {
        Self {
            n_per_step: 1000,
            initial_radius: 0.01 * data_scale,
            radius_growth: 0.01 * data_scale,
            max_radius: 2.0 * data_scale,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.n_per_step == 0 {
            return Err(Error::InvalidArgument("n_per_step must be at least 1".into()));
        }
        if !positive(self.initial_radius) || !positive(self.radius_growth) || !positive(self.max_radius) {
            return Err(Error::InvalidArgument("search radii must be positive".into()));
        }
        if self.initial_radius > self.max_radius {
            return Err(Error::InvalidArgument(format!(
                "initial radius {} exceeds max radius {}",
                self.initial_radius, self.max_radius
            )));
        }
        Ok(())
    }
}

/// Closest point of the opposite class found by the boundary search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    point: Vec<f64>,
    distance_to_query: f64,
    steps_taken: usize,
}

impl BoundaryPoint {
    /// Builds a boundary point, checking that its label differs from the query's.
    pub fn new<M: BlackBox + ?Sized>(model: &M, query: &[f64], point: Vec<f64>, steps_taken: usize) -> Result<Self> {
        if point.len() != query.len() {
            return Err(Error::DimensionMismatch { expected: query.len(), found: point.len() });
        }
        if model.label(&point) == model.label(query) {
            return Err(Error::InvalidArgument("boundary point has the query's label".into()));
        }
        let distance_to_query = distance(&point, query);
        Ok(Self { point, distance_to_query, steps_taken })
    }

    /// Location of the point.
    pub fn point(&self) -> &[f64] {
        &self.point
    }

    /// Euclidean distance to the query.
    pub fn distance_to_query(&self) -> f64 {
        self.distance_to_query
    }

    /// Number of radii tried, including the successful one.
    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }
}

/// Expanding-sphere search for the closest point whose label differs from `x`'s.
///
/// Starting at `initial_radius` and growing by `radius_growth`, each step
/// draws `n_per_step` points uniformly in the ball around `x`. At the first
/// step where some point changes label, the closest such point is returned.
pub fn find_boundary_point<M: BlackBox + ?Sized>(
    model: &M,
    x: &[f64],
    cfg: &GrowingSpheresConfig,
) -> Result<BoundaryPoint> {
    cfg.validate()?;
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: x.len() });
    }
    let query_label = model.label(x);
    let mut step = 0usize;
    loop {
        let radius = cfg.initial_radius + step as f64 * cfg.radius_growth;
        if radius > cfg.max_radius * (1.0 + 1e-12) {
            return Err(Error::BoundaryNotFound { max_radius: cfg.max_radius });
        }
        let mut rng = rng::stream(cfg.seed, step as u64);
        let mut closest: Option<(f64, Vec<f64>)> = None;
        for _ in 0..cfg.n_per_step {
            let p = ball_point(&mut rng, x, radius);
            if model.label(&p) != query_label {
                let d2 = squared_distance(&p, x);
                if closest.as_ref().is_none_or(|(best, _)| d2 < *best) {
                    closest = Some((d2, p));
                }
            }
        }
        step += 1;
        if let Some((d2, point)) = closest {
            return Ok(BoundaryPoint { point, distance_to_query: libm::sqrt(d2), steps_taken: step });
        }
    }
}
