//! Dense tabular data with binary labels.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Row-major numeric dataset with labels in `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    values: Vec<f64>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
    dim: usize,
}

impl Dataset {
    /// Builds a dataset, checking shape, finiteness and label domain.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        let dim = feature_names.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("dataset needs at least one feature".into()));
        }
        if rows.is_empty() {
            return Err(Error::InvalidArgument("dataset needs at least one row".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::InvalidArgument(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite value at row {i}, feature {j}")));
            }
            values.extend_from_slice(row);
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidArgument(format!("label {l} is not binary")));
        }
        Ok(Self { values, labels, feature_names, dim })
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false for a constructed dataset; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of features.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Feature values of row `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Iterator over the rows.
    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    /// Class labels, one per row.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Column names.
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Counts of class 0 and class 1.
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        (self.len() - ones, ones)
    }

    /// True when both classes occur.
    pub fn has_both_classes(&self) -> bool {
        let (zeros, ones) = self.class_counts();
        zeros > 0 && ones > 0
    }

    /// Dataset made of the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self { values, labels, feature_names: self.feature_names.clone(), dim: self.dim }
    }

    /// Checks that `x` lives in this dataset's feature space.
    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, found: x.len() })
        }
    }
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    /// Column means.
    pub means: Vec<f64>,
    /// Column standard deviations (divisor `n`); zero marks a constant column.
    pub std_devs: Vec<f64>,
}

impl FeatureStats {
    /// Statistics of every column of `data`.
    pub fn of(data: &Dataset) -> Self {
        let n = data.len() as f64;
        let d = data.dim();
        let mut means = alloc::vec![0.0; d];
        for row in data.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; d];
        for row in data.rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let std_devs = var.into_iter().map(|s| libm::sqrt(s / n)).collect();
        Self { means, std_devs }
    }

    /// Number of features described.
    pub fn dim(&self) -> usize {
        self.means.len()
    }
}

/// Euclidean distance between two points of equal dimension.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(squared_distance(a, b))
}

/// Squared Euclidean distance.
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `fraction` times the largest distance from `x` to any row of `data`.
///
/// Radii throughout the crate are expressed this way so that one number
/// means the same degree of locality regardless of feature scale.
pub fn relative_radius(data: &Dataset, x: &[f64], fraction: f64) -> Result<f64> {
    data.check_dim(x)?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("radius fraction {fraction} outside (0, 1]")));
    }
    let max = data.rows().map(|r| squared_distance(r, x)).fold(0.0, f64::max);
    Ok(fraction * libm::sqrt(max))
}

/// Two interleaved half circles.
///
/// Class 0 is the upper arc of the unit circle centred at the origin; class 1
/// is the lower arc of the unit circle centred at `(1, 0.5)`, i.e. the upper
/// arc reflected and shifted by `(+1, -0.5)`. Points are spread evenly along
/// each arc, jittered with Gaussian noise and shuffled.
pub fn generate_half_moons(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("half moons need n >= 2, got {n}")));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise must be a finite non-negative value, got {noise}")));
    }
    let n_upper = n / 2;
    let n_lower = n - n_upper;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n_upper {
        let t = arc_angle(i, n_upper);
        rows.push(alloc::vec![libm::cos(t), libm::sin(t)]);
        labels.push(0);
    }
    for i in 0..n_lower {
        let t = arc_angle(i, n_lower);
        rows.push(alloc::vec![1.0 - libm::cos(t), 0.5 - libm::sin(t)]);
        labels.push(1);
    }

    let mut rng = rng::stream(seed, 0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    if noise > 0.0 {
        let jitter = Normal::new(0.0, noise).expect("validated noise");
        for row in &mut rows {
            for v in row.iter_mut() {
                *v += jitter.sample(&mut rng);
            }
        }
    }
    let rows = order.iter().map(|&i| rows[i].clone()).collect();
    let labels = order.iter().map(|&i| labels[i]).collect();
    Dataset::new(rows, labels, alloc::vec!["x0".into(), "x1".into()])
}

fn arc_angle(i: usize, count: usize) -> f64 {
    if count <= 1 {
        0.0
    } else {
        PI * i as f64 / (count - 1) as f64
    }
}

/// Shuffled disjoint split into `(train, test)`.
///
/// The test part holds `floor(n * test_fraction)` rows and the training part
/// the remaining `ceil(n * (1 - test_fraction))`.
pub fn train_test_split(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let n = data.len();
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    // The epsilon absorbs representation error such as 10 * 0.2.
    let n_test = libm::floor(n as f64 * test_fraction + 1e-9) as usize;
    if n_test == 0 || n_test >= n {
        return Err(Error::InvalidArgument(format!("test fraction {test_fraction} leaves an empty part for {n} rows")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(rng::derive_seed(seed, Domain::Split, 0), 0));
    let (test_idx, train_idx) = order.split_at(n_test);
    Ok((data.subset(train_idx), data.subset(test_idx)))
}
