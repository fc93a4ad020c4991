//! Opaque classifiers: a bagged CART forest and closed-form oracles.
//!
//! Explainers only ever see a model through [`BlackBox`]: a probability of
//! class 1 and the label obtained by thresholding it at 0.5 (ties go to 1).

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, Domain, Rng};

/// Anything that maps a point to a real-valued score.
pub trait Scorer {
    /// Score of `x`; for classifiers, the probability of class 1.
    fn score(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64> Scorer for F {
    fn score(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// A trained binary classifier.
pub trait BlackBox: Scorer + Send + Sync {
    /// Input dimension.
    fn dim(&self) -> usize;

    /// Hard label: 1 exactly when `score(x) >= 0.5`.
    fn label(&self, x: &[f64]) -> u8 {
        u8::from(self.score(x) >= 0.5)
    }
}

/// Scores every point, in order, after checking dimensions.
pub fn score_batch<M: BlackBox + ?Sized>(model: &M, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_batch(model, xs)?;
    Ok(xs.iter().map(|x| model.score(x)).collect())
}

/// Labels every point, in order, after checking dimensions.
pub fn label_batch<M: BlackBox + ?Sized>(model: &M, xs: &[Vec<f64>]) -> Result<Vec<u8>> {
    check_batch(model, xs)?;
    Ok(xs.iter().map(|x| model.label(x)).collect())
}

fn check_batch<M: BlackBox + ?Sized>(model: &M, xs: &[Vec<f64>]) -> Result<()> {
    match xs.iter().find(|x| x.len() != model.dim()) {
        Some(x) => Err(Error::DimensionMismatch { expected: model.dim(), found: x.len() }),
        None => Ok(()),
    }
}

/// How many features each split considers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FeaturesPerSplit {
    /// `max(1, round(sqrt(d)))`.
    Sqrt,
    /// Every feature.
    All,
    /// A fixed count, clamped to `[1, d]`.
    Count(usize),
}

impl FeaturesPerSplit {
    fn resolve(self, d: usize) -> usize {
        match self {
            Self::Sqrt => (libm::round(libm::sqrt(d as f64)) as usize).clamp(1, d),
            Self::All => d,
            Self::Count(k) => k.clamp(1, d),
        }
    }
}

/// Forest hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestParams {
    /// Number of trees.
    pub n_trees: usize,
    /// Depth cap; `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    /// Minimum rows in a leaf.
    pub min_samples_leaf: usize,
    /// Candidate features per split.
    pub features_per_split: FeaturesPerSplit,
    /// Draw a bootstrap sample per tree.
    pub bootstrap: bool,
    /// Master seed; tree `t` uses a seed derived from `(seed, t)`.
    pub seed: u64,
}

impl Default for RandomForestParams {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: None,
            min_samples_leaf: 1,
            features_per_split: FeaturesPerSplit::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl RandomForestParams {
    fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidArgument("n_trees must be at least 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidArgument("min_samples_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

const LEAF: u32 = u32::MAX;

/// Flattened tree node. Leaves have `feature == LEAF` and carry their vote in
/// `left`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Node {
    feature: u32,
    threshold: f64,
    left: u32,
    right: u32,
}

/// One CART tree voting 0 or 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    /// Class vote of the leaf reached by `x`.
    pub fn vote(&self, x: &[f64]) -> u8 {
        let mut node = &self.nodes[0];
        while node.feature != LEAF {
            let next = if x[node.feature as usize] <= node.threshold { node.left } else { node.right };
            node = &self.nodes[next as usize];
        }
        node.left as u8
    }

    /// Number of nodes, leaves included.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Depth of the deepest leaf (a lone root has depth 0).
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            let n = &nodes[i];
            if n.feature == LEAF {
                0
            } else {
                1 + walk(nodes, n.left as usize).max(walk(nodes, n.right as usize))
            }
        }
        walk(&self.nodes, 0)
    }

    fn is_well_formed(&self, dim: usize) -> bool {
        !self.nodes.is_empty()
            && self.nodes.iter().all(|n| {
                if n.feature == LEAF {
                    n.left <= 1
                } else {
                    (n.feature as usize) < dim
                        && (n.left as usize) < self.nodes.len()
                        && (n.right as usize) < self.nodes.len()
                }
            })
    }
}

/// Bagged ensemble of CART trees; the score is the fraction of trees voting 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    dim: usize,
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Grows every tree sequentially.
    pub fn fit(train: &Dataset, params: &RandomForestParams) -> Result<Self> {
        params.validate()?;
        if !train.has_both_classes() {
            return Err(Error::SingleClass);
        }
        let trees = (0..params.n_trees).map(|t| fit_tree(train, params, t)).collect();
        Ok(Self { dim: train.dim(), trees })
    }

    /// Assembles a forest from independently grown trees.
    pub fn from_trees(dim: usize, trees: Vec<DecisionTree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidArgument("a forest needs at least one tree".into()));
        }
        if let Some(t) = trees.iter().position(|t| !t.is_well_formed(dim)) {
            return Err(Error::InvalidArgument(format!("tree {t} is malformed")));
        }
        Ok(Self { dim, trees })
    }

    /// The trees, in growth order.
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Number of trees voting 1 for `x`.
    pub fn votes(&self, x: &[f64]) -> usize {
        self.trees.iter().map(|t| usize::from(t.vote(x))).sum()
    }
}

impl Scorer for RandomForest {
    fn score(&self, x: &[f64]) -> f64 {
        self.votes(x) as f64 / self.trees.len() as f64
    }
}

impl BlackBox for RandomForest {
    fn dim(&self) -> usize {
        self.dim
    }

    // Stops as soon as the majority is decided. Equivalent to thresholding
    // the vote fraction at 0.5: class 1 needs 2 * ones >= n.
    fn label(&self, x: &[f64]) -> u8 {
        let n = self.trees.len();
        let (mut ones, mut zeros) = (0usize, 0usize);
        for tree in &self.trees {
            if tree.vote(x) == 1 {
                ones += 1;
                if 2 * ones >= n {
                    return 1;
                }
            } else {
                zeros += 1;
                if 2 * zeros > n {
                    return 0;
                }
            }
        }
        u8::from(2 * ones >= n)
    }
}

/// Grows tree `index` of a forest; its randomness depends only on
/// `(params.seed, index)`, so trees may be grown in any order or in parallel.
pub fn fit_tree(train: &Dataset, params: &RandomForestParams, index: usize) -> DecisionTree {
    let mut rng = rng::stream(rng::derive_seed(params.seed, Domain::Tree, index as u64), 0);
    let n = train.len();
    let rows: Vec<usize> =
        if params.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
    let mut builder = TreeBuilder {
        data: train,
        params,
        k: params.features_per_split.resolve(train.dim()),
        nodes: Vec::new(),
        rng,
        order: Vec::new(),
    };
    let mut rows = rows;
    builder.grow(&mut rows, 0);
    DecisionTree { nodes: builder.nodes }
}

struct TreeBuilder<'a> {
    data: &'a Dataset,
    params: &'a RandomForestParams,
    k: usize,
    nodes: Vec<Node>,
    rng: Rng,
    order: Vec<(f64, u8)>,
}

struct Split {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, rows: &mut [usize], depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        let ones = rows.iter().filter(|&&i| self.data.labels()[i] == 1).count();
        let vote = u32::from(2 * ones >= rows.len());
        self.nodes.push(Node { feature: LEAF, threshold: 0.0, left: vote, right: 0 });

        let pure = ones == 0 || ones == rows.len();
        let depth_capped = self.params.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_capped || rows.len() < 2 * self.params.min_samples_leaf {
            return id;
        }
        let Some(split) = self.best_split(rows, ones) else {
            return id;
        };

        let mut cut = 0;
        for i in 0..rows.len() {
            if self.data.row(rows[i])[split.feature] <= split.threshold {
                rows.swap(i, cut);
                cut += 1;
            }
        }
        let (left_rows, right_rows) = rows.split_at_mut(cut);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id as usize] = Node { feature: split.feature as u32, threshold: split.threshold, left, right };
        id
    }

    // Candidate features are visited in random order. After the first `k`,
    // the search continues only until some valid split has been seen, so a
    // node is never left unsplit just because the sampled features were
    // constant.
    fn best_split(&mut self, rows: &[usize], ones: usize) -> Option<Split> {
        let d = self.data.dim();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(&mut self.rng);
        let parent = gini(ones, rows.len());
        let mut best: Option<Split> = None;
        for (visited, &f) in features.iter().enumerate() {
            if visited >= self.k && best.is_some() {
                break;
            }
            if let Some(s) = self.best_split_on(rows, f, ones) {
                if s.impurity < parent - 1e-12 && best.as_ref().is_none_or(|b| s.impurity < b.impurity) {
                    best = Some(s);
                }
            }
        }
        best
    }

    fn best_split_on(&mut self, rows: &[usize], feature: usize, ones: usize) -> Option<Split> {
        self.order.clear();
        self.order.extend(rows.iter().map(|&i| (self.data.row(i)[feature], self.data.labels()[i])));
        self.order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let n = self.order.len();
        let min_leaf = self.params.min_samples_leaf;
        let mut left_ones = 0usize;
        let mut best: Option<Split> = None;
        for i in 0..n - 1 {
            left_ones += usize::from(self.order[i].1);
            let (lo, hi) = (self.order[i].0, self.order[i + 1].0);
            let n_left = i + 1;
            if lo >= hi || n_left < min_leaf || n - n_left < min_leaf {
                continue;
            }
            let n_right = n - n_left;
            let impurity =
                (n_left as f64 * gini(left_ones, n_left) + n_right as f64 * gini(ones - left_ones, n_right)) / n as f64;
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(Split { feature, threshold, impurity });
            }
        }
        best
    }
}

fn gini(ones: usize, n: usize) -> f64 {
    let p = ones as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

/// Classifiers with a closed-form decision boundary; scores are hard 0/1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Oracle {
    /// Class 1 where `<normal, x> + offset >= 0`.
    Halfspace {
        /// Boundary normal.
        normal: Vec<f64>,
        /// Offset added to the projection.
        offset: f64,
    },
    /// Class 1 inside the closed ball.
    Ball {
        /// Ball centre.
        center: Vec<f64>,
        /// Ball radius.
        radius: f64,
    },
    /// Class 1 on cells whose integer coordinates sum to an even number.
    Checkerboard {
        /// Cell side length.
        cell: f64,
        /// Input dimension.
        dim: usize,
    },
}

impl Oracle {
    /// Half-space oracle; `normal` must be non-zero.
    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.is_empty() || normal.iter().all(|&w| w == 0.0) || !offset.is_finite() {
            return Err(Error::InvalidArgument("half-space normal must be non-zero".into()));
        }
        Ok(Self::Halfspace { normal, offset })
    }

    /// Ball oracle; `radius` must be positive.
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid ball radius {radius}")));
        }
        Ok(Self::Ball { center, radius })
    }

    /// Checkerboard oracle; `cell` must be positive.
    pub fn checkerboard(cell: f64, dim: usize) -> Result<Self> {
        if dim == 0 || !(cell > 0.0 && cell.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid checkerboard cell {cell}")));
        }
        Ok(Self::Checkerboard { cell, dim })
    }

    /// Closed-form region test, independent of [`Scorer::score`].
    pub fn in_positive_region(&self, x: &[f64]) -> bool {
        match self {
            Self::Halfspace { normal, offset } => normal.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + offset >= 0.0,
            Self::Ball { center, radius } => crate::data::distance(center, x) <= *radius,
            Self::Checkerboard { cell, .. } => {
                let parity: i64 = x.iter().map(|v| libm::floor(v / cell) as i64).sum();
                parity.rem_euclid(2) == 0
            }
        }
    }
}

impl Scorer for Oracle {
    fn score(&self, x: &[f64]) -> f64 {
        if self.in_positive_region(x) {
            1.0
        } else {
            0.0
        }
    }
}

impl BlackBox for Oracle {
    fn dim(&self) -> usize {
        match self {
            Self::Halfspace { normal, .. } => normal.len(),
            Self::Ball { center, .. } => center.len(),
            Self::Checkerboard { dim, .. } => *dim,
        }
    }
}
