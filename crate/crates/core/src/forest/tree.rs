//! CART-style classification trees over dense feature rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Splits must beat this decrease to count as positive, and two gains this
/// close count as equal; smaller differences are floating-point noise from
/// re-associating equal partitions.
pub const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Entropy,
}

impl std::str::FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gini" => Ok(Criterion::Gini),
            "entropy" => Ok(Criterion::Entropy),
            other => Err(format!(
                "unknown criterion `{other}` (expected gini or entropy)"
            )),
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Criterion::Gini => "gini",
            Criterion::Entropy => "entropy",
        })
    }
}

/// Impurity of a (possibly weighted) class histogram.
pub fn impurity(class_counts: &[f64], criterion: Criterion) -> Result<f64> {
    let total: f64 = class_counts.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::contract("impurity of an empty node"));
    }
    Ok(impurity_with_total(class_counts, total, criterion))
}

#[inline]
fn impurity_with_total(counts: &[f64], total: f64, criterion: Criterion) -> f64 {
    match criterion {
        Criterion::Gini => {
            let sum_sq: f64 = counts.iter().map(|&c| (c / total) * (c / total)).sum();
            (1.0 - sum_sq).max(0.0)
        }
        Criterion::Entropy => {
            let h: f64 = counts
                .iter()
                .filter(|&&c| c > 0.0)
                .map(|&c| {
                    let p = c / total;
                    -p * p.log2()
                })
                .sum();
            h.max(0.0)
        }
    }
}

/// Row-major training matrix with class indices and per-class weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingData {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<usize>,
    classes: Vec<String>,
    class_weights: Vec<f64>,
}

impl TrainingData {
    /// Builds the matrix from rows and string labels. Classes are sorted
    /// lexicographically and every weight starts at 1.
    pub fn new<R, L>(rows: &[R], labels: &[L]) -> Result<Self>
    where
        R: AsRef<[f64]>,
        L: AsRef<str>,
    {
        if rows.len() != labels.len() {
            return Err(Error::contract("rows and labels differ in length"));
        }
        let n_features = rows.first().map_or(0, |r| r.as_ref().len());
        let mut classes: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        classes.sort();
        classes.dedup();
        let mut features = Vec::with_capacity(rows.len() * n_features);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n_features {
                return Err(Error::contract("rows differ in length"));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::contract("feature values must be finite"));
            }
            features.extend_from_slice(row);
        }
        let labels = labels
            .iter()
            .map(|l| {
                classes
                    .binary_search_by(|c| c.as_str().cmp(l.as_ref()))
                    .unwrap()
            })
            .collect();
        let class_weights = vec![1.0; classes.len()];
        Ok(TrainingData {
            features,
            n_features,
            labels,
            classes,
            class_weights,
        })
    }

    /// Reweights classes by `n / (k * n_c)` so each class carries equal mass.
    pub fn balance_classes(&mut self) {
        let n = self.labels.len() as f64;
        let k = self.classes.len() as f64;
        let counts = self.class_counts(0..self.labels.len());
        self.class_weights = counts.iter().map(|&c| n / (k * c as f64)).collect();
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_weights(&self) -> &[f64] {
        &self.class_weights
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    pub fn value(&self, i: usize, feature: usize) -> f64 {
        self.features[i * self.n_features + feature]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Applies `f` to one feature column in place.
    pub fn map_column(&mut self, feature: usize, f: impl Fn(f64) -> f64) {
        for i in 0..self.len() {
            let v = &mut self.features[i * self.n_features + feature];
            *v = f(*v);
        }
    }

    fn class_counts(&self, indices: impl IntoIterator<Item = usize>) -> Vec<u64> {
        let mut counts = vec![0u64; self.classes.len()];
        for i in indices {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    fn weighted(&self, counts: &[u64]) -> Vec<f64> {
        counts
            .iter()
            .zip(&self.class_weights)
            .map(|(&c, &w)| c as f64 * w)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Point strictly between two distinct adjacent values; `x <= t` goes left.
#[inline]
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let t = lo + (hi - lo) / 2.0;
    if t >= hi {
        lo
    } else {
        t
    }
}

/// Best axis-aligned split of the samples at `indices` (a multiset).
///
/// Candidate thresholds are midpoints between consecutive distinct values.
/// The largest impurity decrease wins; ties (within [`MIN_GAIN`]) go to the
/// lower feature index and then the lower threshold. `None` when nothing decreases impurity.
pub fn best_split(
    data: &TrainingData,
    indices: &[usize],
    feature_subset: &[usize],
    criterion: Criterion,
) -> Option<Split> {
    if indices.len() < 2 || feature_subset.is_empty() {
        return None;
    }
    let n_classes = data.classes.len();
    let parent = data.weighted(&data.class_counts(indices.iter().copied()));
    let total: f64 = parent.iter().sum();
    let parent_impurity = impurity_with_total(&parent, total, criterion);

    let mut features = feature_subset.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut best: Option<Split> = None;
    let mut column: Vec<(f64, usize)> = Vec::with_capacity(indices.len());
    let mut left = vec![0.0; n_classes];
    let mut right = vec![0.0; n_classes];
    for &f in &features {
        column.clear();
        column.extend(indices.iter().map(|&i| (data.value(i, f), data.labels[i])));
        column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        left.iter_mut().for_each(|c| *c = 0.0);
        right.copy_from_slice(&parent);
        let mut left_total = 0.0;
        for k in 0..column.len() - 1 {
            let (value, class) = column[k];
            let w = data.class_weights[class];
            left[class] += w;
            right[class] -= w;
            left_total += w;
            let next = column[k + 1].0;
            if next <= value {
                continue;
            }
            let right_total = total - left_total;
            let gain = parent_impurity
                - (left_total / total) * impurity_with_total(&left, left_total, criterion)
                - (right_total / total) * impurity_with_total(&right, right_total, criterion);
            if gain > MIN_GAIN && best.is_none_or(|b| gain > b.gain + MIN_GAIN) {
                best = Some(Split {
                    feature: f,
                    threshold: midpoint(value, next),
                    gain,
                });
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        impurity: f64,
        gain: f64,
        n_samples: usize,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        class: usize,
        counts: Vec<u64>,
    },
}

impl TreeNode {
    /// Class index of the leaf `row` lands in.
    pub fn route(&self, row: &[f64]) -> usize {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { class, .. } => return *class,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    /// Number of training samples (with bootstrap repeats) that reached the node.
    pub fn n_samples(&self) -> usize {
        match self {
            TreeNode::Leaf { counts, .. } => counts.iter().sum::<u64>() as usize,
            TreeNode::Split { n_samples, .. } => *n_samples,
        }
    }

    /// Pre-order visit of every split as `(feature, n_samples, gain)`.
    pub fn for_each_split(&self, f: &mut impl FnMut(usize, usize, f64)) {
        if let TreeNode::Split {
            feature,
            n_samples,
            gain,
            left,
            right,
            ..
        } = self
        {
            f(*feature, *n_samples, *gain);
            left.for_each_split(f);
            right.for_each_split(f);
        }
    }
}

/// Growth limits for a single tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub max_features: usize,
    pub min_split: usize,
    pub criterion: Criterion,
}

/// Grows a tree on the multiset `indices`.
///
/// A node becomes a leaf at `max_depth`, when pure, when it holds fewer than
/// `min_split` samples, or when no split on its random feature subset
/// decreases impurity. Feature subsets are drawn from `rng` in pre-order
/// (node, then left subtree, then right subtree).
pub fn grow_tree(
    data: &TrainingData,
    indices: Vec<usize>,
    params: &TreeParams,
    rng: &mut SplitMix64,
) -> TreeNode {
    grow(data, indices, params, rng, 0)
}

fn leaf(data: &TrainingData, counts: Vec<u64>) -> TreeNode {
    let weighted = data.weighted(&counts);
    let mut class = 0;
    for (k, &w) in weighted.iter().enumerate() {
        if w > weighted[class] {
            class = k;
        }
    }
    TreeNode::Leaf { class, counts }
}

fn grow(
    data: &TrainingData,
    indices: Vec<usize>,
    params: &TreeParams,
    rng: &mut SplitMix64,
    depth: usize,
) -> TreeNode {
    let counts = data.class_counts(indices.iter().copied());
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if depth >= params.max_depth || pure || indices.len() < params.min_split {
        return leaf(data, counts);
    }
    let subset = rng.sample_indices(data.n_features, params.max_features);
    let Some(split) = best_split(data, &indices, &subset, params.criterion) else {
        return leaf(data, counts);
    };
    let weighted = data.weighted(&counts);
    let node_impurity = impurity_with_total(&weighted, weighted.iter().sum(), params.criterion);
    let n_samples = indices.len();
    let (left, right): (Vec<usize>, Vec<usize>) = indices
        .into_iter()
        .partition(|&i| data.value(i, split.feature) <= split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        impurity: node_impurity,
        gain: split.gain,
        n_samples,
        left: Box::new(grow(data, left, params, rng, depth + 1)),
        right: Box::new(grow(data, right, params, rng, depth + 1)),
    }
}
