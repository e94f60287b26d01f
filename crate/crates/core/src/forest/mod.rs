//! Random forest classifier: bootstrap samples, depth-limited trees with a
//! random feature subset per split, plurality voting, and mean decrease in
//! impurity importances.

mod model;
mod tree;

pub use model::{from_json, load_model, save_model, to_json, FORMAT_NAME, FORMAT_VERSION};
pub use tree::{
    best_split, grow_tree, impurity, Criterion, Split, TrainingData, TreeNode, TreeParams, MIN_GAIN,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeight {
    #[default]
    None,
    Balanced,
}

impl std::str::FromStr for ClassWeight {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(ClassWeight::None),
            "balanced" => Ok(ClassWeight::Balanced),
            other => Err(format!(
                "unknown class weighting `{other}` (expected none or balanced)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub criterion: Criterion,
    pub max_features: usize,
    pub seed: u64,
    pub min_split: usize,
    #[serde(default)]
    pub class_weight: ClassWeight,
}

impl Default for ForestParams {
    /// Gini, depth 10, half of the 18 pair features per split.
    fn default() -> Self {
        ForestParams {
            n_estimators: 100,
            max_depth: 10,
            criterion: Criterion::Gini,
            max_features: 9,
            seed: 0,
            min_split: 2,
            class_weight: ClassWeight::None,
        }
    }
}

impl ForestParams {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::contract(msg));
        if self.n_estimators == 0 {
            return fail("n_estimators must be at least 1".into());
        }
        if self.max_depth == 0 {
            return fail("max_depth must be at least 1".into());
        }
        if self.max_features == 0 || self.max_features > n_features {
            return fail(format!("max_features must lie in 1..={n_features}"));
        }
        if self.min_split < 2 {
            return fail("min_split must be at least 2".into());
        }
        Ok(())
    }

    fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            max_features: self.max_features,
            min_split: self.min_split,
            criterion: self.criterion,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<TreeNode>,
    pub params: ForestParams,
    pub feature_names: Vec<String>,
    pub classes: Vec<String>,
}

/// A forest's answer for one row.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: String,
    /// Fraction of trees voting for each class, aligned with `Forest::classes`.
    pub votes: Vec<f64>,
}

fn train_tree(data: &TrainingData, params: &ForestParams, index: usize) -> TreeNode {
    let mut rng = SplitMix64::for_stream(params.seed, index as u64);
    let n = data.len() as u64;
    let bootstrap: Vec<usize> = (0..n).map(|_| rng.below(n) as usize).collect();
    grow_tree(data, bootstrap, &params.tree_params(), &mut rng)
}

fn check_training(
    data: &TrainingData,
    params: &ForestParams,
    feature_names: &[String],
) -> Result<()> {
    params.validate(data.n_features())?;
    if feature_names.len() != data.n_features() {
        return Err(Error::contract(format!(
            "{} feature names for {} columns",
            feature_names.len(),
            data.n_features()
        )));
    }
    if data.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    if data.classes().len() < 2 {
        return Err(Error::Training(format!(
            "need at least two classes, found only {:?}",
            data.classes()
        )));
    }
    Ok(())
}

fn prepared<'a>(
    data: &'a TrainingData,
    params: &ForestParams,
) -> std::borrow::Cow<'a, TrainingData> {
    match params.class_weight {
        ClassWeight::None => std::borrow::Cow::Borrowed(data),
        ClassWeight::Balanced => {
            let mut d = data.clone();
            d.balance_classes();
            std::borrow::Cow::Owned(d)
        }
    }
}

fn assemble(
    trees: Vec<TreeNode>,
    data: &TrainingData,
    params: &ForestParams,
    names: &[String],
) -> Forest {
    Forest {
        trees,
        params: *params,
        feature_names: names.to_vec(),
        classes: data.classes().to_vec(),
    }
}

/// Trains every tree on the calling thread.
pub fn train_forest_seq(
    data: &TrainingData,
    params: &ForestParams,
    feature_names: &[String],
) -> Result<Forest> {
    check_training(data, params, feature_names)?;
    let data = prepared(data, params);
    let trees = (0..params.n_estimators)
        .map(|t| train_tree(&data, params, t))
        .collect();
    Ok(assemble(trees, &data, params, feature_names))
}

/// Trains trees on the rayon pool. Each tree owns its random stream and the
/// result is collected in tree order, so it equals the sequential forest.
#[cfg(feature = "parallel")]
pub fn train_forest_par(
    data: &TrainingData,
    params: &ForestParams,
    feature_names: &[String],
) -> Result<Forest> {
    use rayon::prelude::*;

    check_training(data, params, feature_names)?;
    let data = prepared(data, params);
    let trees = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| train_tree(&data, params, t))
        .collect();
    Ok(assemble(trees, &data, params, feature_names))
}

pub fn train_forest(
    data: &TrainingData,
    params: &ForestParams,
    feature_names: &[String],
) -> Result<Forest> {
    #[cfg(feature = "parallel")]
    {
        train_forest_par(data, params, feature_names)
    }
    #[cfg(not(feature = "parallel"))]
    {
        train_forest_seq(data, params, feature_names)
    }
}

impl Forest {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Plurality vote over the trees; ties go to the lexicographically
    /// smallest class.
    pub fn predict(&self, row: &[f64]) -> Result<Prediction> {
        if row.len() != self.n_features() {
            return Err(Error::contract(format!(
                "expected {} features, got {}",
                self.n_features(),
                row.len()
            )));
        }
        let mut counts = vec![0usize; self.classes.len()];
        for tree in &self.trees {
            counts[tree.route(row)] += 1;
        }
        let mut best = 0;
        for (k, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = k;
            }
        }
        let n = self.trees.len() as f64;
        Ok(Prediction {
            label: self.classes[best].clone(),
            votes: counts.iter().map(|&c| c as f64 / n).collect(),
        })
    }

    pub fn predict_all_seq<R: AsRef<[f64]>>(&self, rows: &[R]) -> Result<Vec<Prediction>> {
        rows.iter().map(|r| self.predict(r.as_ref())).collect()
    }

    #[cfg(feature = "parallel")]
    pub fn predict_all_par<R: AsRef<[f64]> + Sync>(&self, rows: &[R]) -> Result<Vec<Prediction>> {
        use rayon::prelude::*;
        rows.par_iter().map(|r| self.predict(r.as_ref())).collect()
    }

    #[cfg(feature = "parallel")]
    pub fn predict_all<R: AsRef<[f64]> + Sync>(&self, rows: &[R]) -> Result<Vec<Prediction>> {
        self.predict_all_par(rows)
    }

    #[cfg(not(feature = "parallel"))]
    pub fn predict_all<R: AsRef<[f64]>>(&self, rows: &[R]) -> Result<Vec<Prediction>> {
        self.predict_all_seq(rows)
    }

    /// Mean decrease in impurity per feature.
    ///
    /// Each split adds `(n_node / n_root) * gain` to its feature; every
    /// tree's vector is normalised to sum 1, the vectors are averaged, and
    /// the average is normalised again. Trees without splits add nothing.
    pub fn feature_importances(&self) -> Vec<(String, f64)> {
        let d = self.n_features();
        let mut total = vec![0.0; d];
        for tree in &self.trees {
            let root = tree.n_samples() as f64;
            let mut per_tree = vec![0.0; d];
            tree.for_each_split(&mut |feature, n, gain| {
                per_tree[feature] += (n as f64 / root) * gain;
            });
            let sum: f64 = per_tree.iter().sum();
            if sum > 0.0 {
                for (t, v) in total.iter_mut().zip(&per_tree) {
                    *t += v / sum;
                }
            }
        }
        let n = self.trees.len() as f64;
        total.iter_mut().for_each(|v| *v /= n);
        let sum: f64 = total.iter().sum();
        if sum > 0.0 {
            total.iter_mut().for_each(|v| *v /= sum);
        }
        self.feature_names.iter().cloned().zip(total).collect()
    }

    /// Deepest leaf over all trees.
    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(TreeNode::depth).max().unwrap_or(0)
    }
}
