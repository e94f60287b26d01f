//! JSON model files.
//!
//! Reals (thresholds, impurities, gains) are written with 17 significant
//! digits and parsed back with correct rounding, so a saved forest reloads
//! bit-identically.

use std::io::Write;
use std::path::Path;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use super::{Forest, ForestParams, TreeNode};
use crate::error::{Error, Result};
use crate::io as fsio;

pub const FORMAT_NAME: &str = "distrel-forest";
pub const FORMAT_VERSION: u32 = 1;

mod exact {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(format!("{v:.16e}")).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        let raw: Box<RawValue> = Deserialize::deserialize(d)?;
        raw.get()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| D::Error::custom(format!("not a finite number: {}", raw.get())))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum NodeRecord {
    Split {
        feature: usize,
        #[serde(with = "exact")]
        threshold: f64,
        #[serde(with = "exact")]
        impurity: f64,
        #[serde(with = "exact")]
        gain: f64,
        n_samples: usize,
        left: Box<NodeRecord>,
        right: Box<NodeRecord>,
    },
    Leaf {
        class: String,
        counts: Vec<u64>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRecord {
    format: String,
    version: u32,
    params: ForestParams,
    classes: Vec<String>,
    feature_names: Vec<String>,
    trees: Vec<NodeRecord>,
}

fn to_record(node: &TreeNode, classes: &[String]) -> NodeRecord {
    match node {
        TreeNode::Leaf { class, counts } => NodeRecord::Leaf {
            class: classes[*class].clone(),
            counts: counts.clone(),
        },
        TreeNode::Split {
            feature,
            threshold,
            impurity,
            gain,
            n_samples,
            left,
            right,
        } => NodeRecord::Split {
            feature: *feature,
            threshold: *threshold,
            impurity: *impurity,
            gain: *gain,
            n_samples: *n_samples,
            left: Box::new(to_record(left, classes)),
            right: Box::new(to_record(right, classes)),
        },
    }
}

fn from_record(record: NodeRecord, classes: &[String], n_features: usize) -> Result<TreeNode> {
    Ok(match record {
        NodeRecord::Leaf { class, counts } => {
            let class = classes
                .iter()
                .position(|c| *c == class)
                .ok_or_else(|| Error::Model(format!("leaf names unknown class `{class}`")))?;
            if counts.len() != classes.len() {
                return Err(Error::Model(
                    "leaf counts do not match the class list".into(),
                ));
            }
            TreeNode::Leaf { class, counts }
        }
        NodeRecord::Split {
            feature,
            threshold,
            impurity,
            gain,
            n_samples,
            left,
            right,
        } => {
            if feature >= n_features {
                return Err(Error::Model(format!("split on unknown feature {feature}")));
            }
            TreeNode::Split {
                feature,
                threshold,
                impurity,
                gain,
                n_samples,
                left: Box::new(from_record(*left, classes, n_features)?),
                right: Box::new(from_record(*right, classes, n_features)?),
            }
        }
    })
}

/// Serialises a forest to pretty-printed JSON text (newline terminated).
pub fn to_json(forest: &Forest) -> String {
    let record = ModelRecord {
        format: FORMAT_NAME.into(),
        version: FORMAT_VERSION,
        params: forest.params,
        classes: forest.classes.clone(),
        feature_names: forest.feature_names.clone(),
        trees: forest
            .trees
            .iter()
            .map(|t| to_record(t, &forest.classes))
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&record).expect("model records always serialise");
    text.push('\n');
    text
}

pub fn from_json(text: &str) -> Result<Forest> {
    let record: ModelRecord =
        serde_json::from_str(text).map_err(|e| Error::Model(format!("invalid model file: {e}")))?;
    if record.format != FORMAT_NAME || record.version != FORMAT_VERSION {
        return Err(Error::Model(format!(
            "unsupported model format {} v{} (expected {FORMAT_NAME} v{FORMAT_VERSION})",
            record.format, record.version
        )));
    }
    let n_features = record.feature_names.len();
    record
        .params
        .validate(n_features)
        .map_err(|e| Error::Model(e.to_string()))?;
    if record.trees.len() != record.params.n_estimators {
        return Err(Error::Model(format!(
            "{} trees stored for n_estimators = {}",
            record.trees.len(),
            record.params.n_estimators
        )));
    }
    if record.classes.is_empty() || record.classes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Model("classes must be non-empty and sorted".into()));
    }
    let trees = record
        .trees
        .into_iter()
        .map(|t| from_record(t, &record.classes, n_features))
        .collect::<Result<_>>()?;
    Ok(Forest {
        trees,
        params: record.params,
        feature_names: record.feature_names,
        classes: record.classes,
    })
}

pub fn save_model(forest: &Forest, path: &Path) -> Result<()> {
    let text = to_json(forest);
    fsio::write_atomic(path, |w| w.write_all(text.as_bytes()))
}

pub fn load_model(path: &Path) -> Result<Forest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text).map_err(|e| match e {
        Error::Model(msg) => Error::Model(format!("{}: {msg}", path.display())),
        other => other,
    })
}
