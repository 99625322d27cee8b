//! Decision trees over real-valued feature vectors.
//!
//! Three learners share one tree representation:
//!
//! * [`fit_custom_tree`] — grows the tree directly on the MSOP objective: a
//!   leaf's chunk-size is chosen by line-search over the grid to maximize the
//!   mean performance ratio of its region, splits maximize the summed
//!   weighted region scores, and growth stops early once a region already
//!   performs well enough (`msop_stop_threshold`). Don't-care regions, where
//!   several chunk-sizes perform nearly alike, therefore stay unsplit.
//! * [`fit_classifier_tree`] — classical classification tree: splits maximize
//!   information gain (base-2 entropy) and growth continues while a region is
//!   impure, so every label disagreement is pursued regardless of how little
//!   performance it costs.
//! * [`fit_regressor_tree`] — classical regression tree on augmented rows:
//!   splits minimize the summed squared error of the children; leaves hold
//!   the region mean.
//!
//! Routing is the same everywhere: an input goes left iff
//! `x[feature_index] < threshold`; equality goes right. Split thresholds are
//! midpoints between consecutive distinct sorted feature values of the
//! region, candidates are examined feature-major with thresholds ascending,
//! and score ties keep the earliest candidate, so fitting is fully
//! deterministic: identical data and config yield structurally identical
//! trees.

mod fit;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::ChunkSize;

pub use fit::{fit_classifier_tree, fit_custom_tree, fit_regressor_tree};

/// Errors from tree fitting or prediction.
#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("invalid tree config: {0}")]
    InvalidConfig(String),
    #[error("input has {got} features but the tree indexes feature {index}")]
    DimensionMismatch { index: usize, got: usize },
    #[error("leaf holds a {found} value where a {expected} value was required")]
    WrongLeafKind {
        expected: &'static str,
        found: &'static str,
    },
}

/// Hyperparameters shared by all tree learners.
///
/// `msop_stop_threshold` only affects [`fit_custom_tree`]; a region whose
/// line-search MSOP already reaches it becomes a leaf. At 0.0 any tree
/// collapses to a single leaf's worth of growth stopping immediately; at 1.0
/// growth continues until regions are perfect or out of candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    max_depth: usize,
    min_leaf_samples: usize,
    msop_stop_threshold: f64,
}

impl TreeConfig {
    pub fn new(
        max_depth: usize,
        min_leaf_samples: usize,
        msop_stop_threshold: f64,
    ) -> Result<Self, TreeError> {
        if max_depth < 1 {
            return Err(TreeError::InvalidConfig("max_depth must be at least 1".into()));
        }
        if min_leaf_samples < 1 {
            return Err(TreeError::InvalidConfig(
                "min_leaf_samples must be at least 1".into(),
            ));
        }
        if !msop_stop_threshold.is_finite()
            || !(0.0..=1.0).contains(&msop_stop_threshold)
        {
            return Err(TreeError::InvalidConfig(format!(
                "msop_stop_threshold must lie in [0, 1] (got {msop_stop_threshold})"
            )));
        }
        Ok(Self { max_depth, min_leaf_samples, msop_stop_threshold })
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn min_leaf_samples(&self) -> usize {
        self.min_leaf_samples
    }

    pub fn msop_stop_threshold(&self) -> f64 {
        self.msop_stop_threshold
    }
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self { max_depth: 8, min_leaf_samples: 1, msop_stop_threshold: 0.95 }
    }
}

/// Payload of a leaf: a chunk-size for classification-style trees, a real
/// value for regression trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafValue {
    Class(ChunkSize),
    Value(f64),
}

/// A fitted decision tree.
///
/// `region_score` records how the training region of a leaf scored under the
/// learner's own objective: region MSOP for the custom tree, majority-label
/// fraction for the classifier, region MSE for the regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature_index: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: LeafValue,
        region_score: f64,
    },
}

impl TreeNode {
    /// Routes `x` to its leaf. The input must cover every feature index the
    /// tree splits on; a bare leaf accepts any input, even an empty one.
    pub fn predict(&self, x: &[f64]) -> Result<&LeafValue, TreeError> {
        if let Some(index) = self.max_feature_index() {
            if index >= x.len() {
                return Err(TreeError::DimensionMismatch { index, got: x.len() });
            }
        }
        let mut node = self;
        loop {
            match node {
                TreeNode::Split { feature_index, threshold, left, right } => {
                    node = if x[*feature_index] < *threshold { left } else { right };
                }
                TreeNode::Leaf { value, .. } => return Ok(value),
            }
        }
    }

    /// Predicts a chunk-size; errors if the tree has regression leaves.
    pub fn predict_class(&self, x: &[f64]) -> Result<ChunkSize, TreeError> {
        match self.predict(x)? {
            LeafValue::Class(cs) => Ok(*cs),
            LeafValue::Value(_) => Err(TreeError::WrongLeafKind {
                expected: "class",
                found: "value",
            }),
        }
    }

    /// Predicts a real value; errors if the tree has classification leaves.
    pub fn predict_value(&self, x: &[f64]) -> Result<f64, TreeError> {
        match self.predict(x)? {
            LeafValue::Value(v) => Ok(*v),
            LeafValue::Class(_) => Err(TreeError::WrongLeafKind {
                expected: "value",
                found: "class",
            }),
        }
    }

    /// Total number of nodes, splits and leaves alike.
    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
            TreeNode::Leaf { .. } => 1,
        }
    }

    /// Longest root-to-leaf path, counted in splits; a bare leaf has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
            TreeNode::Leaf { .. } => 0,
        }
    }

    /// Largest feature index any split reads, if the tree splits at all.
    pub fn max_feature_index(&self) -> Option<usize> {
        match self {
            TreeNode::Split { feature_index, left, right, .. } => Some(
                (*feature_index)
                    .max(left.max_feature_index().unwrap_or(0))
                    .max(right.max_feature_index().unwrap_or(0)),
            ),
            TreeNode::Leaf { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The worked 5-node reference tree:
    /// `if x[1] < 0.4 { 2 } else if x[0] < 1.0 { 2 } else { 1 }`.
    pub(crate) fn reference_tree() -> TreeNode {
        TreeNode::Split {
            feature_index: 1,
            threshold: 0.4,
            left: Box::new(TreeNode::Leaf {
                value: LeafValue::Class(2),
                region_score: 1.0,
            }),
            right: Box::new(TreeNode::Split {
                feature_index: 0,
                threshold: 1.0,
                left: Box::new(TreeNode::Leaf {
                    value: LeafValue::Class(2),
                    region_score: 1.0,
                }),
                right: Box::new(TreeNode::Leaf {
                    value: LeafValue::Class(1),
                    region_score: 1.0,
                }),
            }),
        }
    }

    #[test]
    fn predict_follows_nested_conditions() {
        let tree = reference_tree();
        assert_eq!(tree.predict_class(&[0.5, 0.3]).unwrap(), 2);
        assert_eq!(tree.predict_class(&[2.0, 0.9]).unwrap(), 1);
        assert_eq!(tree.predict_class(&[0.5, 0.9]).unwrap(), 2);
    }

    #[test]
    fn equality_with_the_threshold_routes_right() {
        let tree = reference_tree();
        // x[1] == 0.4 fails the strict < and lands in the else branch.
        assert_eq!(tree.predict_class(&[2.0, 0.4]).unwrap(), 1);
        assert_eq!(tree.predict_class(&[1.0, 0.4]).unwrap(), 1);
        assert_eq!(tree.predict_class(&[0.999, 0.4]).unwrap(), 2);
    }

    #[test]
    fn node_count_and_depth_match_structure() {
        let tree = reference_tree();
        assert_eq!(tree.node_count(), 5);
        assert_eq!(tree.depth(), 2);
        let leaf = TreeNode::Leaf { value: LeafValue::Class(3), region_score: 1.0 };
        assert_eq!(leaf.node_count(), 1);
        assert_eq!(leaf.depth(), 0);
    }

    #[test]
    fn predict_checks_dimensionality_against_every_split() {
        let tree = reference_tree();
        assert_eq!(
            tree.predict(&[0.5]),
            Err(TreeError::DimensionMismatch { index: 1, got: 1 })
        );
        // A bare leaf reads no feature at all.
        let leaf = TreeNode::Leaf { value: LeafValue::Class(3), region_score: 1.0 };
        assert_eq!(leaf.predict_class(&[]).unwrap(), 3);
    }

    #[test]
    fn leaf_kind_mismatches_are_rejected() {
        let leaf = TreeNode::Leaf { value: LeafValue::Value(1500.0), region_score: 0.0 };
        assert_eq!(leaf.predict_value(&[]).unwrap(), 1500.0);
        assert_eq!(
            leaf.predict_class(&[]),
            Err(TreeError::WrongLeafKind { expected: "class", found: "value" })
        );
        let leaf = TreeNode::Leaf { value: LeafValue::Class(2), region_score: 1.0 };
        assert_eq!(
            leaf.predict_value(&[]),
            Err(TreeError::WrongLeafKind { expected: "value", found: "class" })
        );
    }

    #[test]
    fn config_validates_its_ranges() {
        assert!(TreeConfig::new(0, 1, 0.5).is_err());
        assert!(TreeConfig::new(1, 0, 0.5).is_err());
        assert!(TreeConfig::new(1, 1, -0.1).is_err());
        assert!(TreeConfig::new(1, 1, 1.1).is_err());
        assert!(TreeConfig::new(1, 1, f64::NAN).is_err());
        assert!(TreeConfig::new(1, 1, 0.0).is_ok());
        assert!(TreeConfig::new(1, 1, 1.0).is_ok());
        let d = TreeConfig::default();
        assert_eq!(
            (d.max_depth(), d.min_leaf_samples(), d.msop_stop_threshold()),
            (8, 1, 0.95)
        );
    }

    #[test]
    fn serialized_form_is_stable_snake_case() {
        let tree = TreeNode::Leaf { value: LeafValue::Class(2), region_score: 1.0 };
        let json = serde_json::to_string(&tree).unwrap();
        assert_eq!(json, r#"{"leaf":{"value":{"class":2},"region_score":1.0}}"#);
        let back: TreeNode = serde_json::from_str(&json).unwrap();
        assert_eq!(back, tree);
    }
}
