//! Model persistence and source-code emission.
//!
//! # Persistence
//!
//! Models are saved as a versioned JSON document: a format marker, a schema
//! version, the training grid, and the model payload. Loading validates all
//! of it (marker, version, grid, tree shape, leaf kinds, grid closure of
//! class leaves) so that a loaded model predicts under the same invariants
//! as a freshly fitted one. Documents contain nothing volatile: saving the
//! same model twice produces byte-identical files.
//!
//! The random-guess baseline persists only its seed. A loaded instance
//! therefore replays its prediction sequence from the start, which is the
//! reproducible interpretation of "the same model".
//!
//! # Source emission
//!
//! [`emit_tree_source`] renders a fitted chunk-size tree as one
//! self-contained C function of nested conditionals over `featureVector`,
//! suitable for pasting into a scheduler that cannot carry a model runtime.
//! Only classification trees are emittable; regression trees are refused
//! because their argmax scan lives in the runtime, not in the tree.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{ChunkGrid, ChunkSize, CoreError};
use crate::models::{FittedModel, ModelError, ModelKind};
use crate::trees::{LeafValue, TreeNode};

/// Format marker every model document carries.
pub const MODEL_FORMAT: &str = "chunkwise-model";
/// Document schema version this build writes and reads.
pub const MODEL_VERSION: u32 = 1;

/// Errors from model persistence or source emission.
#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("not a model document: format marker is {found:?}, expected {MODEL_FORMAT:?}")]
    UnsupportedFormat { found: String },
    #[error("unsupported model version {found}, this build reads version {MODEL_VERSION}")]
    UnsupportedVersion { found: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot emit source: {0}")]
    Codegen(String),
}

/// On-disk form of a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub grid: Vec<ChunkSize>,
    pub model: PersistedModel,
}

/// On-disk form of the model payload. Tags match the model names the CLI
/// uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PersistedModel {
    PretoCustom { tree: TreeNode },
    #[serde(rename = "preto-dtc")]
    PretoClassifier { tree: TreeNode },
    #[serde(rename = "posto-dtr")]
    Posto { tree: TreeNode },
    RandomGuess { seed: u64 },
    EqualShare,
    ArgmaxOracle,
}

/// Renders a model as its persistence document.
pub fn model_to_document(model: &FittedModel) -> ModelDocument {
    let payload = match model.kind() {
        ModelKind::PretoCustom(tree) => PersistedModel::PretoCustom { tree: tree.clone() },
        ModelKind::PretoClassifier(tree) => {
            PersistedModel::PretoClassifier { tree: tree.clone() }
        }
        ModelKind::Posto(tree) => PersistedModel::Posto { tree: tree.clone() },
        ModelKind::RandomGuess { seed, .. } => PersistedModel::RandomGuess { seed: *seed },
        ModelKind::EqualShare => PersistedModel::EqualShare,
        ModelKind::ArgmaxOracle => PersistedModel::ArgmaxOracle,
    };
    ModelDocument {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        grid: model.grid().values().to_vec(),
        model: payload,
    }
}

/// Validates a document and rebuilds the model it describes.
pub fn document_to_model(document: &ModelDocument) -> Result<FittedModel, ExportError> {
    if document.format != MODEL_FORMAT {
        return Err(ExportError::UnsupportedFormat { found: document.format.clone() });
    }
    if document.version != MODEL_VERSION {
        return Err(ExportError::UnsupportedVersion { found: document.version });
    }
    let grid = ChunkGrid::new(document.grid.clone())?;
    let kind = match &document.model {
        PersistedModel::PretoCustom { tree } => ModelKind::PretoCustom(tree.clone()),
        PersistedModel::PretoClassifier { tree } => {
            ModelKind::PretoClassifier(tree.clone())
        }
        PersistedModel::Posto { tree } => ModelKind::Posto(tree.clone()),
        PersistedModel::RandomGuess { seed } => ModelKind::RandomGuess {
            seed: *seed,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(*seed)),
        },
        PersistedModel::EqualShare => ModelKind::EqualShare,
        PersistedModel::ArgmaxOracle => ModelKind::ArgmaxOracle,
    };
    Ok(FittedModel::validated(grid, kind)?)
}

/// JSON rendering of a model, pretty-printed with a trailing newline.
/// Deterministic: the same model always renders to the same bytes.
pub fn model_to_json(model: &FittedModel) -> Result<String, ExportError> {
    let mut text = serde_json::to_string_pretty(&model_to_document(model))?;
    text.push('\n');
    Ok(text)
}

/// Parses and validates a model from its JSON rendering.
pub fn model_from_json(text: &str) -> Result<FittedModel, ExportError> {
    document_to_model(&serde_json::from_str(text)?)
}

/// Saves a model document to a file.
pub fn save_model(model: &FittedModel, path: &Path) -> Result<(), ExportError> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}

/// Loads and validates a model document from a file.
pub fn load_model(path: &Path) -> Result<FittedModel, ExportError> {
    model_from_json(&std::fs::read_to_string(path)?)
}

/// Emits a fitted chunk-size tree as one C function over `featureVector`.
///
/// The function is named by the caller and returns `int`. Thresholds print
/// in shortest round-trip form with a forced decimal point, so the constants
/// reparse to the exact fitted doubles. Trees holding performance leaves are
/// refused: only classification trees translate to a standalone function.
pub fn emit_tree_source(tree: &TreeNode, function_name: &str) -> Result<String, ExportError> {
    if !is_c_identifier(function_name) {
        return Err(ExportError::Codegen(format!(
            "{function_name:?} is not a valid function name"
        )));
    }
    if has_value_leaf(tree) {
        return Err(ExportError::Codegen(
            "tree holds performance leaves; only chunk-size trees can be emitted".into(),
        ));
    }
    let mut out = format!("int {function_name}(const double* featureVector) {{\n");
    emit_node(&mut out, tree, 1);
    out.push_str("}\n");
    Ok(out)
}

fn is_c_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn has_value_leaf(node: &TreeNode) -> bool {
    match node {
        TreeNode::Leaf { value: LeafValue::Class(_), .. } => false,
        TreeNode::Leaf { value: LeafValue::Value(_), .. } => true,
        TreeNode::Split { left, right, .. } => has_value_leaf(left) || has_value_leaf(right),
    }
}

fn emit_node(out: &mut String, node: &TreeNode, depth: usize) {
    let indent = "    ".repeat(depth);
    match node {
        TreeNode::Leaf { value: LeafValue::Class(cs), .. } => {
            let _ = writeln!(out, "{indent}return {cs};");
        }
        TreeNode::Leaf { value: LeafValue::Value(_), .. } => {
            unreachable!("value leaves are rejected before emission")
        }
        TreeNode::Split { feature_index, threshold, left, right } => {
            let _ = writeln!(
                out,
                "{indent}if (featureVector[{feature_index}] < {threshold:?}) {{"
            );
            emit_node(out, left, depth + 1);
            let _ = writeln!(out, "{indent}}} else {{");
            emit_node(out, right, depth + 1);
            let _ = writeln!(out, "{indent}}}");
        }
    }
}
