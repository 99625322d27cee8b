//! Chunk-size predictors, baselines, hold-out evaluation, and k-fold
//! cross-validation.
//!
//! Two black-box constructions turn a tree learner into a chunk-size
//! predictor:
//!
//! * **preto** (predict, then optimize offline): the optimization over the
//!   grid happens at training time by reducing each example to its best
//!   chunk-size label; prediction is a single tree evaluation. Backed either
//!   by the MSOP-objective tree (`preto-custom`) or the classical classifier
//!   (`preto-dtc`).
//! * **posto** (predict, then optimize at runtime): a regression tree learns
//!   performance as a function of features plus chunk-size (`posto-dtr`), and
//!   prediction scans the grid for the argmax, costing one tree evaluation
//!   per grid member.
//!
//! Both are compared against two baselines, uniform random guessing over the
//! grid (seeded, reproducible) and the equal-share heuristic `n_ite / n_thr`
//! capped to the grid, plus one control: the argmax oracle, which reads the
//! measured optimum off each annotated example and therefore scores MSOP 1
//! by construction. The oracle anchors the top of every comparison report;
//! it is never selected as a winner and cannot predict from bare features.
//!
//! Every predictor is grid-closed: [`FittedModel::predict_chunk`] always
//! returns a member of the model's training grid. That invariant is enforced
//! when a model is built or loaded, which is why prediction itself is
//! infallible.

use std::sync::Mutex;
use std::time::{Instant, SystemTime};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::core::{
    accuracy, msop_from_predictions, BrutExample, ChunkGrid, ChunkSize, CoreError, FeatureVector,
    KahanSum,
};
use crate::dataio::{augment, derive_labels, kfold, BrutDataset, DataError};
use crate::trees::{
    fit_classifier_tree, fit_custom_tree, fit_regressor_tree, LeafValue, TreeConfig, TreeError,
    TreeNode,
};

/// Errors from model fitting, validation, or evaluation.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("invalid model: {0}")]
    Validation(String),
}

/// Which learner backs a preto model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PretoLearner {
    /// The tree grown directly on the MSOP objective.
    Custom,
    /// The classical information-gain classifier on derived labels.
    Classifier,
}

/// The prediction-time payload of a fitted model.
pub(crate) enum ModelKind {
    PretoCustom(TreeNode),
    PretoClassifier(TreeNode),
    Posto(TreeNode),
    RandomGuess {
        seed: u64,
        rng: Mutex<ChaCha8Rng>,
    },
    EqualShare,
    ArgmaxOracle,
}

/// A chunk-size predictor bound to the grid it was trained on.
///
/// Prediction is infallible: the tree shape, leaf kinds, and grid closure are
/// validated when the model is constructed or deserialized, never per call.
pub struct FittedModel {
    grid: ChunkGrid,
    kind: ModelKind,
    fitted_at: SystemTime,
}

impl FittedModel {
    pub(crate) fn validated(grid: ChunkGrid, kind: ModelKind) -> Result<Self, ModelError> {
        match &kind {
            ModelKind::PretoCustom(tree) | ModelKind::PretoClassifier(tree) => {
                validate_tree(tree, 4, Some(&grid))?
            }
            ModelKind::Posto(tree) => validate_tree(tree, 5, None)?,
            ModelKind::RandomGuess { .. } | ModelKind::EqualShare | ModelKind::ArgmaxOracle => {}
        }
        Ok(Self { grid, kind, fitted_at: SystemTime::now() })
    }

    pub(crate) fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn grid(&self) -> &ChunkGrid {
        &self.grid
    }

    /// Wall-clock time this model was fitted (or loaded). Kept in memory
    /// only; persistence never stores it, so saved artifacts stay
    /// byte-reproducible.
    pub fn fitted_at(&self) -> SystemTime {
        self.fitted_at
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::PretoCustom(_) => "preto-custom",
            ModelKind::PretoClassifier(_) => "preto-dtc",
            ModelKind::Posto(_) => "posto-dtr",
            ModelKind::RandomGuess { .. } => "random-guess",
            ModelKind::EqualShare => "equal-share",
            ModelKind::ArgmaxOracle => "argmax-oracle",
        }
    }

    /// True for the argmax oracle, which can only score annotated examples.
    pub fn is_control(&self) -> bool {
        matches!(self.kind, ModelKind::ArgmaxOracle)
    }

    /// How many trained-model evaluations one prediction costs: 1 for preto
    /// models, one per grid member for posto, 0 for baselines and the oracle
    /// (they evaluate no trained model at all).
    pub fn model_evals_per_prediction(&self) -> usize {
        match self.kind {
            ModelKind::PretoCustom(_) | ModelKind::PretoClassifier(_) => 1,
            ModelKind::Posto(_) => self.grid.len(),
            ModelKind::RandomGuess { .. } | ModelKind::EqualShare | ModelKind::ArgmaxOracle => 0,
        }
    }

    /// Node count of the backing tree; `None` for models without one.
    pub fn node_count(&self) -> Option<usize> {
        self.tree().map(TreeNode::node_count)
    }

    /// Predicts a chunk-size from the training grid.
    ///
    /// The random-guess baseline advances its internal generator, so
    /// prediction order matters for it; all other models are pure.
    ///
    /// # Panics
    ///
    /// Panics for the argmax oracle, which needs the measured performance
    /// map and therefore only answers through [`predict_for_example`].
    /// Callers holding an arbitrary model check [`is_control`] first.
    ///
    /// [`predict_for_example`]: FittedModel::predict_for_example
    /// [`is_control`]: FittedModel::is_control
    pub fn predict_chunk(&self, x: &FeatureVector) -> ChunkSize {
        match &self.kind {
            ModelKind::PretoCustom(tree) | ModelKind::PretoClassifier(tree) => tree
                .predict_class(&x.as_features())
                .expect("tree validated at construction"),
            ModelKind::Posto(tree) => {
                let mut best_cs = self.grid.min();
                let mut best = f64::NEG_INFINITY;
                for &cs in self.grid.values() {
                    let perf = tree
                        .predict_value(&x.augmented(cs))
                        .expect("tree validated at construction");
                    if perf > best {
                        best = perf;
                        best_cs = cs;
                    }
                }
                best_cs
            }
            ModelKind::RandomGuess { rng, .. } => {
                let mut rng = rng.lock().expect("rng lock is never poisoned");
                self.grid.values()[rng.gen_range(0..self.grid.len())]
            }
            ModelKind::EqualShare => {
                let raw = x.n_ite().div_ceil(x.n_thr() as u64);
                let capped = raw.min(self.grid.max() as u64) as ChunkSize;
                self.grid
                    .smallest_at_least(capped)
                    .expect("capped value never exceeds the grid maximum")
            }
            ModelKind::ArgmaxOracle => {
                panic!("the argmax oracle scores annotated examples, not bare feature vectors")
            }
        }
    }

    /// Predicts a chunk-size for an annotated example. Identical to
    /// [`predict_chunk`] on the example's features for every real model; the
    /// argmax oracle instead reads off the example's measured optimum.
    ///
    /// [`predict_chunk`]: FittedModel::predict_chunk
    pub fn predict_for_example(&self, example: &BrutExample) -> ChunkSize {
        match &self.kind {
            ModelKind::ArgmaxOracle => example.best_chunk(),
            _ => self.predict_chunk(example.features()),
        }
    }

    /// Performance predicted by a posto model at one chunk-size; `None` for
    /// every other model kind.
    pub fn predict_perf(&self, x: &FeatureVector, cs: ChunkSize) -> Option<f64> {
        match &self.kind {
            ModelKind::Posto(tree) => Some(
                tree.predict_value(&x.augmented(cs))
                    .expect("tree validated at construction"),
            ),
            _ => None,
        }
    }

    /// The fitted tree of a tree-backed model.
    pub fn tree(&self) -> Option<&TreeNode> {
        match &self.kind {
            ModelKind::PretoCustom(tree)
            | ModelKind::PretoClassifier(tree)
            | ModelKind::Posto(tree) => Some(tree),
            _ => None,
        }
    }
}

/// Checks a tree against the feature dimensionality and, for class trees,
/// grid closure of every leaf.
fn validate_tree(
    tree: &TreeNode,
    n_features: usize,
    class_grid: Option<&ChunkGrid>,
) -> Result<(), ModelError> {
    if let Some(max_index) = tree.max_feature_index() {
        if max_index >= n_features {
            return Err(ModelError::Validation(format!(
                "tree splits on feature {max_index}, but inputs have {n_features} features"
            )));
        }
    }
    fn walk(
        node: &TreeNode,
        class_grid: Option<&ChunkGrid>,
    ) -> Result<(), ModelError> {
        match node {
            TreeNode::Split { threshold, left, right, .. } => {
                if !threshold.is_finite() {
                    return Err(ModelError::Validation(format!(
                        "split threshold {threshold} is not finite"
                    )));
                }
                walk(left, class_grid)?;
                walk(right, class_grid)
            }
            TreeNode::Leaf { value, .. } => match (value, class_grid) {
                (LeafValue::Class(cs), Some(grid)) => {
                    if grid.contains(*cs) {
                        Ok(())
                    } else {
                        Err(ModelError::Validation(format!(
                            "leaf chunk-size {cs} is not on the grid"
                        )))
                    }
                }
                (LeafValue::Class(_), None) => Err(ModelError::Validation(
                    "regression model holds a class leaf".into(),
                )),
                (LeafValue::Value(v), None) => {
                    if v.is_finite() {
                        Ok(())
                    } else {
                        Err(ModelError::Validation(format!(
                            "leaf value {v} is not finite"
                        )))
                    }
                }
                (LeafValue::Value(_), Some(_)) => Err(ModelError::Validation(
                    "classification model holds a value leaf".into(),
                )),
            },
        }
    }
    walk(tree, class_grid)
}

/// Fits a preto model: optimal labels are derived offline, prediction is one
/// tree evaluation.
pub fn fit_preto(
    data: &BrutDataset,
    config: &TreeConfig,
    learner: PretoLearner,
) -> Result<FittedModel, ModelError> {
    let kind = match learner {
        PretoLearner::Custom => ModelKind::PretoCustom(fit_custom_tree(data, config)?),
        PretoLearner::Classifier => {
            ModelKind::PretoClassifier(fit_classifier_tree(&derive_labels(data), config)?)
        }
    };
    FittedModel::validated(data.grid().clone(), kind)
}

/// Fits a posto model: performance regression on augmented rows, argmax over
/// the grid at prediction time.
pub fn fit_posto(data: &BrutDataset, config: &TreeConfig) -> Result<FittedModel, ModelError> {
    let tree = fit_regressor_tree(&augment(data), config)?;
    FittedModel::validated(data.grid().clone(), ModelKind::Posto(tree))
}

/// Uniform random guessing over the grid. Reproducible: a fresh model with
/// the same seed replays the same prediction sequence from the start.
pub fn random_guess_model(grid: ChunkGrid, seed: u64) -> FittedModel {
    FittedModel::validated(
        grid,
        ModelKind::RandomGuess {
            seed,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)),
        },
    )
    .expect("baselines have nothing to validate")
}

/// The equal-share heuristic: `ceil(n_ite / n_thr)`, capped to the grid
/// maximum and snapped up to the nearest grid member.
pub fn equal_share_model(grid: ChunkGrid) -> FittedModel {
    FittedModel::validated(grid, ModelKind::EqualShare)
        .expect("baselines have nothing to validate")
}

/// The argmax-oracle control: answers every annotated example with its
/// measured optimum, scoring MSOP 1 by construction. It cannot predict from
/// bare features and is never selected as a cross-validation winner.
pub fn argmax_oracle_model(grid: ChunkGrid) -> FittedModel {
    FittedModel::validated(grid, ModelKind::ArgmaxOracle)
        .expect("the oracle has nothing to validate")
}

/// Hold-out metrics of one model on one test set.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub model: String,
    pub msop: f64,
    pub accuracy: f64,
    /// Regression error of the perf surface; posto models only.
    pub mse: Option<f64>,
}

/// Evaluates a model on annotated test data.
///
/// MSOP and accuracy are computed from one prediction per example (in
/// dataset order, which matters for the random-guess baseline); posto models
/// additionally report the MSE of their performance predictions over all
/// example/chunk-size combinations.
pub fn evaluate_model(
    model: &FittedModel,
    test: &BrutDataset,
) -> Result<Evaluation, ModelError> {
    let predictions: Vec<ChunkSize> = test
        .examples()
        .iter()
        .map(|e| model.predict_for_example(e))
        .collect();
    let msop = msop_from_predictions(&predictions, test.examples())?;
    let labels: Vec<ChunkSize> = derive_labels(test)
        .pairs()
        .iter()
        .map(|(_, label)| *label)
        .collect();
    let accuracy = accuracy(&predictions, &labels)?;
    let mse = match model.kind() {
        ModelKind::Posto(_) => {
            let mut sum = KahanSum::new();
            let rows = augment(test);
            for row in rows.rows() {
                let predicted = model
                    .predict_perf(row.features(), row.cs())
                    .expect("model is posto");
                let d = predicted - row.target_perf();
                sum.add(d * d);
            }
            Some(sum.value() / rows.len() as f64)
        }
        _ => None,
    };
    Ok(Evaluation { model: model.name().to_string(), msop, accuracy, mse })
}

/// Renders evaluations as CSV (`model,msop,accuracy,mse`; mse empty for
/// models without one). Floats use shortest round-trip formatting, so the
/// output is byte-stable across runs.
pub fn evaluations_to_csv(rows: &[Evaluation]) -> String {
    let mut out = String::from("model,msop,accuracy,mse\n");
    for row in rows {
        out.push_str(&row.model);
        out.push_str(&format!(",{},{}", row.msop, row.accuracy));
        match row.mse {
            Some(mse) => out.push_str(&format!(",{mse}\n")),
            None => out.push_str(",\n"),
        }
    }
    out
}

/// Renders evaluations as an aligned text table for terminal output.
pub fn evaluations_to_table(rows: &[Evaluation]) -> String {
    let width = rows
        .iter()
        .map(|r| r.model.len())
        .chain(std::iter::once("model".len()))
        .max()
        .unwrap_or(5);
    let mut out = format!("{:width$}  {:>10}  {:>10}  {:>14}\n", "model", "msop", "accuracy", "mse");
    for row in rows {
        let mse = match row.mse {
            Some(v) => format!("{v:.3}"),
            None => "-".to_string(),
        };
        out.push_str(&format!(
            "{:width$}  {:>10.6}  {:>10.6}  {:>14}\n",
            row.model, row.msop, row.accuracy, mse
        ));
    }
    out
}

/// Recipe for fitting one model inside cross-validation or the CLI.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    PretoCustom(TreeConfig),
    PretoClassifier(TreeConfig),
    Posto(TreeConfig),
    RandomGuess { seed: u64 },
    EqualShare,
    ArgmaxOracle,
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::PretoCustom(_) => "preto-custom",
            ModelSpec::PretoClassifier(_) => "preto-dtc",
            ModelSpec::Posto(_) => "posto-dtr",
            ModelSpec::RandomGuess { .. } => "random-guess",
            ModelSpec::EqualShare => "equal-share",
            ModelSpec::ArgmaxOracle => "argmax-oracle",
        }
    }

    /// Resolves a model name as spelled on the command line. Tree models take
    /// `config`; the random-guess baseline takes `seed`.
    pub fn by_name(name: &str, config: &TreeConfig, seed: u64) -> Option<ModelSpec> {
        match name {
            "preto-custom" => Some(ModelSpec::PretoCustom(config.clone())),
            "preto-dtc" => Some(ModelSpec::PretoClassifier(config.clone())),
            "posto-dtr" => Some(ModelSpec::Posto(config.clone())),
            "random-guess" => Some(ModelSpec::RandomGuess { seed }),
            "equal-share" => Some(ModelSpec::EqualShare),
            "argmax-oracle" => Some(ModelSpec::ArgmaxOracle),
            _ => None,
        }
    }

    /// True for the argmax-oracle control.
    pub fn is_control(&self) -> bool {
        matches!(self, ModelSpec::ArgmaxOracle)
    }

    pub fn fit(&self, train: &BrutDataset) -> Result<FittedModel, ModelError> {
        match self {
            ModelSpec::PretoCustom(config) => fit_preto(train, config, PretoLearner::Custom),
            ModelSpec::PretoClassifier(config) => {
                fit_preto(train, config, PretoLearner::Classifier)
            }
            ModelSpec::Posto(config) => fit_posto(train, config),
            ModelSpec::RandomGuess { seed } => {
                Ok(random_guess_model(train.grid().clone(), *seed))
            }
            ModelSpec::EqualShare => Ok(equal_share_model(train.grid().clone())),
            ModelSpec::ArgmaxOracle => Ok(argmax_oracle_model(train.grid().clone())),
        }
    }

    /// The full comparison suite: both preto variants, posto, both baselines,
    /// and the argmax-oracle control, with default tree configuration.
    pub fn default_suite(seed: u64) -> Vec<ModelSpec> {
        vec![
            ModelSpec::PretoCustom(TreeConfig::default()),
            ModelSpec::PretoClassifier(TreeConfig::default()),
            ModelSpec::Posto(TreeConfig::default()),
            ModelSpec::RandomGuess { seed },
            ModelSpec::EqualShare,
            ModelSpec::ArgmaxOracle,
        ]
    }
}

/// Cross-validated statistics of one model over all folds. Means and sample
/// standard deviations are taken across folds.
#[derive(Debug, Clone, PartialEq)]
pub struct CvRow {
    pub model: String,
    pub msop_mean: f64,
    pub msop_std: f64,
    pub accuracy_mean: f64,
    /// Trained-model evaluations one prediction costs (1 preto, grid size
    /// posto, 0 for baselines and the oracle).
    pub model_evals_per_prediction: usize,
    /// Mean tree size across folds; `None` for models without a tree.
    pub node_count_mean: Option<f64>,
    /// Wall-clock statistics; only when timing was measured. Prediction time
    /// is per prediction, averaged within each fold first.
    pub fit_seconds_mean: Option<f64>,
    pub predict_seconds_mean: Option<f64>,
    pub predict_seconds_std: Option<f64>,
}

/// Outcome of k-fold model comparison: per-model statistics and the selected
/// model (highest mean MSOP among non-control rows; ties keep the earlier
/// spec).
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    k: usize,
    seed: u64,
    rows: Vec<CvRow>,
    winner: usize,
}

impl CvReport {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rows(&self) -> &[CvRow] {
        &self.rows
    }

    pub fn winner(&self) -> &CvRow {
        &self.rows[self.winner]
    }

    /// CSV rendering. Timing is deliberately excluded so the artifact is
    /// byte-stable across runs; it appears only in the terminal table.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(
            "model,msop_mean,msop_std,accuracy_mean,model_evals_per_prediction,node_count_mean,selected\n",
        );
        for (i, row) in self.rows.iter().enumerate() {
            let nodes = match row.node_count_mean {
                Some(n) => n.to_string(),
                None => String::new(),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.model,
                row.msop_mean,
                row.msop_std,
                row.accuracy_mean,
                row.model_evals_per_prediction,
                nodes,
                i == self.winner
            ));
        }
        out
    }

    /// Aligned text table for terminal output, with timing columns when
    /// timing was measured. Prediction time prints in microseconds.
    pub fn to_table_string(&self) -> String {
        let timed = self.rows.iter().any(|r| r.fit_seconds_mean.is_some());
        let width = self
            .rows
            .iter()
            .map(|r| r.model.len())
            .chain(std::iter::once("model".len()))
            .max()
            .unwrap_or(5);
        let mut out = format!(
            "{:width$}  {:>22}  {:>8}  {:>5}  {:>7}",
            "model", "msop (mean +- std)", "accuracy", "evals", "nodes"
        );
        if timed {
            out.push_str(&format!("  {:>10}  {:>21}", "fit_s", "predict_us (mean +- std)"));
        }
        out.push('\n');
        for row in &self.rows {
            let nodes = match row.node_count_mean {
                Some(n) => format!("{n:.1}"),
                None => "-".to_string(),
            };
            out.push_str(&format!(
                "{:width$}  {:>10.6} +- {:.6}  {:>8.6}  {:>5}  {:>7}",
                row.model,
                row.msop_mean,
                row.msop_std,
                row.accuracy_mean,
                row.model_evals_per_prediction,
                nodes
            ));
            if timed {
                out.push_str(&format!(
                    "  {:>10.6}  {:>10.3} +- {:.3}",
                    row.fit_seconds_mean.unwrap_or(0.0),
                    row.predict_seconds_mean.unwrap_or(0.0) * 1e6,
                    row.predict_seconds_std.unwrap_or(0.0) * 1e6
                ));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "selected: {} (mean MSOP {:.6})\n",
            self.winner().model,
            self.winner().msop_mean
        ));
        out
    }
}

/// Mean and sample standard deviation (n-1 denominator; 0 when n < 2).
fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mut sum = KahanSum::new();
    for &v in values {
        sum.add(v);
    }
    let mean = sum.value() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let mut squares = KahanSum::new();
    for &v in values {
        let d = v - mean;
        squares.add(d * d);
    }
    (mean, (squares.value() / (n - 1) as f64).sqrt())
}

/// Per-fold measurements of one fitted model on its validation side.
struct FoldOutcome {
    msop: f64,
    accuracy: f64,
    node_count: Option<usize>,
    fit_seconds: f64,
    predict_seconds: f64,
}

/// Compares model recipes by k-fold cross-validation.
///
/// Per (model, fold) pair the model is fitted on the fold's training side
/// and evaluated on its validation side; rows report means and sample
/// standard deviations over folds. Pairs run in parallel on the current
/// rayon pool, and results are reduced in a fixed order, so the report does
/// not depend on thread count. Wall-clock timing is measured only when
/// `measure_time` is set; everything else in the report is deterministic.
pub fn cross_validate(
    data: &BrutDataset,
    k: usize,
    seed: u64,
    specs: &[ModelSpec],
    measure_time: bool,
) -> Result<CvReport, ModelError> {
    if specs.is_empty() {
        return Err(ModelError::Validation("no model specs to compare".into()));
    }
    let plan = kfold(data, k, seed)?;
    let tasks: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|s| (0..k).map(move |fold| (s, fold)))
        .collect();
    let outcomes: Vec<FoldOutcome> = tasks
        .par_iter()
        .map(|&(s, fold)| {
            let (train, validate) = plan.split(data, fold);
            let fit_start = Instant::now();
            let model = specs[s].fit(&train)?;
            let fit_seconds = fit_start.elapsed().as_secs_f64();

            let predict_start = Instant::now();
            let predictions: Vec<ChunkSize> = validate
                .examples()
                .iter()
                .map(|e| model.predict_for_example(e))
                .collect();
            let predict_seconds =
                predict_start.elapsed().as_secs_f64() / validate.examples().len() as f64;

            let msop = msop_from_predictions(&predictions, validate.examples())?;
            let labels: Vec<ChunkSize> = derive_labels(&validate)
                .pairs()
                .iter()
                .map(|(_, label)| *label)
                .collect();
            let accuracy = accuracy(&predictions, &labels)?;
            Ok(FoldOutcome {
                msop,
                accuracy,
                node_count: model.node_count(),
                fit_seconds,
                predict_seconds,
            })
        })
        .collect::<Result<_, ModelError>>()?;

    let mut rows = Vec::with_capacity(specs.len());
    for (s, spec) in specs.iter().enumerate() {
        let folds = &outcomes[s * k..(s + 1) * k];
        let msops: Vec<f64> = folds.iter().map(|o| o.msop).collect();
        let accuracies: Vec<f64> = folds.iter().map(|o| o.accuracy).collect();
        let fit_times: Vec<f64> = folds.iter().map(|o| o.fit_seconds).collect();
        let predict_times: Vec<f64> = folds.iter().map(|o| o.predict_seconds).collect();
        let (msop_mean, msop_std) = mean_and_sample_std(&msops);
        let (accuracy_mean, _) = mean_and_sample_std(&accuracies);
        let node_count_mean = folds
            .iter()
            .map(|o| o.node_count.map(|n| n as f64))
            .collect::<Option<Vec<f64>>>()
            .map(|counts| mean_and_sample_std(&counts).0);
        let (fit_mean, _) = mean_and_sample_std(&fit_times);
        let (predict_mean, predict_std) = mean_and_sample_std(&predict_times);
        let evals = match spec {
            ModelSpec::PretoCustom(_) | ModelSpec::PretoClassifier(_) => 1,
            ModelSpec::Posto(_) => data.grid().len(),
            ModelSpec::RandomGuess { .. } | ModelSpec::EqualShare | ModelSpec::ArgmaxOracle => 0,
        };
        rows.push(CvRow {
            model: spec.name().to_string(),
            msop_mean,
            msop_std,
            accuracy_mean,
            model_evals_per_prediction: evals,
            node_count_mean,
            fit_seconds_mean: measure_time.then_some(fit_mean),
            predict_seconds_mean: measure_time.then_some(predict_mean),
            predict_seconds_std: measure_time.then_some(predict_std),
        });
    }
    // The oracle rows anchor the report but never win the comparison.
    let mut winner: Option<usize> = None;
    for (i, row) in rows.iter().enumerate() {
        if specs[i].is_control() {
            continue;
        }
        match winner {
            Some(w) if rows[w].msop_mean >= row.msop_mean => {}
            _ => winner = Some(i),
        }
    }
    let winner = winner.unwrap_or(0);
    Ok(CvReport { k, seed, rows, winner })
}
