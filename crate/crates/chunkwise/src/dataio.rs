//! Dataset container, CSV schema, label derivation, augmentation, splits,
//! folds, and feature scaling.
//!
//! # CSV schema
//!
//! A brut dataset is exchanged as a plain CSV file with the header
//!
//! ```text
//! ms,mflop,n_thr,n_ite,perf_cs_1,perf_cs_2,...,perf_cs_10
//! ```
//!
//! where the `perf_cs_<v>` suffixes name the chunk-size grid (strictly
//! increasing, at least one column). One data row per example; `ms`, `n_thr`
//! and `n_ite` are positive integers, `mflop` is a non-negative real, and
//! every performance value is a positive real. Floats are written with
//! shortest round-trip formatting, so save → load reproduces every numeric
//! field bit-identically.
//!
//! # Determinism
//!
//! [`shuffle_split`] and [`kfold`] shuffle with a seeded ChaCha PRNG
//! (Fisher–Yates); the same seed always yields the same assignment, and both
//! plans serialize to small text files for audit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{
    AugmentedExample, BrutExample, ChunkGrid, ChunkSize, CoreError, FeatureVector, KahanSum,
};

/// Errors from dataset construction, CSV exchange, or split planning.
#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: String,
        message: String,
    },
    #[error("dataset contains no examples")]
    EmptyDataset,
    #[error("example {index}: perf map keys do not match the grid")]
    GridAlignment { index: usize },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// A validated collection of brut examples over one chunk-size grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BrutDataset {
    grid: ChunkGrid,
    examples: Vec<BrutExample>,
    provenance: String,
}

impl BrutDataset {
    /// Validates that every example's perf map covers `grid` exactly.
    pub fn new(
        grid: ChunkGrid,
        examples: Vec<BrutExample>,
        provenance: impl Into<String>,
    ) -> Result<Self, DataError> {
        for (index, example) in examples.iter().enumerate() {
            let keys: Vec<ChunkSize> = example.perf().keys().copied().collect();
            if keys != grid.values() {
                return Err(DataError::GridAlignment { index });
            }
        }
        Ok(Self { grid, examples, provenance: provenance.into() })
    }

    pub fn grid(&self) -> &ChunkGrid {
        &self.grid
    }

    pub fn examples(&self) -> &[BrutExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub(crate) fn subset(&self, indices: &[usize]) -> BrutDataset {
        let examples = indices
            .iter()
            .map(|&i| self.examples[i].clone())
            .collect();
        BrutDataset {
            grid: self.grid.clone(),
            examples,
            provenance: self.provenance.clone(),
        }
    }
}

/// Feature vectors paired with their optimal-chunk-size labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pairs: Vec<(FeatureVector, ChunkSize)>,
}

impl LabeledDataset {
    pub fn new(pairs: Vec<(FeatureVector, ChunkSize)>) -> Result<Self, DataError> {
        if pairs.iter().any(|(_, label)| *label == 0) {
            return Err(DataError::InvalidArgument(
                "labels must be at least 1".into(),
            ));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(FeatureVector, ChunkSize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Rows of `(z, target_perf)` for regression on augmented features.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedDataset {
    rows: Vec<AugmentedExample>,
}

impl AugmentedDataset {
    pub fn new(rows: Vec<AugmentedExample>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[AugmentedExample] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

const FEATURE_COLUMNS: [&str; 4] = ["ms", "mflop", "n_thr", "n_ite"];
const PERF_PREFIX: &str = "perf_cs_";

/// Parses the CSV schema from a string. `provenance` tags the dataset.
pub fn parse_brut_csv(text: &str, provenance: &str) -> Result<BrutDataset, DataError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(DataError::Schema {
        line: 1,
        message: "missing header line".into(),
    })?;
    let header = header.trim_end_matches('\r');
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < FEATURE_COLUMNS.len() + 1 {
        return Err(DataError::Schema {
            line: 1,
            message: format!(
                "header needs the {} feature columns plus at least one {}<v> column",
                FEATURE_COLUMNS.len(),
                PERF_PREFIX
            ),
        });
    }
    for (i, expected) in FEATURE_COLUMNS.iter().enumerate() {
        if columns[i] != *expected {
            return Err(DataError::Schema {
                line: 1,
                message: format!("column {} must be {expected} (got {})", i + 1, columns[i]),
            });
        }
    }
    let mut grid_values = Vec::new();
    for (i, column) in columns.iter().enumerate().skip(FEATURE_COLUMNS.len()) {
        let suffix = column.strip_prefix(PERF_PREFIX).ok_or(DataError::Schema {
            line: 1,
            message: format!(
                "column {} must start with {PERF_PREFIX} (got {column})",
                i + 1
            ),
        })?;
        let cs: ChunkSize = suffix.parse().map_err(|_| DataError::Schema {
            line: 1,
            message: format!("column {column} does not end in a chunk-size"),
        })?;
        grid_values.push(cs);
    }
    let grid = ChunkGrid::new(grid_values).map_err(|e| DataError::Schema {
        line: 1,
        message: e.to_string(),
    })?;

    let mut examples = Vec::new();
    for (index, raw) in lines {
        let line = index + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != columns.len() {
            return Err(DataError::Schema {
                line,
                message: format!("expected {} fields, got {}", columns.len(), fields.len()),
            });
        }
        let ms = parse_positive_int::<u32>(fields[0], line, "ms")?;
        let mflop = parse_field::<f64>(fields[1], line, "mflop")?;
        if !mflop.is_finite() || mflop < 0.0 {
            return Err(DataError::Parse {
                line,
                column: "mflop".into(),
                message: format!("must be finite and non-negative (got {})", fields[1]),
            });
        }
        let n_thr = parse_positive_int::<u32>(fields[2], line, "n_thr")?;
        let n_ite = parse_positive_int::<u64>(fields[3], line, "n_ite")?;
        let features = FeatureVector::new(ms, mflop, n_thr, n_ite)
            .expect("fields validated above");

        let mut perf = BTreeMap::new();
        for (&cs, (field, column)) in grid
            .values()
            .iter()
            .zip(fields[FEATURE_COLUMNS.len()..].iter().zip(&columns[FEATURE_COLUMNS.len()..]))
        {
            let p = parse_field::<f64>(field, line, column)?;
            if !p.is_finite() || p <= 0.0 {
                return Err(DataError::Parse {
                    line,
                    column: (*column).into(),
                    message: format!("performance must be finite and positive (got {field})"),
                });
            }
            perf.insert(cs, p);
        }
        let example = BrutExample::new(features, perf).expect("fields validated above");
        examples.push(example);
    }
    if examples.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    BrutDataset::new(grid, examples, provenance)
}

fn parse_field<T: std::str::FromStr>(
    field: &str,
    line: usize,
    column: &str,
) -> Result<T, DataError> {
    field.parse().map_err(|_| DataError::Parse {
        line,
        column: column.into(),
        message: format!("malformed number {field:?}"),
    })
}

fn parse_positive_int<T>(field: &str, line: usize, column: &str) -> Result<T, DataError>
where
    T: std::str::FromStr + PartialOrd + From<u8>,
{
    let value: T = parse_field(field, line, column)?;
    if value < T::from(1u8) {
        return Err(DataError::Parse {
            line,
            column: column.into(),
            message: "must be at least 1".into(),
        });
    }
    Ok(value)
}

/// Renders a dataset in the CSV schema. Floats use shortest round-trip
/// formatting, so the output reparses bit-identically.
pub fn brut_csv_string(data: &BrutDataset) -> String {
    let mut out = String::new();
    out.push_str(&FEATURE_COLUMNS.join(","));
    for cs in data.grid().values() {
        let _ = write!(out, ",{PERF_PREFIX}{cs}");
    }
    out.push('\n');
    for example in data.examples() {
        let x = example.features();
        let _ = write!(out, "{},{},{},{}", x.ms(), x.mflop(), x.n_thr(), x.n_ite());
        for cs in data.grid().values() {
            let p = example.perf_at(*cs).expect("dataset is grid-aligned");
            let _ = write!(out, ",{p}");
        }
        out.push('\n');
    }
    out
}

/// Loads a brut dataset from a CSV file.
pub fn load_brut_csv(path: &Path) -> Result<BrutDataset, DataError> {
    let text = std::fs::read_to_string(path)?;
    parse_brut_csv(&text, &path.display().to_string())
}

/// Saves a brut dataset to a CSV file.
pub fn save_brut_csv(data: &BrutDataset, path: &Path) -> Result<(), DataError> {
    let file = std::fs::File::create(path)?;
    let mut writer = BufWriter::new(file);
    writer.write_all(brut_csv_string(data).as_bytes())?;
    writer.flush()?;
    Ok(())
}

/// Labels every example with its smallest optimal chunk-size.
pub fn derive_labels(data: &BrutDataset) -> LabeledDataset {
    let pairs = data
        .examples()
        .iter()
        .map(|e| (e.features().clone(), e.best_chunk()))
        .collect();
    LabeledDataset { pairs }
}

/// Expands every example into one `(z, perf)` row per grid chunk-size.
///
/// Rows are ordered example-major, then grid-ascending, so the output has
/// exactly `N * |CS|` rows.
pub fn augment(data: &BrutDataset) -> AugmentedDataset {
    let mut rows = Vec::with_capacity(data.len() * data.grid().len());
    for example in data.examples() {
        for (&cs, &p) in example.perf() {
            rows.push(
                AugmentedExample::new(example.features().clone(), cs, p)
                    .expect("dataset examples are validated"),
            );
        }
    }
    AugmentedDataset { rows }
}

/// Index-level result of a shuffled train/test split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitIndices {
    n: usize,
    ratio: f64,
    seed: u64,
    train: Vec<usize>,
    test: Vec<usize>,
}

impl SplitIndices {
    pub fn train(&self) -> &[usize] {
        &self.train
    }

    pub fn test(&self) -> &[usize] {
        &self.test
    }

    /// Small text rendering for audit files.
    pub fn to_audit_text(&self) -> String {
        let mut out = format!(
            "# shuffle-split n={} ratio={} seed={} train={} test={}\n",
            self.n,
            self.ratio,
            self.seed,
            self.train.len(),
            self.test.len()
        );
        let _ = write!(out, "train:");
        for i in &self.train {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
        let _ = write!(out, "test:");
        for i in &self.test {
            let _ = write!(out, " {i}");
        }
        out.push('\n');
        out
    }
}

/// Plans a shuffled split of `n` indices. The train side receives
/// `round(n * ratio)` indices (ties round up) in shuffled draw order.
pub fn shuffle_split_indices(
    n: usize,
    ratio: f64,
    seed: u64,
) -> Result<SplitIndices, DataError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DataError::InvalidArgument(format!(
            "split ratio must lie strictly between 0 and 1 (got {ratio})"
        )));
    }
    if n == 0 {
        return Err(DataError::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train = (n as f64 * ratio).round() as usize;
    let test = order.split_off(n_train);
    Ok(SplitIndices { n, ratio, seed, train: order, test })
}

/// Shuffles the dataset and splits it `ratio : (1 - ratio)` into train and
/// test sets. Both sides keep the shuffled draw order.
pub fn shuffle_split(
    data: &BrutDataset,
    ratio: f64,
    seed: u64,
) -> Result<(BrutDataset, BrutDataset), DataError> {
    let indices = shuffle_split_indices(data.len(), ratio, seed)?;
    Ok((data.subset(indices.train()), data.subset(indices.test())))
}

/// Balanced assignment of examples to `k` cross-validation folds.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    k: usize,
    seed: u64,
    assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fold index of each example, aligned with the dataset order.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    /// Example indices of one fold, ascending.
    pub fn fold_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }

    /// Materializes the train/validate datasets of one fold, both in
    /// ascending example order.
    pub fn split(&self, data: &BrutDataset, fold: usize) -> (BrutDataset, BrutDataset) {
        assert!(fold < self.k, "fold {fold} out of range for k={}", self.k);
        assert_eq!(
            data.len(),
            self.assignments.len(),
            "fold plan was made for a dataset of {} examples",
            self.assignments.len()
        );
        let mut train = Vec::new();
        let mut validate = Vec::new();
        for (i, &f) in self.assignments.iter().enumerate() {
            if f == fold {
                validate.push(i);
            } else {
                train.push(i);
            }
        }
        (data.subset(&train), data.subset(&validate))
    }

    /// Small text rendering for audit files.
    pub fn to_audit_text(&self) -> String {
        let mut out = format!(
            "# kfold n={} k={} seed={}\n",
            self.assignments.len(),
            self.k,
            self.seed
        );
        for fold in 0..self.k {
            let indices = self.fold_indices(fold);
            let _ = write!(out, "fold {fold} ({}):", indices.len());
            for i in indices {
                let _ = write!(out, " {i}");
            }
            out.push('\n');
        }
        out
    }
}

/// Plans balanced folds over `n` indices; fold sizes differ by at most one.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<FoldPlan, DataError> {
    if k < 2 {
        return Err(DataError::InvalidArgument(format!(
            "k must be at least 2 (got {k})"
        )));
    }
    if k > n {
        return Err(DataError::InvalidArgument(format!(
            "k must not exceed the number of examples (k={k}, n={n})"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut assignments = vec![0usize; n];
    for (position, &example) in order.iter().enumerate() {
        assignments[example] = position % k;
    }
    Ok(FoldPlan { k, seed, assignments })
}

/// Plans balanced cross-validation folds for a dataset.
pub fn kfold(data: &BrutDataset, k: usize, seed: u64) -> Result<FoldPlan, DataError> {
    kfold_indices(data.len(), k, seed)
}

/// Per-feature standardization constants, learned on training data only.
///
/// The tree learners split on raw feature thresholds and do not need this;
/// it exists for scale-sensitive plug-in models. Constant features keep a
/// divisor of 1 so transforming never divides by zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    mean: [f64; 4],
    std: [f64; 4],
}

impl FeatureScaler {
    pub fn fit(features: &[FeatureVector]) -> Result<Self, DataError> {
        if features.is_empty() {
            return Err(DataError::EmptyDataset);
        }
        let n = features.len() as f64;
        let mut mean = [0.0f64; 4];
        for (j, m) in mean.iter_mut().enumerate() {
            let mut sum = KahanSum::new();
            for x in features {
                sum.add(x.as_features()[j]);
            }
            *m = sum.value() / n;
        }
        let mut std = [0.0f64; 4];
        for (j, s) in std.iter_mut().enumerate() {
            let mut sum = KahanSum::new();
            for x in features {
                let d = x.as_features()[j] - mean[j];
                sum.add(d * d);
            }
            let variance = sum.value() / n;
            let sd = variance.sqrt();
            *s = if sd > 0.0 { sd } else { 1.0 };
        }
        Ok(Self { mean, std })
    }

    pub fn mean(&self) -> &[f64; 4] {
        &self.mean
    }

    pub fn std(&self) -> &[f64; 4] {
        &self.std
    }

    pub fn transform(&self, x: &FeatureVector) -> [f64; 4] {
        let f = x.as_features();
        let mut out = [0.0f64; 4];
        for j in 0..4 {
            out[j] = (f[j] - self.mean[j]) / self.std[j];
        }
        out
    }
}
