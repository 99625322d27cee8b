//! Core data model and evaluation metrics.
//!
//! Everything downstream speaks in terms of three record types:
//!
//! * [`ChunkGrid`] — the ordered set of admissible chunk-sizes `CS`.
//! * [`FeatureVector`] — one observed loop instance `x = (ms, mflop, n_thr,
//!   n_ite)`.
//! * [`BrutExample`] — a feature vector plus the measured performance at
//!   every grid chunk-size ("brut" data: nothing derived, nothing discarded).
//!
//! and three metrics:
//!
//! | metric       | input                               | range   |
//! |--------------|-------------------------------------|---------|
//! | [`accuracy`] | predicted vs target chunk-sizes     | [0, 1]  |
//! | [`mse`]      | predicted vs actual real values     | [0, ∞)  |
//! | [`msop`]     | a predictor plus annotated examples | (0, 1]  |
//!
//! MSOP (mean sub-optimal performance) is the domain metric: for each example
//! the performance obtained at the predicted chunk-size is divided by the best
//! performance on the grid, and the ratios are averaged. A perfect predictor
//! scores 1.0; the score degrades exactly in proportion to the performance
//! actually lost, unlike accuracy, which charges a near-miss and a
//! catastrophic miss the same.
//!
//! Metric accumulation uses compensated summation so reported values are
//! stable under permutation of the example list to within ~1 ulp per element.

use std::collections::BTreeMap;

use thiserror::Error;

/// A chunk-size: the number of loop iterations handed to a thread at once.
pub type ChunkSize = u32;

/// Errors from constructing core types or evaluating metrics.
#[derive(Debug, Error, PartialEq)]
pub enum CoreError {
    #[error("input slices must have equal lengths (got {left} and {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("input must not be empty")]
    EmptyInput,
    #[error("chunk-size {cs} is outside the performance grid")]
    OutOfGrid { cs: ChunkSize },
    #[error("invalid chunk grid: {0}")]
    InvalidGrid(String),
    #[error("invalid feature vector: {0}")]
    InvalidFeature(String),
    #[error("invalid performance value: {0}")]
    InvalidPerformance(String),
}

/// Ordered set of admissible chunk-sizes.
///
/// Values are strictly increasing and at least 1. The default grid is
/// `{1, ..., 10}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkGrid {
    values: Vec<ChunkSize>,
}

impl ChunkGrid {
    pub fn new(values: Vec<ChunkSize>) -> Result<Self, CoreError> {
        if values.is_empty() {
            return Err(CoreError::InvalidGrid("grid must not be empty".into()));
        }
        if values[0] == 0 {
            return Err(CoreError::InvalidGrid("chunk-sizes must be at least 1".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::InvalidGrid(
                "chunk-sizes must be strictly increasing".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[ChunkSize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        // A constructed grid is never empty; this exists for clippy symmetry.
        self.values.is_empty()
    }

    pub fn min(&self) -> ChunkSize {
        self.values[0]
    }

    pub fn max(&self) -> ChunkSize {
        *self.values.last().expect("grid is non-empty")
    }

    pub fn contains(&self, cs: ChunkSize) -> bool {
        self.values.binary_search(&cs).is_ok()
    }

    /// Smallest grid member `>= v`, if any.
    pub fn smallest_at_least(&self, v: ChunkSize) -> Option<ChunkSize> {
        match self.values.binary_search(&v) {
            Ok(_) => Some(v),
            Err(pos) => self.values.get(pos).copied(),
        }
    }
}

impl Default for ChunkGrid {
    fn default() -> Self {
        Self::new((1..=10).collect()).expect("default grid is valid")
    }
}

/// One observed loop instance.
///
/// * `ms` — matrix/vector size of the underlying benchmark.
/// * `mflop` — estimated work of one loop execution, in Mflop.
/// * `n_thr` — number of worker threads.
/// * `n_ite` — number of loop iterations to be scheduled.
///
/// For tree consumption the features are ordered `(ms, mflop, n_thr, n_ite)`,
/// i.e. `featureVector[0]` is `ms` and `featureVector[3]` is `n_ite`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    ms: u32,
    mflop: f64,
    n_thr: u32,
    n_ite: u64,
}

impl FeatureVector {
    pub fn new(ms: u32, mflop: f64, n_thr: u32, n_ite: u64) -> Result<Self, CoreError> {
        if ms == 0 {
            return Err(CoreError::InvalidFeature("ms must be at least 1".into()));
        }
        if !mflop.is_finite() || mflop < 0.0 {
            return Err(CoreError::InvalidFeature(format!(
                "mflop must be finite and non-negative (got {mflop})"
            )));
        }
        if n_thr == 0 {
            return Err(CoreError::InvalidFeature("n_thr must be at least 1".into()));
        }
        if n_ite == 0 {
            return Err(CoreError::InvalidFeature("n_ite must be at least 1".into()));
        }
        Ok(Self { ms, mflop, n_thr, n_ite })
    }

    pub fn ms(&self) -> u32 {
        self.ms
    }

    pub fn mflop(&self) -> f64 {
        self.mflop
    }

    pub fn n_thr(&self) -> u32 {
        self.n_thr
    }

    pub fn n_ite(&self) -> u64 {
        self.n_ite
    }

    /// Features in tree order `(ms, mflop, n_thr, n_ite)`.
    pub fn as_features(&self) -> [f64; 4] {
        [self.ms as f64, self.mflop, self.n_thr as f64, self.n_ite as f64]
    }

    /// Features extended with a candidate chunk-size, `(ms, mflop, n_thr,
    /// n_ite, cs)`, as consumed by regression trees on augmented data.
    pub fn augmented(&self, cs: ChunkSize) -> [f64; 5] {
        let f = self.as_features();
        [f[0], f[1], f[2], f[3], cs as f64]
    }
}

/// A measured example: features plus performance at every grid chunk-size.
///
/// Performance values are strictly positive and finite. The map is keyed by
/// chunk-size and must cover the dataset grid exactly; that alignment is
/// enforced by [`crate::dataio::BrutDataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct BrutExample {
    features: FeatureVector,
    perf: BTreeMap<ChunkSize, f64>,
}

impl BrutExample {
    pub fn new(
        features: FeatureVector,
        perf: BTreeMap<ChunkSize, f64>,
    ) -> Result<Self, CoreError> {
        if perf.is_empty() {
            return Err(CoreError::InvalidPerformance("perf map must not be empty".into()));
        }
        for (&cs, &p) in &perf {
            if cs == 0 {
                return Err(CoreError::InvalidPerformance(
                    "perf map keys must be at least 1".into(),
                ));
            }
            if !p.is_finite() || p <= 0.0 {
                return Err(CoreError::InvalidPerformance(format!(
                    "performance at chunk-size {cs} must be finite and positive (got {p})"
                )));
            }
        }
        Ok(Self { features, perf })
    }

    pub fn features(&self) -> &FeatureVector {
        &self.features
    }

    pub fn perf(&self) -> &BTreeMap<ChunkSize, f64> {
        &self.perf
    }

    pub fn perf_at(&self, cs: ChunkSize) -> Option<f64> {
        self.perf.get(&cs).copied()
    }

    /// Best performance over the grid.
    pub fn max_perf(&self) -> f64 {
        self.perf.values().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest chunk-size achieving the best performance.
    pub fn best_chunk(&self) -> ChunkSize {
        let mut best_cs = 0;
        let mut best = f64::NEG_INFINITY;
        for (&cs, &p) in &self.perf {
            if p > best {
                best = p;
                best_cs = cs;
            }
        }
        best_cs
    }
}

/// A training row for perf regression: features plus one candidate chunk-size
/// and the performance observed there.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedExample {
    features: FeatureVector,
    cs: ChunkSize,
    target_perf: f64,
}

impl AugmentedExample {
    pub fn new(
        features: FeatureVector,
        cs: ChunkSize,
        target_perf: f64,
    ) -> Result<Self, CoreError> {
        if cs == 0 {
            return Err(CoreError::InvalidPerformance(
                "augmented chunk-size must be at least 1".into(),
            ));
        }
        if !target_perf.is_finite() || target_perf <= 0.0 {
            return Err(CoreError::InvalidPerformance(format!(
                "target performance must be finite and positive (got {target_perf})"
            )));
        }
        Ok(Self { features, cs, target_perf })
    }

    pub fn features(&self) -> &FeatureVector {
        &self.features
    }

    pub fn cs(&self) -> ChunkSize {
        self.cs
    }

    pub fn target_perf(&self) -> f64 {
        self.target_perf
    }

    /// The regression input `z = (ms, mflop, n_thr, n_ite, cs)`.
    pub fn z(&self) -> [f64; 5] {
        self.features.augmented(self.cs)
    }
}

/// Kahan–Babuška (Neumaier) compensated summation.
///
/// Deterministic for a fixed input order; permutation of the inputs moves the
/// result by at most ~1 ulp per element.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Fraction of predictions equal to their targets.
pub fn accuracy(predictions: &[ChunkSize], targets: &[ChunkSize]) -> Result<f64, CoreError> {
    if predictions.len() != targets.len() {
        return Err(CoreError::LengthMismatch {
            left: predictions.len(),
            right: targets.len(),
        });
    }
    if predictions.is_empty() {
        return Err(CoreError::EmptyInput);
    }
    let hits = predictions
        .iter()
        .zip(targets)
        .filter(|(p, t)| p == t)
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// Mean squared error between predicted and actual values.
pub fn mse(predicted: &[f64], actual: &[f64]) -> Result<f64, CoreError> {
    if predicted.len() != actual.len() {
        return Err(CoreError::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(CoreError::EmptyInput);
    }
    let mut sum = KahanSum::new();
    for (p, a) in predicted.iter().zip(actual) {
        let d = p - a;
        sum.add(d * d);
    }
    Ok(sum.value() / predicted.len() as f64)
}

/// Mean sub-optimal performance of per-example predictions.
///
/// For each example the performance at the predicted chunk-size is divided by
/// the example's best grid performance; the ratios are averaged. Predictions
/// must be aligned with `examples` and lie on each example's perf map.
pub fn msop_from_predictions(
    predictions: &[ChunkSize],
    examples: &[BrutExample],
) -> Result<f64, CoreError> {
    if predictions.len() != examples.len() {
        return Err(CoreError::LengthMismatch {
            left: predictions.len(),
            right: examples.len(),
        });
    }
    if examples.is_empty() {
        return Err(CoreError::EmptyInput);
    }
    let mut sum = KahanSum::new();
    for (&cs, example) in predictions.iter().zip(examples) {
        let achieved = example
            .perf_at(cs)
            .ok_or(CoreError::OutOfGrid { cs })?;
        sum.add(achieved / example.max_perf());
    }
    Ok(sum.value() / examples.len() as f64)
}

/// Mean sub-optimal performance of a predictor over annotated examples.
pub fn msop<F>(mut model: F, examples: &[BrutExample]) -> Result<f64, CoreError>
where
    F: FnMut(&FeatureVector) -> ChunkSize,
{
    if examples.is_empty() {
        return Err(CoreError::EmptyInput);
    }
    let predictions: Vec<ChunkSize> =
        examples.iter().map(|e| model(e.features())).collect();
    msop_from_predictions(&predictions, examples)
}
