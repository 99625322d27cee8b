//! Greedy tree growth for the three learners.
//!
//! All learners share one recursion: evaluate the region as a leaf, check the
//! learner's stop rules, enumerate split candidates (midpoints between
//! consecutive distinct sorted feature values, feature-major, thresholds
//! ascending, ties keeping the earliest candidate), and recurse on the best
//! one. They differ in the leaf payload, the split objective, and whether a
//! split must strictly improve on the unsplit region:
//!
//! * the MSOP tree splits only when the summed weighted region MSOP strictly
//!   exceeds the unsplit region's, and stops early once a region's MSOP
//!   reaches the configured threshold;
//! * the classifier and regressor split while the region is impure (mixed
//!   labels, non-constant targets), the standard behavior that lets them
//!   carve XOR-style label patterns through zero-gain plateaus.
//!
//! All region statistics accumulate in dataset order with compensated
//! summation, so fits are deterministic and an independent re-enumeration of
//! the same candidates reproduces scores bit-for-bit.

use std::collections::BTreeMap;

use crate::core::{ChunkSize, KahanSum};
use crate::dataio::{AugmentedDataset, BrutDataset, LabeledDataset};

use super::{LeafValue, TreeConfig, TreeError, TreeNode};

/// Row-major feature matrix.
struct Matrix {
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    fn new(cols: usize) -> Self {
        Self { cols, data: Vec::new() }
    }

    fn push_row(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn n_rows(&self) -> usize {
        self.data.len() / self.cols
    }
}

/// Leaf evaluation of a region: payload, the learner's region score, and the
/// weighted score used when a strict improvement is required to split.
struct LeafEval {
    value: LeafValue,
    score: f64,
    weighted: f64,
}

trait Criterion {
    fn leaf(&self, region: &[usize]) -> LeafEval;

    /// True when the region needs no further splitting regardless of depth
    /// budget or available candidates.
    fn is_terminal(&self, region: &[usize], leaf: &LeafEval) -> bool;

    /// Score of a candidate split, to be maximized over candidates.
    fn split_score(&self, left: &[usize], right: &[usize]) -> f64;

    /// When `true`, the best split is accepted only if its score strictly
    /// exceeds the unsplit region's weighted score.
    fn requires_improvement(&self) -> bool;
}

fn partition(features: &Matrix, region: &[usize], j: usize, t: f64) -> (Vec<usize>, Vec<usize>) {
    region.iter().partition(|&&i| features.row(i)[j] < t)
}

struct BestSplit {
    feature_index: usize,
    threshold: f64,
    score: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

/// Enumerates every admissible candidate and keeps the highest-scoring one.
/// Candidates run feature-major with thresholds ascending and ties keep the
/// earliest candidate, so the choice is deterministic.
fn best_split<C: Criterion>(
    criterion: &C,
    features: &Matrix,
    region: &[usize],
    min_leaf_samples: usize,
) -> Option<BestSplit> {
    let mut best: Option<BestSplit> = None;
    for j in 0..features.cols {
        let mut values: Vec<f64> = region.iter().map(|&i| features.row(i)[j]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let threshold = 0.5 * (pair[0] + pair[1]);
            let (left, right) = partition(features, region, j, threshold);
            if left.len() < min_leaf_samples || right.len() < min_leaf_samples {
                continue;
            }
            let score = criterion.split_score(&left, &right);
            if best.as_ref().map_or(true, |b| score > b.score) {
                best = Some(BestSplit { feature_index: j, threshold, score, left, right });
            }
        }
    }
    best
}

fn grow<C: Criterion>(
    criterion: &C,
    features: &Matrix,
    region: Vec<usize>,
    depth: usize,
    config: &TreeConfig,
) -> TreeNode {
    let leaf = criterion.leaf(&region);
    let as_leaf = |leaf: LeafEval| TreeNode::Leaf {
        value: leaf.value,
        region_score: leaf.score,
    };
    if criterion.is_terminal(&region, &leaf) || depth >= config.max_depth() {
        return as_leaf(leaf);
    }
    let Some(split) = best_split(criterion, features, &region, config.min_leaf_samples())
    else {
        return as_leaf(leaf);
    };
    if criterion.requires_improvement() && split.score <= leaf.weighted {
        return as_leaf(leaf);
    }
    TreeNode::Split {
        feature_index: split.feature_index,
        threshold: split.threshold,
        left: Box::new(grow(criterion, features, split.left, depth + 1, config)),
        right: Box::new(grow(criterion, features, split.right, depth + 1, config)),
    }
}

/// MSOP criterion: leaves are line-searched over the grid, splits maximize
/// the summed per-child weighted MSOP.
struct MsopCriterion<'a> {
    /// `ratios[i][c]` = perf of example `i` at grid index `c`, divided by the
    /// example's best perf.
    ratios: Matrix,
    grid: &'a [ChunkSize],
    stop_threshold: f64,
}

impl MsopCriterion<'_> {
    /// Line-search over the grid: returns the grid index with the highest
    /// summed ratio over the region (smallest chunk-size on ties) and that
    /// sum. An empty region scores a full weighted MSOP of zero ratios; the
    /// caller never produces one because splits keep both sides populated.
    fn line_search(&self, region: &[usize]) -> (usize, f64) {
        let mut best_index = 0;
        let mut best_sum = f64::NEG_INFINITY;
        for c in 0..self.grid.len() {
            let mut sum = KahanSum::new();
            for &i in region {
                sum.add(self.ratios.row(i)[c]);
            }
            let s = sum.value();
            if s > best_sum {
                best_sum = s;
                best_index = c;
            }
        }
        (best_index, best_sum)
    }
}

impl Criterion for MsopCriterion<'_> {
    fn leaf(&self, region: &[usize]) -> LeafEval {
        if region.is_empty() {
            // By convention an empty region is perfect; it never arises from
            // growth but keeps the scoring total.
            return LeafEval { value: LeafValue::Class(self.grid[0]), score: 1.0, weighted: 0.0 };
        }
        let (index, sum) = self.line_search(region);
        LeafEval {
            value: LeafValue::Class(self.grid[index]),
            score: sum / region.len() as f64,
            weighted: sum,
        }
    }

    fn is_terminal(&self, _region: &[usize], leaf: &LeafEval) -> bool {
        leaf.score >= self.stop_threshold
    }

    fn split_score(&self, left: &[usize], right: &[usize]) -> f64 {
        self.line_search(left).1 + self.line_search(right).1
    }

    fn requires_improvement(&self) -> bool {
        true
    }
}

/// Information-gain criterion with base-2 entropy.
struct GainCriterion<'a> {
    labels: &'a [ChunkSize],
}

impl GainCriterion<'_> {
    fn counts(&self, region: &[usize]) -> BTreeMap<ChunkSize, usize> {
        let mut counts = BTreeMap::new();
        for &i in region {
            *counts.entry(self.labels[i]).or_insert(0usize) += 1;
        }
        counts
    }

    /// `N * H(region)` in bits: sum of `-count * log2(count / N)`. Labels
    /// absent from the region contribute zero, matching `0 * log 0 := 0`.
    fn weighted_entropy(&self, region: &[usize]) -> f64 {
        let n = region.len() as f64;
        let mut sum = KahanSum::new();
        for (_, &count) in self.counts(region).iter() {
            let p = count as f64 / n;
            sum.add(-(count as f64) * p.log2());
        }
        sum.value()
    }
}

impl Criterion for GainCriterion<'_> {
    fn leaf(&self, region: &[usize]) -> LeafEval {
        let counts = self.counts(region);
        // Majority label; ascending map order keeps the smallest on ties.
        let mut majority = 0;
        let mut majority_count = 0usize;
        for (&label, &count) in &counts {
            if count > majority_count {
                majority = label;
                majority_count = count;
            }
        }
        LeafEval {
            value: LeafValue::Class(majority),
            score: majority_count as f64 / region.len() as f64,
            weighted: 0.0,
        }
    }

    fn is_terminal(&self, region: &[usize], _leaf: &LeafEval) -> bool {
        let first = self.labels[region[0]];
        region.iter().all(|&i| self.labels[i] == first)
    }

    /// Maximizing information gain over a fixed parent is the same as
    /// minimizing the summed weighted child entropy, so that sum is negated.
    fn split_score(&self, left: &[usize], right: &[usize]) -> f64 {
        -(self.weighted_entropy(left) + self.weighted_entropy(right))
    }

    fn requires_improvement(&self) -> bool {
        false
    }
}

/// Squared-error criterion; leaves hold the region mean.
struct MseCriterion<'a> {
    targets: &'a [f64],
}

impl MseCriterion<'_> {
    fn constant_target(&self, region: &[usize]) -> bool {
        let first = self.targets[region[0]];
        region.iter().all(|&i| self.targets[i] == first)
    }

    /// Sum of squared deviations from the region mean (two-pass).
    fn sse(&self, region: &[usize]) -> f64 {
        let mut sum = KahanSum::new();
        for &i in region {
            sum.add(self.targets[i]);
        }
        let mean = sum.value() / region.len() as f64;
        let mut dev = KahanSum::new();
        for &i in region {
            let d = self.targets[i] - mean;
            dev.add(d * d);
        }
        dev.value()
    }
}

impl Criterion for MseCriterion<'_> {
    fn leaf(&self, region: &[usize]) -> LeafEval {
        if self.constant_target(region) {
            // Keep constant regions exact instead of round-tripping a mean.
            return LeafEval {
                value: LeafValue::Value(self.targets[region[0]]),
                score: 0.0,
                weighted: 0.0,
            };
        }
        let mut sum = KahanSum::new();
        for &i in region {
            sum.add(self.targets[i]);
        }
        let mean = sum.value() / region.len() as f64;
        let mut dev = KahanSum::new();
        for &i in region {
            let d = self.targets[i] - mean;
            dev.add(d * d);
        }
        LeafEval {
            value: LeafValue::Value(mean),
            score: dev.value() / region.len() as f64,
            weighted: 0.0,
        }
    }

    fn is_terminal(&self, region: &[usize], _leaf: &LeafEval) -> bool {
        self.constant_target(region)
    }

    fn split_score(&self, left: &[usize], right: &[usize]) -> f64 {
        -(self.sse(left) + self.sse(right))
    }

    fn requires_improvement(&self) -> bool {
        false
    }
}

/// Fits the MSOP-objective tree on brut data.
///
/// Growth stops at a region when its line-search MSOP reaches
/// `msop_stop_threshold`, the depth budget is spent, no candidate keeps
/// `min_leaf_samples` on both sides, or no candidate strictly improves the
/// weighted region score.
pub fn fit_custom_tree(data: &BrutDataset, config: &TreeConfig) -> Result<TreeNode, TreeError> {
    if data.is_empty() {
        return Err(TreeError::EmptyTrainingSet);
    }
    let mut features = Matrix::new(4);
    let mut ratios = Matrix::new(data.grid().len());
    for example in data.examples() {
        features.push_row(&example.features().as_features());
        let best = example.max_perf();
        let row: Vec<f64> = example.perf().values().map(|&p| p / best).collect();
        ratios.push_row(&row);
    }
    let criterion = MsopCriterion {
        ratios,
        grid: data.grid().values(),
        stop_threshold: config.msop_stop_threshold(),
    };
    let region: Vec<usize> = (0..features.n_rows()).collect();
    Ok(grow(&criterion, &features, region, 0, config))
}

/// Fits a classical classification tree on labeled features.
pub fn fit_classifier_tree(
    data: &LabeledDataset,
    config: &TreeConfig,
) -> Result<TreeNode, TreeError> {
    if data.is_empty() {
        return Err(TreeError::EmptyTrainingSet);
    }
    let mut features = Matrix::new(4);
    let mut labels = Vec::with_capacity(data.len());
    for (x, label) in data.pairs() {
        features.push_row(&x.as_features());
        labels.push(*label);
    }
    let criterion = GainCriterion { labels: &labels };
    let region: Vec<usize> = (0..features.n_rows()).collect();
    Ok(grow(&criterion, &features, region, 0, config))
}

/// Fits a classical regression tree on augmented rows.
pub fn fit_regressor_tree(
    data: &AugmentedDataset,
    config: &TreeConfig,
) -> Result<TreeNode, TreeError> {
    if data.is_empty() {
        return Err(TreeError::EmptyTrainingSet);
    }
    let mut features = Matrix::new(5);
    let mut targets = Vec::with_capacity(data.len());
    for row in data.rows() {
        features.push_row(&row.z());
        targets.push(row.target_perf());
    }
    let criterion = MseCriterion { targets: &targets };
    let region: Vec<usize> = (0..features.n_rows()).collect();
    Ok(grow(&criterion, &features, region, 0, config))
}
