//! Chunk-size prediction for dynamically scheduled parallel loops.
//!
//! A loop scheduled with OpenMP-style `schedule(dynamic, cs)` semantics trades
//! scheduling overhead (chunk-size too small) against load imbalance
//! (chunk-size too large). The sweet spot depends on the loop at hand, so this
//! crate learns it from data: each training example records a loop instance
//! (problem size, estimated work, thread count, iteration count) together with
//! the measured performance at every admissible chunk-size, and the fitted
//! models map unseen loop instances to a chunk-size from that grid.
//!
//! The crate is organized around the lifecycle of such a predictor:
//!
//! * [`core`] — feature vectors, performance-annotated examples, chunk-size
//!   grids, and the evaluation metrics (accuracy, MSE, and MSOP, the
//!   mean performance ratio relative to the per-example optimum).
//! * [`dataio`] — dataset container, CSV schema, label derivation,
//!   augmentation, shuffled splits, k-fold plans, feature scaling.
//! * [`trees`] — decision-tree learners: a tree grown directly on the MSOP
//!   objective with an early-stop threshold, plus classical classification
//!   (information gain) and regression (MSE) trees.
//! * [`models`] — black-box predictors built from those learners (label
//!   classifiers and perf-regression scanners), the random-guess and
//!   equal-share baselines, hold-out evaluation, and k-fold cross-validation
//!   with a comparison report.
//! * [`synth`] — synthetic benchmark families that stand in for hardware
//!   measurements: analytic flop estimates, blocking tables, iteration
//!   counts, and a seeded performance oracle with a controllable optimum.
//! * [`export`] — versioned JSON model persistence and source-code emission
//!   of a fitted tree as one nested-if function.
//!
//! # Example
//!
//! ```
//! use chunkwise::core::{BrutExample, ChunkGrid, FeatureVector};
//! use chunkwise::dataio::BrutDataset;
//! use chunkwise::models::{fit_preto, PretoLearner};
//! use chunkwise::trees::TreeConfig;
//!
//! // Two loop instances measured on a grid of two chunk-sizes.
//! let grid = ChunkGrid::new(vec![1, 2])?;
//! let examples = vec![
//!     BrutExample::new(
//!         FeatureVector::new(1, 2.3, 1, 1)?,
//!         [(1, 1000.0), (2, 2100.0)].into_iter().collect(),
//!     )?,
//!     BrutExample::new(
//!         FeatureVector::new(1, 1.5, 1, 1)?,
//!         [(1, 2500.0), (2, 1200.0)].into_iter().collect(),
//!     )?,
//! ];
//! let data = BrutDataset::new(grid, examples, "inline")?;
//!
//! let model = fit_preto(&data, &TreeConfig::default(), PretoLearner::Custom)?;
//! let probe = FeatureVector::new(1, 2.0, 1, 1)?;
//! assert!(model.grid().contains(model.predict_chunk(&probe)));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod core;
pub mod dataio;
pub mod export;
pub mod models;
pub mod synth;
pub mod trees;
