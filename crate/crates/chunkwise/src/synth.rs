//! Synthetic benchmark families standing in for hardware measurements.
//!
//! Training data for the chunk-size learners is a table of loop instances
//! annotated with the performance at every admissible chunk-size. Collecting
//! that table on real hardware means hours of benchmark runs; this module
//! replaces the hardware with an analytic stand-in that keeps every
//! structural property the learners care about:
//!
//! * features derive from a benchmark family exactly as they would on real
//!   kernels: a flop estimate from the operation and its operand size, and an
//!   iteration count from the blocking scheme of the target expression;
//! * each loop instance has a well-defined optimal chunk-size, performance
//!   falls off a smooth asymmetric bell around it in log space (undershooting
//!   the optimum is worse than overshooting, as dynamic scheduling overhead
//!   dominates load imbalance), and more threads help sublinearly;
//! * measurement noise is optional, bounded, and fully reproducible: the
//!   noise of one measurement is a pure function of the generation seed and
//!   the measurement's identity, never of generation order.
//!
//! [`GeneratorSpec::with_seed`] describes a mixed corpus of six families (288
//! examples) on the default chunk-size grid; specs can also be read from TOML
//! files for custom corpora.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{BrutExample, ChunkGrid, ChunkSize, CoreError, FeatureVector};
use crate::dataio::{BrutDataset, DataError};

/// Errors from spec handling or dataset generation.
#[derive(Debug, Error)]
pub enum SynthError {
    #[error("unknown operation {0:?}")]
    UnknownOperation(String),
    #[error("operation {operation} has no block-size mapping for ms={ms}")]
    BlockCoverage { operation: Operation, ms: u32 },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("cannot parse generator spec: {0}")]
    TomlDe(#[from] toml::de::Error),
    #[error("cannot render generator spec: {0}")]
    TomlSer(#[from] toml::ser::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Dense/transposed vector and matrix kernels whose assignment loops get
/// scheduled chunk-wise. The `D`/`TD` prefixes mark dense and transposed
/// dense operands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operation {
    DVecDVecAdd,
    DMatDVecMult,
    DMatDMatAdd,
    TDMatTDMatAdd,
    DMatTDMatAdd,
    TDMatDMatAdd,
    DMatDMatMult,
    TDMatTDMatMult,
    DMatTDMatMult,
    DMatScalarMult,
}

/// Shape of the assignment target, which decides how the blocked loop is
/// counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetShape {
    Vector,
    Matrix,
}

impl Operation {
    pub const ALL: [Operation; 10] = [
        Operation::DVecDVecAdd,
        Operation::DMatDVecMult,
        Operation::DMatDMatAdd,
        Operation::TDMatTDMatAdd,
        Operation::DMatTDMatAdd,
        Operation::TDMatDMatAdd,
        Operation::DMatDMatMult,
        Operation::TDMatTDMatMult,
        Operation::DMatTDMatMult,
        Operation::DMatScalarMult,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Operation::DVecDVecAdd => "dvecdvecadd",
            Operation::DMatDVecMult => "dmatdvecmult",
            Operation::DMatDMatAdd => "dmatdmatadd",
            Operation::TDMatTDMatAdd => "tdmattdmatadd",
            Operation::DMatTDMatAdd => "dmattdmatadd",
            Operation::TDMatDMatAdd => "tdmatdmatadd",
            Operation::DMatDMatMult => "dmatdmatmult",
            Operation::TDMatTDMatMult => "tdmattdmatmult",
            Operation::DMatTDMatMult => "dmattdmatmult",
            Operation::DMatScalarMult => "dmatscalarmult",
        }
    }

    pub fn target_shape(&self) -> TargetShape {
        match self {
            Operation::DVecDVecAdd | Operation::DMatDVecMult => TargetShape::Vector,
            _ => TargetShape::Matrix,
        }
    }

    /// Estimated work of one whole kernel execution, in Mflop.
    ///
    /// Additions and scalings cost one flop per output element; products
    /// cost a multiply-add per contraction step. The flop count is an exact
    /// integer-valued f64 for every `ms` a spec uses, so the estimates land
    /// on exact values like 1.0 and 2000.0.
    pub fn mflop_estimate(&self, ms: u32) -> f64 {
        let m = ms as f64;
        let flop = match self {
            Operation::DVecDVecAdd => m,
            Operation::DMatDVecMult => 2.0 * m * m,
            Operation::DMatDMatAdd
            | Operation::TDMatTDMatAdd
            | Operation::DMatTDMatAdd
            | Operation::TDMatDMatAdd
            | Operation::DMatScalarMult => m * m,
            Operation::DMatDMatMult
            | Operation::TDMatTDMatMult
            | Operation::DMatTDMatMult => 2.0 * m * m * m,
        };
        flop / 1_000_000.0
    }

    /// Block size `(rows, columns)` the expression template assigns with at
    /// operand size `ms`, from the coverage table of measured kernels.
    ///
    /// Sizes outside every table range have no mapping; scalar scaling has no
    /// table entry at all and must carry an explicit block size in its spec.
    pub fn block_size_for(&self, ms: u32) -> Result<(u32, u32), SynthError> {
        let rows: &[(u32, u32, (u32, u32))] = match self {
            Operation::DVecDVecAdd => &[(25_000, 1_000_000, (1, 4096))],
            Operation::DMatDVecMult => &[(250, 2500, (1, 16))],
            Operation::DMatDMatAdd => &[(100, 1000, (4, 1024))],
            Operation::TDMatTDMatAdd => &[(100, 1000, (1024, 4))],
            Operation::DMatTDMatAdd | Operation::TDMatDMatAdd => &[(100, 1000, (64, 64))],
            Operation::DMatDMatMult
            | Operation::TDMatTDMatMult
            | Operation::DMatTDMatMult => {
                &[(100, 999, (64, 64)), (1000, 10_000, (256, 256))]
            }
            Operation::DMatScalarMult => &[],
        };
        rows.iter()
            .find(|(lo, hi, _)| (*lo..=*hi).contains(&ms))
            .map(|(_, _, block)| *block)
            .ok_or(SynthError::BlockCoverage { operation: *self, ms })
    }
}

impl std::fmt::Display for Operation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Operation {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Operation::ALL
            .iter()
            .find(|op| op.name() == s)
            .copied()
            .ok_or_else(|| SynthError::UnknownOperation(s.to_string()))
    }
}

/// Number of scheduled loop iterations for a blocked assignment: one
/// iteration per column block for vector targets, one per block of the
/// row/column block raster for matrix targets.
pub fn n_iterations(shape: TargetShape, ms: u32, block: (u32, u32)) -> u64 {
    let (b1, b2) = (block.0 as u64, block.1 as u64);
    let ms = ms as u64;
    match shape {
        TargetShape::Vector => ms.div_ceil(b2),
        TargetShape::Matrix => ms.div_ceil(b1) * ms.div_ceil(b2),
    }
}

/// Where a family's performance bell peaks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OptimalRule {
    /// The optimum is `alpha` times the equal share `n_ite / n_thr`: big
    /// enough to amortize scheduling, small enough to leave slack for
    /// rebalancing.
    EqualShareFraction { alpha: f64 },
    /// Chunks of one iteration are already optimal, the regime of kernels
    /// whose single iteration is a large block of work.
    AlwaysOne,
}

impl OptimalRule {
    /// Continuous optimum for one loop instance, clamped to the grid span.
    pub fn cs_opt(&self, x: &FeatureVector, grid: &ChunkGrid) -> f64 {
        let raw = match self {
            OptimalRule::EqualShareFraction { alpha } => {
                alpha * x.n_ite() as f64 / x.n_thr() as f64
            }
            OptimalRule::AlwaysOne => 1.0,
        };
        raw.clamp(grid.min() as f64, grid.max() as f64)
    }
}

/// One synthetic benchmark family: an operation plus the sizes, thread
/// counts, and performance-shape parameters to generate it with.
///
/// `ms_values` and `n_thr_values` may be left empty to take the family
/// defaults of the operation. `block_size` overrides the coverage table,
/// which scalar scaling requires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub operation: Operation,
    #[serde(default)]
    pub ms_values: Vec<u32>,
    #[serde(default)]
    pub n_thr_values: Vec<u32>,
    #[serde(default = "default_peak")]
    pub peak_mflops: f64,
    #[serde(default = "default_width_low")]
    pub width_low: f64,
    #[serde(default = "default_width_high")]
    pub width_high: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default = "default_rule")]
    pub rule: OptimalRule,
    #[serde(default)]
    pub block_size: Option<(u32, u32)>,
}

fn default_peak() -> f64 {
    1000.0
}

fn default_width_low() -> f64 {
    0.55
}

fn default_width_high() -> f64 {
    1.3
}

fn default_rule() -> OptimalRule {
    OptimalRule::EqualShareFraction { alpha: 0.5 }
}

fn default_n_thr_values() -> Vec<u32> {
    (1..=8).map(|i| 2 * i).collect()
}

impl SyntheticSpec {
    /// Family defaults for an operation: six log-spaced operand sizes inside
    /// the operation's coverage range (staggered across operations sharing a
    /// flop formula, so no two families collide in feature space), thread
    /// counts 2 to 16, and an equal-share-fraction optimum except for the
    /// matrix product, whose heavyweight iterations are best scheduled one
    /// at a time.
    pub fn default_for(operation: Operation) -> SyntheticSpec {
        let (ms_lo, ms_hi) = match operation {
            Operation::DVecDVecAdd => (25_000, 1_000_000),
            Operation::DMatDVecMult => (250, 2500),
            Operation::DMatDMatAdd => (100, 1000),
            Operation::TDMatTDMatAdd => (120, 960),
            Operation::DMatTDMatAdd => (130, 910),
            Operation::TDMatDMatAdd => (140, 860),
            Operation::DMatDMatMult => (100, 10_000),
            Operation::TDMatTDMatMult => (110, 9000),
            Operation::DMatTDMatMult => (120, 8000),
            Operation::DMatScalarMult => (110, 990),
        };
        let peak_mflops = match operation {
            Operation::DVecDVecAdd => 800.0,
            Operation::DMatDVecMult => 1500.0,
            Operation::DMatDMatAdd => 1200.0,
            Operation::TDMatTDMatAdd => 1100.0,
            Operation::DMatTDMatAdd | Operation::TDMatDMatAdd => 1150.0,
            Operation::DMatDMatMult => 3000.0,
            Operation::TDMatTDMatMult => 2800.0,
            Operation::DMatTDMatMult => 2900.0,
            Operation::DMatScalarMult => 900.0,
        };
        let rule = match operation {
            Operation::DMatDMatMult
            | Operation::TDMatTDMatMult
            | Operation::DMatTDMatMult => OptimalRule::AlwaysOne,
            _ => default_rule(),
        };
        let block_size = match operation {
            Operation::DMatScalarMult => Some((4, 1024)),
            _ => None,
        };
        SyntheticSpec {
            operation,
            ms_values: log_spaced(ms_lo, ms_hi, 6),
            n_thr_values: default_n_thr_values(),
            peak_mflops,
            width_low: default_width_low(),
            width_high: default_width_high(),
            noise_sigma: 0.0,
            rule,
            block_size,
        }
    }

    /// Copy with empty size/thread lists replaced by the family defaults.
    pub fn normalized(&self) -> SyntheticSpec {
        let defaults = SyntheticSpec::default_for(self.operation);
        let mut spec = self.clone();
        if spec.ms_values.is_empty() {
            spec.ms_values = defaults.ms_values;
        }
        if spec.n_thr_values.is_empty() {
            spec.n_thr_values = default_n_thr_values();
        }
        spec
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.ms_values.is_empty() {
            return Err(SynthError::InvalidSpec(format!(
                "family {} has no operand sizes",
                self.operation
            )));
        }
        if self.n_thr_values.is_empty() || self.n_thr_values.contains(&0) {
            return Err(SynthError::InvalidSpec(format!(
                "family {} needs thread counts of at least 1",
                self.operation
            )));
        }
        if !(self.peak_mflops.is_finite() && self.peak_mflops > 0.0) {
            return Err(SynthError::InvalidSpec(format!(
                "family {}: peak_mflops must be finite and positive",
                self.operation
            )));
        }
        for (name, w) in [("width_low", self.width_low), ("width_high", self.width_high)] {
            if !(w.is_finite() && w > 0.0) {
                return Err(SynthError::InvalidSpec(format!(
                    "family {}: {name} must be finite and positive",
                    self.operation
                )));
            }
        }
        if !(self.noise_sigma.is_finite() && (0.0..0.2).contains(&self.noise_sigma)) {
            return Err(SynthError::InvalidSpec(format!(
                "family {}: noise_sigma must lie in [0, 0.2)",
                self.operation
            )));
        }
        if let OptimalRule::EqualShareFraction { alpha } = self.rule {
            if !(alpha.is_finite() && alpha > 0.0) {
                return Err(SynthError::InvalidSpec(format!(
                    "family {}: alpha must be finite and positive",
                    self.operation
                )));
            }
        }
        Ok(())
    }

    /// Block size at `ms`: the explicit override, or the coverage table.
    pub fn effective_block_size(&self, ms: u32) -> Result<(u32, u32), SynthError> {
        match self.block_size {
            Some(block) => Ok(block),
            None => self.operation.block_size_for(ms),
        }
    }
}

/// Corpus description: a seed, a chunk-size grid, and the families to mix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_grid_values")]
    pub grid: Vec<ChunkSize>,
    #[serde(default, rename = "family")]
    pub family: Vec<SyntheticSpec>,
}

fn default_seed() -> u64 {
    42
}

fn default_grid_values() -> Vec<ChunkSize> {
    (1..=10).collect()
}

impl GeneratorSpec {
    /// Default corpus: six families (dense vector addition, matrix/vector
    /// product, two matrix additions, scalar scaling, matrix product), six
    /// operand sizes each, eight thread counts. 288 examples on the default
    /// grid, noise-free.
    pub fn with_seed(seed: u64) -> GeneratorSpec {
        let family = [
            Operation::DVecDVecAdd,
            Operation::DMatDVecMult,
            Operation::DMatDMatAdd,
            Operation::TDMatTDMatAdd,
            Operation::DMatScalarMult,
            Operation::DMatDMatMult,
        ]
        .map(SyntheticSpec::default_for)
        .to_vec();
        GeneratorSpec { seed, grid: default_grid_values(), family }
    }

    /// Copy with every family's noise level replaced.
    pub fn with_noise_sigma(&self, sigma: f64) -> GeneratorSpec {
        let mut spec = self.clone();
        for family in &mut spec.family {
            family.noise_sigma = sigma;
        }
        spec
    }

    pub fn to_toml_string(&self) -> Result<String, SynthError> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn from_toml_str(text: &str) -> Result<GeneratorSpec, SynthError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<GeneratorSpec, SynthError> {
        GeneratorSpec::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// `count` log-spaced integers from `lo` to `hi` inclusive.
///
/// Both bounds must be at least 1 with `lo < hi`, and `count` at least 2;
/// the span must be wide enough that no two rounded values collide.
pub fn log_spaced(lo: u32, hi: u32, count: usize) -> Vec<u32> {
    assert!(count >= 2, "log_spaced needs at least two points");
    assert!(lo >= 1 && lo < hi, "log_spaced needs 1 <= lo < hi");
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let values: Vec<u32> = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            (a + t * (b - a)).exp().round() as u32
        })
        .collect();
    assert!(
        values.windows(2).all(|w| w[0] < w[1]),
        "log_spaced span {lo}..{hi} is too narrow for {count} points"
    );
    values
}

/// Sublinear speedup from `n` threads: `n / (1 + 0.05 (n - 1))`.
fn thread_efficiency(n_thr: u32) -> f64 {
    let n = n_thr as f64;
    n / (1.0 + 0.05 * (n - 1.0))
}

/// Asymmetric log-space bell around the optimum, in (0, 1]. The floor keeps
/// extreme mispairings representable as strictly positive performance.
fn bell(cs: ChunkSize, cs_opt: f64, width_low: f64, width_high: f64) -> f64 {
    let d = (cs as f64).ln() - cs_opt.ln();
    let width = if d < 0.0 { width_low } else { width_high };
    let scaled = d / width;
    (-0.5 * scaled * scaled).exp().max(1e-9)
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Relative noise of one measurement, rejection-truncated at three sigma.
///
/// The stream is keyed by the measurement's identity (operation, features,
/// chunk-size) hashed with the seed, so a measurement's noise never depends
/// on how many examples were generated before it.
fn measurement_noise(
    seed: u64,
    operation: Operation,
    x: &FeatureVector,
    cs: ChunkSize,
    sigma: f64,
) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let mut h = splitmix64(seed);
    for v in [
        operation as u64,
        x.ms() as u64,
        x.mflop().to_bits(),
        x.n_thr() as u64,
        x.n_ite(),
        cs as u64,
    ] {
        h = splitmix64(h ^ v);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    let normal = Normal::new(0.0, sigma).expect("sigma is validated");
    loop {
        let draw = normal.sample(&mut rng);
        if draw.abs() <= 3.0 * sigma {
            return draw;
        }
    }
}

/// Synthetic performance of one measurement, in Mflop/s.
///
/// Pure in all arguments: peak rate, thread efficiency, the bell around the
/// family's optimum, and identity-keyed noise. Always strictly positive.
pub fn synth_perf(
    seed: u64,
    family: &SyntheticSpec,
    grid: &ChunkGrid,
    x: &FeatureVector,
    cs: ChunkSize,
) -> f64 {
    let cs_opt = family.rule.cs_opt(x, grid);
    let clean = family.peak_mflops
        * thread_efficiency(x.n_thr())
        * bell(cs, cs_opt, family.width_low, family.width_high);
    clean * (1.0 + measurement_noise(seed, family.operation, x, cs, family.noise_sigma))
}

/// Grid chunk-size nearest the continuous optimum in the bell's own scaled
/// log metric (the noise-free argmax); ties take the smaller value.
pub fn nearest_grid_chunk(
    grid: &ChunkGrid,
    cs_opt: f64,
    width_low: f64,
    width_high: f64,
) -> ChunkSize {
    let mut best_cs = grid.min();
    let mut best = f64::INFINITY;
    for &cs in grid.values() {
        let d = (cs as f64).ln() - cs_opt.ln();
        let scaled = if d < 0.0 { -d / width_low } else { d / width_high };
        if scaled < best {
            best = scaled;
            best_cs = cs;
        }
    }
    best_cs
}

/// Ground-truth label of one loop instance under a family's performance
/// model: the noise-free optimal grid chunk-size.
pub fn ground_truth_chunk(
    family: &SyntheticSpec,
    grid: &ChunkGrid,
    x: &FeatureVector,
) -> ChunkSize {
    let cs_opt = family.rule.cs_opt(x, grid);
    nearest_grid_chunk(grid, cs_opt, family.width_low, family.width_high)
}

/// Generates the corpus a spec describes: families in spec order, operand
/// sizes and thread counts in list order, one example per combination,
/// annotated with synthetic performance at every grid chunk-size.
pub fn generate_dataset(spec: &GeneratorSpec) -> Result<BrutDataset, SynthError> {
    let grid = ChunkGrid::new(spec.grid.clone())?;
    if spec.family.is_empty() {
        return Err(SynthError::InvalidSpec(
            "spec describes no benchmark families".into(),
        ));
    }
    let mut examples = Vec::new();
    for family in &spec.family {
        let family = family.normalized();
        family.validate()?;
        for &ms in &family.ms_values {
            let block = family.effective_block_size(ms)?;
            let mflop = family.operation.mflop_estimate(ms);
            let shape = family.operation.target_shape();
            for &n_thr in &family.n_thr_values {
                let n_ite = n_iterations(shape, ms, block);
                let x = FeatureVector::new(ms, mflop, n_thr, n_ite)?;
                let mut perf = BTreeMap::new();
                for &cs in grid.values() {
                    perf.insert(cs, synth_perf(spec.seed, &family, &grid, &x, cs));
                }
                examples.push(BrutExample::new(x, perf)?);
            }
        }
    }
    Ok(BrutDataset::new(
        grid,
        examples,
        format!("synthetic seed={}", spec.seed),
    )?)
}
