//! Command-line front end for the chunkwise library: generate a synthetic
//! corpus, split it, train and compare chunk-size models, evaluate them,
//! predict, and export trees as C source.
//!
//! Exit codes are a stable contract for pipeline callers: 0 success, 2
//! usage errors and missing input files, 3 data or schema errors, 4
//! unsupported operations (such as exporting a posto model as a tree).
//!
//! Every file-producing command writes a `<output>.manifest.json` next to
//! its primary output, recording the resolved flags, the seed, and SHA-256
//! checksums of all inputs and outputs. Re-running a command with the flags
//! a manifest records reproduces its outputs byte for byte.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use chunkwise::core::{ChunkSize, FeatureVector};
use chunkwise::dataio::{load_brut_csv, save_brut_csv, shuffle_split, BrutDataset, DataError};
use chunkwise::export::{
    emit_tree_source, load_model, save_model, ExportError, MODEL_VERSION,
};
use chunkwise::models::{
    cross_validate, evaluate_model, evaluations_to_csv, FittedModel, ModelError, ModelSpec,
};
use chunkwise::synth::{generate_dataset, GeneratorSpec, SynthError};
use chunkwise::trees::TreeConfig;

/// Writes to stdout, exiting quietly if the downstream consumer closed the
/// pipe (e.g. `chunkwise train ... | head -1`). Rust ignores SIGPIPE, so
/// without this a closed pipe would surface as a write panic. Every command
/// finishes its file side effects before printing, so stopping here loses
/// nothing but the remaining chatter.
fn emit(text: fmt::Arguments) {
    if std::io::stdout().write_fmt(text).is_err() {
        std::process::exit(0);
    }
}

macro_rules! outln {
    ($($arg:tt)*) => { emit(format_args!("{}\n", format_args!($($arg)*))) };
}

macro_rules! out {
    ($($arg:tt)*) => { emit(format_args!($($arg)*)) };
}

/// Best-effort stderr notes; a closed stderr must not kill a run whose real
/// outputs are files or stdout.
fn note(text: fmt::Arguments) {
    let _ = std::io::stderr().write_fmt(text);
}

macro_rules! noteln {
    ($($arg:tt)*) => { note(format_args!("{}\n", format_args!($($arg)*))) };
}

/// Model names as spelled on the command line.
const MODEL_NAMES: [&str; 6] = [
    "preto-custom",
    "preto-dtc",
    "posto-dtr",
    "random-guess",
    "equal-share",
    "argmax-oracle",
];

#[derive(Parser)]
#[command(
    name = "chunkwise",
    version,
    about = "Learns chunk-size predictors for dynamically scheduled parallel loops"
)]
struct Cli {
    /// Worker threads for parallel sections. Results merge in a fixed
    /// order, so the thread count never changes any output. Defaults to the
    /// available cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark corpus as an annotated CSV.
    GenData(GenDataArgs),
    /// Shuffle-split an annotated CSV into train and test CSVs.
    Split(SplitArgs),
    /// Train one model and save it as a JSON document.
    Train(TrainArgs),
    /// Compare models by k-fold cross-validation; write the report CSV.
    CrossValidate(CrossValidateArgs),
    /// Score a saved model on an annotated CSV; print MSOP with 3 decimals.
    Evaluate(EvaluateArgs),
    /// Predict a chunk-size for one feature vector; print a single integer.
    Predict(PredictArgs),
    /// Export a preto tree as one C function.
    ExportTree(ExportTreeArgs),
}

#[derive(Args)]
struct GenDataArgs {
    /// Generator spec (TOML); defaults to the built-in six-family corpus.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Generator seed; falls back to CHUNKWISE_SEED, then the spec's own.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the measurement-noise sigma of every family.
    #[arg(long, value_parser = parse_sigma)]
    noise_sigma: Option<f64>,
}

#[derive(Args)]
struct SplitArgs {
    /// Annotated CSV to split.
    #[arg(long)]
    data: PathBuf,
    /// Output CSV for the training side.
    #[arg(long)]
    out_train: PathBuf,
    /// Output CSV for the test side.
    #[arg(long)]
    out_test: PathBuf,
    /// Fraction of examples on the training side.
    #[arg(long, default_value_t = 2.0 / 3.0, value_parser = parse_open_unit)]
    ratio: f64,
    /// Shuffle seed; falls back to CHUNKWISE_SEED, then 42.
    #[arg(long)]
    seed: Option<u64>,
}

/// Tree-growing flags shared by train and cross-validate; defaults mirror
/// the library defaults.
#[derive(Args)]
struct TreeFlags {
    /// Maximum tree depth.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    max_depth: u32,
    /// Minimum examples a leaf may hold.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    min_leaf: u32,
    /// Mean performance ratio at which a region stops splitting.
    #[arg(long, default_value_t = 0.95, value_parser = parse_unit_interval)]
    msop_stop: f64,
}

impl TreeFlags {
    fn config(&self) -> TreeConfig {
        TreeConfig::new(self.max_depth as usize, self.min_leaf as usize, self.msop_stop)
            .expect("flag parsers already bounded the values")
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Annotated training CSV.
    #[arg(long)]
    data: PathBuf,
    /// Model kind to fit.
    #[arg(long, value_parser = MODEL_NAMES)]
    model: String,
    /// Output model file (JSON).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tree: TreeFlags,
    /// Seed for the random-guess baseline; falls back to CHUNKWISE_SEED,
    /// then 42.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CrossValidateArgs {
    /// Annotated CSV to cross-validate on.
    #[arg(long)]
    data: PathBuf,
    /// Number of folds.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(2..))]
    k: u32,
    /// Fold-assignment (and random-guess) seed; falls back to
    /// CHUNKWISE_SEED, then 42.
    #[arg(long)]
    seed: Option<u64>,
    /// Models to compare.
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = MODEL_NAMES,
        default_value = "preto-custom,preto-dtc,posto-dtr,random-guess,equal-share,argmax-oracle"
    )]
    models: Vec<String>,
    /// Output report CSV.
    #[arg(long)]
    report: PathBuf,
    #[command(flatten)]
    tree: TreeFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Saved model file.
    #[arg(long)]
    model: PathBuf,
    /// Annotated CSV to score on.
    #[arg(long)]
    data: PathBuf,
    /// Optional evaluation CSV to write.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Saved model file.
    #[arg(long)]
    model: PathBuf,
    /// Operand size.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    ms: u32,
    /// Estimated work in Mflop.
    #[arg(long, value_parser = parse_non_negative)]
    mflop: f64,
    /// Worker thread count.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    n_thr: u32,
    /// Loop iteration count.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n_ite: u64,
}

#[derive(Args)]
struct ExportTreeArgs {
    /// Saved preto model file.
    #[arg(long)]
    model: PathBuf,
    /// Output source file.
    #[arg(long)]
    out: PathBuf,
    /// Name of the emitted C function.
    #[arg(long, default_value = "predict_chunk_size", value_parser = parse_identifier)]
    function_name: String,
}

fn parse_unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn parse_open_unit(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not a finite non-negative number"))
    }
}

fn parse_sigma(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..0.2).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 0.2)"))
    }
}

fn parse_identifier(s: &str) -> Result<String, String> {
    let mut chars = s.chars();
    let head_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    if head_ok && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
        Ok(s.to_string())
    } else {
        Err(format!("{s:?} is not a valid C function name"))
    }
}

/// Errors after argument parsing, each mapped to one contract exit code.
enum CliError {
    /// Bad flag combinations or a missing input file: exit 2.
    Usage(String),
    /// Malformed or incompatible data, schema, or model files: exit 3.
    Data(String),
    /// Structurally valid request the model kind cannot satisfy: exit 4.
    Unsupported(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Unsupported(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Unsupported(m) => {
                f.write_str(m)
            }
        }
    }
}

/// Missing files are usage-level failures (exit 2); everything else about a
/// file's content is a data error (exit 3).
fn io_error(path: &Path, err: &std::io::Error) -> CliError {
    if err.kind() == ErrorKind::NotFound {
        CliError::Usage(format!("{}: file not found", path.display()))
    } else {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

fn data_error(path: &Path, err: DataError) -> CliError {
    match err {
        DataError::Io(e) => io_error(path, &e),
        other => CliError::Data(format!("{}: {other}", path.display())),
    }
}

fn synth_error(path: Option<&Path>, err: SynthError) -> CliError {
    match (path, err) {
        (Some(p), SynthError::Io(e)) => io_error(p, &e),
        (Some(p), other) => CliError::Data(format!("{}: {other}", p.display())),
        (None, other) => CliError::Data(other.to_string()),
    }
}

fn export_error(path: &Path, err: ExportError) -> CliError {
    match err {
        ExportError::Io(e) => io_error(path, &e),
        ExportError::Codegen(m) => CliError::Unsupported(m),
        ExportError::UnsupportedVersion { found } => CliError::Data(format!(
            "{}: model version {found} is newer than this build reads ({MODEL_VERSION})",
            path.display()
        )),
        other => CliError::Data(format!("{}: {other}", path.display())),
    }
}

fn model_error(err: ModelError) -> CliError {
    CliError::Data(err.to_string())
}

/// Resolves a seed: explicit flag, else the CHUNKWISE_SEED environment
/// variable, else `fallback`.
fn resolve_seed(flag: Option<u64>, fallback: u64) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("CHUNKWISE_SEED") {
        Ok(text) => text.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "CHUNKWISE_SEED must be an unsigned integer (got {text:?})"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(fallback),
        Err(std::env::VarError::NotUnicode(_)) => Err(CliError::Usage(
            "CHUNKWISE_SEED is not valid unicode".into(),
        )),
    }
}

#[derive(Serialize)]
struct FileStamp {
    path: String,
    sha256: String,
}

/// Record of one run: resolved flags and checksummed inputs/outputs, written
/// next to the primary output. Field order is fixed and flags are sorted,
/// so the manifest itself is byte-stable.
#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    flags: BTreeMap<&'static str, serde_json::Value>,
    inputs: Vec<FileStamp>,
    outputs: Vec<FileStamp>,
}

impl RunManifest {
    fn new(command: &'static str, flags: BTreeMap<&'static str, serde_json::Value>) -> Self {
        RunManifest {
            tool: "chunkwise",
            version: env!("CARGO_PKG_VERSION"),
            command,
            flags,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn stamp_input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(stamp(path)?);
        Ok(())
    }

    fn stamp_output(&mut self, path: &Path) -> Result<(), CliError> {
        self.outputs.push(stamp(path)?);
        Ok(())
    }

    /// Writes `<primary_output>.manifest.json` and returns its path.
    fn write(&self, primary_output: &Path) -> Result<PathBuf, CliError> {
        let path = manifest_path(primary_output);
        let mut text = serde_json::to_string_pretty(self)
            .expect("manifests hold only serializable plain data");
        text.push('\n');
        write_text(&path, &text)?;
        Ok(path)
    }
}

fn manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(".manifest.json");
    primary_output.with_file_name(name)
}

fn stamp(path: &Path) -> Result<FileStamp, CliError> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, &e))?;
    let digest = Sha256::digest(&bytes);
    let mut sha256 = String::with_capacity(64);
    for byte in digest {
        sha256.push_str(&format!("{byte:02x}"));
    }
    Ok(FileStamp { path: path.display().to_string(), sha256 })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_error(path, &e))
}

fn load_data(path: &Path) -> Result<BrutDataset, CliError> {
    load_brut_csv(path).map_err(|e| data_error(path, e))
}

fn load_model_file(path: &Path) -> Result<FittedModel, CliError> {
    load_model(path).map_err(|e| export_error(path, e))
}

fn json_path(path: &Path) -> serde_json::Value {
    serde_json::Value::String(path.display().to_string())
}

fn tree_flags_json(flags: &mut BTreeMap<&'static str, serde_json::Value>, tree: &TreeFlags) {
    flags.insert("max-depth", tree.max_depth.into());
    flags.insert("min-leaf", tree.min_leaf.into());
    flags.insert("msop-stop", tree.msop_stop.into());
}

fn cmd_gen_data(args: GenDataArgs, jobs: usize) -> Result<(), CliError> {
    let mut spec = match &args.spec {
        Some(path) => GeneratorSpec::load(path).map_err(|e| synth_error(Some(path), e))?,
        None => GeneratorSpec::with_seed(42),
    };
    spec.seed = resolve_seed(args.seed, spec.seed)?;
    if let Some(sigma) = args.noise_sigma {
        spec = spec.with_noise_sigma(sigma);
    }
    let data = generate_dataset(&spec)
        .map_err(|e| synth_error(args.spec.as_deref(), e))?;
    save_brut_csv(&data, &args.out).map_err(|e| data_error(&args.out, e))?;

    let mut flags = BTreeMap::new();
    flags.insert(
        "spec",
        args.spec.as_deref().map(json_path).unwrap_or_else(|| "builtin".into()),
    );
    flags.insert("out", json_path(&args.out));
    flags.insert("seed", spec.seed.into());
    flags.insert(
        "noise-sigma",
        args.noise_sigma.map(Into::into).unwrap_or(serde_json::Value::Null),
    );
    flags.insert("jobs", (jobs as u64).into());
    let mut manifest = RunManifest::new("gen-data", flags);
    if let Some(path) = &args.spec {
        manifest.stamp_input(path)?;
    }
    manifest.stamp_output(&args.out)?;
    let manifest_file = manifest.write(&args.out)?;

    outln!("wrote {} examples to {}", data.len(), args.out.display());
    outln!("manifest: {}", manifest_file.display());
    Ok(())
}

fn cmd_split(args: SplitArgs, jobs: usize) -> Result<(), CliError> {
    let data = load_data(&args.data)?;
    let seed = resolve_seed(args.seed, 42)?;
    let (train, test) =
        shuffle_split(&data, args.ratio, seed).map_err(|e| data_error(&args.data, e))?;
    save_brut_csv(&train, &args.out_train).map_err(|e| data_error(&args.out_train, e))?;
    save_brut_csv(&test, &args.out_test).map_err(|e| data_error(&args.out_test, e))?;

    let mut flags = BTreeMap::new();
    flags.insert("data", json_path(&args.data));
    flags.insert("out-train", json_path(&args.out_train));
    flags.insert("out-test", json_path(&args.out_test));
    flags.insert("ratio", args.ratio.into());
    flags.insert("seed", seed.into());
    flags.insert("jobs", (jobs as u64).into());
    let mut manifest = RunManifest::new("split", flags);
    manifest.stamp_input(&args.data)?;
    manifest.stamp_output(&args.out_train)?;
    manifest.stamp_output(&args.out_test)?;
    let manifest_file = manifest.write(&args.out_train)?;

    outln!("train: {} examples -> {}", train.len(), args.out_train.display());
    outln!("test: {} examples -> {}", test.len(), args.out_test.display());
    outln!("manifest: {}", manifest_file.display());
    Ok(())
}

fn cmd_train(args: TrainArgs, jobs: usize) -> Result<(), CliError> {
    let data = load_data(&args.data)?;
    let seed = resolve_seed(args.seed, 42)?;
    let config = args.tree.config();
    let spec = ModelSpec::by_name(&args.model, &config, seed)
        .expect("clap restricted --model to the known names");
    let model = spec.fit(&data).map_err(model_error)?;
    let training = evaluate_model(&model, &data).map_err(model_error)?;
    save_model(&model, &args.out).map_err(|e| export_error(&args.out, e))?;

    let mut flags = BTreeMap::new();
    flags.insert("data", json_path(&args.data));
    flags.insert("model", args.model.clone().into());
    flags.insert("out", json_path(&args.out));
    flags.insert("seed", seed.into());
    tree_flags_json(&mut flags, &args.tree);
    flags.insert("jobs", (jobs as u64).into());
    let mut manifest = RunManifest::new("train", flags);
    manifest.stamp_input(&args.data)?;
    manifest.stamp_output(&args.out)?;
    let manifest_file = manifest.write(&args.out)?;

    outln!("model: {}", model.name());
    outln!("training MSOP: {:.6}", training.msop);
    match model.node_count() {
        Some(nodes) => outln!("nodes: {nodes}"),
        None => outln!("nodes: -"),
    }
    outln!("saved to {}", args.out.display());
    outln!("manifest: {}", manifest_file.display());
    Ok(())
}

fn cmd_cross_validate(args: CrossValidateArgs, jobs: usize) -> Result<(), CliError> {
    let data = load_data(&args.data)?;
    let seed = resolve_seed(args.seed, 42)?;
    let config = args.tree.config();
    let specs: Vec<ModelSpec> = args
        .models
        .iter()
        .map(|name| {
            ModelSpec::by_name(name, &config, seed)
                .expect("clap restricted --models to the known names")
        })
        .collect();
    let report = cross_validate(&data, args.k as usize, seed, &specs, true)
        .map_err(model_error)?;
    write_text(&args.report, &report.to_csv_string())?;

    let mut flags = BTreeMap::new();
    flags.insert("data", json_path(&args.data));
    flags.insert("k", args.k.into());
    flags.insert("seed", seed.into());
    flags.insert(
        "models",
        serde_json::Value::Array(
            args.models.iter().map(|m| m.as_str().into()).collect(),
        ),
    );
    flags.insert("report", json_path(&args.report));
    tree_flags_json(&mut flags, &args.tree);
    flags.insert("jobs", (jobs as u64).into());
    let mut manifest = RunManifest::new("cross-validate", flags);
    manifest.stamp_input(&args.data)?;
    manifest.stamp_output(&args.report)?;
    let manifest_file = manifest.write(&args.report)?;

    out!("{}", report.to_table_string());
    outln!("report: {}", args.report.display());
    outln!("manifest: {}", manifest_file.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs, jobs: usize) -> Result<(), CliError> {
    let model = load_model_file(&args.model)?;
    let data = load_data(&args.data)?;
    // Every chunk-size the model can predict must be measured in the data,
    // or MSOP is undefined. The oracle reads the data's own optima and
    // scores any annotated CSV.
    if !model.is_control() {
        if let Some(&cs) =
            model.grid().values().iter().find(|&&cs| !data.grid().contains(cs))
        {
            return Err(CliError::Data(format!(
                "model grid contains chunk-size {cs} that {} does not measure",
                args.data.display()
            )));
        }
    }
    let evaluation = evaluate_model(&model, &data).map_err(model_error)?;
    if let Some(report) = &args.report {
        write_text(report, &evaluations_to_csv(std::slice::from_ref(&evaluation)))?;
        let mut flags = BTreeMap::new();
        flags.insert("model", json_path(&args.model));
        flags.insert("data", json_path(&args.data));
        flags.insert("report", json_path(report));
        flags.insert("jobs", (jobs as u64).into());
        let mut manifest = RunManifest::new("evaluate", flags);
        manifest.stamp_input(&args.model)?;
        manifest.stamp_input(&args.data)?;
        manifest.stamp_output(report)?;
        let manifest_file = manifest.write(report)?;
        noteln!("report: {}", report.display());
        noteln!("manifest: {}", manifest_file.display());
    }
    outln!("{:.3}", evaluation.msop);
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let model = load_model_file(&args.model)?;
    if model.is_control() {
        return Err(CliError::Unsupported(
            "the argmax oracle reads measured optima; it cannot predict from features".into(),
        ));
    }
    let x = FeatureVector::new(args.ms, args.mflop, args.n_thr, args.n_ite)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let cs: ChunkSize = model.predict_chunk(&x);
    outln!("{cs}");
    Ok(())
}

fn cmd_export_tree(args: ExportTreeArgs, jobs: usize) -> Result<(), CliError> {
    let model = load_model_file(&args.model)?;
    let tree = match model.name() {
        "preto-custom" | "preto-dtc" => model.tree().expect("preto models carry a tree"),
        "posto-dtr" => {
            return Err(CliError::Unsupported(
                "posto models optimize at prediction time; there is no chunk-size tree to export"
                    .into(),
            ))
        }
        other => {
            return Err(CliError::Unsupported(format!(
                "{other} has no tree to export"
            )))
        }
    };
    let source = emit_tree_source(tree, &args.function_name)
        .map_err(|e| export_error(&args.out, e))?;
    write_text(&args.out, &source)?;

    let mut flags = BTreeMap::new();
    flags.insert("model", json_path(&args.model));
    flags.insert("out", json_path(&args.out));
    flags.insert("function-name", args.function_name.clone().into());
    flags.insert("jobs", (jobs as u64).into());
    let mut manifest = RunManifest::new("export-tree", flags);
    manifest.stamp_input(&args.model)?;
    manifest.stamp_output(&args.out)?;
    let manifest_file = manifest.write(&args.out)?;

    outln!("wrote {} to {}", args.function_name, args.out.display());
    outln!("manifest: {}", manifest_file.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli
        .jobs
        .map(|j| j as usize)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        });
    // Bounds every parallel section in the library; merge order is fixed, so
    // this affects speed only.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();

    let result = match cli.command {
        Command::GenData(args) => cmd_gen_data(args, jobs),
        Command::Split(args) => cmd_split(args, jobs),
        Command::Train(args) => cmd_train(args, jobs),
        Command::CrossValidate(args) => cmd_cross_validate(args, jobs),
        Command::Evaluate(args) => cmd_evaluate(args, jobs),
        Command::Predict(args) => cmd_predict(args),
        Command::ExportTree(args) => cmd_export_tree(args, jobs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            noteln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
