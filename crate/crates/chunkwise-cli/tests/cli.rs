//! End-to-end tests of the `chunkwise` binary: the full workflow, the exit
//! code contract, output formats, seeds, and byte-identical re-runs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chunkwise"));
    // An ambient seed would silently change every default-seed assertion.
    cmd.env_remove("CHUNKWISE_SEED");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("the chunkwise binary should spawn")
}

fn stdout_of(cmd: &mut Command) -> String {
    let out = run(cmd);
    assert!(
        out.status.success(),
        "command failed with {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout should be UTF-8")
}

fn exit_code(cmd: &mut Command) -> i32 {
    run(cmd).status.code().expect("the process should exit, not be signalled")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn gen_corpus(dir: &Path, seed: u64) -> PathBuf {
    let corpus = dir.join("corpus.csv");
    stdout_of(bin().args(["gen-data", "--out"]).arg(&corpus).args(["--seed", &seed.to_string()]));
    corpus
}

fn train(dir: &Path, data: &Path, model: &str) -> PathBuf {
    let out = dir.join(format!("{model}.json"));
    stdout_of(
        bin().args(["train", "--model", model, "--data"]).arg(data).arg("--out").arg(&out),
    );
    out
}

#[test]
fn full_pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 42);
    assert_eq!(read(&corpus).lines().count(), 289, "header plus 288 examples");

    let train_csv = dir.path().join("train.csv");
    let test_csv = dir.path().join("test.csv");
    let split_log = stdout_of(
        bin()
            .args(["split", "--data"])
            .arg(&corpus)
            .arg("--out-train")
            .arg(&train_csv)
            .arg("--out-test")
            .arg(&test_csv),
    );
    assert!(split_log.contains("train: 192 examples"), "got: {split_log}");
    assert!(split_log.contains("test: 96 examples"), "got: {split_log}");

    let model = dir.path().join("custom.json");
    let train_log = stdout_of(
        bin()
            .args(["train", "--model", "preto-custom", "--data"])
            .arg(&train_csv)
            .arg("--out")
            .arg(&model),
    );
    assert!(train_log.contains("training MSOP: 0."), "got: {train_log}");
    assert!(train_log.contains("nodes: "), "got: {train_log}");

    let msop = stdout_of(
        bin().args(["evaluate", "--model"]).arg(&model).arg("--data").arg(&test_csv),
    );
    let msop = msop.trim();
    assert!(
        msop.len() == 5 && msop.starts_with("0.") || msop == "1.000",
        "evaluate should print a bare 3-decimal scalar, got {msop:?}"
    );

    let chunk = stdout_of(
        bin()
            .args(["predict", "--model"])
            .arg(&model)
            .args(["--ms", "100", "--mflop", "5.0", "--n-thr", "4", "--n-ite", "200"]),
    );
    let chunk: u32 = chunk.trim().parse().expect("predict should print one integer");
    assert!((1..=10).contains(&chunk), "prediction {chunk} should sit in the grid");

    let source = dir.path().join("tree.c");
    stdout_of(
        bin().args(["export-tree", "--model"]).arg(&model).arg("--out").arg(&source),
    );
    let text = read(&source);
    assert!(text.starts_with("int predict_chunk_size(const double* featureVector) {"));
    assert!(text.contains("if (featureVector["));
}

#[test]
fn cross_validate_reports_all_models_and_selects_a_learner() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 42);
    let report = dir.path().join("report.csv");
    let log = stdout_of(
        bin()
            .args(["cross-validate", "--data"])
            .arg(&corpus)
            .arg("--report")
            .arg(&report),
    );
    assert!(log.contains("selected: "), "got: {log}");
    assert!(log.contains("argmax-oracle"), "the control row belongs in the table");

    let csv = read(&report);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "model,msop_mean,msop_std,accuracy_mean,model_evals_per_prediction,node_count_mean,selected"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6, "default roster holds six models");
    let oracle = rows.iter().find(|r| r.starts_with("argmax-oracle,")).unwrap();
    assert!(
        oracle.starts_with("argmax-oracle,1,0,1,0,,"),
        "the oracle scores exactly 1: {oracle}"
    );
    assert!(
        oracle.ends_with(",false"),
        "the control must never win selection: {oracle}"
    );
    let winners = rows.iter().filter(|r| r.ends_with(",true")).count();
    assert_eq!(winners, 1, "exactly one model is selected");

    // A five-model roster without the control compares exactly those five.
    let five = dir.path().join("five.csv");
    stdout_of(
        bin()
            .args(["cross-validate", "--data"])
            .arg(&corpus)
            .arg("--report")
            .arg(&five)
            .args(["--models", "preto-custom,preto-dtc,posto-dtr,random-guess,equal-share"]),
    );
    assert_eq!(read(&five).lines().count(), 6, "header plus five rows");
}

#[test]
fn missing_input_files_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let absent = dir.path().join("absent.csv");
    let out = dir.path().join("out");
    assert_eq!(
        exit_code(
            bin()
                .args(["train", "--model", "preto-custom", "--data"])
                .arg(&absent)
                .arg("--out")
                .arg(&out)
        ),
        2
    );
    assert_eq!(
        exit_code(
            bin().args(["evaluate", "--model"]).arg(&absent).arg("--data").arg(&absent)
        ),
        2
    );
    assert_eq!(
        exit_code(bin().args(["gen-data", "--spec"]).arg(&absent).arg("--out").arg(&out)),
        2
    );
}

#[test]
fn bad_flags_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 1);
    let out = dir.path().join("out");
    let train_args = |model: &str| {
        let mut cmd = bin();
        cmd.args(["train", "--model", model, "--data"]).arg(&corpus).arg("--out").arg(&out);
        cmd
    };
    assert_eq!(exit_code(train_args("preto-custom").args(["--max-depth", "0"])), 2);
    assert_eq!(exit_code(train_args("preto-custom").args(["--msop-stop", "1.5"])), 2);
    assert_eq!(exit_code(&mut train_args("made-up-model")), 2);
    assert_eq!(
        exit_code(
            bin()
                .args(["split", "--ratio", "1.0", "--data"])
                .arg(&corpus)
                .arg("--out-train")
                .arg(dir.path().join("a"))
                .arg("--out-test")
                .arg(dir.path().join("b"))
        ),
        2
    );
    assert_eq!(
        exit_code(
            train_args("preto-custom").env("CHUNKWISE_SEED", "not-a-number")
        ),
        2,
        "a malformed CHUNKWISE_SEED is a usage error"
    );
}

#[test]
fn malformed_inputs_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let bad_csv = dir.path().join("bad.csv");
    std::fs::write(&bad_csv, "garbage,not,a,schema\n1,2,3,4\n").unwrap();
    assert_eq!(
        exit_code(
            bin()
                .args(["train", "--model", "preto-custom", "--data"])
                .arg(&bad_csv)
                .arg("--out")
                .arg(&out)
        ),
        3
    );

    let bad_model = dir.path().join("bad.json");
    std::fs::write(&bad_model, "{\"format\": \"something else\"}\n").unwrap();
    let corpus = gen_corpus(dir.path(), 1);
    assert_eq!(
        exit_code(
            bin().args(["evaluate", "--model"]).arg(&bad_model).arg("--data").arg(&corpus)
        ),
        3
    );

    // A model whose grid the data never measured cannot be scored on it.
    let alien_csv = dir.path().join("alien.csv");
    std::fs::write(
        &alien_csv,
        "ms,mflop,n_thr,n_ite,perf_cs_20,perf_cs_30\n100,5.0,4,100,1.0,2.0\n",
    )
    .unwrap();
    let alien_model = train(dir.path(), &alien_csv, "equal-share");
    assert_eq!(
        exit_code(
            bin().args(["evaluate", "--model"]).arg(&alien_model).arg("--data").arg(&corpus)
        ),
        3,
        "model grid {{20, 30}} is not measured by the default corpus"
    );
}

#[test]
fn unsupported_requests_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 1);
    let out = dir.path().join("tree.c");

    let posto = train(dir.path(), &corpus, "posto-dtr");
    assert_eq!(
        exit_code(bin().args(["export-tree", "--model"]).arg(&posto).arg("--out").arg(&out)),
        4
    );

    let equal = train(dir.path(), &corpus, "equal-share");
    assert_eq!(
        exit_code(bin().args(["export-tree", "--model"]).arg(&equal).arg("--out").arg(&out)),
        4
    );

    let oracle = train(dir.path(), &corpus, "argmax-oracle");
    assert_eq!(
        exit_code(
            bin()
                .args(["predict", "--model"])
                .arg(&oracle)
                .args(["--ms", "100", "--mflop", "5.0", "--n-thr", "4", "--n-ite", "100"])
        ),
        4
    );
}

#[test]
fn oracle_evaluates_to_one_on_any_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 3);
    let oracle = train(dir.path(), &corpus, "argmax-oracle");
    let other = gen_corpus(&dir.path().join("."), 99);
    let msop =
        stdout_of(bin().args(["evaluate", "--model"]).arg(&oracle).arg("--data").arg(&other));
    assert_eq!(msop, "1.000\n", "evaluate prints the bare scalar and nothing else");
}

#[test]
fn equal_share_prediction_anchors_hold() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 1);
    let model = train(dir.path(), &corpus, "equal-share");
    let predict = |n_ite: &str| {
        stdout_of(
            bin()
                .args(["predict", "--model"])
                .arg(&model)
                .args(["--ms", "100", "--mflop", "5.0", "--n-thr", "16", "--n-ite", n_ite]),
        )
    };
    assert_eq!(predict("245"), "10\n", "245 iterations over 16 threads round to 10");
    assert_eq!(predict("100"), "7\n", "100 iterations over 16 threads round to 7");
}

#[test]
fn identical_flags_reproduce_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let replay = |sub: &Path| -> (Vec<u8>, Vec<u8>, Vec<u8>, Vec<u8>) {
        std::fs::create_dir_all(sub).unwrap();
        let corpus = gen_corpus(sub, 5);
        let model = train(sub, &corpus, "preto-custom");
        let report = sub.join("report.csv");
        stdout_of(
            bin()
                .args(["cross-validate", "--seed", "5", "--data"])
                .arg(&corpus)
                .arg("--report")
                .arg(&report),
        );
        let source = sub.join("tree.c");
        stdout_of(
            bin().args(["export-tree", "--model"]).arg(&model).arg("--out").arg(&source),
        );
        (
            std::fs::read(&corpus).unwrap(),
            std::fs::read(&model).unwrap(),
            std::fs::read(&report).unwrap(),
            std::fs::read(&source).unwrap(),
        )
    };
    let first = replay(&dir.path().join("a"));
    let second = replay(&dir.path().join("b"));
    assert_eq!(first.0, second.0, "corpus CSV");
    assert_eq!(first.1, second.1, "model file");
    assert_eq!(first.2, second.2, "report CSV");
    assert_eq!(first.3, second.3, "exported source");
}

#[test]
fn seed_environment_variable_matches_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 2);
    let split = |dest: &str, extra: &dyn Fn(&mut Command)| -> Vec<u8> {
        let train_csv = dir.path().join(format!("{dest}-train.csv"));
        let mut cmd = bin();
        cmd.args(["split", "--data"])
            .arg(&corpus)
            .arg("--out-train")
            .arg(&train_csv)
            .arg("--out-test")
            .arg(dir.path().join(format!("{dest}-test.csv")));
        extra(&mut cmd);
        stdout_of(&mut cmd);
        std::fs::read(&train_csv).unwrap()
    };
    let by_flag = split("flag", &|cmd| {
        cmd.args(["--seed", "7"]);
    });
    let by_env = split("env", &|cmd| {
        cmd.env("CHUNKWISE_SEED", "7");
    });
    let default = split("default", &|_| {});
    assert_eq!(by_flag, by_env, "the environment seed is the flag's fallback");
    assert_ne!(by_flag, default, "seed 7 differs from the default seed");
}

#[test]
fn every_file_producing_run_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 4);
    assert!(dir.path().join("corpus.csv.manifest.json").is_file());

    let model = train(dir.path(), &corpus, "preto-dtc");
    let manifest = read(&dir.path().join("preto-dtc.json.manifest.json"));
    assert!(manifest.contains("\"command\": \"train\""));
    assert!(manifest.contains("\"sha256\""));
    assert!(manifest.contains("\"max-depth\": 8"), "defaults are echoed: {manifest}");

    let report = dir.path().join("eval.csv");
    stdout_of(
        bin()
            .args(["evaluate", "--model"])
            .arg(&model)
            .arg("--data")
            .arg(&corpus)
            .arg("--report")
            .arg(&report),
    );
    assert!(dir.path().join("eval.csv.manifest.json").is_file());
}

#[test]
fn closed_stdout_neither_panics_nor_fails() {
    // `chunkwise ... | head -1` closes our stdout early; the run must keep
    // its file side effects and exit cleanly instead of panicking on the
    // dead pipe. Closing stdout before exec makes the first print fail
    // deterministically.
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new("sh")
        .arg("-c")
        .arg(format!(
            "exec >&-; {} gen-data --out c.csv --seed 1",
            env!("CARGO_BIN_EXE_chunkwise")
        ))
        .current_dir(dir.path())
        .env_remove("CHUNKWISE_SEED")
        .output()
        .unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(out.status.success(), "exit {:?}, stderr: {stderr}", out.status.code());
    assert!(!stderr.contains("panicked"), "stderr: {stderr}");
    assert!(dir.path().join("c.csv").is_file(), "the artifact still gets written");
    assert!(dir.path().join("c.csv.manifest.json").is_file());
}

#[test]
fn exported_source_carries_the_requested_function_name() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen_corpus(dir.path(), 1);
    let model = train(dir.path(), &corpus, "preto-dtc");
    let out = dir.path().join("tree.c");
    stdout_of(
        bin()
            .args(["export-tree", "--function-name", "pick_chunk", "--model"])
            .arg(&model)
            .arg("--out")
            .arg(&out),
    );
    assert!(read(&out).starts_with("int pick_chunk(const double* featureVector) {"));
    assert_eq!(
        exit_code(
            bin()
                .args(["export-tree", "--function-name", "7up", "--model"])
                .arg(&model)
                .arg("--out")
                .arg(&out)
        ),
        2,
        "an invalid C identifier is a usage error"
    );
}
