//! End-to-end behaviour of the `cuisto` binary: exit codes, manifests, runs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(task: &str) -> String {
    repo().join("data").join(format!("{task}.toml")).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuisto")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Exit code plus the single stderr line.
fn fails(args: &[&str]) -> (i32, String) {
    let out = run(args);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.trim_end().lines().count(), 1, "{stderr}");
    (out.status.code().unwrap(), stderr.trim_end().to_owned())
}

fn out_dir(tmp: &Path, name: &str) -> String {
    tmp.join(name).to_string_lossy().into_owned()
}

#[test]
fn missing_input_is_a_config_error_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, line) = fails(&["train", "-c", &config("t1"), "--train", "/nowhere/train.xml", "--output", &out_dir(tmp.path(), "o")]);
    assert_eq!(code, 2);
    assert!(line.starts_with("error\t2\tconfig\t") && line.contains("/nowhere/train.xml"), "{line}");

    let cfg = tmp.path().join("c.toml");
    std::fs::write(
        &cfg,
        format!(
            "task = \"T2\"\n[paths]\ntrain = \"{}\"\nabbreviations = \"missing.tsv\"\noutput = \"o\"\n",
            repo().join("fixtures/synthetic/train.xml").display()
        ),
    )
    .unwrap();
    let (code, line) = fails(&["train", "-c", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(line.contains("missing.tsv"), "{line}");
}

#[test]
fn usage_errors_exit_with_2() {
    let (code, line) = fails(&["train", "--bogus"]);
    assert_eq!(code, 2);
    assert!(line.starts_with("error\t2\tconfig\tusage: "), "{line}");
    let (code, _) = fails(&["fuse", "-c", &config("t2"), "--methods", "boost,tarot"]);
    assert_eq!(code, 2);
}

#[test]
fn malformed_corpus_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.xml");
    std::fs::write(&bad, "<recettes><recette id=\"1\"><titre>x</titre>").unwrap();
    let (code, line) = fails(&["train", "-c", &config("t2"), "--train", bad.to_str().unwrap(), "--output", &out_dir(tmp.path(), "o")]);
    assert_eq!(code, 3, "{line}");
    assert!(line.starts_with("error\t3\tdata\t"), "{line}");
}

#[test]
fn tampered_or_foreign_models_are_rejected_with_4() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "t2");
    ok(&["train", "-c", &config("t2"), "--output", &out]);

    let (code, line) = fails(&["classify", "-c", &config("t1"), "--output", &out]);
    assert_eq!(code, 4, "{line}");

    let svm = tmp.path().join("t2/models/svm.txt");
    let mut text = std::fs::read_to_string(&svm).unwrap();
    text.push('\n');
    std::fs::write(&svm, text).unwrap();
    let (code, line) = fails(&["classify", "-c", &config("t2"), "--output", &out]);
    assert_eq!(code, 4, "{line}");
    assert!(line.contains("svm"), "{line}");
}

#[test]
fn same_seed_same_digests() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = |name: &str| {
        let out = out_dir(tmp.path(), name);
        ok(&["train", "-c", &config("t2"), "--output", &out]);
        std::fs::read_to_string(tmp.path().join(name).join("manifest.tsv")).unwrap()
    };
    let (a, b) = (manifest("a"), manifest("b"));
    let digests = |m: &str| -> Vec<String> {
        m.lines().filter(|l| l.starts_with("model\t") || l.starts_with("artifact\t")).map(str::to_owned).collect()
    };
    assert_eq!(digests(&a), digests(&b));
    assert_eq!(digests(&a).iter().filter(|l| l.starts_with("model\t")).count(), 3);
}

#[test]
fn paper_runs_for_dish_type_and_perfect_evaluation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "t2");
    let common = ["-c", &config("t2"), "--task", "T2", "--output", &out];
    let with = |cmd: &str, extra: &[&str]| {
        let mut v = vec![cmd];
        v.extend_from_slice(&common);
        v.extend_from_slice(extra);
        ok(&v)
    };
    with("train", &[]);
    with("classify", &[]);
    let printed = with("fuse", &["--runs", "paper"]);
    assert_eq!(printed.lines().count(), 3);
    for name in ["run1", "run2", "run3"] {
        assert!(tmp.path().join("t2/runs").join(format!("{name}.tsv")).is_file(), "{name}");
    }

    // A run that repeats the gold labels scores F = 1.
    let test = cuisto::corpus::load_corpus(repo().join("fixtures/synthetic/test.xml"), cuisto::LabelKind::DishType).unwrap();
    let gold: String = test
        .recipes()
        .iter()
        .map(|r| format!("{}\t{}\n", r.id, test.label_of(r).unwrap()))
        .collect();
    let perfect = tmp.path().join("perfect.tsv");
    std::fs::write(&perfect, gold).unwrap();
    with("evaluate", &["--run", perfect.to_str().unwrap()]);
    let report = std::fs::read_to_string(tmp.path().join("t2/reports/perfect.tsv")).unwrap();
    for key in ["micro_f", "macro_f"] {
        let line = report.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("{key} in {report}"));
        let value: f64 = line.split('\t').nth(2).unwrap().parse().unwrap();
        assert_eq!(value, 1.0, "{line}");
    }
}

#[test]
fn extraction_run_is_written() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "t4");
    ok(&["train", "-c", &config("t4"), "--output", &out]);
    ok(&["extract", "-c", &config("t4"), "--output", &out]);
    let run = std::fs::read_to_string(tmp.path().join("t4/runs/extraction.tsv")).unwrap();
    assert!(run.lines().all(|l| l.split('\t').count() == 4), "{run}");
    ok(&["evaluate", "-c", &config("t4"), "--output", &out, "--run", "extraction"]);
}
