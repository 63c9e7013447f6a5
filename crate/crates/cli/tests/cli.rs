use std::path::Path;
use std::process::{Command, Output};

fn tsetlin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsetlin")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = tsetlin(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    tsetlin(dir, args).status.code().unwrap()
}

fn artificial_model(dir: &Path) {
    ok(
        dir,
        &[
            "synth",
            "--kind",
            "artificial",
            "--n",
            "1000",
            "--seed",
            "7",
            "--positive-fraction",
            "0.111",
            "--out",
            "a.csv",
        ],
    );
    ok(dir, &["train", "--data", "a.csv", "--categorical", "x1,x2", "--clauses", "4", "--seed", "1", "--out", "m.txt"]);
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "artificial", "--n", "1000", "--seed", "7", "--out", "a.csv"]);
    ok(d, &["synth", "--kind", "artificial", "--n", "1000", "--seed", "7", "--out", "b.csv"]);
    let a = std::fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(d.join("b.csv")).unwrap());
    assert_eq!(a.lines().count(), 1001);
    assert_eq!(a.lines().next(), Some("x1,x2,label"));
}

#[test]
fn planted_series_has_three_regions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "planted-outbreak", "--seed", "3", "--out", "s.csv"]);
    let text = std::fs::read_to_string(d.join("s.csv")).unwrap();
    let mut regions: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    regions.dedup();
    regions.sort();
    regions.dedup();
    assert_eq!(regions, ["R1", "R2", "R3"]);
    assert_eq!(text.lines().count(), 1 + 3 * 96);
}

#[test]
fn unknown_synth_kind_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(dir.path(), &["synth", "--kind", "weather", "--out", "x.csv"]), 2);
}

#[test]
fn odd_clause_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "artificial", "--n", "50", "--out", "a.csv"]);
    let out = tsetlin(d, &["train", "--data", "a.csv", "--clauses", "3", "--out", "m.txt"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("clause count must be even and ≥ 2"));
    assert_eq!(code(d, &["train", "--data", "a.csv", "--s", "1", "--out", "m.txt"]), 4);
    assert_eq!(code(d, &["train", "--data", "a.csv", "--threshold", "0", "--out", "m.txt"]), 4);
    assert_eq!(code(d, &["train", "--data", "a.csv", "--states", "0", "--out", "m.txt"]), 4);
}

#[test]
fn bad_data_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.csv"), "x1,label\nfoo,1\n").unwrap();
    assert_eq!(code(d, &["train", "--data", "bad.csv", "--out", "m.txt"]), 3);
    assert_eq!(code(d, &["train", "--data", "missing.csv", "--out", "m.txt"]), 3);
}

#[test]
fn holdout_eval_prints_four_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    artificial_model(d);
    ok(
        d,
        &[
            "synth",
            "--kind",
            "artificial",
            "--n",
            "200",
            "--seed",
            "8",
            "--positive-fraction",
            "0.111",
            "--out",
            "t.csv",
        ],
    );
    let out = ok(d, &["eval", "--model", "m.txt", "--data", "t.csv"]);
    let first = out.lines().next().unwrap();
    assert_eq!(first, "precision 1.0000  recall 1.0000  f1 1.0000  accuracy 1.0000");
}

#[test]
fn cross_validation_report_and_fold_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &["synth", "--kind", "artificial", "--n", "300", "--seed", "2", "--positive-fraction", "0.2", "--out", "a.csv"],
    );
    let base = ["eval", "--data", "a.csv", "--categorical", "x1,x2", "--epochs", "20"];
    let table = ok(d, &[&base[..], &["--folds", "5", "--repeats", "2"]].concat());
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "# 5 folds x 2 repeats, seed 0");
    assert_eq!(lines.len(), 6);
    assert!(lines[2..].iter().all(|l| l.contains('±')));
    let csv = ok(d, &[&base[..], &["--folds", "5", "--format", "csv"]].concat());
    assert!(csv.starts_with("metric,mean,ci95\nprecision,"));
    let json = ok(d, &[&base[..], &["--folds", "5", "--format", "json"]].concat());
    assert!(json.contains("\"per_fold\""));
    assert_eq!(code(d, &[&base[..], &["--folds", "1"]].concat()), 2);
    assert_eq!(code(d, &[&base[..], &["--folds", "301"]].concat()), 4);
    assert_eq!(code(d, &["eval", "--data", "a.csv"]), 2);
}

#[test]
fn explain_formats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    artificial_model(d);
    let text = ok(d, &["explain", "--model", "m.txt"]);
    assert!(text.lines().count() <= 4);
    assert!(text.contains("class 1 clause 0 (+): x1 = 4 ∧ x2 = 5"), "{text}");
    let json = ok(d, &["explain", "--model", "m.txt", "--format", "structured"]);
    assert!(json.trim_start().starts_with('['));
    assert_eq!(code(d, &["explain", "--model", "nope.txt"]), 3);
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |seed: &str, out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_tsetlin"))
            .current_dir(d)
            .env("TSETLIN_SEED", seed)
            .args(["synth", "--kind", "artificial", "--n", "20", "--out", out])
            .output()
            .unwrap();
        assert!(o.status.success());
        std::fs::read_to_string(d.join(out)).unwrap()
    };
    assert_eq!(run("5", "a.csv"), run("5", "b.csv"));
    assert_ne!(run("5", "a.csv"), run("6", "c.csv"));
}

#[test]
fn trace_lists_every_automaton_per_epoch() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "artificial", "--n", "100", "--out", "a.csv"]);
    ok(
        d,
        &["train", "--data", "a.csv", "--categorical", "x1,x2", "--epochs", "3", "--trace", "t.csv", "--out", "m.txt"],
    );
    let trace = std::fs::read_to_string(d.join("t.csv")).unwrap();
    // 4 epochs (initial + 3) x 2 classes x 2 clauses x 22 automata
    assert_eq!(trace.lines().count(), 1 + 4 * 2 * 2 * 22);
}

#[test]
fn lag_features_from_bundled_neighbours_require_known_regions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "planted-outbreak", "--out", "s.csv"]);
    assert_eq!(code(d, &["features", "--series", "s.csv", "--target", "R1", "--out", "f.csv"]), 3);
    ok(d, &["synth", "--kind", "planted-outbreak", "--out", "s.csv", "--neighbors-out", "n.csv"]);
    let msg = ok(d, &["features", "--series", "s.csv", "--target", "R1", "--neighbors", "n.csv", "--out", "f.csv"]);
    assert!(msg.starts_with("wrote 84 rows of 4 features"));
}
