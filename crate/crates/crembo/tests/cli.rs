mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crembo::cli::{Artifact, ModelBody};
use crembo::config;
use crembo::io;
use crembo_core::oracle::{ensemble_vote_oracle, OracleSource};
use crembo_core::{Model, TableOracle};

fn crembo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crembo")).args(args).env_remove(config::SEED_ENV).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = crembo(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn iris() -> String {
    common::data_path("iris.csv").display().to_string()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn train(dir: &Path, extra: &[&str]) -> String {
    let (out, data) = (path(dir, "rf.json"), iris());
    let mut args = vec!["train-forest", "--data", &data, "--label", "species", "--out", &out];
    args.extend(extra);
    ok(&args);
    out
}

fn forest(path: &str) -> Artifact<ModelBody> {
    io::load_json(Path::new(path)).unwrap()
}

#[test]
fn train_forest_writes_a_hundred_trees_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let rf = train(dir.path(), &["--seed", "7"]);
    let art = forest(&rf);
    let Model::Forest(f) = &art.body.model else { panic!("not a forest") };
    assert_eq!(f.trees.len(), 100);
    assert_eq!((art.master_seed, art.config["trees"].as_str()), (7, "100"));
    let first = std::fs::read(&rf).unwrap();
    train(dir.path(), &["--seed", "7"]);
    assert_eq!(std::fs::read(&rf).unwrap(), first);
}

#[test]
fn missing_label_column_exits_2() {
    let out = crembo(&["train-forest", "--data", &iris(), "--label", "nope", "--out", "/dev/null"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn embedded_config_reproduces_the_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let rf = train(dir.path(), &["--trees", "15", "--seed", "3"]);
    let cdir = path(dir.path(), "c");
    ok(&["compress", "--data", &iris(), "--label", "species", "--forest", &rf, "--out", &cdir, "--seed", "3"]);
    let originals: Vec<(PathBuf, Vec<u8>)> = [rf.clone(), path(Path::new(&cdir), "tree.json"), path(Path::new(&cdir), "report.json")]
        .into_iter()
        .map(|p| (PathBuf::from(&p), std::fs::read(&p).unwrap()))
        .collect();

    let rf_cfg = dir.path().join("rf.cfg");
    std::fs::write(&rf_cfg, config::render(&forest(&rf).config)).unwrap();
    let report: serde_json::Value = io::load_json(Path::new(&path(Path::new(&cdir), "report.json"))).unwrap();
    let map: std::collections::BTreeMap<String, String> = serde_json::from_value(report["config"].clone()).unwrap();
    let c_cfg = dir.path().join("c.cfg");
    std::fs::write(&c_cfg, config::render(&map)).unwrap();
    for (p, _) in &originals {
        std::fs::remove_file(p).unwrap();
    }

    ok(&["train-forest", "--config", rf_cfg.to_str().unwrap()]);
    ok(&["compress", "--config", c_cfg.to_str().unwrap()]);
    for (p, bytes) in originals {
        assert_eq!(std::fs::read(&p).unwrap(), bytes, "{}", p.display());
    }
}

#[test]
fn flags_override_the_config_file_and_env_seeds_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, format!("# small forest\ndata = {}\nlabel = species\ntrees = 9\nout = {}\n", iris(), path(dir.path(), "rf.json"))).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_crembo"))
        .args(["train-forest", "--config", cfg.to_str().unwrap(), "--trees", "4"])
        .env(config::SEED_ENV, "42")
        .output()
        .unwrap();
    assert!(out.status.success());
    let art = forest(&path(dir.path(), "rf.json"));
    let Model::Forest(f) = &art.body.model else { panic!() };
    assert_eq!((f.trees.len(), art.master_seed), (4, 42));

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(crembo(&["train-forest", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn compress_writes_tree_report_and_rendering() {
    let dir = tempfile::tempdir().unwrap();
    let rf = train(dir.path(), &[]);
    let cdir = path(dir.path(), "c");
    let table = ok(&["compress", "--data", &iris(), "--label", "species", "--forest", &rf, "--out", &cdir]);
    assert!(table.starts_with(" epsilon"));
    assert_eq!(table.lines().filter(|l| l.contains("chosen")).count(), 1);
    let tree: Artifact<ModelBody> = io::load_json(&Path::new(&cdir).join("tree.json")).unwrap();
    let Model::Tree(t) = tree.body.model else { panic!() };
    assert!(t.depth() <= 4);
    let text = std::fs::read_to_string(Path::new(&cdir).join("tree.txt")).unwrap();
    assert!(text.contains("petal"));
    assert_eq!(ok(&["describe", "--model", &path(Path::new(&cdir), "tree.json")]), text);

    let plain = ok(&["compress", "--data", &iris(), "--label", "species", "--forest", &rf, "--out", &cdir, "--trim-grid", "0"]);
    assert_eq!(plain.lines().count(), 2);
}

#[test]
fn mismatched_matrix_fails_before_training() {
    let dir = tempfile::tempdir().unwrap();
    let probs = dir.path().join("p.csv");
    std::fs::write(&probs, "0.5,0.25,0.25\n1,0,0\n").unwrap();
    let cdir = path(dir.path(), "c");
    let out = crembo(&["compress", "--data", &iris(), "--label", "species", "--matrix", probs.to_str().unwrap(), "--out", &cdir]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!Path::new(&cdir).exists());
}

#[test]
fn exported_oracle_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let rf = train(dir.path(), &[]);
    let csv = path(dir.path(), "p.csv");
    ok(&["export-oracle", "--forest", &rf, "--data", &iris(), "--label", "species", "--out", &csv]);

    let d = io::load_csv(&common::data_path("iris.csv"), "species").unwrap();
    let Model::Forest(f) = forest(&rf).body.model else { panic!() };
    let direct = ensemble_vote_oracle(&f, &d).unwrap();
    let loaded: TableOracle = io::load_matrix_oracle(Path::new(&csv), &d, false).unwrap();
    assert_eq!(loaded, direct);
    for i in 0..loaded.num_rows() {
        let row = loaded.row(i);
        assert!(row.iter().all(|p| ((p * 100.0).round() - p * 100.0).abs() < 1e-9));
        if row.contains(&1.0) {
            assert_eq!(row.iter().filter(|&&p| p == 0.0).count(), row.len() - 1);
        }
    }

    let wrong = common::data_path("breast_cancer.csv").display().to_string();
    let out = crembo(&["export-oracle", "--forest", &rf, "--data", &wrong, "--label", "diagnosis", "--out", &csv]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluate_prints_the_table_and_ignores_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let args = |jobs: &'static str, out: String| {
        vec!["evaluate".to_owned(), "--data".into(), iris(), "--label".into(), "species".into(), "--repeats".into(), "2".into(), "--trees".into(), "20".into(), "--jobs".into(), jobs.into(), "--out".into(), out]
    };
    let (a, b) = (path(dir.path(), "a.json"), path(dir.path(), "b.json"));
    let run = |v: Vec<String>| ok(&v.iter().map(String::as_str).collect::<Vec<_>>());
    let table = run(args("1", a.clone()));
    assert_eq!(run(args("4", b.clone())), table);
    for m in ["RF", "BM", "ST", "MED"] {
        assert!(table.contains(m));
    }
    let strip = |p: &str| {
        let mut v: serde_json::Value = io::load_json(Path::new(p)).unwrap();
        v["config"].as_object_mut().unwrap().remove("out");
        v
    };
    assert_eq!(strip(&a), strip(&b));

    let zero = crembo(&["evaluate", "--data", &iris(), "--label", "species", "--repeats", "0"]);
    assert_eq!(zero.status.code(), Some(2));
}

#[test]
fn robustness_prints_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let heart = dir.path().join("heart.csv");
    common::write_heart_csv(&heart);
    let table = ok(&["robustness", "--data", heart.to_str().unwrap(), "--label", "num", "--repeats", "2", "--trees", "20"]);
    assert!(table.contains("Agreement (RF)") && table.contains("heart"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(crembo(&["compress", "--data", &iris()]).status.code(), Some(2));
    assert_eq!(crembo(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(crembo(&["--help"]).status.code(), Some(0));
}
