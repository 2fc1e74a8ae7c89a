use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nwp_fairness::data::sha256_hex;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nwpfair"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

fn check_manifest(dir: &Path) -> Value {
    let manifest: Value =
        serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    for a in manifest["artifacts"].as_array().unwrap() {
        let bytes = fs::read(dir.join(a["file"].as_str().unwrap())).unwrap();
        assert_eq!(a["sha256"].as_str().unwrap(), sha256_hex(&bytes));
        assert_eq!(a["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
    manifest
}

#[test]
fn simulate_synthetic_writes_four_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--synthetic",
        "--out",
        p(tmp.path()),
        "--seed",
        "4",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        files(tmp.path()),
        ["decisions.csv", "epochs.csv", "manifest.json", "trace.json"]
    );
    let manifest = check_manifest(tmp.path());
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 4);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.contains('=')), "{stdout}");
    assert_eq!(
        stdout.lines().filter(|l| l.starts_with("epoch=")).count(),
        6
    );
}

#[test]
fn missing_config_exits_one_and_names_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--config",
        "/no/such/config.json",
        "--synthetic",
        "--out",
        p(tmp.path()),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/config.json"));
}

#[test]
fn invalid_config_values_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"epochs": 0}"#).unwrap();
    let out = run(&[
        "simulate",
        "--config",
        p(&cfg),
        "--synthetic",
        "--out",
        p(&tmp.path().join("o")),
    ]);
    assert_eq!(code(&out), 1);
    fs::write(&cfg, r#"{"epochz": 3}"#).unwrap();
    let out = run(&[
        "simulate",
        "--config",
        p(&cfg),
        "--synthetic",
        "--out",
        p(&tmp.path().join("o")),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"epochs": 2, "seed": 11}"#).unwrap();
    let out_dir = tmp.path().join("o");
    let out = run(&[
        "simulate",
        "--config",
        p(&cfg),
        "--synthetic",
        "--seed",
        "12",
        "--out",
        p(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let trace: Value =
        serde_json::from_slice(&fs::read(out_dir.join("trace.json")).unwrap()).unwrap();
    assert_eq!(trace["config"]["seed"], 12);
    assert_eq!(trace["epochs"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_data_file_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("pop.json");
    fs::write(&data, "not json").unwrap();
    let out = run(&[
        "simulate",
        "--data",
        p(&data),
        "--out",
        p(&tmp.path().join("o")),
    ]);
    assert_eq!(code(&out), 2);
    let out = run(&[
        "simulate",
        "--data",
        p(&tmp.path().join("absent.json")),
        "--out",
        p(&tmp.path().join("o")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn compare_method_arity_and_names() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("o");
    assert_eq!(
        code(&run(&[
            "compare",
            "--synthetic",
            "--methods",
            "none",
            "--out",
            p(&o)
        ])),
        1
    );
    assert_eq!(
        code(&run(&[
            "compare",
            "--synthetic",
            "--methods",
            "nwp,svm",
            "--out",
            p(&o)
        ])),
        1
    );
    assert!(!o.exists());
}

#[test]
fn prepare_adult_balanced_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "prepare",
        "--dataset",
        "adult",
        "--input",
        p(&fixture("adult_fixture.csv")),
        "--n",
        "100",
        "--balance",
        "race",
        "--out",
        p(tmp.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        files(tmp.path()),
        ["manifest.json", "population.csv", "population.json"]
    );
    check_manifest(tmp.path());
    let csv = fs::read_to_string(tmp.path().join("population.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 100);
    assert_eq!(
        rows.iter()
            .filter(|r| r.split(',').nth(1) == Some("White"))
            .count(),
        50
    );
    assert_eq!(
        rows.iter()
            .filter(|r| r.split(',').nth(1) == Some("Black"))
            .count(),
        50
    );

    let wrong = run(&[
        "prepare",
        "--dataset",
        "adult",
        "--input",
        p(&fixture("adult_fixture.csv")),
        "--balance",
        "sex",
        "--out",
        p(&tmp.path().join("x")),
    ]);
    assert_eq!(code(&wrong), 1);
}

#[test]
fn prepare_then_simulate_adult_gives_six_epoch_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let prep = tmp.path().join("prep");
    let out = run(&[
        "prepare",
        "--dataset",
        "adult",
        "--input",
        p(&fixture("adult_fixture.csv")),
        "--out",
        p(&prep),
    ]);
    assert_eq!(code(&out), 0);
    let sim = tmp.path().join("sim");
    let out = run(&[
        "simulate",
        "--data",
        p(&prep.join("population.json")),
        "--out",
        p(&sim),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let epochs = fs::read_to_string(sim.join("epochs.csv")).unwrap();
    assert_eq!(epochs.lines().count(), 7);
    assert!(epochs.starts_with("epoch,log_nwp,mean_weight,weight_gini,fpr,fnr,combined_error\n"));
}

#[test]
fn prepare_compas_filters_and_compare_splits() {
    let tmp = tempfile::tempdir().unwrap();
    let prep = tmp.path().join("prep");
    let out = run(&[
        "prepare",
        "--dataset",
        "compas",
        "--input",
        p(&fixture("compas_fixture.csv")),
        "--max-age",
        "35",
        "--max-priors",
        "3",
        "--out",
        p(&prep),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let pop: Value =
        serde_json::from_slice(&fs::read(prep.join("population.json")).unwrap()).unwrap();
    for ind in pop["individuals"].as_array().unwrap() {
        let names = ind["features"]["names"].as_array().unwrap();
        let values = ind["features"]["values"].as_array().unwrap();
        let get = |n: &str| {
            values[names.iter().position(|x| x == n).unwrap()]
                .as_f64()
                .unwrap()
        };
        assert!(get("age") <= 35.0 && get("priors_count") < 3.0);
    }

    let cmp = tmp.path().join("cmp");
    let out = run(&[
        "compare",
        "--data",
        p(&prep.join("population.json")),
        "--methods",
        "nwp,ceo",
        "--out",
        p(&cmp),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    check_manifest(&cmp);
    let report = fs::read_to_string(cmp.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 1 + 3 * 2);
}

#[test]
fn prepare_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let o = p(tmp.path());
    assert_eq!(
        code(&run(&["prepare", "--dataset", "mnist", "--out", o])),
        1
    );
    assert_eq!(
        code(&run(&["prepare", "--dataset", "adult", "--out", o])),
        1
    );
    let mismatch = run(&[
        "prepare",
        "--dataset",
        "compas",
        "--input",
        p(&fixture("adult_fixture.csv")),
        "--out",
        o,
    ]);
    assert_eq!(code(&mismatch), 2);
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("priors_count"));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(code(&run(&["simulate"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn shipped_default_config_matches_defaults() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    let parsed: nwp_fairness::temporal::SimulationConfig =
        serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
    assert_eq!(parsed, nwp_fairness::temporal::SimulationConfig::default());
}
