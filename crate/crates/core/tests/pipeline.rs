use std::path::PathBuf;

use nwp_fairness::data::{
    load_csv, prepare_adult, prepare_compas, split, DatasetName, DatasetSchema, IncomeBounds,
    PopulationSample,
};
use nwp_fairness::experiment::compare_splits;
use nwp_fairness::rng;
use nwp_fairness::temporal::{run_simulation, Method, SimulationConfig};
use nwp_fairness::Label;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn adult_sample(seed: u64) -> PopulationSample {
    let schema = DatasetSchema::builtin(DatasetName::Adult).unwrap();
    let table = load_csv(&fixture("adult_fixture.csv"), &schema).unwrap();
    prepare_adult(
        &table,
        100,
        IncomeBounds::default(),
        25.0,
        Some(seed),
        &mut rng::seeded(seed),
    )
    .unwrap()
}

fn compas_sample() -> PopulationSample {
    let schema = DatasetSchema::builtin(DatasetName::Compas).unwrap();
    let table = load_csv(&fixture("compas_fixture.csv"), &schema).unwrap();
    prepare_compas(&table, 35, 3, IncomeBounds::default()).unwrap()
}

fn feature(sample: &PopulationSample, i: usize, name: &str) -> f64 {
    let f = &sample.individuals[i].features;
    let at = f.names().iter().position(|n| n == name).unwrap();
    f.values()[at]
}

#[test]
fn adult_sample_is_balanced_and_bounded() {
    let s = adult_sample(1);
    assert_eq!(s.len(), 100);
    let counts = s.group_counts();
    assert_eq!(counts.get("White"), Some(&50));
    assert_eq!(counts.get("Black"), Some(&50));
    assert!(s
        .individuals
        .iter()
        .all(|i| (100.0..=1000.0).contains(&i.income)));
    assert_eq!(s, adult_sample(1));
    assert_ne!(s, adult_sample(2));
}

#[test]
fn adult_default_simulation_has_six_epochs() {
    let trace = run_simulation(&SimulationConfig::default(), &adult_sample(3)).unwrap();
    assert_eq!(trace.epochs.len(), 6);
    let mut csv = Vec::new();
    trace.write_epoch_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 7);
    for e in &trace.epochs {
        assert_eq!(e.decisions.len(), 100);
        assert!(e.weights_snapshot.iter().all(|w| (1e-6..=1.0).contains(w)));
    }
}

#[test]
fn compas_filter_keeps_only_qualifying_rows() {
    let s = compas_sample();
    assert!(!s.is_empty());
    for i in 0..s.len() {
        assert!(feature(&s, i, "age") <= 35.0);
        assert!(feature(&s, i, "priors_count") < 3.0);
    }
    let groups = s.group_counts();
    assert_eq!(groups.len(), 2);
    assert!(s.provenance.dropped_filter > 0);
    assert!(s.individuals.iter().any(|i| i.label == Label::Positive));
    assert!(s.individuals.iter().any(|i| i.label == Label::Negative));
}

#[test]
fn compas_split_is_stratified() {
    let s = compas_sample();
    let (train, test) = split(&s, 0.7, 5).unwrap();
    assert_eq!(train.len() + test.len(), s.len());
    assert_eq!(train.len(), (s.len() as f64 * 0.7).round() as usize);
    for (g, n) in s.group_counts() {
        let t = train.group_counts()[g] as f64;
        assert!((t - n as f64 * 0.7).abs() <= 1.0, "{g}: {t} of {n}");
    }
}

#[test]
fn compas_protocol_report_shape() {
    let report = compare_splits(
        &SimulationConfig::default(),
        &compas_sample(),
        &[Method::Nwp, Method::Ceo],
        3,
        0.7,
    )
    .unwrap();
    assert_eq!(report.rows.len(), 6);
    assert_eq!(report.rows_for("nwp").count(), 3);
    assert_eq!(report.rows_for("ceo").count(), 3);
    assert_eq!(report.baseline.as_deref(), Some("none"));
}

#[test]
fn missing_column_names_the_column() {
    let schema = DatasetSchema::builtin(DatasetName::Compas).unwrap();
    let err = load_csv(&fixture("adult_fixture.csv"), &schema).unwrap_err();
    assert!(err.to_string().contains("priors_count"), "{err}");
}
