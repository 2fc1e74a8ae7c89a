use std::fs;
use std::path::{Path, PathBuf};

use nwp_fairness::data::{
    load_csv, prepare_adult, prepare_compas, synthetic_sample, DatasetName, DatasetSchema,
    IncomeBounds, PopulationSample, SyntheticSpec,
};
use nwp_fairness::experiment::{compare_simulation, compare_splits};
use nwp_fairness::metrics::{cell, ComparisonReport};
use nwp_fairness::rng;
use nwp_fairness::temporal::{run_simulation_with, Method, SimulationConfig};

use crate::args::{CompareArgs, PrepareArgs, RunInput, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::{now, OutputDir};

/// Config file, then flag overrides.
fn load_config(input: &RunInput) -> CliResult<SimulationConfig> {
    let mut config = match &input.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?
        }
        None => SimulationConfig::default(),
    };
    if let Some(seed) = input.seed {
        config.seed = seed;
    }
    if let Some(n) = input.n {
        config.population_size = n;
    }
    config
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

fn load_population(input: &RunInput, config: &SimulationConfig) -> CliResult<PopulationSample> {
    let sample = match &input.data {
        Some(path) => PopulationSample::from_json_path(path).map_err(CliError::from_data)?,
        None => {
            let spec = SyntheticSpec {
                size: config.population_size,
                bounds: config.bounds(),
                ..SyntheticSpec::default()
            };
            synthetic_sample(&spec, config.seed).map_err(CliError::from_data)?
        }
    };
    let bounds = config.bounds();
    if let Some(ind) = sample
        .individuals
        .iter()
        .find(|i| !(bounds.lo..=bounds.hi).contains(&i.income))
    {
        return Err(CliError::Data(format!(
            "individual {} income {} outside configured bounds [{}, {}]",
            ind.id, ind.income, bounds.lo, bounds.hi
        )));
    }
    Ok(sample)
}

fn inputs_of(input: &RunInput) -> Vec<PathBuf> {
    input.data.iter().cloned().collect()
}

fn parse_method(s: &str) -> CliResult<Method> {
    s.trim()
        .parse()
        .map_err(|e: nwp_fairness::Error| CliError::Config(e.to_string()))
}

pub fn simulate(args: SimulateArgs) -> CliResult<()> {
    let started = now();
    let method = parse_method(&args.method)?;
    let config = load_config(&args.input)?;
    let sample = load_population(&args.input, &config)?;
    let trace = run_simulation_with(&config, &sample, method).map_err(CliError::from_run)?;
    for e in &trace.epochs {
        progress!(
            "epoch={} log_nwp={} mean_weight={} weight_gini={} combined_error={}",
            e.epoch,
            e.log_nwp,
            e.mean_weight,
            e.weight_gini,
            e.error.combined
        );
    }

    let mut out = OutputDir::create(&args.input.out)?;
    out.write_json("trace.json", &trace)?;
    let mut buf = Vec::new();
    trace
        .write_epoch_csv(&mut buf)
        .map_err(CliError::from_run)?;
    out.write("epochs.csv", &buf)?;
    let mut buf = Vec::new();
    trace
        .write_decision_csv(&mut buf)
        .map_err(CliError::from_run)?;
    out.write("decisions.csv", &buf)?;
    out.finish(
        "simulate",
        args.input.config.clone(),
        inputs_of(&args.input),
        config.seed,
        started,
    )
}

pub fn compare(args: CompareArgs) -> CliResult<()> {
    let started = now();
    let methods = args
        .methods
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_method)
        .collect::<CliResult<Vec<_>>>()?;
    if methods.len() < 2 {
        return Err(CliError::Config(format!(
            "compare needs at least two methods, got {:?}",
            args.methods
        )));
    }
    let config = load_config(&args.input)?;
    let sample = load_population(&args.input, &config)?;
    let report: ComparisonReport = if sample.schema.name == DatasetName::Compas {
        compare_splits(&config, &sample, &methods, args.splits, args.train_fraction)
            .map_err(CliError::from_run)?
    } else {
        compare_simulation(&config, &sample, &methods)
            .map_err(CliError::from_run)?
            .report
    };
    for row in &report.rows {
        progress!(
            "{}={} method={} combined_error={} delta_combined={}",
            report.index_label,
            row.index,
            row.method,
            row.rates.combined,
            cell(row.delta.map(|d| d.combined))
        );
    }

    let mut out = OutputDir::create(&args.input.out)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf).map_err(CliError::from_run)?;
    out.write("report.csv", &buf)?;
    out.write_json("report.json", &report)?;
    out.finish(
        "compare",
        args.input.config.clone(),
        inputs_of(&args.input),
        config.seed,
        started,
    )
}

fn load_schema(name: DatasetName, path: Option<&Path>) -> CliResult<DatasetSchema> {
    let schema = match path {
        Some(p) => DatasetSchema::from_path(p).map_err(|e| CliError::Config(e.to_string()))?,
        None => DatasetSchema::builtin(name).map_err(|e| CliError::Config(e.to_string()))?,
    };
    if schema.name != name {
        return Err(CliError::Config(format!(
            "schema is for {}, not {name}",
            schema.name
        )));
    }
    Ok(schema)
}

pub fn prepare(args: PrepareArgs) -> CliResult<()> {
    let started = now();
    let name: DatasetName = args
        .dataset
        .parse()
        .map_err(|e: nwp_fairness::Error| CliError::Config(e.to_string()))?;
    let bounds = IncomeBounds::default();
    let sample = match name {
        DatasetName::Synthetic => {
            let spec = SyntheticSpec {
                size: args.n,
                ..SyntheticSpec::default()
            };
            synthetic_sample(&spec, args.seed).map_err(|e| CliError::Config(e.to_string()))?
        }
        DatasetName::Adult | DatasetName::Compas => {
            let schema = load_schema(name, args.schema.as_deref())?;
            let input = args
                .input
                .as_deref()
                .ok_or_else(|| CliError::Config(format!("--input is required for {name}")))?;
            let table = load_csv(input, &schema).map_err(CliError::from_data)?;
            if name == DatasetName::Adult {
                if let Some(col) = &args.balance {
                    if col != &schema.group_column {
                        return Err(CliError::Config(format!(
                            "can only balance on the group column {:?}, got {col:?}",
                            schema.group_column
                        )));
                    }
                }
                let mut r = rng::derived(args.seed, "prepare");
                prepare_adult(
                    &table,
                    args.n,
                    bounds,
                    args.noise_sd,
                    Some(args.seed),
                    &mut r,
                )
                .map_err(CliError::from_data)?
            } else {
                prepare_compas(&table, args.max_age, args.max_priors, bounds)
                    .map_err(CliError::from_data)?
            }
        }
    };
    for (group, count) in sample.group_counts() {
        progress!("group={group} count={count}");
    }

    let mut out = OutputDir::create(&args.out)?;
    let csv = sample.to_csv_string().map_err(CliError::from_run)?;
    out.write("population.csv", csv.as_bytes())?;
    out.write_json("population.json", &sample)?;
    out.finish(
        "prepare",
        None,
        args.input.iter().cloned().collect(),
        args.seed,
        started,
    )
}
