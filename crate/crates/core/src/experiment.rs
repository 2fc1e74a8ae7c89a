//! Method comparisons.
//!
//! Two protocols share one report format. The simulation protocol runs every
//! method through the same seeded epochs, so requests and outcomes are paired
//! across methods. The split protocol trains on a stratified split, decides
//! once for every held-out individual and scores decisions against the true
//! labels. Deltas are always taken against the plain classifier.

use serde::{Deserialize, Serialize};

use crate::agent::{IndividualState, InstitutionState, Label};
use crate::baseline::CostWeights;
use crate::classifier::{self};
use crate::data::{split, PopulationSample};
use crate::error::{Error, Result};
use crate::metrics::{
    build_report, error_rates_with, gini, ComparisonReport, ErrorRates, MethodSeries, WelfarePoint,
};
use crate::modulation::{modulate, ModulatedScore};
use crate::rng;
use crate::temporal::{
    initial_weights, run_simulation_with, training_set, CalibratedOdds, Method, SimulationConfig,
    SimulationTrace,
};
use crate::welfare::{
    decision_utility, log_nwp, scenario_nwp_matrix, scenario_payoff, to_positive_utility, Party,
    Scenario,
};

/// Method every delta is taken against.
pub const BASELINE: Method = Method::None;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationComparison {
    pub report: ComparisonReport,
    pub traces: Vec<SimulationTrace>,
}

fn check_methods(methods: &[Method]) -> Result<()> {
    if methods.len() < 2 {
        return Err(Error::config("compare needs at least two methods"));
    }
    for (i, m) in methods.iter().enumerate() {
        if methods[..i].contains(m) {
            return Err(Error::config(format!("method {m} listed twice")));
        }
    }
    Ok(())
}

fn series_of(trace: &SimulationTrace) -> MethodSeries {
    MethodSeries {
        method: trace.method.name().to_string(),
        rates: trace.epochs.iter().map(|e| e.error.clone()).collect(),
        welfare: trace.epochs.iter().map(|e| e.welfare()).collect(),
    }
}

/// Runs each method through `config.epochs` epochs with the same seed.
pub fn compare_simulation(
    config: &SimulationConfig,
    sample: &PopulationSample,
    methods: &[Method],
) -> Result<SimulationComparison> {
    check_methods(methods)?;
    let traces = methods
        .iter()
        .map(|&m| run_simulation_with(config, sample, m))
        .collect::<Result<Vec<_>>>()?;
    let series: Vec<MethodSeries> = traces.iter().map(series_of).collect();
    let baseline = match methods.iter().position(|&m| m == BASELINE) {
        Some(i) => series[i].clone(),
        None => series_of(&run_simulation_with(config, sample, BASELINE)?),
    };
    let report = build_report("epoch", &series, Some(&baseline))?;
    Ok(SimulationComparison { report, traces })
}

/// Outcome of one method on one held-out split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEvaluation {
    pub rates: ErrorRates,
    pub welfare: WelfarePoint,
    pub decisions: Vec<Label>,
}

/// Decides once for every test individual. The loan principal is the
/// individual's own stake (`income`), the institution starts fresh and the
/// rest of the population sits at the status quo.
pub fn evaluate_split(
    config: &SimulationConfig,
    train: &PopulationSample,
    test: &PopulationSample,
    method: Method,
    split_seed: u64,
) -> Result<SplitEvaluation> {
    config.validate()?;
    if test.is_empty() {
        return Err(Error::degenerate("test split is empty"));
    }
    let model = classifier::train(&training_set(&train.individuals), &config.classifier)?;
    let mut people: Vec<IndividualState> = test.individuals.clone();
    initial_weights(&mut people, config)?;
    let institution = InstitutionState::new(config.institution_weight, config.institution_budget)?;
    let table = &config.utility_table;

    let mut ceo = match method {
        Method::Ceo => Some((
            CalibratedOdds::fit(&model, &train.individuals, CostWeights::default())?,
            rng::derived(split_seed, Method::Ceo.name()),
        )),
        _ => None,
    };
    let status_quo = to_positive_utility(0.0, table)?.ln();
    let total_rest: f64 = people.iter().map(|i| i.weight.ln() + status_quo).sum();

    let mut decisions = Vec::with_capacity(people.len());
    let mut ind_payoffs = Vec::with_capacity(people.len());
    let mut inst_total = 0.0;
    for ind in &people {
        let margin = model.margin(&ind.features)?;
        let scored = match (method, ceo.as_mut()) {
            (Method::Nwp, _) => {
                let rest = total_rest - (ind.weight.ln() + status_quo);
                let matrix = scenario_nwp_matrix(ind, &institution, rest, ind.income, table)?;
                modulate(&margin, &decision_utility(&matrix)?, &config.modulation)?
            }
            (Method::Ceo, Some((model, r))) => model.score(margin.raw, &ind.group, r)?,
            _ => ModulatedScore::unmodulated(margin.raw, config.modulation.threshold),
        };
        let scenario = Scenario::from_labels(scored.decision, ind.label);
        ind_payoffs.push(scenario_payoff(
            scenario,
            ind.income,
            table,
            Party::Individual,
        )?);
        inst_total += scenario_payoff(scenario, ind.income, table, Party::Institution)?;
        decisions.push(scored.decision);
    }

    let labels: Vec<Label> = people.iter().map(|i| i.label).collect();
    let groups: Vec<&str> = people.iter().map(|i| i.group.as_str()).collect();
    let rates = error_rates_with(&decisions, &labels, &groups, config.combined_rule)?;

    let person_weights: Vec<f64> = people.iter().map(|i| i.weight).collect();
    let mut weights = vec![institution.weight];
    weights.extend(&person_weights);
    let mut utilities = vec![to_positive_utility(
        inst_total / people.len() as f64,
        table,
    )?];
    for p in &ind_payoffs {
        utilities.push(to_positive_utility(*p, table)?);
    }
    let welfare = WelfarePoint {
        log_nwp: log_nwp(&weights, &utilities)?,
        mean_weight: person_weights.iter().sum::<f64>() / person_weights.len() as f64,
        weight_gini: gini(&person_weights)?,
    };
    Ok(SplitEvaluation {
        rates,
        welfare,
        decisions,
    })
}

/// Split seeds `seed, seed + 1, ...`.
pub fn split_seeds(seed: u64, splits: usize) -> Vec<u64> {
    (0..splits as u64).map(|k| seed.wrapping_add(k)).collect()
}

/// Held-out comparison over `splits` stratified splits.
pub fn compare_splits(
    config: &SimulationConfig,
    sample: &PopulationSample,
    methods: &[Method],
    splits: usize,
    train_fraction: f64,
) -> Result<ComparisonReport> {
    check_methods(methods)?;
    if splits == 0 {
        return Err(Error::config("splits must be >= 1"));
    }
    let mut all: Vec<Method> = methods.to_vec();
    if !all.contains(&BASELINE) {
        all.push(BASELINE);
    }
    let mut series: Vec<MethodSeries> = all
        .iter()
        .map(|m| MethodSeries {
            method: m.name().to_string(),
            rates: Vec::new(),
            welfare: Vec::new(),
        })
        .collect();
    for s in split_seeds(config.seed, splits) {
        let (train, test) = split(sample, train_fraction, s)?;
        for (m, out) in all.iter().zip(series.iter_mut()) {
            let eval = evaluate_split(config, &train, &test, *m, s)?;
            out.rates.push(eval.rates);
            out.welfare.push(eval.welfare);
        }
    }
    let baseline_idx = all
        .iter()
        .position(|&m| m == BASELINE)
        .expect("baseline present");
    let baseline = series[baseline_idx].clone();
    series.truncate(methods.len());
    build_report("split", &series, Some(&baseline))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthesize_population, SyntheticSpec};
    use crate::modulation::ModulationConfig;

    fn sample(seed: u64) -> PopulationSample {
        synthesize_population(
            &SyntheticSpec::default(),
            Some(seed),
            &mut rng::seeded(seed),
        )
        .unwrap()
    }

    #[test]
    fn simulation_compare_reports_every_epoch() {
        let cfg = SimulationConfig {
            epochs: 3,
            ..Default::default()
        };
        let out = compare_simulation(&cfg, &sample(1), &[Method::Nwp, Method::Ceo]).unwrap();
        assert_eq!(out.report.rows.len(), 6);
        assert_eq!(out.report.baseline.as_deref(), Some("none"));
        assert_eq!(out.traces.len(), 2);
    }

    #[test]
    fn baseline_rows_have_zero_delta() {
        let cfg = SimulationConfig {
            epochs: 2,
            ..Default::default()
        };
        let out = compare_simulation(&cfg, &sample(2), &[Method::None, Method::Nwp]).unwrap();
        for row in out.report.rows_for("none") {
            assert_eq!(row.delta.unwrap().combined, 0.0);
        }
    }

    #[test]
    fn method_list_checks() {
        let cfg = SimulationConfig::default();
        assert!(matches!(
            compare_simulation(&cfg, &sample(1), &[Method::Nwp]),
            Err(Error::InvalidConfig(_))
        ));
        assert!(compare_simulation(&cfg, &sample(1), &[Method::Nwp, Method::Nwp]).is_err());
    }

    #[test]
    fn split_null_intervention_matches_plain() {
        let cfg = SimulationConfig {
            modulation: ModulationConfig {
                lambda: 0.0,
                ..Default::default()
            },
            ..Default::default()
        };
        let s = sample(3);
        let (train, test) = split(&s, 0.7, 9).unwrap();
        let a = evaluate_split(&cfg, &train, &test, Method::Nwp, 9).unwrap();
        let b = evaluate_split(&cfg, &train, &test, Method::None, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_compare_is_deterministic() {
        let cfg = SimulationConfig::default();
        let s = sample(4);
        let a = compare_splits(&cfg, &s, &[Method::Nwp, Method::Ceo], 3, 0.7).unwrap();
        let b = compare_splits(&cfg, &s, &[Method::Nwp, Method::Ceo], 3, 0.7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 6);
        assert_eq!(a.index_label, "split");
    }
}
