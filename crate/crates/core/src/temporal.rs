//! Multi-epoch lending simulation.
//!
//! Each epoch walks the population in stable order: sample a loan request,
//! score the decision (welfare matrix, margin, modulation), enforce the
//! institution's budget, sample the realized outcome, pay out rewards and
//! penalties. After the walk the epoch's error rates and welfare product are
//! recorded and the weights are recomputed by [`tau_update`].
//!
//! One run consumes a single seeded generator in a fixed order, so a
//! `(config, data)` pair always produces the same trace.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use log::warn;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::agent::{IndividualState, InstitutionState, Label, LedgerEntry};
use crate::baseline::{
    apply_mixing, fit_mixing, CostWeights, GroupScores, MixingPolicy, PlattScaler,
};
use crate::classifier::{self, ClassifierConfig, TrainedClassifier};
use crate::data::{group_names, IncomeBounds, PopulationSample};
use crate::error::{Error, Result};
use crate::metrics::{cell, error_rates_with, gini, CombinedRule, ErrorRates, WelfarePoint};
use crate::modulation::{modulate, ModulatedScore, ModulationConfig};
use crate::rng::{self, SimRng};
use crate::welfare::{
    decision_utility, log_nwp, scenario_nwp_matrix, scenario_payoff, to_positive_utility, Party,
    Scenario, UtilityTable,
};

/// Weight floor and ceiling after every update.
pub const MIN_WEIGHT: f64 = 1e-6;
pub const MAX_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    Welfare,
    Fairness,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyGoal {
    pub mode: PolicyMode,
    /// Fairness share in mixed mode.
    pub theta: f64,
    pub eta_welfare: f64,
    pub eta_fairness: f64,
}

impl Default for PolicyGoal {
    fn default() -> Self {
        Self {
            mode: PolicyMode::Welfare,
            theta: 0.5,
            eta_welfare: 0.75,
            eta_fairness: 0.5,
        }
    }
}

impl PolicyGoal {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::config(format!(
                "theta must be in [0, 1], got {}",
                self.theta
            )));
        }
        for (name, v) in [
            ("eta_welfare", self.eta_welfare),
            ("eta_fairness", self.eta_fairness),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Effective (welfare, fairness) step sizes for the configured mode.
    pub fn effective_steps(&self) -> (f64, f64) {
        match self.mode {
            PolicyMode::Welfare => (self.eta_welfare, 0.0),
            PolicyMode::Fairness => (0.0, self.eta_fairness),
            PolicyMode::Mixed => (
                (1.0 - self.theta) * self.eta_welfare,
                self.theta * self.eta_fairness,
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub population_size: usize,
    pub epochs: usize,
    pub income_lo: f64,
    pub income_hi: f64,
    pub institution_weight: f64,
    pub institution_budget: f64,
    /// Request standard deviation as a fraction of income.
    pub request_spread: f64,
    /// Standard deviation of the outcome draw around the raw prediction.
    pub outcome_spread: f64,
    pub seed: u64,
    pub classifier: ClassifierConfig,
    pub modulation: ModulationConfig,
    pub policy: PolicyGoal,
    pub utility_table: UtilityTable,
    pub combined_rule: CombinedRule,
    /// Retrain the classifier on each epoch's realized outcomes.
    pub retrain_each_epoch: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            epochs: 6,
            income_lo: 100.0,
            income_hi: 1000.0,
            institution_weight: 0.5,
            institution_budget: 200_000.0,
            request_spread: 0.2,
            outcome_spread: 0.5,
            seed: 0,
            classifier: ClassifierConfig::default(),
            modulation: ModulationConfig::default(),
            policy: PolicyGoal::default(),
            utility_table: UtilityTable::default(),
            combined_rule: CombinedRule::default(),
            retrain_each_epoch: false,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::config("population_size must be >= 1"));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs must be >= 1"));
        }
        self.bounds().validate()?;
        if !(self.institution_weight > 0.0) || !self.institution_weight.is_finite() {
            return Err(Error::config(format!(
                "institution_weight must be > 0, got {}",
                self.institution_weight
            )));
        }
        if !(self.institution_budget >= 0.0) || !self.institution_budget.is_finite() {
            return Err(Error::config("institution_budget must be >= 0"));
        }
        for (name, v) in [
            ("request_spread", self.request_spread),
            ("outcome_spread", self.outcome_spread),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(format!("{name} must be > 0, got {v}")));
            }
        }
        self.classifier.validate()?;
        self.modulation.validate()?;
        self.policy.validate()?;
        self.utility_table.validate()
    }

    pub fn bounds(&self) -> IncomeBounds {
        IncomeBounds {
            lo: self.income_lo,
            hi: self.income_hi,
        }
    }
}

/// Decision rule applied to each loan request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Utility-modulated classifier.
    Nwp,
    /// Calibrated equalized odds comparator.
    Ceo,
    /// Plain classifier.
    None,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Nwp => "nwp",
            Method::Ceo => "ceo",
            Method::None => "none",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nwp" => Ok(Method::Nwp),
            "ceo" => Ok(Method::Ceo),
            "none" => Ok(Method::None),
            other => Err(Error::config(format!(
                "unknown method {other:?} (expected nwp, ceo or none)"
            ))),
        }
    }
}

/// Fitted comparator: calibrated scores mixed toward group base rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedOdds {
    pub scaler: PlattScaler,
    pub policy: MixingPolicy,
}

/// Probability cut for approving on calibrated scores.
pub const CALIBRATED_THRESHOLD: f64 = 0.5;

impl CalibratedOdds {
    /// Fits the logistic calibration and the two-group mixing policy on a
    /// labelled training population.
    pub fn fit(
        model: &TrainedClassifier,
        train: &[IndividualState],
        weights: CostWeights,
    ) -> Result<Self> {
        let raw = train
            .iter()
            .map(|i| model.raw_score(&i.features))
            .collect::<Result<Vec<f64>>>()?;
        let labels: Vec<Label> = train.iter().map(|i| i.label).collect();
        let scaler = PlattScaler::fit(&raw, &labels)?;
        let groups = group_names(train);
        if groups.len() != 2 {
            return Err(Error::degenerate(format!(
                "calibrated equalized odds needs exactly two groups, found {groups:?}"
            )));
        }
        let scores_for = |g: &str| -> Result<GroupScores> {
            let (scores, labels) = train
                .iter()
                .zip(&raw)
                .filter(|(i, _)| i.group == g)
                .map(|(i, &r)| (scaler.probability(r), i.label))
                .unzip();
            GroupScores::new(g, scores, labels)
        };
        let policy = fit_mixing(&scores_for(&groups[0])?, &scores_for(&groups[1])?, weights)?;
        Ok(Self { scaler, policy })
    }

    pub fn score<R: Rng + ?Sized>(
        &self,
        raw: f64,
        group: &str,
        rng: &mut R,
    ) -> Result<ModulatedScore> {
        let p = apply_mixing(self.scaler.probability(raw), group, &self.policy, rng)?;
        Ok(ModulatedScore {
            raw,
            adjustment: 0.0,
            modulated: p,
            decision: Label::from_bool(p > CALIBRATED_THRESHOLD),
        })
    }
}

// One per run, so the unboxed generator is fine.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum Intervention {
    None,
    Nwp,
    /// Carries its own generator, derived from `(seed, "ceo")`.
    Ceo(CalibratedOdds, SimRng),
}

impl Intervention {
    pub fn method(&self) -> Method {
        match self {
            Intervention::None => Method::None,
            Intervention::Nwp => Method::Nwp,
            Intervention::Ceo(..) => Method::Ceo,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub id: String,
    pub group: String,
    pub request: f64,
    pub u_decision: f64,
    pub raw: f64,
    pub normalized: f64,
    pub adjustment: f64,
    /// Final score the decision was cut from: modulated margin, plain
    /// margin, or mixed calibrated probability.
    pub score: f64,
    pub decision: Label,
    pub outcome: Label,
    /// Approval converted to denial by the budget cap.
    pub budget_capped: bool,
    pub individual_payoff: f64,
    pub institution_payoff: f64,
    pub income_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub decisions: Vec<DecisionRecord>,
    pub log_nwp: f64,
    pub error: ErrorRates,
    /// Weights in force during the epoch.
    pub weights_snapshot: Vec<f64>,
    pub mean_weight: f64,
    pub weight_gini: f64,
    pub institution_profit: f64,
}

impl EpochRecord {
    pub fn welfare(&self) -> WelfarePoint {
        WelfarePoint {
            log_nwp: self.log_nwp,
            mean_weight: self.mean_weight,
            weight_gini: self.weight_gini,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub method: Method,
    pub config: SimulationConfig,
    pub classifier: TrainedClassifier,
    pub mixing: Option<CalibratedOdds>,
    pub initial_weights: Vec<f64>,
    pub epochs: Vec<EpochRecord>,
}

pub const EPOCH_CSV_COLUMNS: [&str; 7] = [
    "epoch",
    "log_nwp",
    "mean_weight",
    "weight_gini",
    "fpr",
    "fnr",
    "combined_error",
];

pub const DECISION_CSV_COLUMNS: [&str; 16] = [
    "epoch",
    "id",
    "group",
    "request",
    "u_decision",
    "raw",
    "normalized",
    "adjustment",
    "score",
    "decision",
    "outcome",
    "budget_capped",
    "individual_payoff",
    "institution_payoff",
    "income_after",
    "weight",
];

impl SimulationTrace {
    pub fn write_epoch_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(EPOCH_CSV_COLUMNS)?;
        for e in &self.epochs {
            w.write_record([
                e.epoch.to_string(),
                e.log_nwp.to_string(),
                e.mean_weight.to_string(),
                e.weight_gini.to_string(),
                cell(e.error.fpr),
                cell(e.error.fnr),
                e.error.combined.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<epoch csv>", e))?;
        Ok(())
    }

    pub fn write_decision_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(DECISION_CSV_COLUMNS)?;
        for e in &self.epochs {
            for (d, weight) in e.decisions.iter().zip(&e.weights_snapshot) {
                w.write_record([
                    e.epoch.to_string(),
                    d.id.clone(),
                    d.group.clone(),
                    d.request.to_string(),
                    d.u_decision.to_string(),
                    d.raw.to_string(),
                    d.normalized.to_string(),
                    d.adjustment.to_string(),
                    d.score.to_string(),
                    d.decision.value().to_string(),
                    d.outcome.value().to_string(),
                    u8::from(d.budget_capped).to_string(),
                    d.individual_payoff.to_string(),
                    d.institution_payoff.to_string(),
                    d.income_after.to_string(),
                    weight.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<decision csv>", e))?;
        Ok(())
    }
}

/// `w_i = income_i / income_hi`.
pub fn initial_weights(
    population: &mut [IndividualState],
    config: &SimulationConfig,
) -> Result<()> {
    let bounds = config.bounds();
    bounds.validate()?;
    for ind in population.iter() {
        if !(bounds.lo..=bounds.hi).contains(&ind.income) {
            return Err(Error::invalid(format!(
                "individual {} income {} outside [{}, {}]",
                ind.id, ind.income, bounds.lo, bounds.hi
            )));
        }
    }
    for ind in population.iter_mut() {
        ind.weight = ind.income / bounds.hi;
    }
    Ok(())
}

/// Loan request drawn around current income, redrawn until positive.
pub fn sample_request<R: Rng + ?Sized>(income: f64, spread: f64, rng: &mut R) -> Result<f64> {
    if !(income > 0.0) || !income.is_finite() {
        return Err(Error::invalid(format!("income must be > 0, got {income}")));
    }
    if !(spread >= 0.0) || !spread.is_finite() {
        return Err(Error::invalid(format!(
            "request spread must be >= 0, got {spread}"
        )));
    }
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let draw = income + spread * income * z;
        if draw > 0.0 {
            return Ok(draw);
        }
    }
}

/// Realized outcome: repay iff a Gaussian draw around the raw prediction is
/// positive.
pub fn sample_outcome<R: Rng + ?Sized>(
    raw_prediction: f64,
    spread: f64,
    rng: &mut R,
) -> Result<Label> {
    if !raw_prediction.is_finite() {
        return Err(Error::invalid("raw prediction must be finite"));
    }
    if !(spread >= 0.0) || !spread.is_finite() {
        return Err(Error::invalid(format!(
            "outcome spread must be >= 0, got {spread}"
        )));
    }
    let dist = Normal::new(raw_prediction, spread)
        .map_err(|e| Error::invalid(format!("outcome distribution: {e}")))?;
    Ok(Label::from_bool(dist.sample(rng) > 0.0))
}

/// Applies the realized scenario's payoffs; returns
/// `(individual_payoff, institution_payoff)`.
pub fn apply_rewards(
    individual: &mut IndividualState,
    institution: &mut InstitutionState,
    decision: Label,
    outcome: Label,
    principal: f64,
    table: &UtilityTable,
    bounds: &IncomeBounds,
) -> Result<(f64, f64)> {
    let scenario = Scenario::from_labels(decision, outcome);
    let ind_payoff = scenario_payoff(scenario, principal, table, Party::Individual)?;
    let inst_payoff = scenario_payoff(scenario, principal, table, Party::Institution)?;
    individual.income = bounds.clamp(individual.income + ind_payoff);
    institution.profit += inst_payoff;
    Ok((ind_payoff, inst_payoff))
}

/// Stage (b): lifts every weight below the mean toward it.
pub fn welfare_uplift(weights: &[f64], eta: f64) -> Vec<f64> {
    if weights.is_empty() {
        return Vec::new();
    }
    let mean = weights.iter().sum::<f64>() / weights.len() as f64;
    weights
        .iter()
        .map(|&w| w + eta * (mean - w).max(0.0))
        .collect()
}

/// Stage (c) multiplier for members of a group with combined error
/// `group_error` when the population error is `overall_error`.
pub fn fairness_factor(group_error: f64, overall_error: f64, eta: f64) -> f64 {
    1.0 + eta * (group_error - overall_error)
}

/// End-of-epoch weight update: (a) re-derive weights from income,
/// (b) welfare uplift toward the mean, (c) per-group error correction, then
/// clamp into `[MIN_WEIGHT, MAX_WEIGHT]`. Returns the new weights.
pub fn tau_update(
    population: &mut [IndividualState],
    record: &EpochRecord,
    policy: &PolicyGoal,
    income_hi: f64,
) -> Result<Vec<f64>> {
    policy.validate()?;
    if record.decisions.len() != population.len() {
        return Err(Error::invalid(format!(
            "epoch record has {} decisions for a population of {}",
            record.decisions.len(),
            population.len()
        )));
    }
    let (eta_b, eta_c) = policy.effective_steps();

    let mut weights: Vec<f64> = population.iter().map(|i| i.income / income_hi).collect();
    if eta_b > 0.0 {
        weights = welfare_uplift(&weights, eta_b);
    }
    if eta_c > 0.0 {
        let overall = record.error.combined;
        let mut factors: BTreeMap<&str, Option<f64>> = BTreeMap::new();
        for (w, ind) in weights.iter_mut().zip(population.iter()) {
            let factor = *factors.entry(ind.group.as_str()).or_insert_with(|| {
                let f = record
                    .error
                    .per_group
                    .get(&ind.group)
                    .map(|g| fairness_factor(g.combined, overall, eta_c));
                if f.is_none() {
                    warn!(
                        "group {} absent from epoch {} record; skipping its correction",
                        ind.group, record.epoch
                    );
                }
                f
            });
            if let Some(f) = factor {
                *w *= f;
            }
        }
    }
    for (w, ind) in weights.iter_mut().zip(population.iter_mut()) {
        *w = w.clamp(MIN_WEIGHT, MAX_WEIGHT);
        ind.weight = *w;
    }
    Ok(weights)
}

/// Everything a run carries from one epoch to the next.
#[derive(Debug, Clone)]
pub struct SimState {
    pub population: Vec<IndividualState>,
    pub institution: InstitutionState,
    pub classifier: TrainedClassifier,
    pub intervention: Intervention,
    /// Number of completed epochs.
    pub completed: usize,
}

/// Runs one epoch. Work happens on copies of the population and institution
/// and is committed only if every individual succeeds.
pub fn run_epoch(
    state: &mut SimState,
    config: &SimulationConfig,
    rng: &mut SimRng,
) -> Result<EpochRecord> {
    let table = &config.utility_table;
    let bounds = config.bounds();
    let epoch = state.completed + 1;
    let mut population = state.population.clone();
    let mut institution = state.institution.clone();

    // Everyone else's welfare at the status quo; constant across the four
    // scenarios of one decision, so it only shifts the matrix.
    let status_quo = to_positive_utility(0.0, table)?.ln();
    let total_rest: f64 = population.iter().map(|i| i.weight.ln() + status_quo).sum();

    let mut decisions = Vec::with_capacity(population.len());
    for ind in population.iter_mut() {
        let request = sample_request(ind.income, config.request_spread, rng)?;
        let rest = total_rest - (ind.weight.ln() + status_quo);
        let matrix = scenario_nwp_matrix(ind, &institution, rest, request, table)?;
        let utility = decision_utility(&matrix)?;
        let margin = state.classifier.margin(&ind.features)?;
        let scored = match &mut state.intervention {
            Intervention::Nwp => modulate(&margin, &utility, &config.modulation)?,
            Intervention::None => {
                ModulatedScore::unmodulated(margin.raw, config.modulation.threshold)
            }
            Intervention::Ceo(model, method_rng) => {
                model.score(margin.raw, &ind.group, method_rng)?
            }
        };

        let mut decision = scored.decision;
        let budget_capped = decision.is_positive() && !institution.can_lend(request);
        if budget_capped {
            decision = Label::Negative;
        }
        if decision.is_positive() {
            institution.outstanding += request;
        }
        debug_assert!(institution.outstanding <= institution.budget);

        let outcome = sample_outcome(margin.raw, config.outcome_spread, rng)?;
        let (individual_payoff, institution_payoff) = apply_rewards(
            ind,
            &mut institution,
            decision,
            outcome,
            request,
            table,
            &bounds,
        )?;
        ind.record(LedgerEntry {
            epoch,
            decision,
            outcome,
            payoff: individual_payoff,
        })?;
        decisions.push(DecisionRecord {
            id: ind.id.clone(),
            group: ind.group.clone(),
            request,
            u_decision: utility.u_decision,
            raw: margin.raw,
            normalized: margin.normalized,
            adjustment: scored.adjustment,
            score: scored.modulated,
            decision,
            outcome,
            budget_capped,
            individual_payoff,
            institution_payoff,
            income_after: ind.income,
        });
    }
    // Loans settle at the end of the epoch.
    institution.outstanding = 0.0;

    let labels: Vec<Label> = decisions.iter().map(|d| d.decision).collect();
    let outcomes: Vec<Label> = decisions.iter().map(|d| d.outcome).collect();
    let groups: Vec<&str> = decisions.iter().map(|d| d.group.as_str()).collect();
    let error = error_rates_with(&labels, &outcomes, &groups, config.combined_rule)?;

    let weights_snapshot: Vec<f64> = population.iter().map(|i| i.weight).collect();
    let mut weights = vec![institution.weight];
    weights.extend(&weights_snapshot);
    let mean_institution_payoff =
        decisions.iter().map(|d| d.institution_payoff).sum::<f64>() / decisions.len() as f64;
    let mut utilities = vec![to_positive_utility(mean_institution_payoff, table)?];
    for d in &decisions {
        utilities.push(to_positive_utility(d.individual_payoff, table)?);
    }
    let log_nwp = log_nwp(&weights, &utilities)?;

    let record = EpochRecord {
        epoch,
        mean_weight: weights_snapshot.iter().sum::<f64>() / weights_snapshot.len() as f64,
        weight_gini: gini(&weights_snapshot)?,
        weights_snapshot,
        decisions,
        log_nwp,
        error,
        institution_profit: institution.profit,
    };
    tau_update(&mut population, &record, &config.policy, config.income_hi)?;

    if config.retrain_each_epoch {
        let data: Vec<_> = population
            .iter()
            .zip(&record.decisions)
            .map(|(i, d)| (i.features.clone(), d.outcome))
            .collect();
        match classifier::train(&data, &config.classifier) {
            Ok(model) => state.classifier = model,
            Err(Error::DegenerateData(msg)) => {
                warn!("epoch {epoch}: keeping classifier, retrain skipped: {msg}")
            }
            Err(e) => return Err(e),
        }
    }

    state.population = population;
    state.institution = institution;
    state.completed = epoch;
    Ok(record)
}

pub fn training_set(individuals: &[IndividualState]) -> Vec<(crate::agent::FeatureVector, Label)> {
    individuals
        .iter()
        .map(|i| (i.features.clone(), i.label))
        .collect()
}

/// Builds the starting state: trains the classifier on the whole sample,
/// takes the first `population_size` individuals and fits the comparator
/// when `method` asks for it.
pub fn prepare_state(
    config: &SimulationConfig,
    sample: &PopulationSample,
    method: Method,
) -> Result<SimState> {
    config.validate()?;
    if sample.len() < config.population_size {
        return Err(Error::invalid(format!(
            "dataset has {} individuals, population_size is {}",
            sample.len(),
            config.population_size
        )));
    }
    let model = classifier::train(&training_set(&sample.individuals), &config.classifier)?;
    let mut population: Vec<IndividualState> =
        sample.individuals[..config.population_size].to_vec();
    for ind in &mut population {
        ind.ledger.clear();
    }
    initial_weights(&mut population, config)?;
    let intervention = match method {
        Method::Nwp => Intervention::Nwp,
        Method::None => Intervention::None,
        Method::Ceo => Intervention::Ceo(
            CalibratedOdds::fit(&model, &sample.individuals, CostWeights::default())?,
            rng::derived(config.seed, Method::Ceo.name()),
        ),
    };
    Ok(SimState {
        population,
        institution: InstitutionState::new(config.institution_weight, config.institution_budget)?,
        classifier: model,
        intervention,
        completed: 0,
    })
}

/// Full NWP run: train once, then `config.epochs` chained epochs.
pub fn run_simulation(
    config: &SimulationConfig,
    sample: &PopulationSample,
) -> Result<SimulationTrace> {
    run_simulation_with(config, sample, Method::Nwp)
}

pub fn run_simulation_with(
    config: &SimulationConfig,
    sample: &PopulationSample,
    method: Method,
) -> Result<SimulationTrace> {
    let mut state = prepare_state(config, sample, method)?;
    let classifier = state.classifier.clone();
    let mixing = match &state.intervention {
        Intervention::Ceo(model, _) => Some(model.clone()),
        _ => None,
    };
    let initial_weights = state.population.iter().map(|i| i.weight).collect();
    let mut rng = rng::seeded(config.seed);
    let epochs = (0..config.epochs)
        .map(|_| run_epoch(&mut state, config, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationTrace {
        method,
        config: config.clone(),
        classifier,
        mixing,
        initial_weights,
        epochs,
    })
}
