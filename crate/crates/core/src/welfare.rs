//! Welfare calculus: scenario payoffs, the positive-utility mapping, the
//! log-domain Nash welfare product and the decision utility built from the
//! four approve/deny x repay/default scenarios.
//!
//! Products of hundreds of weighted utilities under/overflow `f64`, so every
//! welfare product here is a sum of logarithms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::agent::{IndividualState, InstitutionState, Label};
use crate::error::{Error, Result};

/// One cell of the decision x outcome grid. The first digit is the decision
/// (1 = approve), the second the outcome (1 = repay).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "11")]
    ApprovedRepaid,
    #[serde(rename = "10")]
    ApprovedDefaulted,
    #[serde(rename = "01")]
    DeniedWouldRepay,
    #[serde(rename = "00")]
    DeniedWouldDefault,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::ApprovedRepaid,
        Scenario::ApprovedDefaulted,
        Scenario::DeniedWouldRepay,
        Scenario::DeniedWouldDefault,
    ];

    pub fn from_labels(decision: Label, outcome: Label) -> Self {
        match (decision, outcome) {
            (Label::Positive, Label::Positive) => Scenario::ApprovedRepaid,
            (Label::Positive, Label::Negative) => Scenario::ApprovedDefaulted,
            (Label::Negative, Label::Positive) => Scenario::DeniedWouldRepay,
            (Label::Negative, Label::Negative) => Scenario::DeniedWouldDefault,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Scenario::ApprovedRepaid => "11",
            Scenario::ApprovedDefaulted => "10",
            Scenario::DeniedWouldRepay => "01",
            Scenario::DeniedWouldDefault => "00",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Institution,
    Individual,
}

/// Payoff magnitudes, as fractions of the principal, for each party in each
/// scenario, plus the affine shift and floor that make utilities positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityTable {
    pub interest_rate: f64,
    pub principal_loss_fraction: f64,
    pub individual_gain_repay: f64,
    pub individual_loss_default: f64,
    pub rejection_opportunity_cost: f64,
    pub payoff_shift: f64,
    pub utility_floor: f64,
}

pub const DEFAULT_INCOME_HI: f64 = 1000.0;

impl Default for UtilityTable {
    fn default() -> Self {
        Self::with_shift(DEFAULT_INCOME_HI)
    }
}

impl UtilityTable {
    /// Lending defaults with `payoff_shift` set to the income ceiling.
    pub fn with_shift(payoff_shift: f64) -> Self {
        Self {
            interest_rate: 0.1,
            principal_loss_fraction: 1.0,
            individual_gain_repay: 0.2,
            individual_loss_default: 0.5,
            rejection_opportunity_cost: 0.05,
            payoff_shift,
            utility_floor: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.utility_floor > 0.0) || !self.utility_floor.is_finite() {
            return Err(Error::config(format!(
                "utility_floor must be > 0, got {}",
                self.utility_floor
            )));
        }
        let fractions = [
            ("interest_rate", self.interest_rate),
            ("principal_loss_fraction", self.principal_loss_fraction),
            ("individual_gain_repay", self.individual_gain_repay),
            ("individual_loss_default", self.individual_loss_default),
            (
                "rejection_opportunity_cost",
                self.rejection_opportunity_cost,
            ),
        ];
        for (name, v) in fractions {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !self.payoff_shift.is_finite() {
            return Err(Error::config("payoff_shift must be finite"));
        }
        Ok(())
    }
}

/// Signed payoff to `party` when `scenario` is realized on a loan of
/// `principal`.
pub fn scenario_payoff(
    scenario: Scenario,
    principal: f64,
    table: &UtilityTable,
    party: Party,
) -> Result<f64> {
    if !(principal > 0.0) || !principal.is_finite() {
        return Err(Error::invalid(format!(
            "principal must be > 0, got {principal}"
        )));
    }
    let fraction = match (party, scenario) {
        (Party::Institution, Scenario::ApprovedRepaid) => table.interest_rate,
        (Party::Institution, Scenario::ApprovedDefaulted) => -table.principal_loss_fraction,
        (Party::Institution, _) => 0.0,
        (Party::Individual, Scenario::ApprovedRepaid) => table.individual_gain_repay,
        (Party::Individual, Scenario::ApprovedDefaulted) => -table.individual_loss_default,
        (Party::Individual, Scenario::DeniedWouldRepay) => -table.rejection_opportunity_cost,
        (Party::Individual, Scenario::DeniedWouldDefault) => 0.0,
    };
    Ok(fraction * principal)
}

/// `max(payoff + shift, floor)`: strictly positive and order-preserving.
pub fn to_positive_utility(payoff: f64, table: &UtilityTable) -> Result<f64> {
    if !payoff.is_finite() {
        return Err(Error::invalid(format!(
            "payoff must be finite, got {payoff}"
        )));
    }
    Ok((payoff + table.payoff_shift).max(table.utility_floor))
}

/// `ln prod_i w_i u_i`, computed as a sum of logs.
pub fn log_nwp(weights: &[f64], utilities: &[f64]) -> Result<f64> {
    if weights.len() != utilities.len() {
        return Err(Error::invalid(format!(
            "{} weights but {} utilities",
            weights.len(),
            utilities.len()
        )));
    }
    weights
        .iter()
        .zip(utilities)
        .enumerate()
        .try_fold(0.0, |acc, (i, (&w, &u))| Ok(acc + log_term(i, w, u)?))
}

/// `ln w + ln u` for a single stakeholder.
fn log_term(index: usize, weight: f64, utility: f64) -> Result<f64> {
    // Zero weight would send the product to zero; that is a configuration
    // bug, not a welfare state.
    if !(weight > 0.0) || !weight.is_finite() {
        return Err(Error::invalid(format!(
            "weight at index {index} must be > 0, got {weight}"
        )));
    }
    if !(utility > 0.0) || !utility.is_finite() {
        return Err(Error::invalid(format!(
            "utility at index {index} must be > 0, got {utility}"
        )));
    }
    Ok(weight.ln() + utility.ln())
}

/// Log-domain NWP of a decision under each of the four scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioNwpMatrix {
    pub nwp_11: f64,
    pub nwp_10: f64,
    pub nwp_01: f64,
    pub nwp_00: f64,
}

impl ScenarioNwpMatrix {
    pub fn new(nwp_11: f64, nwp_10: f64, nwp_01: f64, nwp_00: f64) -> Result<Self> {
        let m = Self {
            nwp_11,
            nwp_10,
            nwp_01,
            nwp_00,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn get(&self, scenario: Scenario) -> f64 {
        match scenario {
            Scenario::ApprovedRepaid => self.nwp_11,
            Scenario::ApprovedDefaulted => self.nwp_10,
            Scenario::DeniedWouldRepay => self.nwp_01,
            Scenario::DeniedWouldDefault => self.nwp_00,
        }
    }

    fn validate(&self) -> Result<()> {
        if [self.nwp_11, self.nwp_10, self.nwp_01, self.nwp_00]
            .iter()
            .all(|v| v.is_finite())
        {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "non-finite scenario matrix {self:?}"
            )))
        }
    }
}

/// Utility of one stakeholder in `scenario`.
pub fn scenario_utility(
    scenario: Scenario,
    principal: f64,
    table: &UtilityTable,
    party: Party,
) -> Result<f64> {
    to_positive_utility(scenario_payoff(scenario, principal, table, party)?, table)
}

/// Welfare product of the whole society under each scenario for one
/// decision. Everyone other than the individual and the institution is
/// summarized by `rest_log_nwp`, which is the same in all four scenarios.
pub fn scenario_nwp_matrix(
    individual: &IndividualState,
    institution: &InstitutionState,
    rest_log_nwp: f64,
    principal: f64,
    table: &UtilityTable,
) -> Result<ScenarioNwpMatrix> {
    if !rest_log_nwp.is_finite() {
        return Err(Error::invalid(format!(
            "rest_log_nwp must be finite, got {rest_log_nwp}"
        )));
    }
    let entry = |scenario| -> Result<f64> {
        let u_inst = scenario_utility(scenario, principal, table, Party::Institution)?;
        let u_ind = scenario_utility(scenario, principal, table, Party::Individual)?;
        Ok(rest_log_nwp
            + log_term(0, institution.weight, u_inst)?
            + log_term(1, individual.weight, u_ind)?)
    };
    ScenarioNwpMatrix::new(
        entry(Scenario::ApprovedRepaid)?,
        entry(Scenario::ApprovedDefaulted)?,
        entry(Scenario::DeniedWouldRepay)?,
        entry(Scenario::DeniedWouldDefault)?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionUtility {
    /// Welfare gained by approving when the loan is repaid rather than
    /// defaulted.
    pub delta_nwp_1: f64,
    /// Same comparison when the loan is denied.
    pub delta_nwp_0: f64,
    /// `delta_nwp_1 - delta_nwp_0`; positive favours approval.
    pub u_decision: f64,
}

pub fn decision_utility(matrix: &ScenarioNwpMatrix) -> Result<DecisionUtility> {
    matrix.validate()?;
    let delta_nwp_1 = matrix.nwp_11 - matrix.nwp_10;
    let delta_nwp_0 = matrix.nwp_01 - matrix.nwp_00;
    Ok(DecisionUtility {
        delta_nwp_1,
        delta_nwp_0,
        u_decision: delta_nwp_1 - delta_nwp_0,
    })
}
