//! Stakeholder state: the individuals subject to a decision and the
//! institution acting on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary decision or outcome. `Positive` is approval / repayment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn value(self) -> u8 {
        self.into()
    }

    /// The {-1, +1} encoding used by the hinge loss.
    pub fn signed(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        match l {
            Label::Negative => 0,
            Label::Positive => 1,
        }
    }
}

impl TryFrom<u8> for Label {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(Error::invalid(format!("label must be 0 or 1, got {other}"))),
        }
    }
}

/// Numeric-encoded attributes with their names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    values: Vec<f64>,
    names: Vec<String>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, names: Vec<String>) -> Result<Self> {
        if values.len() != names.len() {
            return Err(Error::invalid(format!(
                "feature vector has {} values but {} names",
                values.len(),
                names.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "feature {} is not finite ({})",
                names[i], values[i]
            )));
        }
        Ok(Self { values, names })
    }

    /// Unnamed features, named `x0`, `x1`, ...
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let names = (0..values.len()).map(|i| format!("x{i}")).collect();
        Self::new(values, names)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One resolved decision in an individual's history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub epoch: usize,
    pub decision: Label,
    pub outcome: Label,
    pub payoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualState {
    pub id: String,
    pub features: FeatureVector,
    pub income: f64,
    pub weight: f64,
    pub group: String,
    /// Historical label from the source data, used for training and for
    /// evaluation against ground truth.
    pub label: Label,
    #[serde(default)]
    pub ledger: Vec<LedgerEntry>,
}

impl IndividualState {
    pub fn validate(&self, income_lo: f64, income_hi: f64) -> Result<()> {
        if !(self.weight >= 0.0) {
            return Err(Error::invalid(format!(
                "individual {} has negative weight {}",
                self.id, self.weight
            )));
        }
        if !(self.income >= income_lo && self.income <= income_hi) {
            return Err(Error::invalid(format!(
                "individual {} income {} outside [{income_lo}, {income_hi}]",
                self.id, self.income
            )));
        }
        if self.ledger.windows(2).any(|w| w[0].epoch >= w[1].epoch) {
            return Err(Error::invalid(format!(
                "individual {} ledger epochs are not strictly increasing",
                self.id
            )));
        }
        Ok(())
    }

    pub fn record(&mut self, entry: LedgerEntry) -> Result<()> {
        if let Some(last) = self.ledger.last() {
            if entry.epoch <= last.epoch {
                return Err(Error::invalid(format!(
                    "ledger entry for epoch {} after epoch {} for individual {}",
                    entry.epoch, last.epoch, self.id
                )));
            }
        }
        self.ledger.push(entry);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstitutionState {
    pub weight: f64,
    pub budget: f64,
    /// Principal currently on loan; cleared when loans settle at epoch end.
    pub outstanding: f64,
    pub profit: f64,
}

impl InstitutionState {
    pub fn new(weight: f64, budget: f64) -> Result<Self> {
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::invalid(format!(
                "institution weight {weight} must be >= 0"
            )));
        }
        if !(budget >= 0.0) || !budget.is_finite() {
            return Err(Error::invalid(format!(
                "institution budget {budget} must be >= 0"
            )));
        }
        Ok(Self {
            weight,
            budget,
            outstanding: 0.0,
            profit: 0.0,
        })
    }

    pub fn can_lend(&self, principal: f64) -> bool {
        self.outstanding + principal <= self.budget
    }
}
