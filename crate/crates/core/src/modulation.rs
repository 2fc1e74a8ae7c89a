//! Utility modulation of a raw classifier score.
//!
//! The adjustment is `lambda * tanh(u / s) * (1 - |eps|)`: bounded by
//! `lambda`, monotone in the decision utility `u`, and gated to zero for
//! points the classifier is maximally confident about (`|eps| = 1`).

use serde::{Deserialize, Serialize};

use crate::agent::Label;
use crate::classifier::MarginDistance;
use crate::error::{Error, Result};
use crate::welfare::DecisionUtility;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulationConfig {
    pub lambda: f64,
    pub utility_scale: f64,
    pub threshold: f64,
}

impl Default for ModulationConfig {
    fn default() -> Self {
        Self {
            lambda: 0.25,
            utility_scale: 1.0,
            threshold: 0.0,
        }
    }
}

impl ModulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::config(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.utility_scale > 0.0) || !self.utility_scale.is_finite() {
            return Err(Error::config(format!(
                "utility_scale must be > 0, got {}",
                self.utility_scale
            )));
        }
        if !self.threshold.is_finite() {
            return Err(Error::config("threshold must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulatedScore {
    pub raw: f64,
    pub adjustment: f64,
    pub modulated: f64,
    pub decision: Label,
}

impl ModulatedScore {
    /// A score passed through unchanged.
    pub fn unmodulated(raw: f64, threshold: f64) -> Self {
        Self {
            raw,
            adjustment: 0.0,
            modulated: raw,
            decision: Label::from_bool(raw > threshold),
        }
    }
}

pub fn modulate(
    margin: &MarginDistance,
    u: &DecisionUtility,
    config: &ModulationConfig,
) -> Result<ModulatedScore> {
    if !margin.raw.is_finite() || !margin.normalized.is_finite() || !u.u_decision.is_finite() {
        return Err(Error::invalid(format!(
            "non-finite modulation input: margin {margin:?}, u_decision {}",
            u.u_decision
        )));
    }
    let gate = 1.0 - margin.normalized.abs().min(1.0);
    let adjustment = config.lambda * (u.u_decision / config.utility_scale).tanh() * gate;
    let modulated = margin.raw + adjustment;
    Ok(ModulatedScore {
        raw: margin.raw,
        adjustment,
        modulated,
        decision: Label::from_bool(modulated > config.threshold),
    })
}
