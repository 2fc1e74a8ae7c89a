//! Calibrated equalized odds comparator.
//!
//! Scores are calibrated probabilities. For two groups, the one with the
//! lower weighted generalized error cost has a fraction `alpha` of its
//! scores replaced by its base rate, which raises its expected cost linearly
//! until it matches the other group.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScores {
    pub group: String,
    pub scores: Vec<f64>,
    pub labels: Vec<Label>,
}

impl GroupScores {
    pub fn new(group: impl Into<String>, scores: Vec<f64>, labels: Vec<Label>) -> Result<Self> {
        let group = group.into();
        if scores.len() != labels.len() {
            return Err(Error::invalid(format!(
                "group {group}: {} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::invalid(format!(
                "group {group}: score {s} outside [0, 1]"
            )));
        }
        Ok(Self {
            group,
            scores,
            labels,
        })
    }

    /// Empirical positive rate.
    pub fn base_rate(&self) -> f64 {
        let pos = self.labels.iter().filter(|l| l.is_positive()).count();
        pos as f64 / self.labels.len().max(1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub fp_weight: f64,
    pub fn_weight: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            fp_weight: 1.0,
            fn_weight: 1.0,
        }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<()> {
        let ok = |w: f64| w >= 0.0 && w.is_finite();
        if !ok(self.fp_weight) || !ok(self.fn_weight) || self.fp_weight + self.fn_weight == 0.0 {
            return Err(Error::invalid(format!(
                "cost weights must be non-negative and not both zero, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn cost(&self, gfpr: f64, gfnr: f64) -> f64 {
        self.fp_weight * gfpr + self.fn_weight * gfnr
    }

    /// Cost of the constant predictor that outputs `base_rate` for everyone.
    pub fn base_rate_cost(&self, base_rate: f64) -> f64 {
        self.cost(base_rate, 1.0 - base_rate)
    }
}

/// Generalized (score-based) false positive and false negative rates.
pub fn generalized_rates(g: &GroupScores) -> Result<(f64, f64)> {
    let mut neg = (0.0, 0usize);
    let mut pos = (0.0, 0usize);
    for (&s, &l) in g.scores.iter().zip(&g.labels) {
        match l {
            Label::Negative => {
                neg.0 += s;
                neg.1 += 1;
            }
            Label::Positive => {
                pos.0 += 1.0 - s;
                pos.1 += 1;
            }
        }
    }
    if neg.1 == 0 || pos.1 == 0 {
        return Err(Error::degenerate(format!(
            "group {} needs both labels ({} negative, {} positive)",
            g.group, neg.1, pos.1
        )));
    }
    Ok((neg.0 / neg.1 as f64, pos.0 / pos.1 as f64))
}

pub fn weighted_cost(g: &GroupScores, weights: &CostWeights) -> Result<f64> {
    let (gfpr, gfnr) = generalized_rates(g)?;
    Ok(weights.cost(gfpr, gfnr))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingPolicy {
    pub alpha_per_group: BTreeMap<String, f64>,
    pub base_rate_per_group: BTreeMap<String, f64>,
    pub cost_weights: CostWeights,
    /// Cost gap left after mixing; zero when equalization was reached.
    pub residual_gap: f64,
    /// Set when equal costs were unreachable within `alpha` in [0, 1].
    pub clamped: bool,
}

/// Mixing rate that lifts `low_cost` to `high_cost` when mixing toward a
/// predictor of cost `base_cost`: solves
/// `(1 - alpha) * low_cost + alpha * base_cost = high_cost`.
///
/// Returns `(alpha, residual_gap, clamped)`.
pub fn solve_mixing_rate(low_cost: f64, base_cost: f64, high_cost: f64) -> (f64, f64, bool) {
    let gap = high_cost - low_cost;
    if gap <= 0.0 {
        return (0.0, 0.0, false);
    }
    let lift = base_cost - low_cost;
    if lift <= 0.0 {
        // Mixing can only lower this group's cost further.
        return (0.0, gap, true);
    }
    let alpha = gap / lift;
    if alpha > 1.0 {
        (1.0, high_cost - base_cost, true)
    } else {
        (alpha, 0.0, false)
    }
}

pub fn fit_mixing(
    a: &GroupScores,
    b: &GroupScores,
    cost_weights: CostWeights,
) -> Result<MixingPolicy> {
    cost_weights.validate()?;
    if a.group == b.group {
        return Err(Error::invalid(format!("both groups are named {}", a.group)));
    }
    let cost_a = weighted_cost(a, &cost_weights)?;
    let cost_b = weighted_cost(b, &cost_weights)?;
    // Order by (cost, name) so argument order never matters.
    let ((low, low_cost), (high, high_cost)) = if (cost_a, &a.group) <= (cost_b, &b.group) {
        ((a, cost_a), (b, cost_b))
    } else {
        ((b, cost_b), (a, cost_a))
    };
    let base_cost = cost_weights.base_rate_cost(low.base_rate());
    let (alpha, residual_gap, clamped) = solve_mixing_rate(low_cost, base_cost, high_cost);

    Ok(MixingPolicy {
        alpha_per_group: BTreeMap::from([(low.group.clone(), alpha), (high.group.clone(), 0.0)]),
        base_rate_per_group: BTreeMap::from([
            (low.group.clone(), low.base_rate()),
            (high.group.clone(), high.base_rate()),
        ]),
        cost_weights,
        residual_gap,
        clamped,
    })
}

/// With probability `alpha` of `group`, replaces `score` by the group base
/// rate.
pub fn apply_mixing<R: Rng + ?Sized>(
    score: f64,
    group: &str,
    policy: &MixingPolicy,
    rng: &mut R,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::invalid(format!("score {score} outside [0, 1]")));
    }
    let alpha = *policy
        .alpha_per_group
        .get(group)
        .ok_or_else(|| Error::invalid(format!("unknown group {group}")))?;
    let base = policy.base_rate_per_group[group];
    let draw: f64 = rng.random();
    Ok(if draw < alpha { base } else { score })
}

/// Logistic map from raw classifier margins to probabilities,
/// `p = 1 / (1 + exp(-(slope * raw + intercept)))`, fitted by maximum
/// likelihood with Platt's smoothed targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattScaler {
    pub slope: f64,
    pub intercept: f64,
}

impl PlattScaler {
    pub fn fit(raw: &[f64], labels: &[Label]) -> Result<Self> {
        if raw.len() != labels.len() || raw.is_empty() {
            return Err(Error::invalid(
                "platt scaling needs equal, non-empty inputs",
            ));
        }
        let n_pos = labels.iter().filter(|l| l.is_positive()).count() as f64;
        let n_neg = labels.len() as f64 - n_pos;
        if n_pos == 0.0 || n_neg == 0.0 {
            return Err(Error::degenerate("platt scaling needs both labels"));
        }
        let hi = (n_pos + 1.0) / (n_pos + 2.0);
        let lo = 1.0 / (n_neg + 2.0);
        let targets: Vec<f64> = labels
            .iter()
            .map(|l| if l.is_positive() { hi } else { lo })
            .collect();

        let nll = |a: f64, b: f64| -> f64 {
            raw.iter()
                .zip(&targets)
                .map(|(&x, &t)| {
                    let z = a * x + b;
                    // log(1 + e^z) - t z, written stably.
                    let softplus = if z > 0.0 {
                        z + (-z).exp().ln_1p()
                    } else {
                        z.exp().ln_1p()
                    };
                    softplus - t * z
                })
                .sum()
        };

        let (mut a, mut b) = (1.0, ((n_pos + 1.0) / (n_neg + 1.0)).ln());
        let mut f = nll(a, b);
        for _ in 0..100 {
            let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 1e-12, 0.0, 1e-12);
            for (&x, &t) in raw.iter().zip(&targets) {
                let p = sigmoid(a * x + b);
                let d = p - t;
                let w = p * (1.0 - p);
                ga += d * x;
                gb += d;
                haa += w * x * x;
                hab += w * x;
                hbb += w;
            }
            if ga.abs() < 1e-10 && gb.abs() < 1e-10 {
                break;
            }
            let det = haa * hbb - hab * hab;
            let (da, db) = (-(hbb * ga - hab * gb) / det, -(haa * gb - hab * ga) / det);
            let mut step = 1.0;
            let mut improved = false;
            while step > 1e-10 {
                let (na, nb) = (a + step * da, b + step * db);
                let nf = nll(na, nb);
                if nf < f + 1e-4 * step * (ga * da + gb * db) {
                    a = na;
                    b = nb;
                    f = nf;
                    improved = true;
                    break;
                }
                step /= 2.0;
            }
            if !improved {
                break;
            }
        }
        Ok(Self {
            slope: a,
            intercept: b,
        })
    }

    pub fn probability(&self, raw: f64) -> f64 {
        sigmoid(self.slope * raw + self.intercept)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
