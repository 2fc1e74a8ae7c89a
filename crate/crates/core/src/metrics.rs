//! Error rates, inequality statistics and method comparison reports.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::agent::Label;
use crate::error::{Error, Result};

/// Marker written to CSV for an undefined rate (empty denominator).
pub const UNDEFINED: &str = "NA";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    fn add(&mut self, decision: Label, outcome: Label) {
        match (decision, outcome) {
            (Label::Positive, Label::Positive) => self.tp += 1,
            (Label::Positive, Label::Negative) => self.fp += 1,
            (Label::Negative, Label::Negative) => self.tn += 1,
            (Label::Negative, Label::Positive) => self.fn_ += 1,
        }
    }

    /// `None` when there are no actual negatives.
    pub fn fpr(&self) -> Option<f64> {
        ratio(self.fp, self.fp + self.tn)
    }

    /// `None` when there are no actual positives.
    pub fn fnr(&self) -> Option<f64> {
        ratio(self.fn_, self.fn_ + self.tp)
    }

    pub fn combined(&self, rule: CombinedRule) -> f64 {
        match rule {
            CombinedRule::ErrorFraction => ratio(self.fp + self.fn_, self.total()).unwrap_or(0.0),
            CombinedRule::MeanOfRates => {
                let defined: Vec<f64> = [self.fpr(), self.fnr()].into_iter().flatten().collect();
                if defined.is_empty() {
                    0.0
                } else {
                    defined.iter().sum::<f64>() / defined.len() as f64
                }
            }
        }
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// How false positives and false negatives fold into one error rate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinedRule {
    /// `(fp + fn) / n`.
    #[default]
    ErrorFraction,
    /// Mean of the defined FPR and FNR.
    MeanOfRates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRates {
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub combined: f64,
    pub counts: Counts,
}

impl GroupRates {
    fn from_counts(counts: Counts, rule: CombinedRule) -> Self {
        Self {
            fpr: counts.fpr(),
            fnr: counts.fnr(),
            combined: counts.combined(rule),
            counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub combined: f64,
    pub counts: Counts,
    pub per_group: BTreeMap<String, GroupRates>,
}

pub fn error_rates<G: AsRef<str>>(
    decisions: &[Label],
    outcomes: &[Label],
    groups: &[G],
) -> Result<ErrorRates> {
    error_rates_with(decisions, outcomes, groups, CombinedRule::default())
}

pub fn error_rates_with<G: AsRef<str>>(
    decisions: &[Label],
    outcomes: &[Label],
    groups: &[G],
    rule: CombinedRule,
) -> Result<ErrorRates> {
    if decisions.len() != outcomes.len() || decisions.len() != groups.len() {
        return Err(Error::invalid(format!(
            "error_rates: {} decisions, {} outcomes, {} groups",
            decisions.len(),
            outcomes.len(),
            groups.len()
        )));
    }
    if decisions.is_empty() {
        return Err(Error::invalid("error_rates: no decisions"));
    }
    let mut overall = Counts::default();
    let mut by_group: BTreeMap<String, Counts> = BTreeMap::new();
    for ((&d, &o), g) in decisions.iter().zip(outcomes).zip(groups) {
        overall.add(d, o);
        by_group.entry(g.as_ref().to_owned()).or_default().add(d, o);
    }
    let summary = GroupRates::from_counts(overall, rule);
    Ok(ErrorRates {
        fpr: summary.fpr,
        fnr: summary.fnr,
        combined: summary.combined,
        counts: overall,
        per_group: by_group
            .into_iter()
            .map(|(g, c)| (g, GroupRates::from_counts(c, rule)))
            .collect(),
    })
}

/// Gini coefficient: mean absolute pairwise difference over twice the mean.
pub fn gini(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("gini of an empty list"));
    }
    if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::invalid("gini needs finite non-negative values"));
    }
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("gini of all-zero values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    // sum_{i<j} (x_j - x_i) = sum_k x_k (2k - n + 1) over ascending order.
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(k, x)| x * (2.0 * k as f64 - n + 1.0))
        .sum();
    Ok(weighted / (n * total))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfarePoint {
    pub log_nwp: f64,
    pub mean_weight: f64,
    pub weight_gini: f64,
}

/// Per-epoch or per-split results of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSeries {
    pub method: String,
    pub rates: Vec<ErrorRates>,
    /// Empty, or aligned with `rates`.
    #[serde(default)]
    pub welfare: Vec<WelfarePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateDelta {
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub combined: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub index: usize,
    pub method: String,
    pub rates: ErrorRates,
    pub delta: Option<RateDelta>,
    pub welfare: Option<WelfarePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// What `index` counts: `"epoch"` or `"split"`.
    pub index_label: String,
    pub methods: Vec<String>,
    pub baseline: Option<String>,
    pub rows: Vec<ReportRow>,
}

/// Tabulates `series` in the given method order, with deltas against
/// `baseline` when one is supplied.
pub fn build_report(
    index_label: &str,
    series: &[MethodSeries],
    baseline: Option<&MethodSeries>,
) -> Result<ComparisonReport> {
    let len = series
        .first()
        .map(|s| s.rates.len())
        .ok_or_else(|| Error::invalid("report needs at least one method"))?;
    let mut seen = BTreeSet::new();
    for s in series.iter().chain(baseline) {
        if s.rates.len() != len {
            return Err(Error::invalid(format!(
                "series {} has {} entries, expected {len}",
                s.method,
                s.rates.len()
            )));
        }
        if !s.welfare.is_empty() && s.welfare.len() != len {
            return Err(Error::invalid(format!(
                "series {} welfare has {} entries, expected {len}",
                s.method,
                s.welfare.len()
            )));
        }
    }
    for s in series {
        if !seen.insert(s.method.as_str()) {
            return Err(Error::invalid(format!("duplicate method {}", s.method)));
        }
    }

    let mut rows = Vec::with_capacity(series.len() * len);
    for s in series {
        for (index, rates) in s.rates.iter().enumerate() {
            let delta = baseline.map(|b| {
                let base = &b.rates[index];
                RateDelta {
                    fpr: rates.fpr.zip(base.fpr).map(|(a, b)| a - b),
                    fnr: rates.fnr.zip(base.fnr).map(|(a, b)| a - b),
                    combined: rates.combined - base.combined,
                }
            });
            rows.push(ReportRow {
                index: index + 1,
                method: s.method.clone(),
                rates: rates.clone(),
                delta,
                welfare: s.welfare.get(index).copied(),
            });
        }
    }
    Ok(ComparisonReport {
        index_label: index_label.to_owned(),
        methods: series.iter().map(|s| s.method.clone()).collect(),
        baseline: baseline.map(|b| b.method.clone()),
        rows,
    })
}

pub const REPORT_CSV_COLUMNS: [&str; 11] = [
    "index",
    "method",
    "fpr",
    "fnr",
    "combined",
    "delta_fpr",
    "delta_fnr",
    "delta_combined",
    "log_nwp",
    "mean_weight",
    "weight_gini",
];

/// CSV cell for an optional rate; undefined rates are `NA`.
pub fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_owned(), |x| x.to_string())
}

impl ComparisonReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(REPORT_CSV_COLUMNS)?;
        for row in &self.rows {
            let welfare = row.welfare;
            w.write_record([
                row.index.to_string(),
                row.method.clone(),
                cell(row.rates.fpr),
                cell(row.rates.fnr),
                row.rates.combined.to_string(),
                cell(row.delta.and_then(|d| d.fpr)),
                cell(row.delta.and_then(|d| d.fnr)),
                cell(row.delta.map(|d| d.combined)),
                cell(welfare.map(|p| p.log_nwp)),
                cell(welfare.map(|p| p.mean_weight)),
                cell(welfare.map(|p| p.weight_gini)),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<report csv>", e))?;
        Ok(())
    }

    pub fn rows_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }
}
