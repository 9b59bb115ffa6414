//! Correct classification rates and their aggregation.
//!
//! CCR is computed per group first (percentage of that group's decisions
//! that match ground truth) and then summarised across groups with the mean
//! and the sample (n − 1) standard deviation.

mod breakdown;
mod emit;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, TrialType};

pub use breakdown::{breakdown, BreakdownBin, BreakdownDimension, CorrelationBreakdown, TimeBins};
pub use emit::{
    emit_breakdown, emit_report, write_boxplot_csv, write_breakdown_csv, write_breakdown_json,
    write_class_csv, write_difficulty_csv, write_errors_csv, write_report_csv, write_report_json,
    REPORT_HEADER,
};
pub use report::{build_report, BoxSummary, ErrorSplit, FusionReport, ReportCell, SubgroupCell};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no decisions to aggregate")]
    EmptyInput,
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("unknown breakdown dimension `{0}` (expected confidence, experience or time)")]
    InvalidDimension(String),
    #[error("invalid time bins: {0}")]
    InvalidBins(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Correct/total decision counts of one group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
}

impl Tally {
    pub fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += usize::from(correct);
    }

    pub fn percent(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.correct as f64 / self.total as f64)
    }
}

/// Mean and sample standard deviation of per-group CCRs, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcrStat {
    pub mean: f64,
    /// Zero when `n_groups == 1`, where it is undefined.
    pub std: f64,
    pub n_groups: usize,
}

impl CcrStat {
    pub fn from_percentages(values: &[f64]) -> Result<Self, MetricsError> {
        if values.is_empty() {
            return Err(MetricsError::EmptyInput);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            mean,
            std,
            n_groups: values.len(),
        })
    }

    pub fn std_defined(&self) -> bool {
        self.n_groups > 1
    }
}

/// CCR statistics over groups of `(decision == ground truth)` outcomes.
pub fn compute_ccr(groups: &[Tally]) -> Result<CcrStat, MetricsError> {
    let rates = groups
        .iter()
        .map(|t| t.percent().ok_or(MetricsError::EmptyInput))
        .collect::<Result<Vec<_>, _>>()?;
    CcrStat::from_percentages(&rates)
}

/// Individual examiner CCRs per trial type: each examiner is one group.
pub fn individual_ccr(dataset: &Dataset) -> Result<BTreeMap<TrialType, CcrStat>, MetricsError> {
    let mut per: BTreeMap<TrialType, BTreeMap<&str, Tally>> = BTreeMap::new();
    for t in &dataset.trials {
        per.entry(t.trial_type)
            .or_default()
            .entry(t.examiner_id.as_str())
            .or_default()
            .add(t.is_correct());
    }
    if per.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    per.into_iter()
        .map(|(tt, by_examiner)| {
            let tallies: Vec<Tally> = by_examiner.into_values().collect();
            Ok((tt, compute_ccr(&tallies)?))
        })
        .collect()
}

/// Linear-interpolation quantile (`q` in `[0, 1]`) of sorted values.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
