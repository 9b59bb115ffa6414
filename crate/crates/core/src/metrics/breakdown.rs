//! Individual detection performance against confidence, experience and
//! decision time.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{CcrStat, MetricsError, Tally};
use crate::data::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BreakdownDimension {
    Confidence,
    Experience,
    Time,
}

impl BreakdownDimension {
    pub const ALL: [BreakdownDimension; 3] = [
        BreakdownDimension::Confidence,
        BreakdownDimension::Experience,
        BreakdownDimension::Time,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BreakdownDimension::Confidence => "confidence",
            BreakdownDimension::Experience => "experience",
            BreakdownDimension::Time => "time",
        }
    }
}

impl fmt::Display for BreakdownDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BreakdownDimension {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "confidence" => Ok(BreakdownDimension::Confidence),
            "experience" => Ok(BreakdownDimension::Experience),
            "time" => Ok(BreakdownDimension::Time),
            other => Err(MetricsError::InvalidDimension(other.to_owned())),
        }
    }
}

/// Whole-second time buckets given by their inclusive upper edges; a final
/// open bucket catches everything above the last edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeBins {
    upper_edges: Vec<u32>,
}

impl TimeBins {
    pub fn new(upper_edges: Vec<u32>) -> Result<Self, MetricsError> {
        if upper_edges.first() == Some(&0) {
            return Err(MetricsError::InvalidBins("edges must be at least 1 s".into()));
        }
        if upper_edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MetricsError::InvalidBins("edges must be strictly increasing".into()));
        }
        Ok(Self { upper_edges })
    }

    pub fn labels(&self) -> Vec<String> {
        let mut lower = 1;
        let mut out = Vec::with_capacity(self.upper_edges.len() + 1);
        for &hi in &self.upper_edges {
            out.push(if lower == hi {
                hi.to_string()
            } else {
                format!("{lower}-{hi}")
            });
            lower = hi + 1;
        }
        out.push(match self.upper_edges.last() {
            Some(last) => format!(">{last}"),
            None => ">=1".to_owned(),
        });
        out
    }

    pub fn index(&self, seconds: u32) -> usize {
        self.upper_edges.partition_point(|&edge| edge < seconds)
    }
}

impl Default for TimeBins {
    /// `1-5`, `6-10`, `11-20`, `21-40`, `>40` seconds.
    fn default() -> Self {
        Self {
            upper_edges: vec![5, 10, 20, 40],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownBin {
    pub label: String,
    pub n_decisions: usize,
    pub n_correct: usize,
    /// Examiners with at least one decision in the bin.
    pub n_examiners: usize,
    /// Across-examiner CCR statistics; `None` for an empty bin.
    pub stat: Option<CcrStat>,
    /// All decisions in the bin pooled.
    pub pooled_ccr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationBreakdown {
    pub dimension: BreakdownDimension,
    pub bins: Vec<BreakdownBin>,
}

impl CorrelationBreakdown {
    pub fn total_decisions(&self) -> usize {
        self.bins.iter().map(|b| b.n_decisions).sum()
    }
}

/// Bins every trial response of the dataset along `dimension` and reports
/// CCR per bin. Confidence and experience get one bin per scale level, so
/// every observable value is covered even when a level is never used.
pub fn breakdown(
    dataset: &Dataset,
    dimension: BreakdownDimension,
    time_bins: &TimeBins,
) -> Result<CorrelationBreakdown, MetricsError> {
    if dataset.trials.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let experience: BTreeMap<&str, u8> = dataset
        .profiles
        .iter()
        .map(|p| (p.examiner_id.as_str(), p.experience))
        .collect();
    let labels: Vec<String> = match dimension {
        BreakdownDimension::Confidence => {
            (1..=dataset.scales.max_confidence()).map(|l| l.to_string()).collect()
        }
        BreakdownDimension::Experience => {
            (1..=dataset.scales.max_experience()).map(|l| l.to_string()).collect()
        }
        BreakdownDimension::Time => time_bins.labels(),
    };

    let mut per_bin: Vec<BTreeMap<&str, Tally>> = vec![BTreeMap::new(); labels.len()];
    for t in &dataset.trials {
        let bin = match dimension {
            BreakdownDimension::Confidence => usize::from(t.confidence) - 1,
            BreakdownDimension::Experience => {
                let e = experience.get(t.examiner_id.as_str()).ok_or_else(|| {
                    MetricsError::MalformedInput(format!("unknown examiner `{}`", t.examiner_id))
                })?;
                usize::from(*e) - 1
            }
            BreakdownDimension::Time => time_bins.index(t.time_seconds),
        };
        let slot = per_bin.get_mut(bin).ok_or_else(|| {
            MetricsError::MalformedInput(format!(
                "{dimension} value of examiner `{}` on trial `{}` is outside the scale",
                t.examiner_id, t.trial_id
            ))
        })?;
        slot.entry(t.examiner_id.as_str()).or_default().add(t.is_correct());
    }

    let bins = labels
        .into_iter()
        .zip(per_bin)
        .map(|(label, examiners)| {
            let pooled = examiners.values().fold(Tally::default(), |acc, t| Tally {
                correct: acc.correct + t.correct,
                total: acc.total + t.total,
            });
            let rates: Vec<f64> = examiners.values().filter_map(Tally::percent).collect();
            BreakdownBin {
                label,
                n_decisions: pooled.total,
                n_correct: pooled.correct,
                n_examiners: examiners.len(),
                stat: CcrStat::from_percentages(&rates).ok(),
                pooled_ccr: pooled.percent(),
            }
        })
        .collect();
    Ok(CorrelationBreakdown { dimension, bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::fixtures::small;

    #[test]
    fn default_time_bins() {
        let b = TimeBins::default();
        assert_eq!(b.labels(), ["1-5", "6-10", "11-20", "21-40", ">40"]);
        let idx: Vec<usize> = [1, 5, 6, 10, 11, 20, 21, 40, 41, 600].iter().map(|&s| b.index(s)).collect();
        assert_eq!(idx, [0, 0, 1, 1, 2, 2, 3, 3, 4, 4]);
        assert!(TimeBins::new(vec![5, 5]).is_err());
        assert!(TimeBins::new(vec![0, 5]).is_err());
        assert_eq!(TimeBins::new(vec![1, 3]).unwrap().labels(), ["1", "2-3", ">3"]);
    }

    #[test]
    fn confidence_bins_cover_scale() {
        let ds = small();
        let b = breakdown(&ds, BreakdownDimension::Confidence, &TimeBins::default()).unwrap();
        assert_eq!(b.bins.len(), 5);
        assert_eq!(b.total_decisions(), ds.trials.len());
        // confidences: a/t1 4 ok, a/t2 2 wrong, b/t1 5 ok, b/t2 3 ok
        let counts: Vec<_> = b.bins.iter().map(|x| (x.n_decisions, x.n_correct)).collect();
        assert_eq!(counts, [(0, 0), (1, 0), (1, 1), (1, 1), (1, 1)]);
        assert!(b.bins[0].stat.is_none());
        assert_eq!(b.bins[1].pooled_ccr, Some(0.0));
    }

    #[test]
    fn experience_and_time() {
        let ds = small();
        let e = breakdown(&ds, BreakdownDimension::Experience, &TimeBins::default()).unwrap();
        assert_eq!(e.bins[1].n_decisions, 2); // examiner a, level 2
        assert_eq!(e.bins[1].stat.unwrap().mean, 50.0);
        assert_eq!(e.bins[4].stat.unwrap().mean, 100.0);
        let t = breakdown(&ds, BreakdownDimension::Time, &TimeBins::default()).unwrap();
        // times 12, 30, 7, 9
        let counts: Vec<_> = t.bins.iter().map(|x| x.n_decisions).collect();
        assert_eq!(counts, [0, 2, 1, 1, 0]);
    }

    #[test]
    fn unknown_dimension() {
        assert!(matches!(
            "age".parse::<BreakdownDimension>(),
            Err(MetricsError::InvalidDimension(_))
        ));
        for d in BreakdownDimension::ALL {
            assert_eq!(d.as_str().parse::<BreakdownDimension>().unwrap(), d);
        }
    }
}
