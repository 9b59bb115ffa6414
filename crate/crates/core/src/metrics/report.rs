use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use super::{quantile, CcrStat, MetricsError, Tally};
use crate::data::{TrialInfo, TrialType};
use crate::fusion::{Decision, FusionMethod};
use crate::sim::RawRecord;

/// Label used when a trial carries no class or difficulty tag.
pub const UNCLASSIFIED: &str = "unclassified";

/// False alarms and misses, pooled over all groups of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ErrorSplit {
    /// Bona fide trials fused to "manipulated".
    pub false_positives: usize,
    /// Manipulated trials fused to "bona fide".
    pub false_negatives: usize,
    pub bona_fide_total: usize,
    pub manipulated_total: usize,
}

/// Five-number summary of group CCRs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl BoxSummary {
    fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Self {
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportCell {
    pub method: FusionMethod,
    pub k: usize,
    pub trial_type: TrialType,
    pub stat: CcrStat,
    pub boxplot: BoxSummary,
    pub errors: ErrorSplit,
}

/// CCR of one method and crowd size restricted to trials with one label
/// (manipulation class or difficulty).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgroupCell {
    pub method: FusionMethod,
    pub k: usize,
    pub label: String,
    pub stat: CcrStat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionReport {
    /// Sorted by method, then k, then trial type.
    pub cells: Vec<ReportCell>,
    pub by_class: Vec<SubgroupCell>,
    pub by_difficulty: Vec<SubgroupCell>,
}

impl FusionReport {
    pub fn cell(&self, method: FusionMethod, k: usize, trial_type: TrialType) -> Option<&ReportCell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.k == k && c.trial_type == trial_type)
    }
}

type GroupTallies = BTreeMap<usize, Tally>;

fn subgroup_cells(map: BTreeMap<(FusionMethod, usize, String), GroupTallies>) -> Result<Vec<SubgroupCell>, MetricsError> {
    map.into_iter()
        .map(|((method, k, label), groups)| {
            let tallies: Vec<Tally> = groups.into_values().collect();
            Ok(SubgroupCell {
                method,
                k,
                label,
                stat: super::compute_ccr(&tallies)?,
            })
        })
        .collect()
}

/// Aggregates raw fused decisions into per (method, k, trial type) CCR
/// statistics. `catalog`, when given, supplies manipulation class and
/// difficulty labels and is cross-checked against the raw ground truths.
pub fn build_report(
    records: &[RawRecord],
    catalog: Option<&[TrialInfo]>,
) -> Result<FusionReport, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let catalog: Option<HashMap<&str, &TrialInfo>> =
        catalog.map(|c| c.iter().map(|t| (t.trial_id.as_str(), t)).collect());

    let mut trials: HashMap<&str, (TrialType, Decision)> = HashMap::new();
    let mut seen: HashSet<(usize, usize, &str, FusionMethod)> = HashSet::new();
    let mut cells: BTreeMap<(FusionMethod, usize, TrialType), (GroupTallies, ErrorSplit)> = BTreeMap::new();
    let mut by_class: BTreeMap<(FusionMethod, usize, String), GroupTallies> = BTreeMap::new();
    let mut by_difficulty: BTreeMap<(FusionMethod, usize, String), GroupTallies> = BTreeMap::new();

    for (i, r) in records.iter().enumerate() {
        let row = i + 1;
        if r.k % 2 == 0 {
            return Err(MetricsError::MalformedInput(format!("row {row}: crowd size {} is not odd", r.k)));
        }
        let attrs = (r.trial_type, r.ground_truth);
        match trials.get(&*r.trial_id) {
            Some(prev) if *prev != attrs => {
                return Err(MetricsError::MalformedInput(format!(
                    "row {row}: trial `{}` has conflicting trial type or ground truth",
                    r.trial_id
                )))
            }
            Some(_) => {}
            None => {
                trials.insert(&r.trial_id, attrs);
            }
        }
        if !seen.insert((r.k, r.group_id, &r.trial_id, r.method)) {
            return Err(MetricsError::MalformedInput(format!(
                "row {row}: duplicate decision for group {} (k = {}), trial `{}`, method {}",
                r.group_id, r.k, r.trial_id, r.method
            )));
        }
        let info = match &catalog {
            Some(c) => {
                let info = c.get(&*r.trial_id).ok_or_else(|| {
                    MetricsError::MalformedInput(format!("row {row}: trial `{}` not in dataset", r.trial_id))
                })?;
                if info.ground_truth != r.ground_truth || info.trial_type != r.trial_type {
                    return Err(MetricsError::MalformedInput(format!(
                        "row {row}: trial `{}` disagrees with the dataset",
                        r.trial_id
                    )));
                }
                Some(*info)
            }
            None => None,
        };

        let correct = r.is_correct();
        let (groups, errors) = cells.entry((r.method, r.k, r.trial_type)).or_default();
        groups.entry(r.group_id).or_default().add(correct);
        match r.ground_truth {
            Decision::BonaFide => {
                errors.bona_fide_total += 1;
                errors.false_positives += usize::from(!correct);
            }
            Decision::Manipulated => {
                errors.manipulated_total += 1;
                errors.false_negatives += usize::from(!correct);
            }
        }

        let class = info
            .and_then(|t| t.manipulation_class)
            .map_or(UNCLASSIFIED, |c| c.as_str());
        let difficulty = info.and_then(|t| t.difficulty).map_or(UNCLASSIFIED, |d| d.as_str());
        by_class
            .entry((r.method, r.k, class.to_owned()))
            .or_default()
            .entry(r.group_id)
            .or_default()
            .add(correct);
        by_difficulty
            .entry((r.method, r.k, difficulty.to_owned()))
            .or_default()
            .entry(r.group_id)
            .or_default()
            .add(correct);
    }

    let cells = cells
        .into_iter()
        .map(|((method, k, trial_type), (groups, errors))| {
            let rates: Vec<f64> = groups.values().filter_map(Tally::percent).collect();
            Ok(ReportCell {
                method,
                k,
                trial_type,
                stat: CcrStat::from_percentages(&rates)?,
                boxplot: BoxSummary::of(&rates),
                errors,
            })
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;

    Ok(FusionReport {
        cells,
        by_class: subgroup_cells(by_class)?,
        by_difficulty: subgroup_cells(by_difficulty)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::Margin;
    use std::sync::Arc;

    fn rec(group: usize, k: usize, trial: &str, tt: TrialType, m: FusionMethod, d: u8, gt: u8) -> RawRecord {
        RawRecord {
            group_id: group,
            k,
            trial_id: Arc::from(trial),
            trial_type: tt,
            method: m,
            decision: Decision::try_from(d).unwrap(),
            ground_truth: Decision::try_from(gt).unwrap(),
            margin: Margin::from_integer(if d == 1 { 1 } else { -1 }),
        }
    }

    #[test]
    fn hand_built_table() {
        use FusionMethod::*;
        use TrialType::*;
        let recs = vec![
            // group 0: ABX t1 right, t2 wrong (false negative); S2AFC s1 right
            rec(0, 3, "t1", Abx, MV, 0, 0),
            rec(0, 3, "t2", Abx, MV, 0, 1),
            rec(0, 3, "s1", S2afc, MV, 1, 1),
            // group 1: ABX both right; S2AFC wrong (false negative)
            rec(1, 3, "t1", Abx, MV, 0, 0),
            rec(1, 3, "t2", Abx, MV, 1, 1),
            rec(1, 3, "s1", S2afc, MV, 0, 1),
            // CF, group 0 only: t1 false positive
            rec(0, 3, "t1", Abx, CF, 1, 0),
            rec(0, 3, "t2", Abx, CF, 1, 1),
        ];
        let report = build_report(&recs, None).unwrap();
        let keys: Vec<_> = report.cells.iter().map(|c| (c.method, c.k, c.trial_type)).collect();
        assert_eq!(keys, vec![(MV, 3, Abx), (MV, 3, S2afc), (CF, 3, Abx)]);

        let mv_abx = report.cell(MV, 3, Abx).unwrap();
        assert_eq!(mv_abx.stat.mean, 75.0);
        assert!((mv_abx.stat.std - 1250f64.sqrt()).abs() < 1e-12);
        assert_eq!(mv_abx.stat.n_groups, 2);
        assert_eq!(
            mv_abx.errors,
            ErrorSplit {
                false_positives: 0,
                false_negatives: 1,
                bona_fide_total: 2,
                manipulated_total: 2
            }
        );
        assert_eq!(mv_abx.boxplot.min, 50.0);
        assert_eq!(mv_abx.boxplot.median, 75.0);
        assert_eq!(mv_abx.boxplot.max, 100.0);

        let mv_s2 = report.cell(MV, 3, S2afc).unwrap();
        assert_eq!((mv_s2.stat.mean, mv_s2.stat.n_groups), (50.0, 2));

        let cf = report.cell(CF, 3, Abx).unwrap();
        assert_eq!((cf.stat.mean, cf.stat.std, cf.stat.n_groups), (50.0, 0.0, 1));
        assert_eq!(cf.errors.false_positives, 1);

        assert!(report.by_class.iter().all(|c| c.label == UNCLASSIFIED));
    }

    #[test]
    fn single_method_request() {
        let recs = vec![rec(0, 1, "t1", TrialType::Abx, FusionMethod::TF, 1, 1)];
        let report = build_report(&recs, None).unwrap();
        assert_eq!(report.cells.len(), 1);
        assert_eq!(report.cells[0].method, FusionMethod::TF);
    }

    #[test]
    fn malformed_inputs() {
        use FusionMethod::MV;
        use TrialType::*;
        assert!(matches!(build_report(&[], None), Err(MetricsError::EmptyInput)));
        let conflicting = vec![rec(0, 3, "t1", Abx, MV, 1, 1), rec(1, 3, "t1", Abx, MV, 1, 0)];
        assert!(matches!(build_report(&conflicting, None), Err(MetricsError::MalformedInput(_))));
        let dup = vec![rec(0, 3, "t1", Abx, MV, 1, 1), rec(0, 3, "t1", Abx, MV, 1, 1)];
        assert!(matches!(build_report(&dup, None), Err(MetricsError::MalformedInput(_))));
        let even = vec![rec(0, 2, "t1", Abx, MV, 1, 1)];
        assert!(matches!(build_report(&even, None), Err(MetricsError::MalformedInput(_))));
        let catalog = vec![TrialInfo {
            trial_id: "t1".into(),
            trial_type: S2afc,
            ground_truth: Decision::Manipulated,
            manipulation_class: None,
            difficulty: None,
        }];
        let r = vec![rec(0, 3, "t1", Abx, MV, 1, 1)];
        assert!(matches!(build_report(&r, Some(&catalog)), Err(MetricsError::MalformedInput(_))));
        let r = vec![rec(0, 3, "t9", S2afc, MV, 1, 1)];
        assert!(matches!(build_report(&r, Some(&catalog)), Err(MetricsError::MalformedInput(_))));
    }
}
