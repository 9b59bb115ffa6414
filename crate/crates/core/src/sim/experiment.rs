//! Fusing every crowd on every trial, and the raw CSV that records it.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::Arc;

use csv::{ReaderBuilder, WriterBuilder};

use super::grouping::{sample_groups, Crowd, GroupingPlan};
use super::SimError;
use crate::data::{Dataset, TrialType};
use crate::exec::Execution;
use crate::fusion::{CrowdResponses, Decision, DecisionVector, FusionMethod, Margin};

pub const RAW_HEADER: [&str; 8] = [
    "group_id",
    "k",
    "trial_id",
    "trial_type",
    "method",
    "decision",
    "ground_truth",
    "margin",
];

/// One fused decision: a crowd, a trial and a method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub group_id: usize,
    pub k: usize,
    pub trial_id: Arc<str>,
    pub trial_type: TrialType,
    pub method: FusionMethod,
    pub decision: Decision,
    pub ground_truth: Decision,
    pub margin: Margin,
}

impl RawRecord {
    pub fn is_correct(&self) -> bool {
        self.decision == self.ground_truth
    }
}

/// Fuses each crowd's recorded responses on every trial of the dataset with
/// every requested method.
///
/// Output is ordered by crowd, then trial (first appearance in the dataset),
/// then method as requested; `group_id` is the crowd's index in `crowds`.
/// A crowd member without a response to some trial aborts the run.
pub fn run_experiment(
    dataset: &Dataset,
    crowds: &[Crowd],
    methods: &[FusionMethod],
    exec: Execution,
) -> Result<Vec<RawRecord>, SimError> {
    let violations = dataset.validate();
    if !violations.is_empty() {
        return Err(SimError::InvalidDataset(violations));
    }
    let examiners: HashMap<&str, usize> = dataset
        .examiner_ids()
        .enumerate()
        .map(|(i, id)| (id, i))
        .collect();
    let catalog = dataset.trial_catalog();
    let trial_index: HashMap<&str, usize> = catalog
        .iter()
        .enumerate()
        .map(|(i, t)| (t.trial_id.as_str(), i))
        .collect();
    let trial_ids: Vec<Arc<str>> = catalog.iter().map(|t| Arc::from(t.trial_id.as_str())).collect();
    let n_trials = catalog.len();

    // response[examiner * n_trials + trial] -> index into dataset.trials
    let mut response = vec![usize::MAX; examiners.len() * n_trials];
    for (r, t) in dataset.trials.iter().enumerate() {
        let e = examiners[t.examiner_id.as_str()];
        response[e * n_trials + trial_index[t.trial_id.as_str()]] = r;
    }

    let per_crowd = exec.map_range(crowds.len(), |group_id| -> Result<Vec<RawRecord>, SimError> {
        let crowd = &crowds[group_id];
        let members = crowd
            .member_ids
            .iter()
            .map(|id| {
                examiners
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| SimError::UnknownMember(id.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let k = members.len();
        let mut out = Vec::with_capacity(n_trials * methods.len());
        for (ti, info) in catalog.iter().enumerate() {
            let mut decisions = Vec::with_capacity(k);
            let mut confidence = Vec::with_capacity(k);
            let mut experience = Vec::with_capacity(k);
            let mut seconds = Vec::with_capacity(k);
            for (&e, id) in members.iter().zip(&crowd.member_ids) {
                let r = response[e * n_trials + ti];
                if r == usize::MAX {
                    return Err(SimError::IncompleteCoverage {
                        examiner_id: id.clone(),
                        trial_id: info.trial_id.clone(),
                    });
                }
                let rec = &dataset.trials[r];
                decisions.push(rec.decision);
                confidence.push(rec.confidence);
                experience.push(dataset.profiles[e].experience);
                seconds.push(rec.time_seconds);
            }
            let responses = CrowdResponses {
                decisions: DecisionVector::new(decisions)?,
                confidence,
                experience,
                seconds,
            };
            for &method in methods {
                let outcome = responses.fuse(method, &dataset.scales)?;
                out.push(RawRecord {
                    group_id,
                    k,
                    trial_id: Arc::clone(&trial_ids[ti]),
                    trial_type: info.trial_type,
                    method,
                    decision: outcome.decision,
                    ground_truth: info.ground_truth,
                    margin: outcome.margin,
                });
            }
        }
        Ok(out)
    });

    let mut records = Vec::new();
    for chunk in per_crowd {
        records.extend(chunk?);
    }
    Ok(records)
}

/// Samples crowds for each plan (independently per `k`) and runs them all.
pub fn run_plans(
    dataset: &Dataset,
    plans: &[GroupingPlan],
    methods: &[FusionMethod],
    exec: Execution,
) -> Result<Vec<RawRecord>, SimError> {
    let ids: Vec<&str> = dataset.examiner_ids().collect();
    let mut out = Vec::new();
    for plan in plans {
        let crowds = sample_groups(&ids, plan)?;
        out.extend(run_experiment(dataset, &crowds, methods, exec)?);
    }
    Ok(out)
}

pub fn write_raw_csv<W: Write>(records: &[RawRecord], out: W) -> Result<(), csv::Error> {
    let mut w = WriterBuilder::new().from_writer(out);
    w.write_record(RAW_HEADER)?;
    for r in records {
        w.write_record([
            r.group_id.to_string().as_str(),
            &r.k.to_string(),
            &r.trial_id,
            r.trial_type.as_str(),
            r.method.as_str(),
            &r.decision.to_string(),
            &r.ground_truth.to_string(),
            &r.margin.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_raw_csv<R: Read>(input: R) -> Result<Vec<RawRecord>, SimError> {
    let mut rdr = ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(RAW_HEADER) {
        return Err(SimError::MalformedRaw(format!(
            "expected header `{}`",
            RAW_HEADER.join(",")
        )));
    }
    let mut ids: HashMap<String, Arc<str>> = HashMap::new();
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let bad = |field: &str, value: &str| {
            SimError::MalformedRaw(format!("row {row}: invalid {field} `{value}`"))
        };
        let num = |idx: usize, field: &str| -> Result<usize, SimError> {
            rec[idx].trim().parse().map_err(|_| bad(field, &rec[idx]))
        };
        let decision = |idx: usize, field: &str| -> Result<Decision, SimError> {
            match rec[idx].trim() {
                "0" => Ok(Decision::BonaFide),
                "1" => Ok(Decision::Manipulated),
                other => Err(bad(field, other)),
            }
        };
        let trial_id = ids
            .entry(rec[2].to_owned())
            .or_insert_with(|| Arc::from(&rec[2]))
            .clone();
        if trial_id.is_empty() {
            return Err(bad("trial_id", ""));
        }
        out.push(RawRecord {
            group_id: num(0, "group_id")?,
            k: num(1, "k")?,
            trial_id,
            trial_type: rec[3].parse().map_err(|_| bad("trial_type", &rec[3]))?,
            method: rec[4].parse().map_err(|_| bad("method", &rec[4]))?,
            decision: decision(5, "decision")?,
            ground_truth: decision(6, "ground_truth")?,
            margin: rec[7].trim().parse().map_err(|_| bad("margin", &rec[7]))?,
        });
    }
    Ok(out)
}
