//! Examiner profiles, trial responses and their validation.

mod csv_io;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fusion::{Decision, FusionScales};

pub use csv_io::{
    ingest_csv, read_csv, write_csv, write_profiles, write_trials, PROFILES_HEADER, TRIALS_HEADER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TrialType {
    /// Known A, known B, then an unknown X to classify.
    #[serde(rename = "ABX")]
    Abx,
    /// Two unknown images side by side, one of them manipulated.
    #[serde(rename = "S2AFC")]
    S2afc,
}

impl TrialType {
    pub const ALL: [TrialType; 2] = [TrialType::Abx, TrialType::S2afc];

    pub fn as_str(self) -> &'static str {
        match self {
            TrialType::Abx => "ABX",
            TrialType::S2afc => "S2AFC",
        }
    }
}

impl fmt::Display for TrialType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrialType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ABX" => Ok(TrialType::Abx),
            "S2AFC" => Ok(TrialType::S2afc),
            other => Err(format!("unknown trial type `{other}` (expected ABX or S2AFC)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ManipulationClass {
    #[serde(rename = "morphing-1")]
    Morphing1,
    #[serde(rename = "morphing-2")]
    Morphing2,
    #[serde(rename = "swapping-1")]
    Swapping1,
    #[serde(rename = "swapping-2")]
    Swapping2,
    #[serde(rename = "retouching-1")]
    Retouching1,
    #[serde(rename = "retouching-2")]
    Retouching2,
    #[serde(rename = "bona-fide")]
    BonaFide,
}

impl ManipulationClass {
    pub const MANIPULATIONS: [ManipulationClass; 6] = [
        ManipulationClass::Morphing1,
        ManipulationClass::Morphing2,
        ManipulationClass::Swapping1,
        ManipulationClass::Swapping2,
        ManipulationClass::Retouching1,
        ManipulationClass::Retouching2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ManipulationClass::Morphing1 => "morphing-1",
            ManipulationClass::Morphing2 => "morphing-2",
            ManipulationClass::Swapping1 => "swapping-1",
            ManipulationClass::Swapping2 => "swapping-2",
            ManipulationClass::Retouching1 => "retouching-1",
            ManipulationClass::Retouching2 => "retouching-2",
            ManipulationClass::BonaFide => "bona-fide",
        }
    }
}

impl fmt::Display for ManipulationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ManipulationClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::MANIPULATIONS
            .into_iter()
            .chain([ManipulationClass::BonaFide])
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown manipulation class `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Hard,
}

impl Difficulty {
    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Hard => "hard",
        }
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "easy" => Ok(Difficulty::Easy),
            "hard" => Ok(Difficulty::Hard),
            other => Err(format!("unknown difficulty `{other}` (expected easy or hard)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExaminerProfile {
    pub examiner_id: String,
    /// Self-reported experience, `1..=E`.
    pub experience: u8,
    /// Free-form metadata columns. Empty values are treated as absent.
    #[serde(default)]
    pub demographics: BTreeMap<String, String>,
}

/// One examiner's answer to one trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub examiner_id: String,
    pub trial_id: String,
    pub trial_type: TrialType,
    pub decision: Decision,
    pub confidence: u8,
    pub time_seconds: u32,
    pub ground_truth: Decision,
    pub manipulation_class: Option<ManipulationClass>,
    pub difficulty: Option<Difficulty>,
}

impl TrialRecord {
    pub fn is_correct(&self) -> bool {
        self.decision == self.ground_truth
    }
}

/// Trial-level attributes shared by every response to the same trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialInfo {
    pub trial_id: String,
    pub trial_type: TrialType,
    pub ground_truth: Decision,
    pub manipulation_class: Option<ManipulationClass>,
    pub difficulty: Option<Difficulty>,
}

impl TrialInfo {
    fn of(record: &TrialRecord) -> Self {
        Self {
            trial_id: record.trial_id.clone(),
            trial_type: record.trial_type,
            ground_truth: record.ground_truth,
            manipulation_class: record.manipulation_class,
            difficulty: record.difficulty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub profiles: Vec<ExaminerProfile>,
    pub trials: Vec<TrialRecord>,
    pub scales: FusionScales,
}

impl Dataset {
    /// Violations of the dataset invariants; empty iff the dataset is valid.
    /// Row numbers are 1-based positions in `profiles` / `trials`.
    pub fn validate(&self) -> Vec<Violation> {
        let profile_rows: Vec<usize> = (1..=self.profiles.len()).collect();
        let trial_rows: Vec<usize> = (1..=self.trials.len()).collect();
        validate_rows(
            &self.profiles,
            &profile_rows,
            &self.trials,
            &trial_rows,
            &self.scales,
        )
    }

    pub fn examiner_ids(&self) -> impl Iterator<Item = &str> {
        self.profiles.iter().map(|p| p.examiner_id.as_str())
    }

    /// Distinct trials in order of first appearance.
    pub fn trial_catalog(&self) -> Vec<TrialInfo> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for t in &self.trials {
            seen.entry(t.trial_id.as_str()).or_insert_with(|| {
                out.push(TrialInfo::of(t));
                out.len() - 1
            });
        }
        out
    }

    pub fn profile(&self, examiner_id: &str) -> Option<&ExaminerProfile> {
        self.profiles.iter().find(|p| p.examiner_id == examiner_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Profiles,
    Trials,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Profiles => "profiles",
            Source::Trials => "trials",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    Header(String),
    Malformed(String),
    OutOfRange { value: i64, min: i64, max: i64 },
    InvalidId(String),
    DuplicateExaminer { examiner_id: String, first_row: usize },
    UnknownExaminer(String),
    DuplicatePair { examiner_id: String, trial_id: String, first_row: usize },
    /// Ground truth and manipulation class disagree.
    LabelMismatch(String),
    /// Two responses to the same trial disagree on a trial-level attribute.
    InconsistentTrial { trial_id: String, first_row: usize },
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::Header(msg) => write!(f, "bad header: {msg}"),
            ViolationKind::Malformed(msg) => write!(f, "malformed: {msg}"),
            ViolationKind::OutOfRange { value, min, max } => {
                write!(f, "value {value} outside {min}..={max}")
            }
            ViolationKind::InvalidId(msg) => write!(f, "invalid id: {msg}"),
            ViolationKind::DuplicateExaminer {
                examiner_id,
                first_row,
            } => write!(f, "duplicate examiner `{examiner_id}` (first seen in row {first_row})"),
            ViolationKind::UnknownExaminer(id) => write!(f, "unknown examiner `{id}`"),
            ViolationKind::DuplicatePair {
                examiner_id,
                trial_id,
                first_row,
            } => write!(
                f,
                "duplicate (examiner_id, trial_id) pair (`{examiner_id}`, `{trial_id}`), first seen in row {first_row}"
            ),
            ViolationKind::LabelMismatch(msg) => write!(f, "label mismatch: {msg}"),
            ViolationKind::InconsistentTrial {
                trial_id,
                first_row,
            } => write!(
                f,
                "trial `{trial_id}` disagrees with row {first_row} on type, ground truth, class or difficulty"
            ),
        }
    }
}

/// One broken invariant, located by file, 1-based data row and column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Violation {
    pub source: Source,
    pub row: Option<usize>,
    pub field: Option<String>,
    pub kind: ViolationKind,
}

impl Violation {
    fn at(source: Source, row: usize, field: &str, kind: ViolationKind) -> Self {
        Self {
            source,
            row: Some(row),
            field: Some(field.to_owned()),
            kind,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source)?;
        if let Some(row) = self.row {
            write!(f, " row {row}")?;
        }
        if let Some(field) = &self.field {
            write!(f, ", field `{field}`")?;
        }
        write!(f, ": {}", self.kind)
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("dataset rejected with {} violation(s):\n{}", .0.len(), format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn check_id(id: &str) -> Option<ViolationKind> {
    if id.is_empty() {
        Some(ViolationKind::InvalidId("empty".into()))
    } else if id.contains(['\n', '\r']) {
        Some(ViolationKind::InvalidId("contains a line break".into()))
    } else {
        None
    }
}

fn range(value: i64, max: i64) -> Option<ViolationKind> {
    (value < 1 || value > max).then_some(ViolationKind::OutOfRange { value, min: 1, max })
}

pub(crate) fn validate_rows(
    profiles: &[ExaminerProfile],
    profile_rows: &[usize],
    trials: &[TrialRecord],
    trial_rows: &[usize],
    scales: &FusionScales,
) -> Vec<Violation> {
    use Source::{Profiles, Trials};
    let mut out = Vec::new();
    let max_c = i64::from(scales.max_confidence());
    let max_e = i64::from(scales.max_experience());

    let mut examiners: HashMap<&str, usize> = HashMap::new();
    for (p, &row) in profiles.iter().zip(profile_rows) {
        if let Some(kind) = check_id(&p.examiner_id) {
            out.push(Violation::at(Profiles, row, "examiner_id", kind));
        }
        if let Some(kind) = range(i64::from(p.experience), max_e) {
            out.push(Violation::at(Profiles, row, "experience", kind));
        }
        if let Some(&first_row) = examiners.get(p.examiner_id.as_str()) {
            out.push(Violation::at(
                Profiles,
                row,
                "examiner_id",
                ViolationKind::DuplicateExaminer {
                    examiner_id: p.examiner_id.clone(),
                    first_row,
                },
            ));
        } else {
            examiners.insert(&p.examiner_id, row);
        }
    }

    let mut pairs: HashMap<(&str, &str), usize> = HashMap::new();
    let mut trial_infos: HashMap<&str, (TrialInfo, usize)> = HashMap::new();
    for (t, &row) in trials.iter().zip(trial_rows) {
        if let Some(kind) = check_id(&t.examiner_id) {
            out.push(Violation::at(Trials, row, "examiner_id", kind));
        } else if !examiners.contains_key(t.examiner_id.as_str()) {
            out.push(Violation::at(
                Trials,
                row,
                "examiner_id",
                ViolationKind::UnknownExaminer(t.examiner_id.clone()),
            ));
        }
        if let Some(kind) = check_id(&t.trial_id) {
            out.push(Violation::at(Trials, row, "trial_id", kind));
        }
        if let Some(kind) = range(i64::from(t.confidence), max_c) {
            out.push(Violation::at(Trials, row, "confidence", kind));
        }
        if t.time_seconds < 1 {
            out.push(Violation::at(
                Trials,
                row,
                "time_seconds",
                ViolationKind::OutOfRange {
                    value: i64::from(t.time_seconds),
                    min: 1,
                    max: i64::from(u32::MAX),
                },
            ));
        }
        match (t.ground_truth, t.manipulation_class) {
            (Decision::BonaFide, Some(c)) if c != ManipulationClass::BonaFide => {
                out.push(Violation::at(
                    Trials,
                    row,
                    "manipulation_class",
                    ViolationKind::LabelMismatch(format!(
                        "ground_truth 0 (bona fide) with manipulation class {c}"
                    )),
                ))
            }
            (Decision::Manipulated, Some(ManipulationClass::BonaFide)) => out.push(Violation::at(
                Trials,
                row,
                "manipulation_class",
                ViolationKind::LabelMismatch(
                    "ground_truth 1 (manipulated) with manipulation class bona-fide".into(),
                ),
            )),
            _ => {}
        }
        let key = (t.examiner_id.as_str(), t.trial_id.as_str());
        if let Some(&first_row) = pairs.get(&key) {
            out.push(Violation::at(
                Trials,
                row,
                "trial_id",
                ViolationKind::DuplicatePair {
                    examiner_id: t.examiner_id.clone(),
                    trial_id: t.trial_id.clone(),
                    first_row,
                },
            ));
        } else {
            pairs.insert(key, row);
        }
        match trial_infos.get(t.trial_id.as_str()) {
            Some((info, first_row)) if *info != TrialInfo::of(t) => out.push(Violation::at(
                Trials,
                row,
                "trial_id",
                ViolationKind::InconsistentTrial {
                    trial_id: t.trial_id.clone(),
                    first_row: *first_row,
                },
            )),
            Some(_) => {}
            None => {
                trial_infos.insert(&t.trial_id, (TrialInfo::of(t), row));
            }
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn record(examiner: &str, trial: &str, decision: u8, confidence: u8, secs: u32) -> TrialRecord {
        TrialRecord {
            examiner_id: examiner.into(),
            trial_id: trial.into(),
            trial_type: TrialType::Abx,
            decision: Decision::try_from(decision).unwrap(),
            confidence,
            time_seconds: secs,
            ground_truth: Decision::Manipulated,
            manipulation_class: Some(ManipulationClass::Morphing1),
            difficulty: Some(Difficulty::Easy),
        }
    }

    /// Two examiners answering the same two trials.
    pub fn small() -> Dataset {
        Dataset {
            profiles: vec![
                ExaminerProfile {
                    examiner_id: "a".into(),
                    experience: 2,
                    demographics: BTreeMap::from([("age".into(), "30-39".into())]),
                },
                ExaminerProfile {
                    examiner_id: "b".into(),
                    experience: 5,
                    demographics: BTreeMap::new(),
                },
            ],
            trials: vec![
                record("a", "t1", 1, 4, 12),
                record("a", "t2", 0, 2, 30),
                record("b", "t1", 1, 5, 7),
                record("b", "t2", 1, 3, 9),
            ],
            scales: FusionScales::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn valid_fixture_has_no_violations() {
        assert!(small().validate().is_empty());
    }

    #[test]
    fn unknown_examiner_is_one_violation() {
        let mut ds = small();
        ds.trials.push(record("zz", "t1", 1, 3, 3));
        let v = ds.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].row, Some(5));
        assert_eq!(v[0].kind, ViolationKind::UnknownExaminer("zz".into()));
    }

    #[test]
    fn bona_fide_truth_with_manipulation_class() {
        let mut ds = small();
        ds.trials[0].ground_truth = Decision::BonaFide;
        ds.trials[2].ground_truth = Decision::BonaFide;
        ds.trials[2].manipulation_class = Some(ManipulationClass::BonaFide);
        ds.trials[0].manipulation_class = Some(ManipulationClass::BonaFide);
        assert!(ds.validate().is_empty());
        ds.trials[0].manipulation_class = Some(ManipulationClass::Morphing1);
        let v = ds.validate();
        // the class now also disagrees with row 3's copy of t1
        assert!(v
            .iter()
            .any(|v| matches!(v.kind, ViolationKind::LabelMismatch(_)) && v.row == Some(1)));
        assert_eq!(
            v.iter().filter(|v| matches!(v.kind, ViolationKind::LabelMismatch(_))).count(),
            1
        );
    }

    #[test]
    fn range_and_duplicate_checks() {
        let mut ds = small();
        ds.trials[1].confidence = 6;
        ds.trials[3].time_seconds = 0;
        ds.profiles[1].experience = 0;
        ds.trials.push(record("a", "t1", 1, 4, 12));
        ds.profiles.push(ds.profiles[0].clone());
        let v = ds.validate();
        let kinds: Vec<_> = v.iter().map(|v| (v.source, v.row, v.field.clone().unwrap())).collect();
        assert!(kinds.contains(&(Source::Trials, Some(2), "confidence".into())));
        assert!(kinds.contains(&(Source::Trials, Some(4), "time_seconds".into())));
        assert!(kinds.contains(&(Source::Profiles, Some(2), "experience".into())));
        assert!(v.iter().any(|v| matches!(v.kind, ViolationKind::DuplicatePair { first_row: 1, .. })));
        assert!(v.iter().any(|v| matches!(v.kind, ViolationKind::DuplicateExaminer { first_row: 1, .. })));
    }

    #[test]
    fn inconsistent_trial_attributes() {
        let mut ds = small();
        ds.trials[2].trial_type = TrialType::S2afc;
        let v = ds.validate();
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0].kind, ViolationKind::InconsistentTrial { first_row: 1, .. }));
    }

    #[test]
    fn catalog_keeps_first_appearance_order() {
        let ds = small();
        let ids: Vec<_> = ds.trial_catalog().into_iter().map(|t| t.trial_id).collect();
        assert_eq!(ids, ["t1", "t2"]);
    }

    #[test]
    fn violation_display_names_row_and_field() {
        let mut ds = small();
        ds.trials[1].confidence = 6;
        let msg = ds.validate()[0].to_string();
        assert_eq!(msg, "trials row 2, field `confidence`: value 6 outside 1..=5");
    }

    #[test]
    fn tag_parsing() {
        for c in ManipulationClass::MANIPULATIONS {
            assert_eq!(c.as_str().parse::<ManipulationClass>().unwrap(), c);
        }
        assert_eq!("bona-fide".parse::<ManipulationClass>().unwrap(), ManipulationClass::BonaFide);
        assert!("morphing-3".parse::<ManipulationClass>().is_err());
        assert_eq!("S2AFC".parse::<TrialType>().unwrap(), TrialType::S2afc);
        assert!("abx".parse::<TrialType>().is_err());
        assert_eq!("hard".parse::<Difficulty>().unwrap(), Difficulty::Hard);
    }
}
