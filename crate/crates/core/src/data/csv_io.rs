use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use super::{
    validate_rows, DataError, Dataset, Difficulty, ExaminerProfile, ManipulationClass, Source,
    TrialRecord, TrialType, Violation, ViolationKind,
};
use crate::fusion::{Decision, FusionScales};

/// Required leading columns of the profiles file; any further columns are
/// demographic metadata.
pub const PROFILES_HEADER: [&str; 2] = ["examiner_id", "experience"];

pub const TRIALS_HEADER: [&str; 9] = [
    "examiner_id",
    "trial_id",
    "trial_type",
    "decision",
    "confidence",
    "time_seconds",
    "ground_truth",
    "manipulation_class",
    "difficulty",
];

/// Reads and strictly validates a dataset. Any violation, in either file,
/// rejects the whole dataset with the complete diagnostic list.
pub fn ingest_csv(
    profiles_path: impl AsRef<Path>,
    trials_path: impl AsRef<Path>,
    scales: FusionScales,
) -> Result<Dataset, DataError> {
    let open = |p: &Path| {
        File::open(p).map_err(|source| DataError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    let profiles_path = profiles_path.as_ref();
    let trials_path = trials_path.as_ref();
    read_csv(open(profiles_path)?, open(trials_path)?, scales).map_err(|e| match e {
        DataError::Csv { path, source } => DataError::Csv {
            path: if path == "profiles" {
                profiles_path.display().to_string()
            } else {
                trials_path.display().to_string()
            },
            source,
        },
        other => other,
    })
}

/// Same as [`ingest_csv`] over arbitrary readers.
pub fn read_csv<P: Read, T: Read>(
    profiles: P,
    trials: T,
    scales: FusionScales,
) -> Result<Dataset, DataError> {
    let mut violations = Vec::new();
    let (profiles, profile_rows) = parse_profiles(profiles, &mut violations)?;
    let (trials, trial_rows) = parse_trials(trials, &mut violations)?;
    violations.extend(validate_rows(
        &profiles,
        &profile_rows,
        &trials,
        &trial_rows,
        &scales,
    ));
    if !violations.is_empty() {
        violations.sort_by_key(|v| (v.source, v.row));
        return Err(DataError::Invalid(violations));
    }
    Ok(Dataset {
        profiles,
        trials,
        scales,
    })
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input)
}

fn csv_err(source: Source, e: csv::Error) -> DataError {
    DataError::Csv {
        path: source.to_string(),
        source: e,
    }
}

fn header_violation(source: Source, msg: String) -> Violation {
    Violation {
        source,
        row: None,
        field: None,
        kind: ViolationKind::Header(msg),
    }
}

/// Field-level parsing with diagnostics collected into `out`.
struct RowParser<'a> {
    source: Source,
    row: usize,
    record: &'a StringRecord,
    out: &'a mut Vec<Violation>,
    ok: bool,
}

impl RowParser<'_> {
    fn fail(&mut self, field: &str, msg: String) {
        self.ok = false;
        self.out.push(Violation::at(
            self.source,
            self.row,
            field,
            ViolationKind::Malformed(msg),
        ));
    }

    fn text(&self, idx: usize) -> &str {
        self.record.get(idx).unwrap_or("")
    }

    fn int<N: FromStr>(&mut self, idx: usize, field: &str) -> Option<N> {
        let raw = self.text(idx).trim().to_owned();
        match raw.parse::<N>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.fail(field, format!("`{raw}` is not a valid integer in range"));
                None
            }
        }
    }

    fn decision(&mut self, idx: usize, field: &str) -> Option<Decision> {
        match self.text(idx).trim() {
            "0" => Some(Decision::BonaFide),
            "1" => Some(Decision::Manipulated),
            "" => {
                self.fail(field, "missing value".into());
                None
            }
            other => {
                let msg = format!("`{other}` is not 0 or 1");
                self.fail(field, msg);
                None
            }
        }
    }

    fn tag<T: FromStr<Err = String>>(&mut self, idx: usize, field: &str) -> Option<T> {
        match self.text(idx).trim().parse() {
            Ok(v) => Some(v),
            Err(msg) => {
                self.fail(field, msg);
                None
            }
        }
    }

    fn optional_tag<T: FromStr<Err = String>>(&mut self, idx: usize, field: &str) -> Option<T> {
        if self.text(idx).trim().is_empty() {
            None
        } else {
            self.tag(idx, field)
        }
    }
}

fn parse_profiles<R: Read>(
    input: R,
    out: &mut Vec<Violation>,
) -> Result<(Vec<ExaminerProfile>, Vec<usize>), DataError> {
    let mut rdr = reader(input);
    let header = rdr.headers().map_err(|e| csv_err(Source::Profiles, e))?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 2 || names[..2] != PROFILES_HEADER {
        out.push(header_violation(
            Source::Profiles,
            format!("expected leading columns `examiner_id,experience`, got `{}`", names.join(",")),
        ));
        return Ok((Vec::new(), Vec::new()));
    }
    let mut seen = BTreeSet::new();
    for name in &names {
        if !seen.insert(*name) {
            out.push(header_violation(Source::Profiles, format!("column `{name}` repeated")));
        }
    }

    let mut profiles = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let record = rec.map_err(|e| csv_err(Source::Profiles, e))?;
        let mut p = RowParser {
            source: Source::Profiles,
            row,
            record: &record,
            out,
            ok: true,
        };
        if record.len() != names.len() {
            p.fail(
                "*",
                format!("expected {} fields, found {}", names.len(), record.len()),
            );
            continue;
        }
        let experience = p.int::<u8>(1, "experience");
        let demographics: BTreeMap<String, String> = names[2..]
            .iter()
            .zip(record.iter().skip(2))
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        if let (true, Some(experience)) = (p.ok, experience) {
            profiles.push(ExaminerProfile {
                examiner_id: record[0].to_owned(),
                experience,
                demographics,
            });
            rows.push(row);
        }
    }
    Ok((profiles, rows))
}

fn parse_trials<R: Read>(
    input: R,
    out: &mut Vec<Violation>,
) -> Result<(Vec<TrialRecord>, Vec<usize>), DataError> {
    let mut rdr = reader(input);
    let header = rdr.headers().map_err(|e| csv_err(Source::Trials, e))?.clone();
    if header.iter().ne(TRIALS_HEADER) {
        out.push(header_violation(
            Source::Trials,
            format!(
                "expected `{}`, got `{}`",
                TRIALS_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
        return Ok((Vec::new(), Vec::new()));
    }

    let mut trials = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let record = rec.map_err(|e| csv_err(Source::Trials, e))?;
        let mut p = RowParser {
            source: Source::Trials,
            row,
            record: &record,
            out,
            ok: true,
        };
        if record.len() != TRIALS_HEADER.len() {
            p.fail(
                "*",
                format!("expected {} fields, found {}", TRIALS_HEADER.len(), record.len()),
            );
            continue;
        }
        let trial_type = p.tag::<TrialType>(2, "trial_type");
        let decision = p.decision(3, "decision");
        let confidence = p.int::<u8>(4, "confidence");
        let time_seconds = p.int::<u32>(5, "time_seconds");
        let ground_truth = p.decision(6, "ground_truth");
        let manipulation_class = p.optional_tag::<ManipulationClass>(7, "manipulation_class");
        let difficulty = p.optional_tag::<Difficulty>(8, "difficulty");
        if !p.ok {
            continue;
        }
        // all required fields parsed once `ok` survived
        if let (Some(trial_type), Some(decision), Some(confidence), Some(time_seconds), Some(ground_truth)) =
            (trial_type, decision, confidence, time_seconds, ground_truth)
        {
            trials.push(TrialRecord {
                examiner_id: record[0].to_owned(),
                trial_id: record[1].to_owned(),
                trial_type,
                decision,
                confidence,
                time_seconds,
                ground_truth,
                manipulation_class,
                difficulty,
            });
            rows.push(row);
        }
    }
    Ok((trials, rows))
}

/// Writes the profiles file. Demographic columns are the sorted union of
/// all keys.
pub fn write_profiles<W: Write>(dataset: &Dataset, out: W) -> Result<(), csv::Error> {
    let keys: BTreeSet<&str> = dataset
        .profiles
        .iter()
        .flat_map(|p| p.demographics.keys().map(String::as_str))
        .collect();
    let mut w = WriterBuilder::new().from_writer(out);
    w.write_record(PROFILES_HEADER.iter().copied().chain(keys.iter().copied()))?;
    for p in &dataset.profiles {
        let experience = p.experience.to_string();
        let mut row = vec![p.examiner_id.as_str(), experience.as_str()];
        row.extend(
            keys.iter()
                .map(|k| p.demographics.get(*k).map_or("", String::as_str)),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trials<W: Write>(dataset: &Dataset, out: W) -> Result<(), csv::Error> {
    let mut w = WriterBuilder::new().from_writer(out);
    w.write_record(TRIALS_HEADER)?;
    for t in &dataset.trials {
        w.write_record([
            t.examiner_id.as_str(),
            t.trial_id.as_str(),
            t.trial_type.as_str(),
            &t.decision.to_string(),
            &t.confidence.to_string(),
            &t.time_seconds.to_string(),
            &t.ground_truth.to_string(),
            t.manipulation_class.map_or("", ManipulationClass::as_str),
            t.difficulty.map_or("", Difficulty::as_str),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(
    dataset: &Dataset,
    profiles_path: impl AsRef<Path>,
    trials_path: impl AsRef<Path>,
) -> Result<(), DataError> {
    for (path, is_profiles) in [(profiles_path.as_ref(), true), (trials_path.as_ref(), false)] {
        let file = File::create(path).map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let file = std::io::BufWriter::new(file);
        let res = if is_profiles {
            write_profiles(dataset, file)
        } else {
            write_trials(dataset, file)
        };
        res.map_err(|source| DataError::Csv {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}
