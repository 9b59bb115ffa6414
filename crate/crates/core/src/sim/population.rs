use serde::{Deserialize, Serialize};

use super::model::PopulationModel;
use super::SimError;
use crate::data::{Dataset, Difficulty, ExaminerProfile, ManipulationClass, TrialRecord, TrialType};
use crate::exec::Execution;
use crate::fusion::{Decision, FusionScales};
use crate::seeding::{self, Domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPopulationSpec {
    pub n_examiners: usize,
    pub model: PopulationModel,
    pub n_abx_trials: usize,
    pub n_s2afc_trials: usize,
    pub seed: u64,
    pub scales: FusionScales,
}

impl SyntheticPopulationSpec {
    /// `n_examiners` examiners on the 23 ABX + 27 S2AFC trial mix.
    pub fn new(n_examiners: usize, model: PopulationModel, seed: u64) -> Self {
        Self {
            n_examiners,
            model,
            n_abx_trials: 23,
            n_s2afc_trials: 27,
            seed,
            scales: FusionScales::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_examiners == 0 {
            return Err(SimError::InvalidModel("n_examiners must be at least 1".into()));
        }
        if self.n_abx_trials + self.n_s2afc_trials == 0 {
            return Err(SimError::InvalidModel("at least one trial is required".into()));
        }
        self.model.validate(&self.scales)
    }

    /// The trial sheet every synthetic examiner answers: ABX trials first,
    /// then S2AFC. Within each type ground truth alternates manipulated /
    /// bona fide; manipulated trials cycle through the six classes, the
    /// first six easy, the next six hard, and so on.
    pub fn trial_sheet(&self) -> Vec<(String, TrialType, Decision, ManipulationClass, Option<Difficulty>)> {
        let total = self.n_abx_trials + self.n_s2afc_trials;
        let width = total.to_string().len();
        let types = std::iter::repeat_n(TrialType::Abx, self.n_abx_trials)
            .chain(std::iter::repeat_n(TrialType::S2afc, self.n_s2afc_trials));
        let mut within = [0usize; 2];
        let mut manipulated_seen = 0usize;
        types
            .enumerate()
            .map(|(i, tt)| {
                let slot = &mut within[tt as usize];
                let manipulated = *slot % 2 == 0;
                *slot += 1;
                let id = format!("T{:0width$}", i + 1);
                if manipulated {
                    let m = manipulated_seen;
                    manipulated_seen += 1;
                    let class = ManipulationClass::MANIPULATIONS[m % 6];
                    let difficulty = if (m / 6).is_multiple_of(2) {
                        Difficulty::Easy
                    } else {
                        Difficulty::Hard
                    };
                    (id, tt, Decision::Manipulated, class, Some(difficulty))
                } else {
                    (id, tt, Decision::BonaFide, ManipulationClass::BonaFide, None)
                }
            })
            .collect()
    }
}

/// Generates a dataset in which every examiner answers every trial
/// independently. Examiner `i` draws everything from its own stream, so the
/// output is the same for both execution modes.
pub fn synthesize_population(
    spec: &SyntheticPopulationSpec,
    exec: Execution,
) -> Result<Dataset, SimError> {
    spec.validate()?;
    let sheet = spec.trial_sheet();
    let width = spec.n_examiners.to_string().len();

    let per_examiner = exec.map_range(spec.n_examiners, |i| {
        let mut rng = seeding::stream(spec.seed, Domain::Examiner, &[i as u64]);
        let model = spec.model.draw(&mut rng);
        let examiner_id = format!("X{:0width$}", i + 1);
        let records: Vec<TrialRecord> = sheet
            .iter()
            .map(|(trial_id, tt, truth, class, difficulty)| {
                let (correct, confidence, time_seconds) = model.respond(*tt, &mut rng);
                TrialRecord {
                    examiner_id: examiner_id.clone(),
                    trial_id: trial_id.clone(),
                    trial_type: *tt,
                    decision: if correct { *truth } else { truth.complement() },
                    confidence,
                    time_seconds,
                    ground_truth: *truth,
                    manipulation_class: Some(*class),
                    difficulty: *difficulty,
                }
            })
            .collect();
        let profile = ExaminerProfile {
            examiner_id,
            experience: model.experience,
            demographics: Default::default(),
        };
        (profile, records)
    });

    let mut profiles = Vec::with_capacity(spec.n_examiners);
    let mut trials = Vec::with_capacity(spec.n_examiners * sheet.len());
    for (p, rs) in per_examiner {
        profiles.push(p);
        trials.extend(rs);
    }
    Ok(Dataset {
        profiles,
        trials,
        scales: spec.scales,
    })
}
