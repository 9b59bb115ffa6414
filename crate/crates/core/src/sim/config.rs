//! Key-value population/model spec file.
//!
//! A flat TOML document; every key is optional and falls back to the default
//! examiner model, the 23 ABX + 27 S2AFC trial mix and crowd sizes 3, 5, 7
//! with 1000 groups each. Unknown keys are rejected.
//!
//! ```toml
//! seed = 42
//! n_examiners = 223
//! n_abx_trials = 23
//! n_s2afc_trials = 27
//! max_confidence = 5
//! max_experience = 5
//!
//! accuracy_abx = 0.628
//! accuracy_s2afc = 0.752
//! accuracy_abx_sd = 0.0          # > 0 draws per-examiner accuracies
//! accuracy_s2afc_sd = 0.0
//! confidence_given_correct = [0.05, 0.10, 0.20, 0.35, 0.30]
//! confidence_given_wrong   = [0.10, 0.20, 0.30, 0.25, 0.15]
//! experience = 3
//! experience_distribution = [0.2, 0.2, 0.2, 0.2, 0.2]   # overrides `experience`
//!
//! time_correct_median = 8.0      # seconds, log-normal
//! time_correct_sigma = 0.6
//! time_wrong_median = 12.0
//! time_wrong_sigma = 0.6
//! time_max_seconds = 60
//!
//! ks = [3, 5, 7]
//! n_groups = 1000
//! methods = ["MV", "CF", "EF", "TF", "OF"]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::grouping::GroupingPlan;
use super::model::{Categorical, ExaminerModel, PopulationModel, TimeDistribution};
use super::population::SyntheticPopulationSpec;
use super::SimError;
use crate::fusion::{FusionMethod, FusionScales};

#[derive(Debug, Error)]
pub enum SpecFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse spec file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid spec: {0}")]
    Invalid(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpecFile {
    pub seed: Option<u64>,
    pub n_examiners: Option<usize>,
    pub n_abx_trials: Option<usize>,
    pub n_s2afc_trials: Option<usize>,
    pub max_confidence: Option<u8>,
    pub max_experience: Option<u8>,

    pub accuracy_abx: Option<f64>,
    pub accuracy_s2afc: Option<f64>,
    pub accuracy_abx_sd: Option<f64>,
    pub accuracy_s2afc_sd: Option<f64>,
    pub confidence_given_correct: Option<Vec<f64>>,
    pub confidence_given_wrong: Option<Vec<f64>>,
    pub experience: Option<u8>,
    pub experience_distribution: Option<Vec<f64>>,

    pub time_correct_median: Option<f64>,
    pub time_correct_sigma: Option<f64>,
    pub time_wrong_median: Option<f64>,
    pub time_wrong_sigma: Option<f64>,
    pub time_max_seconds: Option<u32>,

    pub ks: Option<Vec<usize>>,
    pub n_groups: Option<usize>,
    pub methods: Option<Vec<String>>,
}

const DEFAULT_EXAMINERS: usize = 223;
const DEFAULT_GROUPS: usize = 1000;

impl ModelSpecFile {
    pub fn parse(text: &str) -> Result<Self, SpecFileError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SpecFileError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SpecFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn scales(&self) -> Result<FusionScales, SpecFileError> {
        FusionScales::new(
            self.max_confidence.unwrap_or(5),
            self.max_experience.unwrap_or(5),
        )
        .map_err(|e| SpecFileError::Invalid(e.to_string()))
    }

    fn time(median: Option<f64>, sigma: Option<f64>, cap: Option<u32>, fallback: &TimeDistribution) -> TimeDistribution {
        match fallback {
            TimeDistribution::LogNormal {
                median: m,
                sigma: s,
                max_seconds,
            } => TimeDistribution::LogNormal {
                median: median.unwrap_or(*m),
                sigma: sigma.unwrap_or(*s),
                max_seconds: cap.or(*max_seconds),
            },
            fixed => fixed.clone(),
        }
    }

    /// The examiner population described by the file. `seed` is taken from
    /// the argument so that callers can apply a command-line override.
    pub fn population_spec(&self, seed: u64) -> Result<SyntheticPopulationSpec, SpecFileError> {
        let scales = self.scales()?;
        let default = ExaminerModel::default();
        let levels_c = scales.max_confidence();
        let categorical = |given: &Option<Vec<f64>>, fallback: &Categorical| -> Result<Categorical, SimError> {
            match given {
                Some(p) => Categorical::new(p.clone()),
                None if fallback.levels() == usize::from(levels_c) => Ok(fallback.clone()),
                None => Categorical::uniform(levels_c),
            }
        };
        let base = ExaminerModel {
            accuracy_abx: self.accuracy_abx.unwrap_or(default.accuracy_abx),
            accuracy_s2afc: self.accuracy_s2afc.unwrap_or(default.accuracy_s2afc),
            confidence_given_correct: categorical(&self.confidence_given_correct, &default.confidence_given_correct)?,
            confidence_given_wrong: categorical(&self.confidence_given_wrong, &default.confidence_given_wrong)?,
            time_given_correct: Self::time(
                self.time_correct_median,
                self.time_correct_sigma,
                self.time_max_seconds,
                &default.time_given_correct,
            ),
            time_given_wrong: Self::time(
                self.time_wrong_median,
                self.time_wrong_sigma,
                self.time_max_seconds,
                &default.time_given_wrong,
            ),
            experience: self.experience.unwrap_or(default.experience.min(scales.max_experience())),
        };
        let model = PopulationModel {
            base,
            accuracy_abx_sd: self.accuracy_abx_sd.unwrap_or(0.0),
            accuracy_s2afc_sd: self.accuracy_s2afc_sd.unwrap_or(0.0),
            experience_distribution: self
                .experience_distribution
                .clone()
                .map(Categorical::new)
                .transpose()?,
        };
        let spec = SyntheticPopulationSpec {
            n_examiners: self.n_examiners.unwrap_or(DEFAULT_EXAMINERS),
            model,
            n_abx_trials: self.n_abx_trials.unwrap_or(23),
            n_s2afc_trials: self.n_s2afc_trials.unwrap_or(27),
            seed,
            scales,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ks(&self) -> Vec<usize> {
        self.ks.clone().unwrap_or_else(|| vec![3, 5, 7])
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups.unwrap_or(DEFAULT_GROUPS)
    }

    pub fn methods(&self) -> Result<Vec<FusionMethod>, SpecFileError> {
        match &self.methods {
            None => Ok(FusionMethod::ALL.to_vec()),
            Some(ms) => ms
                .iter()
                .map(|m| m.parse().map_err(SpecFileError::Invalid))
                .collect(),
        }
    }

    pub fn plans(&self, seed: u64) -> Result<Vec<GroupingPlan>, SpecFileError> {
        Ok(self
            .ks()
            .into_iter()
            .map(|k| GroupingPlan::new(k, self.n_groups(), seed))
            .collect::<Result<_, _>>()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let f = ModelSpecFile::parse("").unwrap();
        let spec = f.population_spec(9).unwrap();
        assert_eq!(spec.n_examiners, 223);
        assert_eq!((spec.n_abx_trials, spec.n_s2afc_trials), (23, 27));
        assert_eq!(spec.model.base, ExaminerModel::default());
        assert_eq!(f.ks(), vec![3, 5, 7]);
        assert_eq!(f.n_groups(), 1000);
        assert_eq!(f.methods().unwrap(), FusionMethod::ALL.to_vec());
        assert_eq!(f.seed, None);
    }

    #[test]
    fn full_file() {
        let text = r#"
seed = 7
n_examiners = 50
accuracy_abx = 0.75
accuracy_s2afc = 0.9
accuracy_abx_sd = 0.05
confidence_given_correct = [0.0, 0.0, 0.0, 0.0, 1.0]
confidence_given_wrong = [1.0, 0.0, 0.0, 0.0, 0.0]
experience_distribution = [0.5, 0.5, 0.0, 0.0, 0.0]
time_correct_median = 4.0
time_max_seconds = 30
ks = [1, 3]
n_groups = 20
methods = ["MV", "cf"]
"#;
        let f = ModelSpecFile::parse(text).unwrap();
        assert_eq!(f.seed, Some(7));
        let spec = f.population_spec(7).unwrap();
        assert_eq!(spec.n_examiners, 50);
        assert_eq!(spec.model.base.accuracy_abx, 0.75);
        assert_eq!(spec.model.accuracy_abx_sd, 0.05);
        assert_eq!(
            spec.model.base.time_given_correct,
            TimeDistribution::LogNormal {
                median: 4.0,
                sigma: 0.6,
                max_seconds: Some(30)
            }
        );
        assert_eq!(f.methods().unwrap(), vec![FusionMethod::MV, FusionMethod::CF]);
        assert_eq!(f.plans(7).unwrap().len(), 2);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(ModelSpecFile::parse("bogus = 1"), Err(SpecFileError::Parse(_))));
        let f = ModelSpecFile::parse("confidence_given_correct = [0.5, 0.5]").unwrap();
        assert!(f.population_spec(0).is_err());
        let f = ModelSpecFile::parse("ks = [4]").unwrap();
        assert!(f.plans(0).is_err());
        let f = ModelSpecFile::parse("methods = [\"XX\"]").unwrap();
        assert!(f.methods().is_err());
        let f = ModelSpecFile::parse("accuracy_abx = 2.0").unwrap();
        assert!(f.population_spec(0).is_err());
    }

    #[test]
    fn other_scales_fall_back_to_uniform_confidence() {
        let f = ModelSpecFile::parse("max_confidence = 3\nmax_experience = 2").unwrap();
        let spec = f.population_spec(0).unwrap();
        assert_eq!(spec.model.base.confidence_given_correct.levels(), 3);
        assert_eq!(spec.model.base.experience, 2);
    }
}
