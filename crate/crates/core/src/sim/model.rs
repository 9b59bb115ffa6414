//! Parametric synthetic examiners.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::data::TrialType;
use crate::fusion::FusionScales;

/// Probabilities over the levels `1..=len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Categorical(pub(crate) Vec<f64>);

impl Categorical {
    pub fn new(probabilities: Vec<f64>) -> Result<Self, SimError> {
        if probabilities.is_empty() || probabilities.len() > usize::from(u8::MAX) {
            return Err(SimError::InvalidModel(format!(
                "categorical distribution needs 1..=255 levels, got {}",
                probabilities.len()
            )));
        }
        if let Some(p) = probabilities.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(SimError::InvalidModel(format!("invalid probability {p}")));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(SimError::InvalidModel(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self(probabilities))
    }

    /// All mass on `level` out of `levels`.
    pub fn point(level: u8, levels: u8) -> Result<Self, SimError> {
        if level == 0 || level > levels {
            return Err(SimError::InvalidModel(format!("level {level} outside 1..={levels}")));
        }
        let mut p = vec![0.0; usize::from(levels)];
        p[usize::from(level - 1)] = 1.0;
        Self::new(p)
    }

    pub fn uniform(levels: u8) -> Result<Self, SimError> {
        Self::new(vec![1.0 / f64::from(levels); usize::from(levels)])
    }

    pub fn levels(&self) -> usize {
        self.0.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    fn check(&self) -> Result<(), SimError> {
        Self::new(self.0.clone()).map(drop)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in self.0.iter().enumerate() {
            acc += p;
            if u < acc {
                return (i + 1) as u8;
            }
        }
        // rounding left a sliver above the cumulative sum: last non-zero level
        self.0.iter().rposition(|&p| p > 0.0).map_or(1, |i| i + 1) as u8
    }
}

/// Decision-time distribution in whole seconds, never below one second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeDistribution {
    /// `ceil(median · exp(sigma · Z))`, clamped to `1..=max_seconds`.
    LogNormal {
        median: f64,
        sigma: f64,
        max_seconds: Option<u32>,
    },
    Fixed { seconds: u32 },
}

impl TimeDistribution {
    fn check(&self) -> Result<(), SimError> {
        match *self {
            TimeDistribution::LogNormal {
                median,
                sigma,
                max_seconds,
            } => {
                if !(median.is_finite() && median > 0.0) {
                    return Err(SimError::InvalidModel(format!("time median {median} must be > 0")));
                }
                if !(sigma.is_finite() && sigma >= 0.0) {
                    return Err(SimError::InvalidModel(format!("time sigma {sigma} must be >= 0")));
                }
                if max_seconds == Some(0) {
                    return Err(SimError::InvalidModel("time cap must be >= 1 s".into()));
                }
            }
            TimeDistribution::Fixed { seconds: 0 } => {
                return Err(SimError::InvalidModel("fixed time must be >= 1 s".into()));
            }
            TimeDistribution::Fixed { .. } => {}
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match *self {
            TimeDistribution::LogNormal {
                median,
                sigma,
                max_seconds,
            } => {
                let z: f64 = StandardNormal.sample(rng);
                let secs = (median * (sigma * z).exp()).ceil();
                let cap = max_seconds.unwrap_or(u32::MAX);
                secs.clamp(1.0, f64::from(cap)) as u32
            }
            TimeDistribution::Fixed { seconds } => seconds,
        }
    }
}

/// One synthetic examiner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExaminerModel {
    pub accuracy_abx: f64,
    pub accuracy_s2afc: f64,
    pub confidence_given_correct: Categorical,
    pub confidence_given_wrong: Categorical,
    pub time_given_correct: TimeDistribution,
    pub time_given_wrong: TimeDistribution,
    pub experience: u8,
}

impl ExaminerModel {
    pub fn validate(&self, scales: &FusionScales) -> Result<(), SimError> {
        for (name, p) in [("accuracy_abx", self.accuracy_abx), ("accuracy_s2afc", self.accuracy_s2afc)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::InvalidModel(format!("{name} = {p} is not a probability")));
            }
        }
        for (name, c) in [
            ("confidence_given_correct", &self.confidence_given_correct),
            ("confidence_given_wrong", &self.confidence_given_wrong),
        ] {
            c.check()?;
            if c.levels() != usize::from(scales.max_confidence()) {
                return Err(SimError::InvalidModel(format!(
                    "{name} has {} levels but the confidence scale has {}",
                    c.levels(),
                    scales.max_confidence()
                )));
            }
        }
        self.time_given_correct.check()?;
        self.time_given_wrong.check()?;
        if self.experience == 0 || self.experience > scales.max_experience() {
            return Err(SimError::InvalidModel(format!(
                "experience {} outside 1..={}",
                self.experience,
                scales.max_experience()
            )));
        }
        Ok(())
    }

    pub fn accuracy(&self, trial_type: TrialType) -> f64 {
        match trial_type {
            TrialType::Abx => self.accuracy_abx,
            TrialType::S2afc => self.accuracy_s2afc,
        }
    }

    /// Draws `(correct, confidence, seconds)` for one trial.
    pub fn respond<R: Rng + ?Sized>(&self, trial_type: TrialType, rng: &mut R) -> (bool, u8, u32) {
        let correct = rng.random_bool(self.accuracy(trial_type));
        let (conf, time) = if correct {
            (&self.confidence_given_correct, &self.time_given_correct)
        } else {
            (&self.confidence_given_wrong, &self.time_given_wrong)
        };
        (correct, conf.sample(rng), time.sample(rng))
    }
}

impl Default for ExaminerModel {
    /// Individual accuracies at the reported human means (62.8% ABX, 75.2%
    /// S2AFC), confidence skewed higher when correct, and correct answers
    /// given faster than wrong ones, all on five-point scales.
    fn default() -> Self {
        Self {
            accuracy_abx: 0.628,
            accuracy_s2afc: 0.752,
            confidence_given_correct: Categorical(vec![0.05, 0.10, 0.20, 0.35, 0.30]),
            confidence_given_wrong: Categorical(vec![0.10, 0.20, 0.30, 0.25, 0.15]),
            time_given_correct: TimeDistribution::LogNormal {
                median: 8.0,
                sigma: 0.6,
                max_seconds: Some(60),
            },
            time_given_wrong: TimeDistribution::LogNormal {
                median: 12.0,
                sigma: 0.6,
                max_seconds: Some(60),
            },
            experience: 3,
        }
    }
}

/// A population of examiners: a base model plus optional per-examiner
/// variation of accuracy and experience.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct PopulationModel {
    pub base: ExaminerModel,
    /// Standard deviation of per-examiner ABX accuracy (0 = homogeneous).
    #[serde(default)]
    pub accuracy_abx_sd: f64,
    #[serde(default)]
    pub accuracy_s2afc_sd: f64,
    /// When present, each examiner's experience is drawn from this
    /// distribution instead of `base.experience`.
    #[serde(default)]
    pub experience_distribution: Option<Categorical>,
}

impl PopulationModel {
    pub fn homogeneous(base: ExaminerModel) -> Self {
        Self {
            base,
            ..Self::default()
        }
    }

    pub fn validate(&self, scales: &FusionScales) -> Result<(), SimError> {
        self.base.validate(scales)?;
        for sd in [self.accuracy_abx_sd, self.accuracy_s2afc_sd] {
            if !(sd.is_finite() && sd >= 0.0) {
                return Err(SimError::InvalidModel(format!("accuracy sd {sd} must be >= 0")));
            }
        }
        if let Some(e) = &self.experience_distribution {
            e.check()?;
            if e.levels() != usize::from(scales.max_experience()) {
                return Err(SimError::InvalidModel(format!(
                    "experience distribution has {} levels but the experience scale has {}",
                    e.levels(),
                    scales.max_experience()
                )));
            }
        }
        Ok(())
    }

    /// Draws one examiner's model. Consumes no randomness for a homogeneous
    /// population with fixed experience.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ExaminerModel {
        let mut m = self.base.clone();
        let mut jitter = |mean: f64, sd: f64| {
            if sd > 0.0 {
                let z: f64 = StandardNormal.sample(&mut *rng);
                (mean + sd * z).clamp(0.0, 1.0)
            } else {
                mean
            }
        };
        m.accuracy_abx = jitter(self.base.accuracy_abx, self.accuracy_abx_sd);
        m.accuracy_s2afc = jitter(self.base.accuracy_s2afc, self.accuracy_s2afc_sd);
        if let Some(e) = &self.experience_distribution {
            m.experience = e.sample(rng);
        }
        m
    }
}
