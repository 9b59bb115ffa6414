//! Crowd formation, synthetic examiner populations and the experiment runner.

mod config;
mod experiment;
mod grouping;
mod model;
mod population;

use thiserror::Error;

use crate::data::Violation;
use crate::fusion::FusionError;

pub use config::{ModelSpecFile, SpecFileError};
pub use experiment::{
    read_raw_csv, run_experiment, run_plans, write_raw_csv, RawRecord, RAW_HEADER,
};
pub use grouping::{sample_groups, Crowd, GroupingPlan};
pub use model::{Categorical, ExaminerModel, PopulationModel, TimeDistribution};
pub use population::{synthesize_population, SyntheticPopulationSpec};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("population of {available} examiner(s) cannot form crowds of {needed}")]
    InsufficientPopulation { needed: usize, available: usize },
    #[error("invalid grouping plan: {0}")]
    InvalidPlan(String),
    #[error("invalid examiner model: {0}")]
    InvalidModel(String),
    #[error("examiner `{examiner_id}` has no response to trial `{trial_id}`")]
    IncompleteCoverage {
        examiner_id: String,
        trial_id: String,
    },
    #[error("crowd member `{0}` is not in the dataset")]
    UnknownMember(String),
    #[error("dataset has {} violation(s); first: {}", .0.len(), .0[0])]
    InvalidDataset(Vec<Violation>),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error("malformed raw experiment output: {0}")]
    MalformedRaw(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
