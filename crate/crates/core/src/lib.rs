//! Fusion of binary human-examiner verdicts.
//!
//! `crowdfuse` combines the decisions of an odd-sized crowd of examiners on
//! "bona fide vs. manipulated" questions using five rules: plain majority
//! vote (MV), confidence-weighted (CF), experience-weighted (EF), time-weighted
//! (TF) and an overall fusion (OF) that takes a majority over CF, EF and TF.
//!
//! Around the rules the crate provides:
//!
//! * [`data`]: the examiner/trial data model with strict CSV ingestion,
//! * [`sim`]: seeded crowd sampling, synthetic examiner populations and the
//!   experiment runner that fuses every crowd on every trial,
//! * [`metrics`]: correct classification rate (CCR) aggregation, breakdowns by
//!   confidence/experience/time and plot-data emission.
//!
//! Heavy loops run on rayon when the `parallel` feature is enabled (default).
//! Results never depend on the scheduling; see [`Execution`].

pub mod data;
pub mod exec;
pub mod fusion;
pub mod metrics;
pub mod seeding;
pub mod sim;

pub use data::{Dataset, ExaminerProfile, TrialRecord, TrialType};
pub use exec::Execution;
pub use fusion::{
    Decision, DecisionVector, FusionError, FusionMethod, FusionOutcome, FusionScales,
    WeightKind, WeightVector,
};
