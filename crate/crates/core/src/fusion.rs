//! Decision-level fusion rules for an odd crowd of examiners.
//!
//! All rules compare the (weighted) support for "manipulated" against the
//! support for "bona fide":
//!
//! ```text
//! fused = 0  if  Σ w_i·d_i  <  Σ w_i·(1 − d_i)
//!         1  otherwise
//! ```
//!
//! With unit weights this is the plain majority vote. Confidence, experience
//! and time weighting only change where `w` comes from. The overall fusion
//! takes a majority vote over the confidence-, experience- and time-weighted
//! decisions, so the three weight scales never have to be normalised against
//! each other.
//!
//! **Ties resolve to manipulated (1).** An exact weighted tie falls into the
//! "otherwise" branch above. Plain majority votes over an odd crowd can never
//! tie, but weighted ones can (e.g. `d = [1,0,0]`, `w = [2,1,1]`).

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact positive weight.
pub type Weight = Ratio<i64>;

/// Signed difference between weighted support for 1 and for 0.
pub type Margin = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FusionError {
    #[error("crowd size must be odd and at least 1, got {0}")]
    InvalidCrowdSize(usize),
    #[error("decision must be 0 or 1, got {0}")]
    InvalidDecision(i64),
    #[error("weight vector has {found} entries but the crowd has {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("weight at position {index} must be positive, got {value}")]
    InvalidWeight { index: usize, value: String },
    #[error("{kind} value {value} at position {index} is outside 1..={max}")]
    InvalidScaleValue {
        kind: WeightKind,
        index: usize,
        value: i64,
        max: u8,
    },
    #[error("scale maximum must be at least 2, got {0}")]
    InvalidScales(u8),
}

/// Binary verdict on one image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Decision {
    BonaFide,
    Manipulated,
}

impl Decision {
    pub fn from_bit(bit: i64) -> Result<Self, FusionError> {
        match bit {
            0 => Ok(Decision::BonaFide),
            1 => Ok(Decision::Manipulated),
            other => Err(FusionError::InvalidDecision(other)),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Decision::BonaFide => 0,
            Decision::Manipulated => 1,
        }
    }

    pub fn complement(self) -> Self {
        match self {
            Decision::BonaFide => Decision::Manipulated,
            Decision::Manipulated => Decision::BonaFide,
        }
    }
}

impl From<Decision> for u8 {
    fn from(d: Decision) -> u8 {
        d.bit()
    }
}

impl TryFrom<u8> for Decision {
    type Error = FusionError;

    fn try_from(bit: u8) -> Result<Self, Self::Error> {
        Decision::from_bit(i64::from(bit))
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// Upper ends of the confidence (`C`) and experience (`E`) rating scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionScales {
    max_confidence: u8,
    max_experience: u8,
}

impl FusionScales {
    pub fn new(max_confidence: u8, max_experience: u8) -> Result<Self, FusionError> {
        for m in [max_confidence, max_experience] {
            if m < 2 {
                return Err(FusionError::InvalidScales(m));
            }
        }
        Ok(Self {
            max_confidence,
            max_experience,
        })
    }

    pub fn max_confidence(&self) -> u8 {
        self.max_confidence
    }

    pub fn max_experience(&self) -> u8 {
        self.max_experience
    }
}

impl Default for FusionScales {
    /// Five-point scales for both confidence and experience.
    fn default() -> Self {
        Self {
            max_confidence: 5,
            max_experience: 5,
        }
    }
}

/// The verdicts of one crowd, in examiner order. Always odd-sized.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecisionVector(Vec<Decision>);

impl DecisionVector {
    pub fn new(decisions: Vec<Decision>) -> Result<Self, FusionError> {
        if decisions.len().is_multiple_of(2) {
            return Err(FusionError::InvalidCrowdSize(decisions.len()));
        }
        Ok(Self(decisions))
    }

    /// Builds a vector from 0/1 integers.
    pub fn from_bits(bits: &[i64]) -> Result<Self, FusionError> {
        let decisions = bits
            .iter()
            .map(|&b| Decision::from_bit(b))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(decisions)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Decision] {
        &self.0
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|d| d.complement()).collect())
    }
}

/// Where a weight vector's entries come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Confidence,
    Experience,
    Time,
    Uniform,
}

impl WeightKind {
    /// The fusion method a weight kind corresponds to.
    pub fn method(self) -> FusionMethod {
        match self {
            WeightKind::Confidence => FusionMethod::CF,
            WeightKind::Experience => FusionMethod::EF,
            WeightKind::Time => FusionMethod::TF,
            WeightKind::Uniform => FusionMethod::MV,
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightKind::Confidence => "confidence",
            WeightKind::Experience => "experience",
            WeightKind::Time => "time",
            WeightKind::Uniform => "uniform",
        })
    }
}

/// Strictly positive per-examiner weights.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightVector {
    kind: WeightKind,
    weights: Vec<Weight>,
}

impl WeightVector {
    /// Arbitrary positive weights; no scale check beyond positivity.
    pub fn new(kind: WeightKind, weights: Vec<Weight>) -> Result<Self, FusionError> {
        if let Some((index, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| **w <= Weight::from_integer(0))
        {
            return Err(FusionError::InvalidWeight {
                index,
                value: w.to_string(),
            });
        }
        Ok(Self { kind, weights })
    }

    /// Confidence ratings, each within `1..=C`.
    pub fn confidence(levels: &[u8], scales: &FusionScales) -> Result<Self, FusionError> {
        Self::from_levels(WeightKind::Confidence, levels, scales.max_confidence)
    }

    /// Experience ratings, each within `1..=E`.
    pub fn experience(levels: &[u8], scales: &FusionScales) -> Result<Self, FusionError> {
        Self::from_levels(WeightKind::Experience, levels, scales.max_experience)
    }

    /// Decision times in whole seconds; zero is rejected.
    pub fn time(seconds: &[u32]) -> Result<Self, FusionError> {
        let weights = seconds
            .iter()
            .map(|&s| Weight::from_integer(i64::from(s)))
            .collect();
        Self::new(WeightKind::Time, weights)
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            kind: WeightKind::Uniform,
            weights: vec![Weight::from_integer(1); k],
        }
    }

    fn from_levels(kind: WeightKind, levels: &[u8], max: u8) -> Result<Self, FusionError> {
        let mut weights = Vec::with_capacity(levels.len());
        for (index, &level) in levels.iter().enumerate() {
            if level == 0 || level > max {
                return Err(FusionError::InvalidScaleValue {
                    kind,
                    index,
                    value: i64::from(level),
                    max,
                });
            }
            weights.push(Weight::from_integer(i64::from(level)));
        }
        Ok(Self { kind, weights })
    }

    /// Multiplies every weight by `factor` (must be positive).
    pub fn scaled(&self, factor: Weight) -> Result<Self, FusionError> {
        Self::new(self.kind, self.weights.iter().map(|w| w * factor).collect())
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[Weight] {
        &self.weights
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FusionMethod {
    /// Majority vote.
    MV,
    /// Confidence-weighted.
    CF,
    /// Experience-weighted.
    EF,
    /// Time-weighted.
    TF,
    /// Majority over CF, EF and TF.
    OF,
}

impl FusionMethod {
    pub const ALL: [FusionMethod; 5] = [
        FusionMethod::MV,
        FusionMethod::CF,
        FusionMethod::EF,
        FusionMethod::TF,
        FusionMethod::OF,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FusionMethod::MV => "MV",
            FusionMethod::CF => "CF",
            FusionMethod::EF => "EF",
            FusionMethod::TF => "TF",
            FusionMethod::OF => "OF",
        }
    }
}

impl fmt::Display for FusionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FusionMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MV" => Ok(FusionMethod::MV),
            "CF" => Ok(FusionMethod::CF),
            "EF" => Ok(FusionMethod::EF),
            "TF" => Ok(FusionMethod::TF),
            "OF" => Ok(FusionMethod::OF),
            _ => Err(format!("unknown fusion method `{s}` (expected MV, CF, EF, TF or OF)")),
        }
    }
}

/// Result of one fusion rule applied to one crowd.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionOutcome {
    pub method: FusionMethod,
    pub decision: Decision,
    /// Weighted support for 1 minus weighted support for 0. Only its sign is
    /// meaningful across methods.
    pub margin: Margin,
}

fn outcome(method: FusionMethod, margin: Margin) -> FusionOutcome {
    let decision = if margin < Margin::from_integer(0) {
        Decision::BonaFide
    } else {
        Decision::Manipulated
    };
    FusionOutcome {
        method,
        decision,
        margin,
    }
}

pub fn majority_vote(d: &DecisionVector) -> FusionOutcome {
    let ones = d.0.iter().filter(|&&x| x == Decision::Manipulated).count() as i64;
    let zeros = d.len() as i64 - ones;
    outcome(FusionMethod::MV, Margin::from_integer(ones - zeros))
}

/// Weighted vote; the outcome is tagged with the method matching `w.kind()`.
pub fn weighted_fusion(d: &DecisionVector, w: &WeightVector) -> Result<FusionOutcome, FusionError> {
    if d.len() != w.len() {
        return Err(FusionError::LengthMismatch {
            expected: d.len(),
            found: w.len(),
        });
    }
    let margin = d
        .0
        .iter()
        .zip(&w.weights)
        .fold(Margin::from_integer(0), |acc, (dec, &weight)| match dec {
            Decision::Manipulated => acc + weight,
            Decision::BonaFide => acc - weight,
        });
    Ok(outcome(w.kind.method(), margin))
}

pub fn confidence_fusion(
    d: &DecisionVector,
    confidence: &[u8],
    scales: &FusionScales,
) -> Result<FusionOutcome, FusionError> {
    weighted_fusion(d, &WeightVector::confidence(confidence, scales)?)
}

pub fn experience_fusion(
    d: &DecisionVector,
    experience: &[u8],
    scales: &FusionScales,
) -> Result<FusionOutcome, FusionError> {
    weighted_fusion(d, &WeightVector::experience(experience, scales)?)
}

pub fn time_fusion(d: &DecisionVector, seconds: &[u32]) -> Result<FusionOutcome, FusionError> {
    weighted_fusion(d, &WeightVector::time(seconds)?)
}

/// Majority vote over the CF, EF and TF decisions. The margin counts
/// sub-decisions (one of -3, -1, 1, 3).
pub fn overall_fusion(
    d: &DecisionVector,
    confidence: &[u8],
    experience: &[u8],
    seconds: &[u32],
    scales: &FusionScales,
) -> Result<FusionOutcome, FusionError> {
    let subs = DecisionVector(vec![
        confidence_fusion(d, confidence, scales)?.decision,
        experience_fusion(d, experience, scales)?.decision,
        time_fusion(d, seconds)?.decision,
    ]);
    let mv = majority_vote(&subs);
    Ok(FusionOutcome {
        method: FusionMethod::OF,
        ..mv
    })
}

/// Everything one crowd reported on one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrowdResponses {
    pub decisions: DecisionVector,
    pub confidence: Vec<u8>,
    pub experience: Vec<u8>,
    pub seconds: Vec<u32>,
}

impl CrowdResponses {
    pub fn fuse(
        &self,
        method: FusionMethod,
        scales: &FusionScales,
    ) -> Result<FusionOutcome, FusionError> {
        let d = &self.decisions;
        match method {
            FusionMethod::MV => Ok(majority_vote(d)),
            FusionMethod::CF => confidence_fusion(d, &self.confidence, scales),
            FusionMethod::EF => experience_fusion(d, &self.experience, scales),
            FusionMethod::TF => time_fusion(d, &self.seconds),
            FusionMethod::OF => {
                overall_fusion(d, &self.confidence, &self.experience, &self.seconds, scales)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(bits: &[i64]) -> DecisionVector {
        DecisionVector::from_bits(bits).unwrap()
    }

    fn ints(ws: &[i64]) -> WeightVector {
        WeightVector::new(
            WeightKind::Uniform,
            ws.iter().map(|&w| Weight::from_integer(w)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn majority_vote_examples() {
        assert_eq!(majority_vote(&dv(&[0, 0, 1])).decision, Decision::BonaFide);
        assert_eq!(majority_vote(&dv(&[1, 1, 0, 1, 0])).decision, Decision::Manipulated);
        assert_eq!(majority_vote(&dv(&[1; 7])).decision, Decision::Manipulated);
        assert_eq!(majority_vote(&dv(&[1; 7])).margin, Margin::from_integer(7));
    }

    #[test]
    fn even_and_empty_crowds_rejected() {
        assert_eq!(DecisionVector::from_bits(&[1, 0]), Err(FusionError::InvalidCrowdSize(2)));
        assert_eq!(DecisionVector::from_bits(&[]), Err(FusionError::InvalidCrowdSize(0)));
        assert_eq!(DecisionVector::from_bits(&[1, 2, 0]), Err(FusionError::InvalidDecision(2)));
    }

    #[test]
    fn weighted_examples() {
        let d = dv(&[1, 0, 0]);
        assert_eq!(weighted_fusion(&d, &ints(&[5, 1, 1])).unwrap().decision, Decision::Manipulated);
        let tie = weighted_fusion(&d, &ints(&[2, 1, 1])).unwrap();
        assert_eq!(tie.decision, Decision::Manipulated);
        assert_eq!(tie.margin, Margin::from_integer(0));
        assert_eq!(weighted_fusion(&d, &ints(&[1, 1, 1])).unwrap().decision, Decision::BonaFide);
    }

    #[test]
    fn weighted_errors() {
        let d = dv(&[1, 0, 0]);
        assert_eq!(
            weighted_fusion(&d, &ints(&[1, 1])),
            Err(FusionError::LengthMismatch { expected: 3, found: 2 })
        );
        assert!(matches!(
            WeightVector::new(WeightKind::Uniform, vec![Weight::from_integer(0)]),
            Err(FusionError::InvalidWeight { index: 0, .. })
        ));
        assert!(matches!(
            WeightVector::new(WeightKind::Uniform, vec![Weight::new(1, 2), Weight::new(-1, 3)]),
            Err(FusionError::InvalidWeight { index: 1, .. })
        ));
    }

    #[test]
    fn specialised_examples() {
        let s = FusionScales::default();
        let cf = confidence_fusion(&dv(&[1, 0, 1]), &[1, 5, 1], &s).unwrap();
        assert_eq!((cf.method, cf.decision), (FusionMethod::CF, Decision::BonaFide));
        let ef = experience_fusion(&dv(&[0, 0, 1]), &[2, 2, 5], &s).unwrap();
        assert_eq!((ef.method, ef.decision), (FusionMethod::EF, Decision::Manipulated));
        let tf = time_fusion(&dv(&[1, 1, 0]), &[2, 3, 60]).unwrap();
        assert_eq!((tf.method, tf.decision), (FusionMethod::TF, Decision::BonaFide));
        assert_eq!(tf.margin, Margin::from_integer(-55));
    }

    #[test]
    fn scale_violations() {
        let s = FusionScales::default();
        let d = dv(&[1, 0, 1]);
        assert_eq!(
            confidence_fusion(&d, &[1, 6, 1], &s),
            Err(FusionError::InvalidScaleValue {
                kind: WeightKind::Confidence,
                index: 1,
                value: 6,
                max: 5
            })
        );
        assert!(matches!(
            experience_fusion(&d, &[0, 1, 1], &s),
            Err(FusionError::InvalidScaleValue { kind: WeightKind::Experience, index: 0, .. })
        ));
        assert!(matches!(time_fusion(&d, &[1, 0, 1]), Err(FusionError::InvalidWeight { index: 1, .. })));
        assert_eq!(FusionScales::new(1, 5), Err(FusionError::InvalidScales(1)));
        let wide = FusionScales::new(10, 3).unwrap();
        assert!(confidence_fusion(&d, &[1, 10, 1], &wide).is_ok());
    }

    #[test]
    fn overall_fusion_examples() {
        let s = FusionScales::default();
        // CF = 1 (5 ≥ 2), EF = 0 (1 < 2), TF = 0 (1 < 60).
        let of = overall_fusion(&dv(&[1, 0, 0]), &[5, 1, 1], &[1, 1, 1], &[1, 30, 30], &s).unwrap();
        assert_eq!(of.method, FusionMethod::OF);
        assert_eq!(of.decision, Decision::BonaFide);
        assert_eq!(of.margin, Margin::from_integer(-1));

        let unanimous =
            overall_fusion(&dv(&[1, 1, 1]), &[1, 2, 3], &[5, 4, 3], &[9, 1, 60], &s).unwrap();
        assert_eq!(unanimous.decision, Decision::Manipulated);
        assert_eq!(unanimous.margin, Margin::from_integer(3));
    }

    #[test]
    fn overall_propagates_errors() {
        let s = FusionScales::default();
        let d = dv(&[1, 0, 0]);
        assert!(overall_fusion(&d, &[5, 1], &[1, 1, 1], &[1, 1, 1], &s).is_err());
        assert!(overall_fusion(&d, &[5, 1, 1], &[1, 9, 1], &[1, 1, 1], &s).is_err());
        assert!(overall_fusion(&d, &[5, 1, 1], &[1, 1, 1], &[0, 1, 1], &s).is_err());
    }

    #[test]
    fn single_examiner_crowd() {
        let s = FusionScales::default();
        let r = CrowdResponses {
            decisions: dv(&[0]),
            confidence: vec![3],
            experience: vec![2],
            seconds: vec![7],
        };
        for m in FusionMethod::ALL {
            assert_eq!(r.fuse(m, &s).unwrap().decision, Decision::BonaFide, "{m}");
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in FusionMethod::ALL {
            assert_eq!(m.as_str().parse::<FusionMethod>().unwrap(), m);
        }
        assert_eq!("cf".parse::<FusionMethod>().unwrap(), FusionMethod::CF);
        assert!("XX".parse::<FusionMethod>().is_err());
    }
}
