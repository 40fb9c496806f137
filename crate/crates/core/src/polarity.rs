//! The four tweet-level polarity classes and probability vectors over them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub const NUM_CLASSES: usize = 4;

/// Tweet polarity. The declaration order (P, N, NEU, NONE) is the class
/// order used by every vector, matrix and tie-break in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "P")]
    Positive,
    #[serde(rename = "N")]
    Negative,
    #[serde(rename = "NEU")]
    Neutral,
    #[serde(rename = "NONE")]
    NoOpinion,
}

impl Polarity {
    pub const ALL: [Polarity; NUM_CLASSES] = [
        Polarity::Positive,
        Polarity::Negative,
        Polarity::Neutral,
        Polarity::NoOpinion,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Polarity> {
        Self::ALL.get(index).copied()
    }

    pub fn code(self) -> &'static str {
        match self {
            Polarity::Positive => "P",
            Polarity::Negative => "N",
            Polarity::Neutral => "NEU",
            Polarity::NoOpinion => "NONE",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown polarity label {0:?} (expected one of P, N, NEU, NONE)")]
pub struct UnknownLabel(pub String);

impl FromStr for Polarity {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "P" => Ok(Polarity::Positive),
            "N" => Ok(Polarity::Negative),
            "NEU" => Ok(Polarity::Neutral),
            "NONE" => Ok(Polarity::NoOpinion),
            other => Err(UnknownLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("probability component {index} is {value}, outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, not 1")]
    BadSum { sum: f64 },
}

/// Probability vector over the four classes, in [`Polarity::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassDistribution<T> {
    probabilities: [T; NUM_CLASSES],
}

impl<T: Scalar> ClassDistribution<T> {
    /// Default tolerance on the sum of the components.
    pub const SUM_TOLERANCE: f64 = 1e-6;

    pub fn new(probabilities: [T; NUM_CLASSES]) -> Result<Self, DistributionError> {
        Self::with_tolerance(probabilities, Self::SUM_TOLERANCE)
    }

    pub fn with_tolerance(probabilities: [T; NUM_CLASSES], tolerance: f64) -> Result<Self, DistributionError> {
        let slack = T::lit(tolerance);
        for (index, &p) in probabilities.iter().enumerate() {
            if !p.is_finite() || p < -slack || p > T::one() + slack {
                return Err(DistributionError::OutOfRange { index, value: p.as_f64() });
            }
        }
        let sum: T = probabilities.iter().copied().sum();
        if (sum - T::one()).abs() > slack {
            return Err(DistributionError::BadSum { sum: sum.as_f64() });
        }
        Ok(ClassDistribution { probabilities })
    }

    /// Wraps a vector the caller already knows to be a distribution
    /// (e.g. a softmax output).
    pub(crate) fn from_normalized(probabilities: [T; NUM_CLASSES]) -> Self {
        ClassDistribution { probabilities }
    }

    pub fn uniform() -> Self {
        let q = T::one() / T::from_usize_lossy(NUM_CLASSES);
        ClassDistribution { probabilities: [q; NUM_CLASSES] }
    }

    pub fn probabilities(&self) -> &[T; NUM_CLASSES] {
        &self.probabilities
    }

    pub fn get(&self, class: Polarity) -> T {
        self.probabilities[class.index()]
    }

    /// Most probable class; ties go to the earlier class in P, N, NEU, NONE.
    pub fn argmax(&self) -> Polarity {
        argmax(&self.probabilities)
    }

    /// Re-checks the distribution contract, e.g. after deserialization.
    pub fn validate(&self, tolerance: f64) -> Result<(), DistributionError> {
        Self::with_tolerance(self.probabilities, tolerance).map(|_| ())
    }
}

/// Index of the largest value with first-index tie-breaking, as a class.
pub fn argmax<T: Scalar>(values: &[T; NUM_CLASSES]) -> Polarity {
    let mut best = 0;
    for i in 1..NUM_CLASSES {
        if values[i] > values[best] {
            best = i;
        }
    }
    Polarity::ALL[best]
}
