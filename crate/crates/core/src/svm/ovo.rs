//! One-vs-one over the four polarity classes with calibrated probabilities.
//!
//! One binary SVM per unordered class pair `(i, j)`, `i < j` in class order,
//! with class `i` as the positive side. Each pair gets a Platt sigmoid fitted
//! on its own training decisions. At prediction time the six sigmoid outputs
//! fill the pairwise matrix `r` and [`couple_pairwise`] turns it into a
//! distribution.
//!
//! Pairs involving a class absent from training are kept as skipped entries
//! with the neutral prior `r = 0.5`. Coupling runs over the classes that were
//! present; absent classes get probability 0.

use serde::{Deserialize, Serialize};

use super::binary::{train_binary_svm, BinarySvmModel, SvmConfig};
use super::coupling::couple_pairwise;
use super::platt::{fit_platt, PlattParams};
use super::scaling::Standardizer;
use super::{check_rows, SvmError};
use crate::polarity::{ClassDistribution, Polarity, NUM_CLASSES};
use crate::scalar::Scalar;

/// Pairwise probabilities are clipped to this distance from 0 and 1 before
/// coupling.
const MIN_PAIRWISE_PROBABILITY: f64 = 1e-7;
pub const SKIPPED_PAIR_PRIOR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", tag = "status", rename_all = "snake_case")]
pub enum PairFit<T> {
    Trained { svm: BinarySvmModel<T>, platt: PlattParams<T> },
    Skipped { prior: T },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PairModel<T> {
    pub positive: Polarity,
    pub negative: Polarity,
    pub fit: PairFit<T>,
}

impl<T: Scalar> PairModel<T> {
    pub fn is_trained(&self) -> bool {
        matches!(self.fit, PairFit::Trained { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct OvoModel<T> {
    pub classes: Vec<Polarity>,
    /// Which classes had training examples, in `classes` order.
    pub present: Vec<bool>,
    pub pairs: Vec<PairModel<T>>,
    pub scaler: Standardizer<T>,
    pub config: SvmConfig,
}

/// The six `(i, j)` index pairs with `i < j`.
pub fn class_pairs() -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(NUM_CLASSES * (NUM_CLASSES - 1) / 2);
    for i in 0..NUM_CLASSES {
        for j in (i + 1)..NUM_CLASSES {
            pairs.push((i, j));
        }
    }
    pairs
}

pub fn train_ovo<T: Scalar>(rows: &[Vec<T>], labels: &[Polarity], config: &SvmConfig) -> Result<OvoModel<T>, SvmError> {
    let dim = check_rows(rows, 2)?;
    if labels.len() != rows.len() {
        return Err(SvmError::LabelCountMismatch { rows: rows.len(), labels: labels.len() });
    }
    let mut present = vec![false; NUM_CLASSES];
    for l in labels {
        present[l.index()] = true;
    }
    let n_present = present.iter().filter(|&&p| p).count();
    if n_present < 2 {
        return Err(SvmError::TooFewClasses(n_present));
    }

    let scaler = Standardizer::fit(rows);
    debug_assert_eq!(scaler.dimension(), dim);
    let scaled: Vec<Vec<T>> = rows.iter().map(|x| scaler.transform(x)).collect();

    let mut pairs = Vec::new();
    for (pair_index, (i, j)) in class_pairs().into_iter().enumerate() {
        let (positive, negative) = (Polarity::ALL[i], Polarity::ALL[j]);
        let fit = if present[i] && present[j] {
            let mut sub_rows = Vec::new();
            let mut sub_labels = Vec::new();
            for (x, &l) in scaled.iter().zip(labels) {
                if l == positive {
                    sub_rows.push(x.clone());
                    sub_labels.push(1i8);
                } else if l == negative {
                    sub_rows.push(x.clone());
                    sub_labels.push(-1i8);
                }
            }
            let pair_config = SvmConfig { seed: config.seed.wrapping_add(pair_index as u64), ..*config };
            let svm = train_binary_svm(&sub_rows, &sub_labels, &pair_config)?;
            let decisions: Vec<T> = sub_rows.iter().map(|x| super::linear(&svm.weights, svm.bias, x)).collect();
            let platt = fit_platt(&decisions, &sub_labels)?;
            PairFit::Trained { svm, platt }
        } else {
            PairFit::Skipped { prior: T::lit(SKIPPED_PAIR_PRIOR) }
        };
        pairs.push(PairModel { positive, negative, fit });
    }

    Ok(OvoModel { classes: Polarity::ALL.to_vec(), present, pairs, scaler, config: *config })
}

impl<T: Scalar> OvoModel<T> {
    pub fn dimension(&self) -> usize {
        self.scaler.dimension()
    }

    pub fn trained_pairs(&self) -> usize {
        self.pairs.iter().filter(|p| p.is_trained()).count()
    }

    /// Full 4×4 pairwise matrix: calibrated probabilities for trained pairs,
    /// the neutral prior for skipped ones. Diagonal is zero.
    pub fn pairwise_matrix(&self, x: &[T]) -> Result<Vec<Vec<T>>, SvmError> {
        if x.len() != self.dimension() {
            return Err(SvmError::DimensionMismatch { row: 0, expected: self.dimension(), found: x.len() });
        }
        let z = self.scaler.transform(x);
        let lo = T::lit(MIN_PAIRWISE_PROBABILITY);
        let hi = T::one() - lo;
        let mut r = vec![vec![T::zero(); NUM_CLASSES]; NUM_CLASSES];
        for pair in &self.pairs {
            let (i, j) = (pair.positive.index(), pair.negative.index());
            let p = match &pair.fit {
                PairFit::Trained { svm, platt } => {
                    platt.probability(super::linear(&svm.weights, svm.bias, &z)).max(lo).min(hi)
                }
                PairFit::Skipped { prior } => *prior,
            };
            r[i][j] = p;
            r[j][i] = T::one() - p;
        }
        Ok(r)
    }

    pub fn predict_proba(&self, x: &[T]) -> Result<ClassDistribution<T>, SvmError> {
        let r = self.pairwise_matrix(x)?;
        let active: Vec<usize> = (0..NUM_CLASSES).filter(|&c| self.present[c]).collect();
        let sub: Vec<Vec<T>> = active.iter().map(|&i| active.iter().map(|&j| r[i][j]).collect()).collect();
        let coupled = couple_pairwise(&sub)?;
        let mut probabilities = [T::zero(); NUM_CLASSES];
        for (&c, p) in active.iter().zip(coupled) {
            probabilities[c] = p;
        }
        Ok(ClassDistribution::from_normalized(probabilities))
    }

    pub fn predict(&self, x: &[T]) -> Result<Polarity, SvmError> {
        Ok(self.predict_proba(x)?.argmax())
    }
}
