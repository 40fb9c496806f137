//! Binary linear SVM, L1 hinge loss, dual coordinate descent.
//!
//! Solves
//!
//! ```text
//! max_a  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j (x_i·x_j + 1)
//! s.t.   0 <= a_i <= C
//! ```
//!
//! one coordinate at a time in a seeded random order, keeping
//! `w = sum_i a_i y_i x_i` (and the bias) in sync. Stops once the largest
//! projected-gradient magnitude seen during an epoch falls under the
//! tolerance.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{augmented_sq_norm, check_rows, linear, SvmError};
use crate::scalar::{axpy, dot, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { c: 1.0, tolerance: 1e-6, max_epochs: 1000, seed: 42 }
    }
}

impl SvmConfig {
    pub fn with_c(c: f64) -> Self {
        SvmConfig { c, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BinarySvmModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub c: T,
}

impl<T: Scalar> BinarySvmModel<T> {
    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, x: &[T]) -> Result<T, SvmError> {
        decision(self, x)
    }
}

/// `w·x + b`.
pub fn decision<T: Scalar>(model: &BinarySvmModel<T>, x: &[T]) -> Result<T, SvmError> {
    if x.len() != model.weights.len() {
        return Err(SvmError::DimensionMismatch { row: 0, expected: model.weights.len(), found: x.len() });
    }
    Ok(linear(&model.weights, model.bias, x))
}

/// Trained model plus the dual state, for diagnostics and tests.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvmSolution<T> {
    pub model: BinarySvmModel<T>,
    pub alphas: Vec<T>,
    pub epochs: usize,
    /// Largest projected-gradient magnitude in the final epoch.
    pub max_violation: T,
}

impl<T: Scalar> BinarySvmSolution<T> {
    /// Dual objective at the returned multipliers.
    pub fn dual_objective(&self, rows: &[Vec<T>], labels: &[i8]) -> T {
        dual_objective(rows, labels, &self.alphas)
    }
}

pub(crate) fn check_labels(labels: &[i8], rows: usize) -> Result<(), SvmError> {
    if labels.len() != rows {
        return Err(SvmError::LabelCountMismatch { rows, labels: labels.len() });
    }
    if let Some(&bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
        return Err(SvmError::BadLabel(bad));
    }
    if !(labels.contains(&1) && labels.contains(&-1)) {
        return Err(SvmError::SingleClass);
    }
    Ok(())
}

fn sign<T: Scalar>(y: i8) -> T {
    if y > 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Projected gradient of the (minimization-form) dual at coordinate `i`.
fn projected_gradient<T: Scalar>(gradient: T, alpha: T, c: T) -> T {
    if alpha <= T::zero() {
        gradient.min(T::zero())
    } else if alpha >= c {
        gradient.max(T::zero())
    } else {
        gradient
    }
}

pub fn train_binary_svm<T: Scalar>(rows: &[Vec<T>], labels: &[i8], config: &SvmConfig) -> Result<BinarySvmModel<T>, SvmError> {
    solve_binary_svm(rows, labels, config).map(|s| s.model)
}

pub fn solve_binary_svm<T: Scalar>(rows: &[Vec<T>], labels: &[i8], config: &SvmConfig) -> Result<BinarySvmSolution<T>, SvmError> {
    let dim = check_rows(rows, 2)?;
    check_labels(labels, rows.len())?;
    if !(config.c > 0.0 && config.c.is_finite()) {
        return Err(SvmError::BadRegularization(config.c));
    }
    let c = T::lit(config.c);
    let tolerance = T::lit(config.tolerance);
    let n = rows.len();
    let diag: Vec<T> = rows.iter().map(|x| augmented_sq_norm(x)).collect();
    let mut alphas = vec![T::zero(); n];
    let mut weights = vec![T::zero(); dim];
    let mut bias = T::zero();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut epochs = 0;
    let mut max_violation = T::infinity();

    while epochs < config.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        max_violation = T::zero();
        for &i in &order {
            let y = sign::<T>(labels[i]);
            let gradient = y * linear(&weights, bias, &rows[i]) - T::one();
            let pg = projected_gradient(gradient, alphas[i], c);
            max_violation = max_violation.max(pg.abs());
            if pg != T::zero() {
                let old = alphas[i];
                let new = (old - gradient / diag[i]).max(T::zero()).min(c);
                let delta = (new - old) * y;
                if delta != T::zero() {
                    alphas[i] = new;
                    axpy(delta, &rows[i], &mut weights);
                    bias += delta;
                }
            }
        }
        if max_violation < tolerance {
            break;
        }
    }

    Ok(BinarySvmSolution { model: BinarySvmModel { weights, bias, c }, alphas, epochs, max_violation })
}

/// `sum a - 1/2 |sum a_i y_i x~_i|^2` with `x~ = (x, 1)`.
pub fn dual_objective<T: Scalar>(rows: &[Vec<T>], labels: &[i8], alphas: &[T]) -> T {
    let dim = rows.first().map_or(0, Vec::len);
    let mut w = vec![T::zero(); dim];
    let mut b = T::zero();
    for ((x, &y), &a) in rows.iter().zip(labels).zip(alphas) {
        let coef = a * sign::<T>(y);
        axpy(coef, x, &mut w);
        b += coef;
    }
    let linear_term: T = alphas.iter().copied().sum();
    linear_term - T::lit(0.5) * (dot(&w, &w) + b * b)
}

/// `1/2 (|w|^2 + b^2) + C sum max(0, 1 - y (w·x + b))`.
pub fn primal_objective<T: Scalar>(model: &BinarySvmModel<T>, rows: &[Vec<T>], labels: &[i8]) -> T {
    let hinge: T = rows
        .iter()
        .zip(labels)
        .map(|(x, &y)| (T::one() - sign::<T>(y) * linear(&model.weights, model.bias, x)).max(T::zero()))
        .sum();
    T::lit(0.5) * (dot(&model.weights, &model.weights) + model.bias * model.bias) + model.c * hinge
}

/// Largest projected-gradient magnitude over all coordinates for the given
/// multipliers (zero exactly at a KKT point).
pub fn kkt_violation<T: Scalar>(rows: &[Vec<T>], labels: &[i8], alphas: &[T], c: T) -> T {
    let dim = rows.first().map_or(0, Vec::len);
    let mut w = vec![T::zero(); dim];
    let mut b = T::zero();
    for ((x, &y), &a) in rows.iter().zip(labels).zip(alphas) {
        let coef = a * sign::<T>(y);
        axpy(coef, x, &mut w);
        b += coef;
    }
    rows.iter()
        .zip(labels)
        .zip(alphas)
        .map(|((x, &y), &a)| projected_gradient(sign::<T>(y) * linear(&w, b, x) - T::one(), a, c).abs())
        .fold(T::zero(), T::max)
}
