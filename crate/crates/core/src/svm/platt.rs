//! Platt sigmoid calibration: `P(y = +1 | d) = 1 / (1 + exp(A d + B))`.
//!
//! Fitted by Newton's method with backtracking on the negative
//! log-likelihood against smoothed targets `t+ = (N+ + 1) / (N+ + 2)` and
//! `t- = 1 / (N- + 2)`, using the numerically stable formulation of
//! Lin, Lin and Weng.

use serde::{Deserialize, Serialize};

use super::SvmError;
use crate::scalar::{all_finite, Scalar};

const MAX_ITERATIONS: usize = 100;
const GRADIENT_TOLERANCE: f64 = 1e-10;
const MIN_STEP: f64 = 1e-10;
const HESSIAN_RIDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PlattParams<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> PlattParams<T> {
    /// Probability of the positive class for a decision value.
    pub fn probability(&self, decision: T) -> T {
        let f = decision * self.a + self.b;
        if f >= T::zero() {
            let e = (-f).exp();
            e / (T::one() + e)
        } else {
            T::one() / (T::one() + f.exp())
        }
    }
}

fn counts(labels: &[i8]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&y| y > 0).count();
    (pos, labels.len() - pos)
}

/// Smoothed targets for each label.
pub fn platt_targets<T: Scalar>(labels: &[i8]) -> Vec<T> {
    let (pos, neg) = counts(labels);
    let hi = T::from_usize_lossy(pos + 1) / T::from_usize_lossy(pos + 2);
    let lo = T::one() / T::from_usize_lossy(neg + 2);
    labels.iter().map(|&y| if y > 0 { hi } else { lo }).collect()
}

/// Cross-entropy of the sigmoid at `(a, b)` against the given targets.
pub fn platt_nll<T: Scalar>(decisions: &[T], targets: &[T], a: T, b: T) -> T {
    decisions
        .iter()
        .zip(targets)
        .map(|(&d, &t)| {
            let f = d * a + b;
            if f >= T::zero() {
                t * f + (T::one() + (-f).exp()).ln()
            } else {
                (t - T::one()) * f + (T::one() + f.exp()).ln()
            }
        })
        .sum()
}

pub fn fit_platt<T: Scalar>(decisions: &[T], labels: &[i8]) -> Result<PlattParams<T>, SvmError> {
    fit_platt_traced(decisions, labels).map(|(params, _)| params)
}

/// Like [`fit_platt`], also returning the objective after each accepted
/// Newton step (the first entry is the starting point).
pub fn fit_platt_traced<T: Scalar>(decisions: &[T], labels: &[i8]) -> Result<(PlattParams<T>, Vec<T>), SvmError> {
    if decisions.len() != labels.len() {
        return Err(SvmError::LabelCountMismatch { rows: decisions.len(), labels: labels.len() });
    }
    if !all_finite(decisions) {
        return Err(SvmError::NonFinite("decision values"));
    }
    super::binary::check_labels(labels, decisions.len())?;

    let (pos, neg) = counts(labels);
    let targets = platt_targets::<T>(labels);
    let mut a = T::zero();
    let mut b = (T::from_usize_lossy(neg + 1) / T::from_usize_lossy(pos + 1)).ln();
    let mut fval = platt_nll(decisions, &targets, a, b);
    let mut trace = vec![fval];
    let tolerance = T::lit(GRADIENT_TOLERANCE);
    let min_step = T::lit(MIN_STEP);

    for _ in 0..MAX_ITERATIONS {
        let mut h11 = T::lit(HESSIAN_RIDGE);
        let mut h22 = T::lit(HESSIAN_RIDGE);
        let mut h21 = T::zero();
        let mut g1 = T::zero();
        let mut g2 = T::zero();
        for (&d, &t) in decisions.iter().zip(&targets) {
            let f = d * a + b;
            let (p, q) = if f >= T::zero() {
                let e = (-f).exp();
                (e / (T::one() + e), T::one() / (T::one() + e))
            } else {
                let e = f.exp();
                (T::one() / (T::one() + e), e / (T::one() + e))
            };
            let d2 = p * q;
            h11 += d * d * d2;
            h22 += d2;
            h21 += d * d2;
            let d1 = t - p;
            g1 += d * d1;
            g2 += d1;
        }
        if g1.abs() < tolerance && g2.abs() < tolerance {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;

        let mut step = T::one();
        let mut accepted = false;
        while step >= min_step {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = platt_nll(decisions, &targets, na, nb);
            if nf < fval + T::lit(1e-4) * step * gd {
                a = na;
                b = nb;
                fval = nf;
                accepted = true;
                break;
            }
            step /= T::lit(2.0);
        }
        if !accepted {
            break;
        }
        trace.push(fval);
    }
    Ok((PlattParams { a, b }, trace))
}
