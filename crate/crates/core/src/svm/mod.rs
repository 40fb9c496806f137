//! Linear support vector machines built from scratch.
//!
//! * [`binary`]: soft-margin L1-hinge SVM solved by dual coordinate descent.
//! * [`svr`]: epsilon-insensitive regression, same solver family.
//! * [`platt`]: sigmoid calibration of decision values.
//! * [`coupling`]: pairwise-coupling of binary probabilities into a
//!   multiclass distribution.
//! * [`ovo`]: one-vs-one over the four polarity classes with calibrated
//!   probabilities.
//!
//! The bias is handled by appending a constant 1 feature, so it is
//! regularized together with the weights and the dual has no equality
//! constraint.

pub mod binary;
pub mod coupling;
pub mod ovo;
pub mod platt;
pub mod scaling;
pub mod svr;

use thiserror::Error;

use crate::scalar::{all_finite, Scalar};

pub use binary::{
    decision, dual_objective, kkt_violation, primal_objective, solve_binary_svm, train_binary_svm, BinarySvmModel,
    BinarySvmSolution, SvmConfig,
};
pub use coupling::{couple_pairwise, couple_pairwise_with, coupling_objective, CouplingOptions};
pub use ovo::{train_ovo, OvoModel, PairFit, PairModel};
pub use platt::{fit_platt, fit_platt_traced, platt_nll, platt_targets, PlattParams};
pub use scaling::Standardizer;
pub use svr::{train_svr, SvrConfig, SvrModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SvmError {
    #[error("training set is empty or too small ({0} rows)")]
    TooFewSamples(usize),
    #[error("row {row} has {found} features, expected {expected}")]
    DimensionMismatch { row: usize, expected: usize, found: usize },
    #[error("{rows} rows but {labels} labels")]
    LabelCountMismatch { rows: usize, labels: usize },
    #[error("label {0} is not -1 or +1")]
    BadLabel(i8),
    #[error("binary training needs both classes present")]
    SingleClass,
    #[error("one-vs-one training needs at least two classes, found {0}")]
    TooFewClasses(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("regularization constant must be positive, got {0}")]
    BadRegularization(f64),
    #[error("epsilon must be non-negative, got {0}")]
    BadEpsilon(f64),
    #[error("pairwise probability r[{i}][{j}] = {value} outside (0, 1) or inconsistent with r[{j}][{i}]")]
    BadPairwise { i: usize, j: usize, value: f64 },
    #[error("pairwise coupling did not converge: residual {residual} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },
}

/// Checks a dense design matrix: non-empty, rectangular, finite.
pub(crate) fn check_rows<T: Scalar>(rows: &[Vec<T>], min_rows: usize) -> Result<usize, SvmError> {
    if rows.len() < min_rows.max(1) {
        return Err(SvmError::TooFewSamples(rows.len()));
    }
    let dim = rows[0].len();
    for (row, x) in rows.iter().enumerate() {
        if x.len() != dim {
            return Err(SvmError::DimensionMismatch { row, expected: dim, found: x.len() });
        }
        if !all_finite(x) {
            return Err(SvmError::NonFinite("features"));
        }
    }
    Ok(dim)
}

/// Squared norm of a row augmented with the constant bias feature.
pub(crate) fn augmented_sq_norm<T: Scalar>(x: &[T]) -> T {
    crate::scalar::dot(x, x) + T::one()
}

/// `w·x + b`, the shared linear decision function.
pub(crate) fn linear<T: Scalar>(weights: &[T], bias: T, x: &[T]) -> T {
    crate::scalar::dot(weights, x) + bias
}
