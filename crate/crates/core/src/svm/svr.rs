//! Linear epsilon-insensitive support vector regression.
//!
//! Dual coordinate descent on
//!
//! ```text
//! min_b  1/2 bᵀQb - sum_i t_i b_i + eps sum_i |b_i|,   -C <= b_i <= C
//! ```
//!
//! with `Q_ij = x_i·x_j + 1` (bias folded in as a constant feature). Each
//! coordinate step is a closed-form soft-threshold followed by clipping to
//! the box. `w = sum_i b_i x_i`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{augmented_sq_norm, check_rows, linear, SvmError};
use crate::scalar::{all_finite, axpy, dot, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrConfig {
    pub c: f64,
    pub epsilon: f64,
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for SvrConfig {
    fn default() -> Self {
        SvrConfig { c: 1.0, epsilon: 0.1, tolerance: 1e-6, max_epochs: 1000, seed: 42 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SvrModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub epsilon: T,
    pub c: T,
}

impl<T: Scalar> SvrModel<T> {
    pub fn predict(&self, x: &[T]) -> Result<T, SvmError> {
        if x.len() != self.weights.len() {
            return Err(SvmError::DimensionMismatch { row: 0, expected: self.weights.len(), found: x.len() });
        }
        Ok(linear(&self.weights, self.bias, x))
    }

    /// `1/2 (|w|^2 + b^2) + C sum max(0, |w·x + b - t| - eps)`.
    pub fn primal_objective(&self, rows: &[Vec<T>], targets: &[T]) -> T {
        let loss: T = rows
            .iter()
            .zip(targets)
            .map(|(x, &t)| ((linear(&self.weights, self.bias, x) - t).abs() - self.epsilon).max(T::zero()))
            .sum();
        T::lit(0.5) * (dot(&self.weights, &self.weights) + self.bias * self.bias) + self.c * loss
    }
}

pub fn train_svr<T: Scalar>(rows: &[Vec<T>], targets: &[T], config: &SvrConfig) -> Result<SvrModel<T>, SvmError> {
    let dim = check_rows(rows, 2)?;
    if targets.len() != rows.len() {
        return Err(SvmError::LabelCountMismatch { rows: rows.len(), labels: targets.len() });
    }
    if !all_finite(targets) {
        return Err(SvmError::NonFinite("targets"));
    }
    if !(config.c > 0.0 && config.c.is_finite()) {
        return Err(SvmError::BadRegularization(config.c));
    }
    if !(config.epsilon >= 0.0 && config.epsilon.is_finite()) {
        return Err(SvmError::BadEpsilon(config.epsilon));
    }
    let c = T::lit(config.c);
    let epsilon = T::lit(config.epsilon);
    let tolerance = T::lit(config.tolerance);
    let n = rows.len();
    let diag: Vec<T> = rows.iter().map(|x| augmented_sq_norm(x)).collect();
    let mut betas = vec![T::zero(); n];
    let mut weights = vec![T::zero(); dim];
    let mut bias = T::zero();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    for _ in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let mut max_violation = T::zero();
        for &i in &order {
            let gradient = linear(&weights, bias, &rows[i]) - targets[i];
            let q = diag[i];
            let u = q * betas[i] - gradient;
            let shrunk = (u.abs() - epsilon).max(T::zero());
            let unclipped = (if u >= T::zero() { shrunk } else { -shrunk }) / q;
            let new = unclipped.max(-c).min(c);
            let delta = new - betas[i];
            max_violation = max_violation.max(delta.abs() * q);
            if delta != T::zero() {
                betas[i] = new;
                axpy(delta, &rows[i], &mut weights);
                bias += delta;
            }
        }
        if max_violation < tolerance {
            break;
        }
    }
    Ok(SvrModel { weights, bias, epsilon, c })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realizable_linear_targets() {
        let rows: Vec<Vec<f64>> = (0..15).map(|i| vec![i as f64 / 5.0 - 1.5, ((i * 7) % 5) as f64 / 4.0]).collect();
        let targets: Vec<f64> = rows.iter().map(|x| 0.8 * x[0] - 0.5 * x[1] + 0.3).collect();
        let config = SvrConfig { c: 100.0, epsilon: 0.01, ..SvrConfig::default() };
        let model = train_svr(&rows, &targets, &config).unwrap();
        for (x, t) in rows.iter().zip(&targets) {
            assert!((model.predict(x).unwrap() - t).abs() <= 0.01 + 1e-3);
        }
    }

    #[test]
    fn constant_targets() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.3 - 1.0]).collect();
        let targets = vec![1.0; 10];
        let config = SvrConfig { c: 10.0, epsilon: 0.1, ..SvrConfig::default() };
        let model = train_svr(&rows, &targets, &config).unwrap();
        for x in &rows {
            assert!((model.predict(x).unwrap() - 1.0).abs() <= 0.1 + 1e-6);
        }
    }

    #[test]
    fn affine_in_input() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![(i as f64).sin(), (i as f64 * 0.5).cos(), i as f64 / 12.0]).collect();
        let targets: Vec<f64> = (0..12).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let model = train_svr(&rows, &targets, &SvrConfig::default()).unwrap();
        let (a, b, alpha) = (&rows[1], &rows[5], 0.3);
        let mix: Vec<f64> = a.iter().zip(b).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect();
        let lhs = model.predict(&mix).unwrap();
        let rhs = alpha * model.predict(a).unwrap() + (1.0 - alpha) * model.predict(b).unwrap();
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn validation() {
        let rows = vec![vec![0.0], vec![1.0]];
        assert!(matches!(train_svr(&rows, &[0.0, f64::NAN], &SvrConfig::default()), Err(SvmError::NonFinite(_))));
        assert!(matches!(train_svr(&rows[..1], &[0.0], &SvrConfig::default()), Err(SvmError::TooFewSamples(1))));
        let bad = SvrConfig { epsilon: -1.0, ..SvrConfig::default() };
        assert!(matches!(train_svr(&rows, &[0.0, 1.0], &bad), Err(SvmError::BadEpsilon(_))));
    }
}
