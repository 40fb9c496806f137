//! Adam with bias correction.
//!
//! ```text
//! t += 1
//! lr_t = lr / (1 + decay * (t - 1))
//! m = b1 m + (1 - b1) g
//! v = b2 v + (1 - b2) g^2
//! p -= lr_t * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
//! ```

use serde::{Deserialize, Serialize};

use super::CnnError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 1e-4, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, decay: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub step: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(config: AdamConfig, parameters: usize) -> Self {
        AdamState { config, m: vec![T::zero(); parameters], v: vec![T::zero(); parameters], step: 0 }
    }
}

pub fn adam_step<T: Scalar>(params: &mut [T], grads: &[T], state: &mut AdamState<T>) -> Result<(), CnnError> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(CnnError::ParameterCount { expected: state.m.len(), found: params.len().max(grads.len()) });
    }
    let c = state.config;
    state.step += 1;
    let t = state.step as f64;
    let lr = c.lr / (1.0 + c.decay * (t - 1.0));
    let (b1, b2) = (T::lit(c.beta1), T::lit(c.beta2));
    let correction1 = T::lit(1.0 - c.beta1.powf(t));
    let correction2 = T::lit(1.0 - c.beta2.powf(t));
    let (lr, eps) = (T::lit(lr), T::lit(c.epsilon));
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = b1 * state.m[i] + (T::one() - b1) * g;
        state.v[i] = b2 * state.v[i] + (T::one() - b2) * g * g;
        let m_hat = state.m[i] / correction1;
        let v_hat = state.v[i] / correction2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}
