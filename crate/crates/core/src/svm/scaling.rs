use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Per-feature standardization with training-set mean and standard
/// deviation. Constant features are only centered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Standardizer<T> {
    pub mean: Vec<T>,
    pub scale: Vec<T>,
}

impl<T: Scalar> Standardizer<T> {
    pub fn fit(rows: &[Vec<T>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let n = T::from_usize_lossy(rows.len().max(1));
        let mut mean = vec![T::zero(); dim];
        for x in rows {
            for (m, &v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![T::zero(); dim];
        for x in rows {
            for ((s, &v), &m) in var.iter_mut().zip(x).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let floor = T::lit(1e-12);
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > floor {
                    sd
                } else {
                    T::one()
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn identity(dim: usize) -> Self {
        Standardizer { mean: vec![T::zero(); dim], scale: vec![T::one(); dim] }
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((&v, &m), &s)| (v - m) / s)
            .collect()
    }
}
