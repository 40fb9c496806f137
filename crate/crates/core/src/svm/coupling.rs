//! Pairwise coupling (Wu, Lin and Weng, second method).
//!
//! Given `r[i][j] ≈ P(class i | class i or j)`, find the distribution `p`
//! minimizing
//!
//! ```text
//! sum_{i<j} (r[j][i] p_i - r[i][j] p_j)^2   s.t.  sum p = 1
//! ```
//!
//! which is `min 1/2 pᵀQp` with `Q_tt = sum_{j≠t} r[j][t]^2` and
//! `Q_tj = -r[j][t] r[t][j]`. The optimum satisfies `Qp = λe`; it is
//! obtained by solving that bordered linear system directly and then
//! polished with the fixed-point iteration until
//! `max_t |(Qp)_t - pᵀQp|` is below tolerance.

use super::SvmError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for CouplingOptions {
    fn default() -> Self {
        CouplingOptions { tolerance: 1e-10, max_iterations: 1000 }
    }
}

fn check_matrix<T: Scalar>(r: &[Vec<T>]) -> Result<usize, SvmError> {
    let k = r.len();
    for (i, row) in r.iter().enumerate() {
        if row.len() != k {
            return Err(SvmError::DimensionMismatch { row: i, expected: k, found: row.len() });
        }
    }
    let slack = T::lit(1e-9).max(T::epsilon() * T::lit(16.0));
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let v = r[i][j];
            let ok = v.is_finite() && v > T::zero() && v < T::one() && (v + r[j][i] - T::one()).abs() <= slack;
            if !ok {
                return Err(SvmError::BadPairwise { i, j, value: v.as_f64() });
            }
        }
    }
    Ok(k)
}

fn coupling_matrix<T: Scalar>(r: &[Vec<T>]) -> Vec<Vec<T>> {
    let k = r.len();
    let mut q = vec![vec![T::zero(); k]; k];
    for t in 0..k {
        for j in 0..k {
            if j == t {
                continue;
            }
            q[t][t] += r[j][t] * r[j][t];
            q[t][j] = -r[j][t] * r[t][j];
        }
    }
    q
}

/// `sum_{i<j} (r[j][i] p_i - r[i][j] p_j)^2`.
pub fn coupling_objective<T: Scalar>(r: &[Vec<T>], p: &[T]) -> T {
    let mut total = T::zero();
    for i in 0..r.len() {
        for j in (i + 1)..r.len() {
            let e = r[j][i] * p[i] - r[i][j] * p[j];
            total += e * e;
        }
    }
    total
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_dense<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())?;
        if a[pivot][col].abs() <= T::epsilon() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == T::zero() {
                continue;
            }
            for c in col..n {
                let v = a[col][c];
                a[row][c] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in (row + 1)..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

fn residual<T: Scalar>(q: &[Vec<T>], p: &[T]) -> (Vec<T>, T, T) {
    let qp: Vec<T> = q.iter().map(|row| crate::scalar::dot(row, p)).collect();
    let pqp = crate::scalar::dot(p, &qp);
    let worst = qp.iter().map(|&v| (v - pqp).abs()).fold(T::zero(), T::max);
    (qp, pqp, worst)
}

fn project_to_simplex<T: Scalar>(p: &mut [T]) {
    for v in p.iter_mut() {
        *v = v.max(T::zero());
    }
    let sum: T = p.iter().copied().sum();
    if sum > T::zero() {
        for v in p.iter_mut() {
            *v /= sum;
        }
    }
}

pub fn couple_pairwise<T: Scalar>(r: &[Vec<T>]) -> Result<Vec<T>, SvmError> {
    couple_pairwise_with(r, &CouplingOptions::default())
}

pub fn couple_pairwise_with<T: Scalar>(r: &[Vec<T>], options: &CouplingOptions) -> Result<Vec<T>, SvmError> {
    let k = check_matrix(r)?;
    match k {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![T::one()]),
        _ => {}
    }
    let q = coupling_matrix(r);
    let uniform = T::one() / T::from_usize_lossy(k);

    // Bordered system [Q -e; eᵀ 0] [p; λ] = [0; 1].
    let mut system = vec![vec![T::zero(); k + 1]; k + 1];
    for t in 0..k {
        system[t][..k].copy_from_slice(&q[t]);
        system[t][k] = -T::one();
        system[k][t] = T::one();
    }
    let mut rhs = vec![T::zero(); k + 1];
    rhs[k] = T::one();
    let mut p = match solve_dense(system, rhs) {
        Some(z) => z[..k].to_vec(),
        None => vec![uniform; k],
    };
    project_to_simplex(&mut p);

    let tolerance = T::lit(options.tolerance).max(T::epsilon() * T::lit(64.0));
    let (mut qp, mut pqp, mut worst) = residual(&q, &p);
    let mut iterations = 0;
    while worst >= tolerance && iterations < options.max_iterations {
        iterations += 1;
        for t in 0..k {
            let diff = (-qp[t] + pqp) / q[t][t];
            p[t] += diff;
            let scale = T::one() + diff;
            pqp = (pqp + diff * (diff * q[t][t] + T::lit(2.0) * qp[t])) / (scale * scale);
            for j in 0..k {
                qp[j] = (qp[j] + diff * q[t][j]) / scale;
                p[j] /= scale;
            }
        }
        let fresh = residual(&q, &p);
        qp = fresh.0;
        pqp = fresh.1;
        worst = fresh.2;
    }
    if worst >= tolerance {
        return Err(SvmError::NonConvergence { residual: worst.as_f64(), iterations });
    }
    project_to_simplex(&mut p);
    Ok(p)
}
