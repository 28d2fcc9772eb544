//! Cyclic Jacobi eigensolver for dense real symmetric matrices.

use super::operator::DenseOperator;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: DenseOperator,
}

impl Eigen {
    /// `V diag(f(lambda)) V^T`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> DenseOperator {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = DenseOperator::zeros(n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|k| v.get(i, k) * fv[k] * v.get(j, k)).sum();
                out.set(i, j, s);
                out.set(j, i, s);
            }
        }
        out
    }
}

/// Eigendecomposition by cyclic Jacobi rotations, run until the off-diagonal
/// Frobenius norm is at most `1e-14 ||A||`.
pub fn symmetric_eigen(a: &DenseOperator) -> Result<Eigen> {
    let scale = a.frobenius_norm();
    a.check_symmetric(1e-12 * scale.max(1.0))?;
    let n = a.dim();
    let mut m: Vec<f64> = a.as_slice().to_vec();
    let mut v = DenseOperator::identity(n);
    let tol = 1e-14 * scale;

    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&m) > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // rows/columns p and q of m
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = DenseOperator::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, new, v.get(k, old));
        }
    }
    Ok(Eigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(a: &DenseOperator, e: &Eigen) -> f64 {
        let n = a.dim();
        let av = a.mul(&e.vectors).unwrap();
        let mut worst = 0.0f64;
        for i in 0..n {
            for k in 0..n {
                worst = worst.max((av.get(i, k) - e.vectors.get(i, k) * e.values[k]).abs());
            }
        }
        worst
    }

    #[test]
    fn two_by_two() {
        let a = DenseOperator::from_rows(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = symmetric_eigen(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let a = DenseOperator::from_rows(2, vec![1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(symmetric_eigen(&a), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn diagonal_and_zero_inputs() {
        let a = DenseOperator::from_rows(3, vec![3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(symmetric_eigen(&a).unwrap().values, vec![-1.0, 2.0, 3.0]);
        assert_eq!(symmetric_eigen(&DenseOperator::zeros(4)).unwrap().values, vec![0.0; 4]);
    }

    proptest! {
        #[test]
        fn residual_and_orthonormality(n in 1usize..12, seed in prop::collection::vec(-1.0f64..1.0, 144)) {
            let mut a = DenseOperator::zeros(n);
            for i in 0..n {
                for j in i..n {
                    a.set(i, j, seed[i * 12 + j]);
                    a.set(j, i, seed[i * 12 + j]);
                }
            }
            let e = symmetric_eigen(&a).unwrap();
            let norm = a.frobenius_norm().max(1e-300);
            prop_assert!(residual(&a, &e) <= 1e-9 * norm.max(1.0));
            let vtv = e.vectors.transpose().mul(&e.vectors).unwrap();
            prop_assert!(vtv.max_abs_diff(&DenseOperator::identity(n)) <= 1e-9);
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let trace: f64 = e.values.iter().sum();
            prop_assert!((trace - a.trace()).abs() <= 1e-10 * norm.max(1.0));
        }
    }
}
