//! Dense LU with partial (row) pivoting and a 1-norm condition estimate.

use crate::error::{Error, Result};

/// Square system `A c = b`, `A` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    dim: usize,
    matrix: Vec<f64>,
    rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub coefficients: Vec<f64>,
    /// Estimate of `||A||_1 ||A^{-1}||_1`.
    pub condition: f64,
    /// `||A c - b||_inf` of the returned coefficients.
    pub residual: f64,
}

impl LinearSystem {
    pub fn new(matrix: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let dim = rhs.len();
        if matrix.len() != dim * dim {
            return Err(Error::DimensionMismatch);
        }
        Ok(Self { dim, matrix, rhs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim + j]
    }

    /// `A v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn solve(&self) -> Result<LinearSolution> {
        if self.matrix.iter().chain(&self.rhs).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSystem);
        }
        let lu = Lu::factor(self.dim, self.matrix.clone())?;
        let coefficients = lu.solve(&self.rhs);
        let condition = one_norm(self.dim, &self.matrix) * lu.inverse_one_norm_estimate();
        let residual = self
            .apply(&coefficients)
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(LinearSolution {
            coefficients,
            condition,
            residual,
        })
    }
}

fn one_norm(dim: usize, a: &[f64]) -> f64 {
    (0..dim)
        .map(|j| (0..dim).map(|i| a[i * dim + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `P A = L U` with unit lower `L`, packed in one row-major matrix.
struct Lu {
    dim: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(dim: usize, mut a: Vec<f64>) -> Result<Self> {
        let mut perm: Vec<usize> = (0..dim).collect();
        for col in 0..dim {
            let pivot_row = (col..dim)
                .max_by(|&x, &y| a[x * dim + col].abs().total_cmp(&a[y * dim + col].abs()))
                .expect("non-empty range");
            if a[pivot_row * dim + col] == 0.0 {
                return Err(Error::Singular(col));
            }
            if pivot_row != col {
                for k in 0..dim {
                    a.swap(col * dim + k, pivot_row * dim + k);
                }
                perm.swap(col, pivot_row);
            }
            let pivot = a[col * dim + col];
            for row in col + 1..dim {
                let factor = a[row * dim + col] / pivot;
                a[row * dim + col] = factor;
                if factor != 0.0 {
                    for k in col + 1..dim {
                        a[row * dim + k] -= factor * a[col * dim + k];
                    }
                }
            }
        }
        Ok(Self { dim, lu: a, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| self.lu[i * n + k] * x[k]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.lu[i * n + k] * x[k]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A^T x = b`: `U^T w = b`, `L^T v = w`, `x = P^T v`.
    fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut w = b.to_vec();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| self.lu[k * n + i] * w[k]).sum();
            w[i] = (w[i] - s) / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.lu[k * n + i] * w[k]).sum();
            w[i] -= s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        x
    }

    /// Hager's estimate of `||A^{-1}||_1`, at most 5 iterations.
    fn inverse_one_norm_estimate(&self) -> f64 {
        let n = self.dim;
        let mut x = vec![1.0 / n as f64; n];
        let mut estimate = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            estimate = y.iter().map(|v| v.abs()).sum();
            let sign: Vec<f64> = y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_transpose(&sign);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.abs()))
                .fold((0, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![0.0; n];
            x[jmax] = 1.0;
        }
        // Higham's alternating test vector catches some of Hager's misses
        if n > 1 {
            let b: Vec<f64> = (0..n)
                .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + i as f64 / (n - 1) as f64))
                .collect();
            let alt: f64 = self.solve(&b).iter().map(|v| v.abs()).sum::<f64>() * 2.0 / (3.0 * n as f64);
            estimate = estimate.max(alt);
        }
        estimate
    }
}
