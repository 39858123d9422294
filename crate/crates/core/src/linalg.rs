//! Dense matrix storage plus the eigen-solver bridge.
//!
//! Matrices in this crate are small enough (n ≤ a few thousand) to be held
//! densely. Eigendecompositions are delegated to `faer`; everything else is
//! plain row-major arithmetic.

use std::ops::{Index, IndexMut};

use faer::Mat;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("eigen solver failed to converge on a {0}x{0} matrix")]
    EigenSolverFailure(usize),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: f64, other: &Matrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_vec_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| b * *a).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

fn check_square(m: &Matrix) -> Result<(), LinalgError> {
    if m.is_square() {
        Ok(())
    } else {
        Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        })
    }
}

pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>, LinalgError> {
    check_square(m)?;
    if m.rows == 0 {
        return Ok(Vec::new());
    }
    let vals = m
        .to_faer()
        .eigenvalues()
        .map_err(|_| LinalgError::EigenSolverFailure(m.rows))?;
    if vals.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::EigenSolverFailure(m.rows));
    }
    Ok(vals)
}

/// Eigenvalues with their right eigenvectors (`vectors[k]` pairs with `values[k]`).
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    pub vectors: Vec<Vec<Complex64>>,
}

pub fn eigen(m: &Matrix) -> Result<EigenDecomposition, LinalgError> {
    check_square(m)?;
    let n = m.rows;
    let evd = m
        .to_faer()
        .eigen()
        .map_err(|_| LinalgError::EigenSolverFailure(n))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values: Vec<Complex64> = (0..n).map(|k| s[k]).collect();
    let vectors = (0..n)
        .map(|k| (0..n).map(|i| u[(i, k)]).collect())
        .collect();
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::EigenSolverFailure(n));
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Index of the eigenvalue with the largest real part. Among a conjugate
/// pair the member with non-negative imaginary part wins.
pub fn leading_index(values: &[Complex64]) -> Option<usize> {
    pick_by_real(values, |a, b| a > b)
}

/// Index of the eigenvalue with the smallest real part (same tie rule).
pub fn trailing_index(values: &[Complex64]) -> Option<usize> {
    pick_by_real(values, |a, b| a < b)
}

fn pick_by_real(values: &[Complex64], better: impl Fn(f64, f64) -> bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, z) in values.iter().enumerate() {
        best = match best {
            None => Some(k),
            Some(b) => {
                let cur = values[b];
                let tie = (z.re - cur.re).abs() <= 1e-12 * (1.0 + cur.re.abs());
                if (!tie && better(z.re, cur.re)) || (tie && z.im > cur.im) {
                    Some(k)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unsymmetric bilinear product `xᵀy` (no conjugation).
pub fn dot_t(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
