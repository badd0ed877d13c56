//! Small dense row-major matrices. State dimensions here are tiny, so a
//! flat `Vec<f64>` with explicit loops is all that is needed.

use alloc::vec;
use alloc::vec::Vec;

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
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Wraps row-major data. Panics if the length does not match.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        mat_mul_into(
            &self.data,
            &rhs.data,
            self.rows,
            self.cols,
            rhs.cols,
            &mut out.data,
        );
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        mat_vec_into(&self.data, self.rows, self.cols, v, &mut out);
        out
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| f64::max(acc, libm::fabs(a - b)))
    }
}

/// `out = a · v` for a row-major `rows × cols` matrix `a`.
#[inline]
pub fn mat_vec_into(a: &[f64], rows: usize, cols: usize, v: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.len(), rows * cols);
    debug_assert_eq!(v.len(), cols);
    for (r, o) in out.iter_mut().enumerate().take(rows) {
        let row = &a[r * cols..(r + 1) * cols];
        *o = row.iter().zip(v).map(|(x, y)| x * y).sum();
    }
}

/// `out = a · b` with `a` of shape `n × k` and `b` of shape `k × p`.
pub fn mat_mul_into(a: &[f64], b: &[f64], n: usize, k: usize, p: usize, out: &mut [f64]) {
    for i in 0..n {
        for j in 0..p {
            let mut s = 0.0;
            for l in 0..k {
                s += a[i * k + l] * b[l * p + j];
            }
            out[i * p + j] = s;
        }
    }
}

/// 1-norm `Σ|v_i|`.
#[inline]
pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| libm::fabs(*x)).sum()
}
