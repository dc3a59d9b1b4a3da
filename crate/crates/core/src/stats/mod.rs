//! Least squares with cluster-robust inference, and the treatment-effect
//! design matrices built on top of it.

pub mod design;
pub mod dist;
mod floats;
mod ols;
pub mod qr;

use alloc::vec;
use alloc::vec::Vec;

pub use design::{build_design, Design, DesignError, DesignRow, Heterogeneity, ModelSpec};
pub use ols::{fit_ols, fit_ols_dropping_aliased, CovarianceKind, OlsError, RegressionResult};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must be rows * cols");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out.set(i, jj, self.get(i, j));
            }
        }
        out
    }

    /// `X^T X`, row-major `cols x cols`.
    pub fn gram(&self) -> Vec<f64> {
        let p = self.cols;
        let mut out = vec![0.0; p * p];
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..p {
                for b in 0..p {
                    out[a * p + b] += r[a] * r[b];
                }
            }
        }
        out
    }

    /// `X v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `X^T v`.
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(self.row(i)) {
                *o += x * vi;
            }
        }
        out
    }
}

/// Significance marker: `*` p<0.05, `**` p<0.01, `***` p<0.001.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_boundaries_are_strict() {
        assert_eq!(significance_stars(0.05), "");
        assert_eq!(significance_stars(0.04), "*");
        assert_eq!(significance_stars(f64::from_bits(0.05f64.to_bits() - 1)), "*");
        assert_eq!(significance_stars(0.01), "*");
        assert_eq!(significance_stars(f64::from_bits(0.01f64.to_bits() - 1)), "**");
        assert_eq!(significance_stars(0.001), "**");
        assert_eq!(significance_stars(f64::from_bits(0.001f64.to_bits() - 1)), "***");
        assert_eq!(significance_stars(f64::NAN), "");
    }
}
