//! Householder QR least squares with in-order rank detection.
//!
//! Columns are processed left to right. A column whose norm after removing
//! the span of the earlier kept columns falls below `tol` times its original
//! norm is marked aliased and skipped, so later columns are the ones dropped
//! when the design is collinear.

use alloc::vec;
use alloc::vec::Vec;

use super::Matrix;

/// Relative tolerance for declaring a column aliased.
pub const DEFAULT_RANK_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct QrDecomposition {
    /// Indices of the columns that were kept, in order.
    pub kept: Vec<usize>,
    /// Indices of the aliased columns.
    pub aliased: Vec<usize>,
    /// Upper-triangular factor over the kept columns, row-major `k x k`.
    r: Vec<f64>,
    /// First `k` entries of `Q^T y`.
    qty: Vec<f64>,
}

impl QrDecomposition {
    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    fn r_at(&self, i: usize, j: usize) -> f64 {
        self.r[i * self.rank() + j]
    }

    /// Least-squares coefficients for the kept columns.
    pub fn coefficients(&self) -> Vec<f64> {
        let k = self.rank();
        let mut beta = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = self.qty[i];
            for j in i + 1..k {
                acc -= self.r_at(i, j) * beta[j];
            }
            beta[i] = acc / self.r_at(i, i);
        }
        beta
    }

    /// `(X^T X)^-1 = R^-1 R^-T` over the kept columns, row-major `k x k`.
    pub fn xtx_inverse(&self) -> Vec<f64> {
        let k = self.rank();
        // Invert R column by column (R^-1 is upper triangular).
        let mut rinv = vec![0.0; k * k];
        for col in 0..k {
            rinv[col * k + col] = 1.0 / self.r_at(col, col);
            for i in (0..col).rev() {
                let mut acc = 0.0;
                for j in i + 1..=col {
                    acc += self.r_at(i, j) * rinv[j * k + col];
                }
                rinv[i * k + col] = -acc / self.r_at(i, i);
            }
        }
        let mut out = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                let start = i.max(j);
                out[i * k + j] = (start..k).map(|m| rinv[i * k + m] * rinv[j * k + m]).sum();
            }
        }
        out
    }
}

/// Factorizes `x` and applies the same reflections to `y`.
pub fn decompose(x: &Matrix, y: &[f64], tol: f64) -> QrDecomposition {
    let n = x.rows();
    let p = x.cols();
    assert_eq!(y.len(), n, "response length must match design rows");
    // Column-major working copy.
    let mut a: Vec<Vec<f64>> = (0..p).map(|j| (0..n).map(|i| x.get(i, j)).collect()).collect();
    let mut qty = y.to_vec();
    let original_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
    let mut kept = Vec::new();
    let mut aliased = Vec::new();

    for j in 0..p {
        let row = kept.len();
        if row >= n {
            aliased.push(j);
            continue;
        }
        let tail_norm = norm(&a[j][row..]);
        if original_norms[j] == 0.0 || tail_norm <= tol * original_norms[j] {
            aliased.push(j);
            continue;
        }
        // Householder vector v with H = I - 2 v v^T / (v^T v), H x = alpha e1.
        let alpha = if a[j][row] > 0.0 { -tail_norm } else { tail_norm };
        let mut v = a[j][row..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|t| t * t).sum();
        let apply = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vtv;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= f * vi;
            }
        };
        for col in a.iter_mut().skip(j) {
            apply(&mut col[row..]);
        }
        apply(&mut qty[row..]);
        // Clean the exact zeros below the diagonal.
        a[j][row] = alpha;
        for t in a[j][row + 1..].iter_mut() {
            *t = 0.0;
        }
        kept.push(j);
    }

    let k = kept.len();
    let mut r = vec![0.0; k * k];
    for (ci, &j) in kept.iter().enumerate() {
        for ri in 0..=ci {
            r[ri * k + ci] = a[j][ri];
        }
    }
    qty.truncate(k);
    QrDecomposition { kept, aliased, r, qty }
}

fn norm(v: &[f64]) -> f64 {
    // Scaled to avoid overflow on large columns.
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let ss: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * libm::sqrt(ss)
}
