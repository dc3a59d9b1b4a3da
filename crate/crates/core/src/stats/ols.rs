use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dist::t_two_sided_p;
use super::qr::{decompose, DEFAULT_RANK_TOL};
use super::{significance_stars, Matrix};

/// Small-sample handling of the cluster sandwich.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceKind {
    /// Scaled by `G/(G-1) * (N-1)/(N-K)`.
    #[default]
    Cr1,
    /// Plain sandwich, no correction.
    Cr0,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OlsError {
    #[error("design is rank deficient; aliased columns {0:?}")]
    RankDeficient(Vec<usize>),
    #[error("need at least 2 clusters, found {0}")]
    TooFewClusters(usize),
    #[error("need more observations ({observations}) than coefficients ({coefficients})")]
    TooFewObservations { observations: usize, coefficients: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Coefficients with cluster-robust inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    #[serde(with = "super::floats")]
    pub std_errors: Vec<f64>,
    #[serde(with = "super::floats")]
    pub t_stats: Vec<f64>,
    #[serde(with = "super::floats")]
    pub p_values: Vec<f64>,
    /// Degrees of freedom of the reference t distribution (`G - 1`).
    pub df: usize,
    pub n_obs: usize,
    pub n_clusters: usize,
    pub covariance: CovarianceKind,
    /// Cluster-robust covariance, row-major.
    pub vcov: Vec<f64>,
    pub residuals: Vec<f64>,
    #[serde(with = "super::floats::scalar")]
    pub r_squared: f64,
    /// Columns removed as collinear before fitting.
    #[serde(default)]
    pub dropped: Vec<String>,
}

impl RegressionResult {
    pub fn stars(&self, i: usize) -> &'static str {
        significance_stars(self.p_values[i])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.estimates[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.std_errors[i])
    }
}

/// Least squares `y ~ X` with standard errors clustered on `clusters`.
///
/// The covariance is the sandwich `(X'X)^-1 (sum_g X_g' e_g e_g' X_g) (X'X)^-1`,
/// optionally scaled by the CR1 factor; p-values use `t(G - 1)`.
pub fn fit_ols(x: &Matrix, y: &[f64], clusters: &[u64], kind: CovarianceKind) -> Result<RegressionResult, OlsError> {
    let names: Vec<String> = (0..x.cols()).map(|j| alloc::format!("x{j}")).collect();
    fit_named(x, y, clusters, names, kind)
}

/// Like [`fit_ols`], but drops collinear columns (later columns first) and
/// records them in [`RegressionResult::dropped`].
pub fn fit_ols_dropping_aliased(
    x: &Matrix,
    y: &[f64],
    clusters: &[u64],
    names: &[String],
    kind: CovarianceKind,
) -> Result<RegressionResult, OlsError> {
    check_dims(x, y, clusters)?;
    if names.len() != x.cols() {
        return Err(OlsError::DimensionMismatch(alloc::format!(
            "{} names for {} columns",
            names.len(),
            x.cols()
        )));
    }
    let qr = decompose(x, y, DEFAULT_RANK_TOL);
    if qr.aliased.is_empty() {
        return fit_named(x, y, clusters, names.to_vec(), kind);
    }
    let reduced = x.select_columns(&qr.kept);
    let kept_names = qr.kept.iter().map(|&j| names[j].clone()).collect();
    let mut result = fit_named(&reduced, y, clusters, kept_names, kind)?;
    result.dropped = qr.aliased.iter().map(|&j| names[j].clone()).collect();
    Ok(result)
}

fn check_dims(x: &Matrix, y: &[f64], clusters: &[u64]) -> Result<(), OlsError> {
    if y.len() != x.rows() || clusters.len() != x.rows() {
        return Err(OlsError::DimensionMismatch(alloc::format!(
            "{} rows, {} responses, {} cluster ids",
            x.rows(),
            y.len(),
            clusters.len()
        )));
    }
    Ok(())
}

fn fit_named(
    x: &Matrix,
    y: &[f64],
    clusters: &[u64],
    names: Vec<String>,
    kind: CovarianceKind,
) -> Result<RegressionResult, OlsError> {
    check_dims(x, y, clusters)?;
    let n = x.rows();
    let k = x.cols();
    if n <= k {
        return Err(OlsError::TooFewObservations {
            observations: n,
            coefficients: k,
        });
    }
    let mut cluster_index = BTreeMap::new();
    for &c in clusters {
        let next = cluster_index.len();
        cluster_index.entry(c).or_insert(next);
    }
    let g = cluster_index.len();
    if g < 2 {
        return Err(OlsError::TooFewClusters(g));
    }

    let qr = decompose(x, y, DEFAULT_RANK_TOL);
    if !qr.aliased.is_empty() {
        return Err(OlsError::RankDeficient(qr.aliased));
    }
    let beta = qr.coefficients();
    let fitted = x.mul_vec(&beta);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let bread = qr.xtx_inverse();

    // Cluster scores u_g = sum_{i in g} x_i e_i.
    let mut scores = vec![0.0; g * k];
    for i in 0..n {
        let gi = cluster_index[&clusters[i]];
        let e = residuals[i];
        for (s, xv) in scores[gi * k..(gi + 1) * k].iter_mut().zip(x.row(i)) {
            *s += xv * e;
        }
    }
    let mut meat = vec![0.0; k * k];
    for u in scores.chunks_exact(k) {
        for a in 0..k {
            for b in 0..k {
                meat[a * k + b] += u[a] * u[b];
            }
        }
    }
    let scale = match kind {
        CovarianceKind::Cr1 => (g as f64 / (g as f64 - 1.0)) * ((n as f64 - 1.0) / (n as f64 - k as f64)),
        CovarianceKind::Cr0 => 1.0,
    };
    let half = mat_mul(&bread, &meat, k);
    let mut vcov = mat_mul(&half, &bread, k);
    vcov.iter_mut().for_each(|v| *v *= scale);

    let df = g - 1;
    let std_errors: Vec<f64> = (0..k).map(|j| libm::sqrt(vcov[j * k + j].max(0.0))).collect();
    let t_stats: Vec<f64> = beta.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let p_values = t_stats.iter().map(|&t| t_two_sided_p(t, df as f64)).collect();

    let mean_y = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { f64::NAN };

    Ok(RegressionResult {
        names,
        estimates: beta,
        std_errors,
        t_stats,
        p_values,
        df,
        n_obs: n,
        n_clusters: g,
        covariance: kind,
        vcov,
        residuals,
        r_squared,
        dropped: Vec::new(),
    })
}

fn mat_mul(a: &[f64], b: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k * k];
    for i in 0..k {
        for m in 0..k {
            let aim = a[i * k + m];
            for j in 0..k {
                out[i * k + j] += aim * b[m * k + j];
            }
        }
    }
    out
}
