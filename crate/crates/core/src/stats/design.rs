//! Design matrices for the 2x2 treatment model and its heterogeneity variant.
//!
//! Main model: `Y = a + b1 A + b2 E + b3 A E + e`. The heterogeneity model
//! adds `b4 H + b5 H A + b6 H E + b7 H A E` for a participant-level feature
//! `H`. Optional round fixed effects add one dummy per round after the first.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ols::{fit_ols_dropping_aliased, CovarianceKind, OlsError, RegressionResult};
use super::Matrix;

/// A participant-level feature interacted with both treatments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Heterogeneity {
    /// Row label used in tables, e.g. `CRT`.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelSpec {
    /// Treatments and their interaction.
    Main,
    /// Main model plus the feature and its three interactions.
    Heterogeneous(Heterogeneity),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    pub y: f64,
    pub anger: bool,
    pub empathy: bool,
    /// Required for the heterogeneity model.
    pub feature: Option<f64>,
    pub round: Option<u32>,
    pub cluster: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("row {0} lacks the heterogeneity feature")]
    MissingFeature(usize),
    #[error("row {0} lacks a round index but round fixed effects were requested")]
    MissingRound(usize),
    #[error(transparent)]
    Ols(#[from] OlsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub clusters: Vec<u64>,
    pub names: Vec<String>,
}

pub const CONSTANT: &str = "Constant";
pub const ANGER: &str = "Anger";
pub const EMPATHY: &str = "Empathy";
pub const ANGER_X_EMPATHY: &str = "Anger * Empathy";

pub fn build_design(spec: &ModelSpec, rows: &[DesignRow], round_fixed_effects: bool) -> Result<Design, DesignError> {
    let mut names: Vec<String> = [CONSTANT, ANGER, EMPATHY, ANGER_X_EMPATHY].map(String::from).to_vec();
    if let ModelSpec::Heterogeneous(h) = spec {
        let l = &h.label;
        names.push(l.clone());
        names.push(alloc::format!("{l} * {ANGER}"));
        names.push(alloc::format!("{l} * {EMPATHY}"));
        names.push(alloc::format!("{l} * {ANGER_X_EMPATHY}"));
    }
    let fixed_rounds: Vec<u32> = if round_fixed_effects {
        let mut rounds = BTreeSet::new();
        for (i, r) in rows.iter().enumerate() {
            rounds.insert(r.round.ok_or(DesignError::MissingRound(i))?);
        }
        rounds.into_iter().skip(1).collect()
    } else {
        Vec::new()
    };
    names.extend(fixed_rounds.iter().map(|t| alloc::format!("Round {t}")));

    let p = names.len();
    let mut x = Matrix::zeros(rows.len(), p);
    for (i, r) in rows.iter().enumerate() {
        let a = r.anger as u8 as f64;
        let e = r.empathy as u8 as f64;
        let mut cells = [1.0, a, e, a * e, 0.0, 0.0, 0.0, 0.0];
        let mut used = 4;
        if matches!(spec, ModelSpec::Heterogeneous(_)) {
            let h = r.feature.ok_or(DesignError::MissingFeature(i))?;
            cells[4] = h;
            cells[5] = h * a;
            cells[6] = h * e;
            cells[7] = h * a * e;
            used = 8;
        }
        for (j, &v) in cells[..used].iter().enumerate() {
            x.set(i, j, v);
        }
        for (j, t) in fixed_rounds.iter().enumerate() {
            if r.round == Some(*t) {
                x.set(i, used + j, 1.0);
            }
        }
    }
    Ok(Design {
        x,
        y: rows.iter().map(|r| r.y).collect(),
        clusters: rows.iter().map(|r| r.cluster).collect(),
        names,
    })
}

impl Design {
    /// Fits the design, dropping collinear columns and reporting them.
    pub fn fit(&self, kind: CovarianceKind) -> Result<RegressionResult, DesignError> {
        Ok(fit_ols_dropping_aliased(&self.x, &self.y, &self.clusters, &self.names, kind)?)
    }
}
