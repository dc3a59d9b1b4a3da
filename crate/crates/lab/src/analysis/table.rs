//! Regression tables as aligned text, long-format CSV and JSON.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wordlab_core::stats::RegressionResult;

use crate::export::ExportError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub label: String,
    pub result: RegressionResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTable {
    /// File stem, e.g. `main`.
    pub name: String,
    pub title: String,
    pub decimals: usize,
    pub columns: Vec<Column>,
}

pub const NOTE: &str = "Note: *p<0.05; **p<0.01; ***p<0.001";

/// `3975` as `3,975`.
pub fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

impl RegressionTable {
    pub fn new(name: String, title: String, decimals: usize, columns: Vec<Column>) -> Self {
        RegressionTable {
            name,
            title,
            decimals,
            columns,
        }
    }

    /// Coefficient names in first-seen order across columns.
    pub fn terms(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for c in &self.columns {
            for n in &c.result.names {
                if !out.contains(&n.as_str()) {
                    out.push(n);
                }
            }
        }
        out
    }

    fn cell(&self, col: &Column, term: &str) -> (String, String) {
        let d = self.decimals;
        match col.result.index_of(term) {
            Some(i) => (
                format!("{:.d$}{}", col.result.estimates[i], col.result.stars(i)),
                format!("({:.d$})", col.result.std_errors[i]),
            ),
            None => (String::new(), String::new()),
        }
    }

    pub fn to_text(&self) -> String {
        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut header = vec![String::new()];
        header.extend(self.columns.iter().map(|c| c.label.clone()));
        rows.push(header);
        for term in self.terms() {
            let (mut est, mut se) = (vec![term.to_owned()], vec![String::new()]);
            for c in &self.columns {
                let (e, s) = self.cell(c, term);
                est.push(e);
                se.push(s);
            }
            rows.push(est);
            rows.push(se);
        }
        let mut obs = vec!["Observations".to_owned()];
        obs.extend(self.columns.iter().map(|c| thousands(c.result.n_obs)));
        let mut groups = vec!["Number of Participants".to_owned()];
        groups.extend(self.columns.iter().map(|c| c.result.n_clusters.to_string()));
        let footer_at = rows.len();
        rows.push(obs);
        rows.push(groups);

        let widths: Vec<usize> = (0..=self.columns.len())
            .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
            .collect();
        let total = widths.iter().sum::<usize>() + 2 * self.columns.len();
        let rule = "-".repeat(total);
        let mut out = String::new();
        writeln!(out, "{}", self.title).unwrap();
        writeln!(out, "{}", "=".repeat(total)).unwrap();
        for (i, r) in rows.iter().enumerate() {
            if i == 1 || i == footer_at {
                writeln!(out, "{rule}").unwrap();
            }
            let mut line = format!("{:<w$}", r[0], w = widths[0]);
            for (j, cell) in r.iter().enumerate().skip(1) {
                write!(line, "  {:>w$}", cell, w = widths[j]).unwrap();
            }
            writeln!(out, "{}", line.trim_end()).unwrap();
        }
        writeln!(out, "{}", "=".repeat(total)).unwrap();
        for c in &self.columns {
            if !c.result.dropped.is_empty() {
                writeln!(out, "{}: dropped as collinear: {}", c.label, c.result.dropped.join(", ")).unwrap();
            }
        }
        let cov = match self.columns.first().map(|c| c.result.covariance) {
            Some(wordlab_core::stats::CovarianceKind::Cr0) => "CR0",
            _ => "CR1",
        };
        writeln!(out, "Robust standard errors ({cov}) clustered at the participant level.").unwrap();
        writeln!(out, "{NOTE}").unwrap();
        out
    }

    /// One line per (column, term).
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "table",
            "column",
            "term",
            "estimate",
            "std_error",
            "t_stat",
            "p_value",
            "stars",
            "n_obs",
            "n_participants",
        ])
        .expect("in-memory write");
        for c in &self.columns {
            let r = &c.result;
            for (i, term) in r.names.iter().enumerate() {
                w.write_record([
                    self.name.clone(),
                    c.label.clone(),
                    term.clone(),
                    r.estimates[i].to_string(),
                    r.std_errors[i].to_string(),
                    r.t_stats[i].to_string(),
                    r.p_values[i].to_string(),
                    r.stars(i).to_owned(),
                    r.n_obs.to_string(),
                    r.n_clusters.to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Writes `<name>.txt`, `<name>.csv` and `<name>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, ExportError> {
        fs::create_dir_all(dir).map_err(|source| ExportError::Io {
            path: dir.to_owned(),
            source,
        })?;
        let mut out = Vec::new();
        for (ext, body) in [("txt", self.to_text()), ("csv", self.to_csv()), ("json", self.to_json())] {
            let path = dir.join(format!("{}.{ext}", self.name));
            fs::write(&path, body).map_err(|source| ExportError::Io {
                path: path.clone(),
                source,
            })?;
            out.push(path);
        }
        Ok(out)
    }
}
