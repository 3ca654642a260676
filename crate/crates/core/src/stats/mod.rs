//! Normality, omnibus and post hoc tests for paired model scores, and the
//! procedure that chains them.

mod anova;
mod compare;
mod friedman;
pub mod quad;
mod shapiro;
pub mod tukey;
mod wilcoxon;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use anova::{rm_anova, AnovaTable};
pub use compare::{compare_models, Branch, CompareOptions, ComparisonReport, Normality};
pub use friedman::friedman;
pub use shapiro::shapiro_wilk;
pub use tukey::{ptukey, tukey_hsd};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonMethod};

/// Scores of `n` subjects (rows) under `k` treatments (columns).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl PairedMatrix {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = columns.len();
        if k < 2 {
            return Err(Error::invalid("a paired comparison needs at least two columns"));
        }
        if rows.len() < 2 {
            return Err(Error::invalid("a paired comparison needs at least two subjects"));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(Error::invalid(format!("row {i} has {} values, expected {k}", r.len())));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i} has a missing or non-finite value")));
            }
        }
        Ok(PairedMatrix { columns, rows })
    }

    /// Builds a matrix from column vectors named `c0, c1, …`.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let n = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::invalid("columns differ in length"));
        }
        let names = (0..cols.len()).map(|j| format!("c{j}")).collect();
        let rows = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        PairedMatrix::new(names, rows)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: String,
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom, where applicable.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub df: Vec<f64>,
    /// Observations entering the test.
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TestResult {
    fn new(method: &str, statistic: f64, p_value: f64, n: usize) -> Self {
        TestResult {
            method: method.to_string(),
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
            df: Vec::new(),
            n,
            note: None,
        }
    }

    fn with_df(mut self, df: &[f64]) -> Self {
        self.df = df.to_vec();
        self
    }

    fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }
}

/// A post hoc comparison of two columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    pub pair: (String, String),
    pub method: String,
    pub statistic: f64,
    pub p_value: f64,
    /// Bonferroni-adjusted p, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_adjusted: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Midranks (1-based) of `values` and the sizes of tie groups larger than one.
pub fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j share rank (i+1 + j)/2
        let r = (i + 1 + j) as f64 / 2.0;
        for &o in &order[i..j] {
            ranks[o] = r;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}
