use serde::{Deserialize, Serialize};

use super::{
    friedman, rm_anova, shapiro_wilk, tukey_hsd, wilcoxon_signed_rank, PairTest, PairedMatrix, TestResult,
    WilcoxonMethod,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    AnovaTukey,
    FriedmanWilcoxon,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normality {
    pub column: String,
    /// Absent when the test could not run (constant column or n < 3).
    pub test: Option<TestResult>,
    pub normal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub alpha: f64,
    /// Bonferroni-adjust Wilcoxon post hoc p-values.
    pub bonferroni: bool,
    pub wilcoxon: WilcoxonMethod,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            alpha: 0.05,
            bonferroni: false,
            wilcoxon: WilcoxonMethod::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub columns: Vec<String>,
    pub n: usize,
    pub alpha: f64,
    pub normality: Vec<Normality>,
    pub branch: Branch,
    pub omnibus: TestResult,
    pub significant: bool,
    /// Empty when the omnibus test is not significant.
    pub posthoc: Vec<PairTest>,
    pub summary: String,
}

/// Shapiro-Wilk on every column; all normal → repeated-measures ANOVA with
/// Tukey HSD, otherwise Friedman with pairwise Wilcoxon signed-rank tests.
/// Post hoc tests run only when the omnibus p is below `alpha`.
pub fn compare_models(m: &PairedMatrix, opts: &CompareOptions) -> Result<ComparisonReport> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", opts.alpha)));
    }
    let mut normality = Vec::with_capacity(m.k());
    for (j, name) in m.columns.iter().enumerate() {
        let entry = match shapiro_wilk(&m.column(j)) {
            Ok(t) => Normality {
                column: name.clone(),
                normal: t.p_value >= opts.alpha,
                test: Some(t),
                note: None,
            },
            Err(Error::ZeroVariance) => Normality {
                column: name.clone(),
                test: None,
                normal: false,
                note: Some("zero variance; treated as non-normal".into()),
            },
            Err(Error::Invalid(msg)) => Normality {
                column: name.clone(),
                test: None,
                normal: false,
                note: Some(format!("{msg}; treated as non-normal")),
            },
            Err(e) => return Err(e),
        };
        normality.push(entry);
    }
    let branch = if normality.iter().all(|n| n.normal) {
        Branch::AnovaTukey
    } else {
        Branch::FriedmanWilcoxon
    };

    let omnibus = match branch {
        Branch::AnovaTukey => rm_anova(m)?.0,
        Branch::FriedmanWilcoxon => friedman(m)?,
    };
    let significant = omnibus.p_value < opts.alpha;
    let mut posthoc = Vec::new();
    if significant {
        posthoc = match branch {
            Branch::AnovaTukey => tukey_hsd(m)?,
            Branch::FriedmanWilcoxon => {
                let k = m.k();
                let pairs = k * (k - 1) / 2;
                let mut out = Vec::with_capacity(pairs);
                for i in 0..k {
                    for j in i + 1..k {
                        let t = wilcoxon_signed_rank(&m.column(i), &m.column(j), opts.wilcoxon)?;
                        out.push(PairTest {
                            pair: (m.columns[i].clone(), m.columns[j].clone()),
                            method: t.method,
                            statistic: t.statistic,
                            p_adjusted: opts.bonferroni.then(|| (t.p_value * pairs as f64).min(1.0)),
                            p_value: t.p_value,
                            note: t.note,
                        });
                    }
                }
                out
            }
        };
    }
    let summary = if significant {
        let hits: Vec<String> = posthoc
            .iter()
            .filter(|p| p.p_adjusted.unwrap_or(p.p_value) < opts.alpha)
            .map(|p| format!("{} vs {}", p.pair.0, p.pair.1))
            .collect();
        format!(
            "significant difference ({} p = {:.4}); pairs below alpha: {}",
            omnibus.method,
            omnibus.p_value,
            if hits.is_empty() {
                "none".to_string()
            } else {
                hits.join(", ")
            }
        )
    } else {
        "no significant difference".to_string()
    };
    Ok(ComparisonReport {
        columns: m.columns.clone(),
        n: m.n(),
        alpha: opts.alpha,
        normality,
        branch,
        omnibus,
        significant,
        posthoc,
        summary,
    })
}
