use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::folds::FoldSpec;
use crate::config::{Condition, ModelSource, RunConfig};
use crate::corpus::{HandCategory, Mode, Side};
use crate::error::{Error, Result};
use crate::features::extract::MaskTally;
use crate::fusion::Source;
use crate::metrics::{ConfusionCounts, MacroSummary, Metric, MetricSet};
use crate::stats::{compare_models, CompareOptions, ComparisonReport, PairedMatrix};

pub const REPORT_VERSION: u32 = 1;

/// Hand grouping of a result row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    MoreAffected,
    LessAffected,
    Overall,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::MoreAffected, Category::LessAffected, Category::Overall];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::MoreAffected => "more_affected",
            Category::LessAffected => "less_affected",
            Category::Overall => "overall",
        }
    }
}

impl From<HandCategory> for Category {
    fn from(c: HandCategory) -> Self {
        match c {
            HandCategory::MoreAffected => Category::MoreAffected,
            HandCategory::LessAffected => Category::LessAffected,
        }
    }
}

impl std::str::FromStr for Category {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown hand category {s:?}"))
    }
}

/// Final decision for one test instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub task: String,
    pub frame: usize,
    pub side: Side,
    pub hand_category: HandCategory,
    pub truth: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    pub decision: bool,
    pub source: Source,
    /// Left out of the confusion (role mode without a detection).
    #[serde(default)]
    pub excluded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: FoldSpec,
    pub train_instances: usize,
    pub train_positive: usize,
    pub test_instances: usize,
    pub missing_detections: usize,
    pub excluded: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degenerate_forest: Option<bool>,
    pub confusion: BTreeMap<Category, ConfusionCounts>,
    /// Only categories with at least one counted instance.
    pub metrics: BTreeMap<Category, MetricSet>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldResult {
    pub summary: FoldSummary,
    pub predictions: Vec<PredictionRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub version: u32,
    pub model: String,
    pub mode: Mode,
    pub condition: Condition,
    pub model_source: ModelSource,
    pub seed: u64,
    pub config_hash: String,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<MaskTally>,
    pub folds: Vec<FoldSummary>,
    #[serde(rename = "macro")]
    pub macro_avg: BTreeMap<Category, MacroSummary>,
    pub micro: BTreeMap<Category, MetricSet>,
    pub micro_confusion: BTreeMap<Category, ConfusionCounts>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, location: &str) -> Result<Self> {
        let r: EvaluationReport = serde_json::from_str(text).map_err(|e| Error::parse(location, e.to_string()))?;
        if r.version != REPORT_VERSION {
            return Err(Error::parse(
                location,
                format!("unsupported report version {}", r.version),
            ));
        }
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        EvaluationReport::from_json(&text, &path.display().to_string())
    }

    pub fn participants(&self) -> Vec<&str> {
        self.folds.iter().map(|f| f.fold.test_participant.as_str()).collect()
    }

    /// Per-participant values of `metric` for `category`, in fold order.
    pub fn fold_values(&self, metric: Metric, category: Category) -> Result<Vec<f64>> {
        self.folds
            .iter()
            .map(|f| {
                f.metrics.get(&category).map(|m| m.get(metric)).ok_or_else(|| {
                    Error::invalid(format!(
                        "report {}: fold {} has no {} instances",
                        self.model,
                        f.fold.test_participant,
                        category.as_str()
                    ))
                })
            })
            .collect()
    }

    /// Result table: one macro and one micro row per hand category.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "model,condition,mode,hand_category,average_type,n,mcc,mcc_sd,f1,f1_sd,precision,precision_sd,recall,recall_sd,accuracy,accuracy_sd\n",
        );
        let prefix = |c: Category| {
            format!(
                "{},{},{},{}",
                self.model,
                self.condition.as_str(),
                self.mode.as_str(),
                c.as_str()
            )
        };
        for c in Category::ALL {
            if let Some(m) = self.macro_avg.get(&c) {
                let _ = write!(out, "{},macro,{}", prefix(c), m.n);
                for metric in Metric::ALL {
                    let _ = write!(out, ",{},{}", m.mean.get(metric), m.sd.get(metric));
                }
                out.push('\n');
            }
            if let Some(m) = self.micro.get(&c) {
                let n: u64 = self.micro_confusion.get(&c).map_or(0, |cm| cm.total());
                let _ = write!(out, "{},micro,{}", prefix(c), n);
                for metric in Metric::ALL {
                    let _ = write!(out, ",{},", m.get(metric));
                }
                out.push('\n');
            }
        }
        out
    }

    /// Human-readable rendering of the result table with `mean ± SD` cells.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} / {} / {} ({} folds, config {})\n",
            self.model,
            self.mode.as_str(),
            self.condition.as_str(),
            self.folds.len(),
            self.config_hash
        );
        let _ = writeln!(
            out,
            "{:<14} {:<6} {:>13} {:>13} {:>13} {:>13} {:>13}",
            "hand", "avg", "MCC", "F1", "P", "R", "A"
        );
        for c in Category::ALL {
            if let Some(m) = self.macro_avg.get(&c) {
                let _ = write!(out, "{:<14} {:<6}", c.as_str(), "macro");
                for metric in Metric::ALL {
                    let _ = write!(out, " {:>13}", format_mean_sd(m.mean.get(metric), m.sd.get(metric)));
                }
                out.push('\n');
            }
            if let Some(m) = self.micro.get(&c) {
                let _ = write!(out, "{:<14} {:<6}", c.as_str(), "micro");
                for metric in Metric::ALL {
                    let _ = write!(out, " {:>13}", format!("{:.2}", m.get(metric)));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// `0.50 ± 0.23`
pub fn format_mean_sd(mean: f64, sd: f64) -> String {
    format!("{mean:.2} ± {sd:.2}")
}

pub fn predictions_to_jsonl(records: &[PredictionRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("prediction serializes"));
        s.push('\n');
    }
    s
}

/// Writes `evaluation_report.json`, `report.csv` and one predictions file
/// per fold under `dir`.
pub fn write_outputs(dir: &Path, report: &EvaluationReport, folds: &[FoldResult]) -> Result<()> {
    let pred_dir = dir.join("predictions");
    std::fs::create_dir_all(&pred_dir).map_err(|e| Error::io(&pred_dir, e))?;
    let write = |p: &Path, text: &str| std::fs::write(p, text).map_err(|e| Error::io(p, e));
    write(&dir.join("evaluation_report.json"), &report.to_json())?;
    write(&dir.join("report.csv"), &report.to_csv())?;
    for f in folds {
        let p = pred_dir.join(format!("{}.jsonl", f.summary.fold.test_participant));
        write(&p, &predictions_to_jsonl(&f.predictions))?;
    }
    Ok(())
}

/// Compares per-participant scores of several evaluations. Column names are
/// the report model labels, made unique by position when they repeat.
pub fn compare(
    reports: &[EvaluationReport],
    metric: Metric,
    category: Category,
    opts: &CompareOptions,
) -> Result<ComparisonReport> {
    if reports.len() < 2 {
        return Err(Error::invalid("comparison needs at least two reports"));
    }
    let first = reports[0].participants();
    for r in &reports[1..] {
        if r.participants() != first {
            return Err(Error::invalid(format!(
                "fold lists differ between {} and {}",
                reports[0].model, r.model
            )));
        }
    }
    let mut names: Vec<String> = Vec::with_capacity(reports.len());
    for (i, r) in reports.iter().enumerate() {
        let base = r.model.clone();
        names.push(if reports.iter().filter(|o| o.model == base).count() > 1 {
            format!("{base}#{}", i + 1)
        } else {
            base
        });
    }
    let cols: Vec<Vec<f64>> = reports
        .iter()
        .map(|r| r.fold_values(metric, category))
        .collect::<Result<_>>()?;
    let rows = (0..first.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let m = PairedMatrix::new(names, rows)?;
    compare_models(&m, opts)
}
