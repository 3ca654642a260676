//! Binary classification metrics and inter-rater agreement.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub const fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionCounts { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, truth: bool, predicted: bool) {
        match (truth, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (bool, bool)>>(pairs: I) -> Self {
        let mut c = ConfusionCounts::default();
        for (t, p) in pairs {
            c.record(t, p);
        }
        c
    }

    /// Counts with the positive and negative classes exchanged.
    pub fn swapped_classes(&self) -> Self {
        ConfusionCounts::new(self.tn, self.fn_, self.fp, self.tp)
    }

    /// Counts of the inverted classifier (every prediction flipped).
    pub fn inverted_predictions(&self) -> Self {
        ConfusionCounts::new(self.fn_, self.tn, self.tp, self.fp)
    }
}

impl Add for ConfusionCounts {
    type Output = ConfusionCounts;
    fn add(self, o: Self) -> Self {
        ConfusionCounts::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_, self.tn + o.tn)
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ConfusionCounts::default(), Add::add)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub mcc: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    /// The MCC denominator was zero and `mcc` was set to 0.
    #[serde(default)]
    pub mcc_undefined: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mcc,
    F1,
    Precision,
    Recall,
    Accuracy,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Mcc,
        Metric::F1,
        Metric::Precision,
        Metric::Recall,
        Metric::Accuracy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Mcc => "mcc",
            Metric::F1 => "f1",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::Accuracy => "accuracy",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

impl MetricSet {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::Mcc => self.mcc,
            Metric::F1 => self.f1,
            Metric::Precision => self.precision,
            Metric::Recall => self.recall,
            Metric::Accuracy => self.accuracy,
        }
    }

    fn from_fn(f: impl Fn(Metric) -> f64) -> Self {
        MetricSet {
            mcc: f(Metric::Mcc),
            f1: f(Metric::F1),
            precision: f(Metric::Precision),
            recall: f(Metric::Recall),
            accuracy: f(Metric::Accuracy),
            mcc_undefined: false,
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// MCC, F1, precision, recall and accuracy of a confusion. Zero
/// denominators yield 0; for MCC this is flagged.
pub fn metric_set(cm: &ConfusionCounts) -> Result<MetricSet> {
    if cm.total() == 0 {
        return Err(Error::invalid("empty confusion matrix"));
    }
    let ConfusionCounts { tp, fp, fn_, tn } = *cm;
    let a = (tp + fp) as u128 * (tp + fn_) as u128;
    let b = (tn + fp) as u128 * (tn + fn_) as u128;
    let (mcc, mcc_undefined) = if a == 0 || b == 0 {
        (0.0, true)
    } else {
        let num = tp as f64 * tn as f64 - fp as f64 * fn_ as f64;
        let v = num / (a as f64).sqrt() / (b as f64).sqrt();
        (v.clamp(-1.0, 1.0), false)
    };
    Ok(MetricSet {
        mcc,
        f1: ratio(2 * tp, 2 * tp + fp + fn_),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        accuracy: ratio(tp + tn, cm.total()),
        mcc_undefined,
    })
}

/// Mean and sample standard deviation of per-participant metrics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroSummary {
    pub n: usize,
    pub mean: MetricSet,
    pub sd: MetricSet,
    /// `false` when `n == 1` and the SD was set to 0.
    pub sd_defined: bool,
    pub mcc_undefined_count: usize,
}

pub fn macro_average(sets: &[MetricSet]) -> Result<MacroSummary> {
    if sets.is_empty() {
        return Err(Error::invalid("macro average of zero participants"));
    }
    let n = sets.len();
    let mean = MetricSet::from_fn(|m| sets.iter().map(|s| s.get(m)).sum::<f64>() / n as f64);
    let sd = MetricSet::from_fn(|m| {
        if n < 2 {
            return 0.0;
        }
        let mu = mean.get(m);
        let ss: f64 = sets.iter().map(|s| (s.get(m) - mu).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    });
    Ok(MacroSummary {
        n,
        mean,
        sd,
        sd_defined: n >= 2,
        mcc_undefined_count: sets.iter().filter(|s| s.mcc_undefined).count(),
    })
}

/// Metrics of the pooled confusion.
pub fn micro_average(cms: &[ConfusionCounts]) -> Result<MetricSet> {
    if cms.is_empty() {
        return Err(Error::invalid("micro average of zero participants"));
    }
    metric_set(&cms.iter().copied().sum())
}

/// Two raters' labels over shared observations, as a k×k table with rater A
/// on rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementTable {
    pub cells: Vec<Vec<u64>>,
}

impl AgreementTable {
    pub fn new(cells: Vec<Vec<u64>>) -> Result<Self> {
        let k = cells.len();
        if k < 2 || cells.iter().any(|r| r.len() != k) {
            return Err(Error::invalid("agreement table must be square with k >= 2"));
        }
        let t = AgreementTable { cells };
        if t.total() == 0 {
            return Err(Error::invalid("agreement table has no observations"));
        }
        Ok(t)
    }

    /// Builds a table from paired category indices `< k`.
    pub fn from_pairs(k: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut cells = vec![vec![0u64; k]; k];
        for &(a, b) in pairs {
            if a >= k || b >= k {
                return Err(Error::invalid(format!("category index out of range for k = {k}")));
            }
            cells[a][b] += 1;
        }
        AgreementTable::new(cells)
    }

    pub fn k(&self) -> usize {
        self.cells.len()
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    pub fn observed(&self) -> f64 {
        let trace: u64 = (0..self.k()).map(|i| self.cells[i][i]).sum();
        trace as f64 / self.total() as f64
    }

    pub fn expected(&self) -> f64 {
        let n = self.total() as f64;
        (0..self.k())
            .map(|i| {
                let row: u64 = self.cells[i].iter().sum();
                let col: u64 = self.cells.iter().map(|r| r[i]).sum();
                (row as f64 / n) * (col as f64 / n)
            })
            .sum()
    }
}

/// Cohen's kappa together with whether chance agreement was total.
pub fn cohens_kappa_flagged(t: &AgreementTable) -> (f64, bool) {
    let po = t.observed();
    let pe = t.expected();
    if pe >= 1.0 {
        return (if po >= 1.0 { 1.0 } else { 0.0 }, true);
    }
    ((po - pe) / (1.0 - pe), false)
}

pub fn cohens_kappa(t: &AgreementTable) -> f64 {
    cohens_kappa_flagged(t).0
}

/// Prevalence-adjusted bias-adjusted kappa, `(k·p_o − 1)/(k − 1)`.
pub fn pabak(t: &AgreementTable) -> f64 {
    let k = t.k() as f64;
    (k * t.observed() - 1.0) / (k - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaBand {
    Poor,
    Slight,
    Fair,
    Moderate,
    Substantial,
    AlmostPerfect,
}

impl KappaBand {
    pub fn as_str(self) -> &'static str {
        match self {
            KappaBand::Poor => "poor",
            KappaBand::Slight => "slight",
            KappaBand::Fair => "fair",
            KappaBand::Moderate => "moderate",
            KappaBand::Substantial => "substantial",
            KappaBand::AlmostPerfect => "almost perfect",
        }
    }
}

impl fmt::Display for KappaBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Landis-Koch band of a kappa value, after rounding to two decimals
/// (half away from zero): `< 0` poor, `0–0.20` slight, `0.21–0.40` fair,
/// `0.41–0.60` moderate, `0.61–0.80` substantial, `0.81–1` almost perfect.
pub fn interpret_kappa(value: f64) -> Result<KappaBand> {
    if !(-1.0..=1.0).contains(&value) {
        return Err(Error::invalid(format!("kappa {value} outside [-1, 1]")));
    }
    let hundredths = (value * 100.0).round() as i64;
    Ok(match hundredths {
        i64::MIN..=-1 => KappaBand::Poor,
        0..=20 => KappaBand::Slight,
        21..=40 => KappaBand::Fair,
        41..=60 => KappaBand::Moderate,
        61..=80 => KappaBand::Substantial,
        _ => KappaBand::AlmostPerfect,
    })
}

/// One row of an agreement report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementSummary {
    pub observations: u64,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
    pub kappa: f64,
    pub kappa_degenerate: bool,
    pub pabak: f64,
    pub band: KappaBand,
    pub pabak_band: KappaBand,
}

pub fn agreement_summary(t: &AgreementTable) -> AgreementSummary {
    let (kappa, degenerate) = cohens_kappa_flagged(t);
    let p = pabak(t);
    AgreementSummary {
        observations: t.total(),
        observed_agreement: t.observed(),
        expected_agreement: t.expected(),
        kappa,
        kappa_degenerate: degenerate,
        pabak: p,
        band: interpret_kappa(kappa.clamp(-1.0, 1.0)).expect("clamped"),
        pabak_band: interpret_kappa(p.clamp(-1.0, 1.0)).expect("clamped"),
    }
}
