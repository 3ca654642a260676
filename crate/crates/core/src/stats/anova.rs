use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::{PairedMatrix, TestResult};
use crate::error::Result;

/// Sums of squares of a one-way within-subjects design.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnovaTable {
    pub ss_treatment: f64,
    pub ss_subjects: f64,
    pub ss_error: f64,
    pub df_treatment: f64,
    pub df_error: f64,
    pub ms_error: f64,
    /// Residual variance is zero relative to the data scale.
    pub exact_fit: bool,
}

pub(crate) struct Decomposition {
    pub table: AnovaTable,
    pub column_means: Vec<f64>,
}

pub(crate) fn decompose(m: &PairedMatrix) -> Decomposition {
    let (n, k) = (m.n(), m.k());
    let (nf, kf) = (n as f64, k as f64);
    let grand = m.rows.iter().flatten().sum::<f64>() / (nf * kf);
    let row_means: Vec<f64> = m.rows.iter().map(|r| r.iter().sum::<f64>() / kf).collect();
    let column_means: Vec<f64> = (0..k).map(|j| m.rows.iter().map(|r| r[j]).sum::<f64>() / nf).collect();

    // Bitwise-equal column means mean no treatment effect at all.
    let ss_treatment = if column_means.iter().all(|&c| c == column_means[0]) {
        0.0
    } else {
        nf * column_means.iter().map(|c| (c - grand).powi(2)).sum::<f64>()
    };
    let ss_subjects = kf * row_means.iter().map(|r| (r - grand).powi(2)).sum::<f64>();
    let mut ss_error = 0.0;
    let mut ss_total = 0.0;
    for (i, row) in m.rows.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            let e = x - row_means[i] - column_means[j] + grand;
            ss_error += e * e;
            ss_total += (x - grand).powi(2);
        }
    }
    let df_treatment = kf - 1.0;
    let df_error = (kf - 1.0) * (nf - 1.0);
    let exact_fit = ss_error <= 1e-24 * ss_total.max(f64::MIN_POSITIVE);
    Decomposition {
        table: AnovaTable {
            ss_treatment,
            ss_subjects,
            ss_error,
            df_treatment,
            df_error,
            ms_error: ss_error / df_error,
            exact_fit,
        },
        column_means,
    }
}

/// One-way repeated-measures ANOVA without sphericity correction.
pub fn rm_anova(m: &PairedMatrix) -> Result<(TestResult, AnovaTable)> {
    let d = decompose(m);
    let t = d.table;
    let n = m.n();
    let df = [t.df_treatment, t.df_error];
    let result = if t.ss_treatment == 0.0 {
        TestResult::new("rm_anova", 0.0, 1.0, n).with_df(&df)
    } else if t.exact_fit {
        TestResult::new("rm_anova", f64::INFINITY, 0.0, n)
            .with_df(&df)
            .with_note("exact fit: zero residual variance")
    } else {
        let f = (t.ss_treatment / t.df_treatment) / t.ms_error;
        let p = FisherSnedecor::new(t.df_treatment, t.df_error)
            .expect("positive df")
            .sf(f);
        TestResult::new("rm_anova", f, p, n).with_df(&df)
    };
    Ok((result, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_columns_give_f_zero() {
        let c = vec![0.3, 0.9, 0.4, 0.7];
        let (r, _) = rm_anova(&PairedMatrix::from_columns(&[c.clone(), c.clone(), c]).unwrap()).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn pure_shift_is_exact_fit() {
        let c = vec![0.3, 0.9, 0.4, 0.7];
        let d: Vec<f64> = c.iter().map(|v| v + 1.0).collect();
        let (r, t) = rm_anova(&PairedMatrix::from_columns(&[c, d]).unwrap()).unwrap();
        assert!(t.exact_fit);
        assert_eq!(r.p_value, 0.0);
        assert!(r.note.is_some());
    }
}
