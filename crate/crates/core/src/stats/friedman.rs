use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{midranks, PairedMatrix, TestResult};
use crate::error::Result;

/// Friedman rank test over the columns of `m`, with midranks within rows and
/// the usual tie correction; p from χ²(k − 1).
pub fn friedman(m: &PairedMatrix) -> Result<TestResult> {
    let (n, k) = (m.n(), m.k());
    let mut rank_sums = vec![0.0; k];
    let mut tie_term = 0.0;
    for row in &m.rows {
        let (r, ties) = midranks(row);
        for (s, v) in rank_sums.iter_mut().zip(r) {
            *s += v;
        }
        tie_term += ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>();
    }
    let (nf, kf) = (n as f64, k as f64);
    let df = kf - 1.0;
    let correction = 1.0 - tie_term / (nf * kf * (kf * kf - 1.0));
    if correction <= 0.0 {
        return Ok(TestResult::new("friedman", 0.0, 1.0, n)
            .with_df(&[df])
            .with_note("every row fully tied"));
    }
    let ssr: f64 = rank_sums.iter().map(|r| r * r).sum();
    let raw = 12.0 / (nf * kf * (kf + 1.0)) * ssr - 3.0 * nf * (kf + 1.0);
    let chi2 = (raw / correction).max(0.0);
    let p = ChiSquared::new(df).expect("df >= 1").sf(chi2);
    Ok(TestResult::new("friedman", chi2, p, n).with_df(&[df]))
}
