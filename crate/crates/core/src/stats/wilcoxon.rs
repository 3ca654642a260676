use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{midranks, TestResult};
use crate::error::{Error, Result};

/// Largest effective sample size for which `Auto` computes the exact null
/// distribution.
pub const EXACT_MAX_N: usize = 25;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    /// Exact for `n ≤ 25`, normal approximation otherwise.
    #[default]
    Auto,
    Exact,
    Normal,
}

/// Wilcoxon signed-rank test of `a − b`, two-sided. The statistic is the sum
/// of ranks of positive differences. Zero differences are dropped and tied
/// magnitudes get midranks.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], method: WilcoxonMethod) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::invalid("Wilcoxon test needs at least two pairs"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Ok(TestResult::new("wilcoxon_exact", 0.0, 1.0, 0).with_note("all differences zero"));
    }
    let mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let (ranks, ties) = midranks(&mags);
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();

    let exact = match method {
        WilcoxonMethod::Auto => n <= EXACT_MAX_N,
        WilcoxonMethod::Exact => true,
        WilcoxonMethod::Normal => false,
    };
    if exact {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let target = (2.0 * w_plus).round() as usize;
        let p = exact_p(&doubled, target);
        return Ok(TestResult::new("wilcoxon_exact", w_plus, p, n));
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_adj: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_adj;
    let mut diff = w_plus - mean;
    diff -= 0.5 * diff.signum();
    let z = diff / var.sqrt();
    let p = 2.0 * Normal::standard().sf(z.abs());
    Ok(TestResult::new("wilcoxon_normal", w_plus, p, n))
}

/// Two-sided exact p of a rank-sum `target` given (doubled) integer ranks:
/// the number of sign assignments at least as extreme in the smaller tail,
/// doubled, over `2ⁿ`.
fn exact_p(ranks: &[usize], target: usize) -> f64 {
    let total: usize = ranks.iter().sum();
    // counts[s] = number of subsets of ranks with sum s
    let mut counts = vec![0f64; total + 1];
    counts[0] = 1.0;
    for &r in ranks {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let le: f64 = counts[..=target.min(total)].iter().sum();
    let ge: f64 = counts[target.min(total + 1)..].iter().sum();
    let all = 2f64.powi(ranks.len() as i32);
    (2.0 * le.min(ge) / all).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_positive_n5() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [0.0; 5];
        let r = wilcoxon_signed_rank(&a, &b, WilcoxonMethod::Auto).unwrap();
        assert_eq!(r.statistic, 15.0);
        assert_eq!(r.p_value, 0.0625);
    }

    #[test]
    fn identical_samples() {
        let a = [0.2, 0.4, 0.9];
        let r = wilcoxon_signed_rank(&a, &a, WilcoxonMethod::Auto).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.statistic, 0.0);
        assert!(r.note.is_some());
    }

    #[test]
    fn ties_use_doubled_ranks() {
        // |d| = 1, 1, 2 → ranks 1.5, 1.5, 3; W+ = 1.5 + 3
        let r = wilcoxon_signed_rank(&[1.0, -1.0, 2.0], &[0.0; 3], WilcoxonMethod::Exact).unwrap();
        assert_eq!(r.statistic, 4.5);
        // sums ≥ 4.5 over 8 sign patterns: {4.5, 4.5, 6} → 3/8; ≤ side 7/8
        assert_eq!(r.p_value, 0.75);
    }
}
