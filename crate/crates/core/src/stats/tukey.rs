//! Tukey HSD on repeated measures and the studentized-range distribution.
//!
//! `P(Q > q; k, ν) = ∫₀^∞ f_s(s) · R(q·s; k) ds`, where `s = √(χ²_ν/ν)` and
//! `R(w; k) = k ∫ φ(z) [Φ(z)^{k−1} − (Φ(z) − Φ(z − w))^{k−1}] dz` is the
//! probability that the range of `k` standard normals exceeds `w`. Both
//! integrals use adaptive Gauss-Kronrod; the result is accurate to 1e-6.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use super::anova::decompose;
use super::quad::integrate;
use super::{PairTest, PairedMatrix};
use crate::error::Result;

/// Degrees of freedom beyond which `s` is treated as the constant 1.
const DF_INFINITE: f64 = 25_000.0;

/// Upper tail of the range of `k` independent standard normals.
fn range_upper(w: f64, k: usize) -> f64 {
    if w <= 0.0 {
        return 1.0;
    }
    let n = Normal::standard();
    let km1 = (k - 1) as i32;
    let integrand = |z: f64| {
        let hi = n.cdf(z);
        let inner = (hi - n.cdf(z - w)).max(0.0);
        n.pdf(z) * (hi.powi(km1) - inner.powi(km1))
    };
    let mut total = 0.0;
    // Pieces keep the adaptive rule from skipping the mass near z ≈ w/2.
    let cuts = [-9.0, -3.0, 0.0, 3.0, 9.0];
    for p in cuts.windows(2) {
        total += integrate(integrand, p[0], p[1], 1e-13, 1e-11).0;
    }
    (k as f64 * total).clamp(0.0, 1.0)
}

/// Upper-tail probability of the studentized range with `k` groups and `df`
/// error degrees of freedom.
pub fn ptukey(q: f64, k: usize, df: f64) -> f64 {
    assert!(k >= 2, "studentized range needs k >= 2");
    assert!(df > 0.0, "studentized range needs df > 0");
    if q <= 0.0 {
        return 1.0;
    }
    if !q.is_finite() {
        return 0.0;
    }
    if df >= DF_INFINITE {
        return range_upper(q, k);
    }
    let half = df / 2.0;
    let log_norm = std::f64::consts::LN_2 + half * half.ln() - ln_gamma(half);
    let density = |s: f64| {
        if s <= 0.0 {
            return if df == 1.0 { (log_norm).exp() } else { 0.0 };
        }
        (log_norm + (df - 1.0) * s.ln() - df * s * s / 2.0).exp()
    };
    let spread = 1.0 / (2.0 * df).sqrt();
    let hi = 1.0 + 40.0 * spread.max(0.7);
    let mode = ((df - 1.0).max(0.0) / df).sqrt();
    let mut cuts = vec![0.0];
    for c in [
        mode - 8.0 * spread,
        mode - 2.0 * spread,
        mode,
        mode + 2.0 * spread,
        mode + 8.0 * spread,
    ] {
        if c > *cuts.last().unwrap() && c < hi {
            cuts.push(c);
        }
    }
    cuts.push(hi);
    let f = |s: f64| density(s) * range_upper(q * s, k);
    let total: f64 = cuts.windows(2).map(|p| integrate(f, p[0], p[1], 1e-11, 1e-9).0).sum();
    total.clamp(0.0, 1.0)
}

/// Pairwise Tukey HSD using the repeated-measures ANOVA error mean square.
/// Columns are compared in index order `(0,1), (0,2), …`.
pub fn tukey_hsd(m: &PairedMatrix) -> Result<Vec<PairTest>> {
    let d = decompose(m);
    let t = d.table;
    let k = m.k();
    let se = (t.ms_error / m.n() as f64).sqrt();
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let diff = (d.column_means[i] - d.column_means[j]).abs();
            let pair = (m.columns[i].clone(), m.columns[j].clone());
            let (q, p, note) = if diff == 0.0 {
                (0.0, 1.0, None)
            } else if t.exact_fit {
                (f64::INFINITY, 0.0, Some("exact fit: zero error variance".to_string()))
            } else {
                let q = diff / se;
                (q, ptukey(q, k, t.df_error), None)
            };
            out.push(PairTest {
                pair,
                method: "tukey_hsd".into(),
                statistic: q,
                p_value: p,
                p_adjusted: None,
                note,
            });
        }
    }
    Ok(out)
}
