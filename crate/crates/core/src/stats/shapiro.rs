//! Shapiro-Wilk W with Royston's (1995, AS R94) coefficients and p-value.

use statrs::distribution::{ContinuousCDF, Normal};

use super::TestResult;
use crate::error::{Error, Result};

const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

/// `c[0] + c[1]·x + c[2]·x² + …`
fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Coefficients `a_1 ≥ … ≥ a_{n/2} > 0` applied to `x_(n+1-i) − x_(i)`.
fn coefficients(n: usize) -> Vec<f64> {
    let half = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    let std = Normal::standard();
    let an25 = n as f64 + 0.25;
    let m: Vec<f64> = (1..=half).map(|i| std.inverse_cdf((i as f64 - 0.375) / an25)).collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / (n as f64).sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;
    let mut a = vec![0.0; half];
    a[0] = a1;
    let (first, fac) = if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        a[1] = a2;
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)).sqrt();
        (2, fac)
    } else {
        (1, ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt())
    };
    for i in first..half {
        a[i] = -m[i] / fac;
    }
    a
}

fn p_value(w: f64, n: usize) -> f64 {
    if n == 3 {
        let pi6 = 6.0 / std::f64::consts::PI;
        let stqr = std::f64::consts::PI / 3.0;
        return (pi6 * (w.sqrt().asin() - stqr)).clamp(0.0, 1.0);
    }
    let an = n as f64;
    let mut y = (1.0 - w).ln();
    let (m, s) = if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            return 1e-99;
        }
        y = -(gamma - y).ln();
        (poly(&C3, an), poly(&C4, an).exp())
    } else {
        let xx = an.ln();
        (poly(&C5, xx), poly(&C6, xx).exp())
    };
    Normal::standard().sf((y - m) / s)
}

/// Shapiro-Wilk test for `3 ≤ n ≤ 5000` observations.
pub fn shapiro_wilk(samples: &[f64]) -> Result<TestResult> {
    let n = samples.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::invalid(format!(
            "Shapiro-Wilk needs 3..=5000 observations, got {n}"
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("Shapiro-Wilk sample has a non-finite value"));
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    if x[n - 1] == x[0] {
        return Err(Error::ZeroVariance);
    }
    let a = coefficients(n);
    // Centre and scale first so the ratio is well conditioned.
    let mean = x.iter().sum::<f64>() / n as f64;
    let range = x[n - 1] - x[0];
    let z: Vec<f64> = x.iter().map(|v| (v - mean) / range).collect();
    let ssq: f64 = z.iter().map(|v| v * v).sum();
    let num: f64 = a.iter().enumerate().map(|(i, ai)| ai * (z[n - 1 - i] - z[i])).sum();
    let w = ((num * num) / ssq).min(1.0);
    Ok(TestResult::new("shapiro_wilk", w, p_value(w, n), n))
}
