//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's statistical or metric code.

#![allow(dead_code)]

pub mod shapiro_cases;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, StudentsT};

fn rat(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// MCC, F1, precision, recall, accuracy evaluated in exact rational
/// arithmetic; MCC goes through its exact square.
pub fn exact_metrics(tp: u64, fp: u64, fn_: u64, tn: u64) -> [f64; 5] {
    let to = |r: &BigRational| r.to_f64().unwrap();
    let div = |a: BigRational, b: BigRational| if b.is_zero() { BigRational::zero() } else { a / b };
    let (tp_, fp_, fn__, tn_) = (rat(tp), rat(fp), rat(fn_), rat(tn));
    let num = &tp_ * &tn_ - &fp_ * &fn__;
    let den = (&tp_ + &fp_) * (&tp_ + &fn__) * (&tn_ + &fp_) * (&tn_ + &fn__);
    let mcc = if den.is_zero() {
        0.0
    } else {
        let sq = to(&(&num * &num / &den));
        let s = sq.sqrt();
        if num < BigRational::zero() {
            -s
        } else {
            s
        }
    };
    let two = rat(2);
    [
        mcc,
        to(&div(&two * &tp_, &two * &tp_ + &fp_ + &fn__)),
        to(&div(tp_.clone(), &tp_ + &fp_)),
        to(&div(tp_.clone(), &tp_ + &fn__)),
        to(&div(&tp_ + &tn_, &tp_ + &fp_ + &fn__ + &tn_)),
    ]
}

/// Cohen's kappa and PABAK of a k×k table in exact rational arithmetic.
pub fn exact_kappa(cells: &[Vec<u64>]) -> (f64, f64) {
    let k = cells.len();
    let n: u64 = cells.iter().flatten().sum();
    let n_ = rat(n);
    let po = rat((0..k).map(|i| cells[i][i]).sum::<u64>()) / &n_;
    let mut pe = BigRational::zero();
    for i in 0..k {
        let row: u64 = cells[i].iter().sum();
        let col: u64 = cells.iter().map(|r| r[i]).sum();
        pe += rat(row) * rat(col) / (&n_ * &n_);
    }
    let one = rat(1);
    let kappa = if pe == one {
        if po == one {
            1.0
        } else {
            0.0
        }
    } else {
        ((&po - &pe) / (&one - &pe)).to_f64().unwrap()
    };
    let kk = rat(k as u64);
    let pabak = ((&kk * &po - &one) / (&kk - &one)).to_f64().unwrap();
    (kappa, pabak)
}

/// Midranks by counting: rank = #less + (#equal + 1)/2.
pub fn count_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let less = v.iter().filter(|y| *y < x).count() as f64;
            let eq = v.iter().filter(|y| *y == x).count() as f64;
            less + (eq + 1.0) / 2.0
        })
        .collect()
}

/// Two-sided exact Wilcoxon p by visiting all 2ⁿ sign patterns of the
/// non-zero differences: `min(1, 2·min(#{S ≤ W+}, #{S ≥ W+}) / 2ⁿ)`.
pub fn wilcoxon_enumerate(d: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = d.iter().copied().filter(|v| *v != 0.0).collect();
    let n = d.len();
    let ranks = count_ranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let twice: Vec<u64> = ranks.iter().map(|r| (r * 2.0) as u64).collect();
    let obs: u64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| twice[i]).sum();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1u64 << n) {
        let s: u64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| twice[i]).sum();
        le += u64::from(s <= obs);
        ge += u64::from(s >= obs);
    }
    let all = 2f64.powi(n as i32);
    (obs as f64 / 2.0, (2.0 * (le.min(ge) as f64) / all).min(1.0))
}

/// Sign-flip Monte-Carlo p of W+ (two-sided, distance from the null mean).
pub fn wilcoxon_signflip(d: &[f64], draws: usize, rng: &mut ChaCha8Rng) -> f64 {
    let d: Vec<f64> = d.iter().copied().filter(|v| *v != 0.0).collect();
    let ranks = count_ranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let total: f64 = ranks.iter().sum();
    let mean = total / 2.0;
    let obs: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let dev = (obs - mean).abs();
    let mut hits = 0usize;
    for _ in 0..draws {
        let s: f64 = ranks.iter().filter(|_| rng.random::<bool>()).sum();
        if (s - mean).abs() >= dev - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / draws as f64
}

/// Friedman χ² without tie correction (continuous data).
pub fn friedman_chi2(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len() as f64;
    let k = rows[0].len();
    let mut sums = vec![0.0; k];
    for r in rows {
        for (s, v) in sums.iter_mut().zip(count_ranks(r)) {
            *s += v;
        }
    }
    let kf = k as f64;
    12.0 / (n * kf * (kf + 1.0)) * sums.iter().map(|s| s * s).sum::<f64>() - 3.0 * n * (kf + 1.0)
}

/// Permutation p of the Friedman statistic under within-row shuffling.
pub fn friedman_permutation(rows: &[Vec<f64>], draws: usize, rng: &mut ChaCha8Rng) -> f64 {
    let obs = friedman_chi2(rows);
    let mut work: Vec<Vec<f64>> = rows.to_vec();
    let mut hits = 0usize;
    for _ in 0..draws {
        for r in work.iter_mut() {
            r.shuffle(rng);
        }
        if friedman_chi2(&work) >= obs - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / draws as f64
}

/// Two-sided paired t-test p.
pub fn paired_t_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let t = mean / (sd / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).unwrap();
    2.0 * dist.sf(t.abs())
}

/// Monte-Carlo draws of the studentized range `range(Z₁..Z_k) / √(χ²_ν/ν)`.
pub fn studentized_range_draws(k: usize, df: f64, draws: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let chi = ChiSquared::new(df).unwrap();
    (0..draws)
        .map(|_| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for _ in 0..k {
                let z: f64 = StandardNormal.sample(rng);
                lo = lo.min(z);
                hi = hi.max(z);
            }
            let s = (chi.sample(rng) / df).sqrt();
            (hi - lo) / s
        })
        .collect()
}

pub fn normal_sample(n: usize, mean: f64, sd: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            mean + sd * z
        })
        .collect()
}
