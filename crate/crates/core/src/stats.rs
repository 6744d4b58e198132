//! Kolmogorov–Smirnov tests for normality and for two-sample comparison.
//!
//! p-values come from the asymptotic Kolmogorov distribution with the
//! Stephens small-sample correction λ = D·(√nₑ + 0.12 + 0.11/√nₑ). The
//! normality test plugs in the sample mean and standard deviation, which is
//! the Lilliefors setting: using plain Kolmogorov critical values there makes
//! the p-values conservative (biased towards 1).

use std::cmp::Ordering;
use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KsKind {
    Normality,
    TwoSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic_d: f64,
    pub p_value: f64,
    pub n1: usize,
    /// Zero for the one-sample normality test.
    pub n2: usize,
    pub kind: KsKind,
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Survival function Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²) of the
/// Kolmogorov distribution.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    const TERM_EPS: f64 = 1e-10;
    if !(lambda > 0.0) {
        return 1.0;
    }
    let q = if lambda < 1.18 {
        // The alternating series converges slowly for small λ; use the
        // theta-function dual form of the same distribution there.
        let mut cdf_sum = 0.0;
        let mut k = 1u32;
        loop {
            let odd = f64::from(2 * k - 1);
            let term = (-(odd * odd) * PI * PI / (8.0 * lambda * lambda)).exp();
            cdf_sum += term;
            if term < TERM_EPS || k > 100 {
                break;
            }
            k += 1;
        }
        1.0 - (2.0 * PI).sqrt() / lambda * cdf_sum
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        let mut k = 1u32;
        loop {
            let kf = f64::from(k);
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += sign * term;
            if term < TERM_EPS || k > 100 {
                break;
            }
            sign = -sign;
            k += 1;
        }
        2.0 * sum
    };
    q.clamp(0.0, 1.0)
}

/// Asymptotic KS p-value for statistic `d` at effective sample size `effective_n`
/// (n for the one-sample test, n1·n2/(n1+n2) for two samples).
pub fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    let root = effective_n.sqrt();
    kolmogorov_q(d * (root + 0.12 + 0.11 / root))
}

fn sorted_finite(sample: &[f64], what: &str) -> Result<Vec<f64>> {
    if sample.iter().any(|v| v.is_nan()) {
        return Err(Error::Argument(format!("{what}: sample contains NaN")));
    }
    if sample.iter().any(|v| v.is_infinite()) {
        return Err(Error::Argument(format!("{what}: sample contains infinities")));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// sup |ECDF_a − ECDF_b| by a merge scan over sorted samples. All copies of a
/// tied value are consumed from both samples before the ECDFs are compared.
pub fn two_sample_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted_finite(a, "ks_two_sample")?;
    let b = sorted_finite(b, "ks_two_sample")?;
    Ok(merge_scan(&a, &b))
}

fn merge_scan(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = match a[i].total_cmp(&b[j]) {
            Ordering::Greater => b[j],
            _ => a[i],
        };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    // Once one sample is exhausted the gap only shrinks towards zero, so the
    // value after the last merge step is already the supremum.
    d
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Argument(format!(
            "two-sample KS needs at least 2 values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let d = two_sample_statistic(a, b)?;
    let (n1, n2) = (a.len(), b.len());
    let effective_n = (n1 as f64 * n2 as f64) / (n1 + n2) as f64;
    Ok(KsResult {
        statistic_d: d,
        p_value: ks_p_value(d, effective_n),
        n1,
        n2,
        kind: KsKind::TwoSample,
    })
}

/// KS distance to a normal with the sample's own mean and population
/// standard deviation.
pub fn ks_normality(a: &[f64]) -> Result<KsResult> {
    const MIN_N: usize = 8;
    if a.len() < MIN_N {
        return Err(Error::Argument(format!(
            "normality KS needs at least {MIN_N} values, got {}",
            a.len()
        )));
    }
    let sorted = sorted_finite(a, "ks_normality")?;
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if !(sd > 0.0) {
        return Err(Error::Degenerate("normality test on a zero-variance sample".into()));
    }
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = normal_cdf((x - mean) / sd);
        let below = i as f64 / n;
        let above = (i + 1) as f64 / n;
        d = d.max(above - cdf).max(cdf - below);
    }
    Ok(KsResult {
        statistic_d: d,
        p_value: ks_p_value(d, n),
        n1: sorted.len(),
        n2: 0,
        kind: KsKind::Normality,
    })
}
