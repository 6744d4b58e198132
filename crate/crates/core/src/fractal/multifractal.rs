//! Multifractal spectrum from the box-mass partition function.
//!
//! For each scale ε the normalized box masses μ_i = s_i / Σ s_i define
//! χ(q, ε) = Σ μ_i^q over occupied boxes. τ(q) is the least-squares slope of
//! ln χ against ln ε, α(q) = dτ/dq by finite differences on the q grid,
//! f(α) = qα − τ and D(q) = τ/(q − 1).

use serde::{Deserialize, Serialize};

use super::{box_sums, fit_line, ScaleGrid};
use crate::error::{Error, Result};
use crate::matrix::{pairwise_sum, RealMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfsCurve {
    pub q: Vec<f64>,
    pub tau: Vec<f64>,
    pub alpha: Vec<f64>,
    pub f_alpha: Vec<f64>,
    pub d_q: Vec<f64>,
    pub r2: Vec<f64>,
    /// Box sizes that entered the regressions.
    pub scales_used: Vec<usize>,
}

/// −5 to 5 in steps of 0.5.
pub fn default_q_grid() -> Vec<f64> {
    (-10..=10).map(|i| i as f64 * 0.5).collect()
}

pub fn multifractal_spectrum(m: &RealMatrix, q_grid: &[f64], grid: &ScaleGrid) -> Result<MfsCurve> {
    check_q_grid(q_grid)?;
    m.require_finite("multifractal_spectrum")?;
    if m.as_slice().iter().any(|&v| v < 0.0) {
        return Err(Error::Argument(
            "multifractal measure must be non-negative; shift signed data by its minimum".into(),
        ));
    }
    grid.check_fits(m)?;

    // ln μ_i of occupied boxes, per usable scale.
    let mut scales_used = Vec::new();
    let mut log_masses: Vec<Vec<f64>> = Vec::new();
    for &eps in grid.scales() {
        let sums = box_sums(m, eps);
        let total = pairwise_sum(&sums);
        if !(total > 0.0) {
            continue;
        }
        let logs: Vec<f64> = sums
            .iter()
            .filter(|&&s| s > 0.0)
            .map(|&s| (s / total).ln())
            .collect();
        if logs.len() < 2 {
            continue;
        }
        scales_used.push(eps);
        log_masses.push(logs);
    }
    if scales_used.len() < ScaleGrid::MIN_POINTS {
        return Err(Error::Estimation(format!(
            "only {} usable scales for the partition function; need {}",
            scales_used.len(),
            ScaleGrid::MIN_POINTS
        )));
    }
    let log_eps: Vec<f64> = scales_used.iter().map(|&e| (e as f64).ln()).collect();

    let mut tau = Vec::with_capacity(q_grid.len());
    let mut r2 = Vec::with_capacity(q_grid.len());
    let mut scratch = Vec::new();
    for &q in q_grid {
        let log_chi: Vec<f64> = log_masses
            .iter()
            .map(|logs| log_sum_exp(logs, q, &mut scratch))
            .collect();
        let fit = fit_line(&log_eps, &log_chi);
        tau.push(fit.slope);
        r2.push(fit.r2);
    }

    let alpha = finite_difference(q_grid, &tau);
    let f_alpha: Vec<f64> = q_grid
        .iter()
        .zip(&alpha)
        .zip(&tau)
        .map(|((q, a), t)| q * a - t)
        .collect();
    let d_q = generalized_dimensions(q_grid, &tau);

    Ok(MfsCurve {
        q: q_grid.to_vec(),
        tau,
        alpha,
        f_alpha,
        d_q,
        r2,
        scales_used,
    })
}

fn check_q_grid(q: &[f64]) -> Result<()> {
    if q.len() < 2 || q.iter().any(|v| !v.is_finite()) || q.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(
            "q grid needs at least two finite, strictly increasing values".into(),
        ));
    }
    if !(q[0] < 0.0 && q[q.len() - 1] > 0.0) {
        return Err(Error::Argument("q grid must include negative and positive moments".into()));
    }
    Ok(())
}

/// ln Σ exp(q · l_i), shifted by the maximum exponent.
fn log_sum_exp(logs: &[f64], q: f64, scratch: &mut Vec<f64>) -> f64 {
    let peak = logs.iter().map(|l| q * l).fold(f64::NEG_INFINITY, f64::max);
    scratch.clear();
    scratch.extend(logs.iter().map(|l| (q * l - peak).exp()));
    peak + pairwise_sum(scratch).ln()
}

/// Central differences inside, one-sided at the ends.
fn finite_difference(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let (lo, hi) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            (y[hi] - y[lo]) / (x[hi] - x[lo])
        })
        .collect()
}

fn generalized_dimensions(q: &[f64], tau: &[f64]) -> Vec<f64> {
    let is_one = |v: f64| (v - 1.0).abs() < 1e-12;
    let raw: Vec<Option<f64>> = q
        .iter()
        .zip(tau)
        .map(|(&q, &t)| if is_one(q) { None } else { Some(t / (q - 1.0)) })
        .collect();
    (0..q.len())
        .map(|i| match raw[i] {
            Some(d) => d,
            None => {
                let left = i.checked_sub(1).and_then(|j| raw[j].map(|d| (q[j], d)));
                let right = raw.get(i + 1).copied().flatten().map(|d| (q[i + 1], d));
                match (left, right) {
                    (Some((ql, dl)), Some((qr, dr))) => dl + (dr - dl) * (q[i] - ql) / (qr - ql),
                    (Some((_, d)), None) | (None, Some((_, d))) => d,
                    (None, None) => f64::NAN,
                }
            }
        })
        .collect()
}
