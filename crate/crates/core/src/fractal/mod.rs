//! Fractal and information-theoretic estimators over real matrices.
//!
//! Every box-based estimator tiles the matrix with non-overlapping ε×ε
//! boxes anchored at the top-left corner; partial boxes on the right and
//! bottom edges are dropped at every scale.

mod basic;
mod dimension;
mod entropy;
mod lacunarity;
mod multifractal;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{pairwise_sum, RealMatrix};

pub use basic::{basic_stats, BasicStats};
pub use dimension::{box_count_dimension, BoxCountResult};
pub use entropy::{shannon_entropy, DEFAULT_LEVELS};
pub use lacunarity::{lacunarity, lacunarity_at, LacunarityCurve};
pub use multifractal::{default_q_grid, multifractal_spectrum, MfsCurve};

/// Box side lengths in pixels, strictly increasing, at least three of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleGrid {
    scales: Vec<usize>,
}

impl ScaleGrid {
    pub const MIN_POINTS: usize = 3;

    pub fn new(scales: Vec<usize>) -> Result<Self> {
        if scales.len() < Self::MIN_POINTS {
            return Err(Error::Argument(format!(
                "scale grid needs at least {} scales, got {}",
                Self::MIN_POINTS,
                scales.len()
            )));
        }
        if scales[0] == 0 || scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument(format!(
                "scales must be positive and strictly increasing: {scales:?}"
            )));
        }
        Ok(Self { scales })
    }

    /// {2, 4, 8, …, min_side/2}; for 256 this is {2, …, 128}.
    pub fn powers_of_two(min_side: usize) -> Result<Self> {
        Self::powers_of(2, min_side)
    }

    /// {base, base², …} up to min_side/2.
    pub fn powers_of(base: usize, min_side: usize) -> Result<Self> {
        if base < 2 {
            return Err(Error::Argument(format!("scale base {base} must be at least 2")));
        }
        let mut scales = Vec::new();
        let mut eps = base;
        while eps <= min_side / 2 {
            scales.push(eps);
            eps *= base;
        }
        Self::new(scales)
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub(crate) fn check_fits(&self, m: &RealMatrix) -> Result<()> {
        let largest = *self.scales.last().expect("grid is non-empty");
        if largest > m.rows().min(m.cols()) {
            return Err(Error::Argument(format!(
                "scale {largest} exceeds matrix size {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ScaleGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.scales.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// How a real matrix becomes an on/off mask for box counting.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum ThresholdPolicy {
    /// On where the min-max normalized value is strictly above its mean.
    #[default]
    Mean,
    /// On where the min-max normalized value is strictly above the level.
    Fixed(f64),
    /// On where the raw value is strictly positive (support of a measure).
    Positive,
}

impl ThresholdPolicy {
    /// Pixels equal to the threshold are off, so a constant matrix is all off
    /// under `Mean` and `Fixed`.
    pub fn binarize(&self, m: &RealMatrix) -> Vec<bool> {
        match *self {
            ThresholdPolicy::Positive => m.as_slice().iter().map(|&v| v > 0.0).collect(),
            ThresholdPolicy::Mean => {
                let norm = m.min_max_normalized();
                let mean = pairwise_sum(norm.as_slice()) / norm.len() as f64;
                norm.as_slice().iter().map(|&v| v > mean).collect()
            }
            ThresholdPolicy::Fixed(level) => {
                let norm = m.min_max_normalized();
                norm.as_slice().iter().map(|&v| v > level).collect()
            }
        }
    }
}

impl fmt::Display for ThresholdPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdPolicy::Mean => f.write_str("mean"),
            ThresholdPolicy::Fixed(t) => write!(f, "fixed:{t}"),
            ThresholdPolicy::Positive => f.write_str("positive"),
        }
    }
}

impl FromStr for ThresholdPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mean" => Ok(ThresholdPolicy::Mean),
            "positive" => Ok(ThresholdPolicy::Positive),
            other => match other.strip_prefix("fixed:") {
                Some(level) => level
                    .parse()
                    .map(ThresholdPolicy::Fixed)
                    .map_err(|_| Error::Argument(format!("bad fixed threshold `{other}`"))),
                None => Err(Error::Argument(format!("unknown threshold policy `{other}`"))),
            },
        }
    }
}

/// Box sums of a non-overlapping ε×ε tiling in row-major box order.
pub(crate) fn box_sums(m: &RealMatrix, eps: usize) -> Vec<f64> {
    let (by, bx) = (m.rows() / eps, m.cols() / eps);
    let mut out = Vec::with_capacity(by * bx);
    let mut buf = Vec::with_capacity(eps * eps);
    for i in 0..by {
        for j in 0..bx {
            buf.clear();
            for r in i * eps..(i + 1) * eps {
                buf.extend_from_slice(&m.row(r)[j * eps..(j + 1) * eps]);
            }
            out.push(pairwise_sum(&buf));
        }
    }
    out
}

/// Number of tiling boxes containing at least one on pixel.
pub(crate) fn occupied_boxes(mask: &[bool], rows: usize, cols: usize, eps: usize) -> usize {
    let (by, bx) = (rows / eps, cols / eps);
    let mut count = 0;
    for i in 0..by {
        for j in 0..bx {
            let hit = (i * eps..(i + 1) * eps)
                .any(|r| mask[r * cols + j * eps..r * cols + (j + 1) * eps].iter().any(|&b| b));
            if hit {
                count += 1;
            }
        }
    }
    count
}

/// Ordinary least squares line through (x, y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub r2: f64,
}

pub(crate) fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    // A flat response is fit perfectly by a flat line.
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    LineFit { slope, r2 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_for_256() {
        let g = ScaleGrid::powers_of_two(256).unwrap();
        assert_eq!(g.scales(), &[2, 4, 8, 16, 32, 64, 128]);
        assert_eq!(ScaleGrid::powers_of(3, 243).unwrap().scales(), &[3, 9, 27, 81]);
    }

    #[test]
    fn grid_validation() {
        assert!(ScaleGrid::new(vec![2, 4]).is_err());
        assert!(ScaleGrid::new(vec![2, 8, 4]).is_err());
        assert!(ScaleGrid::new(vec![0, 2, 4]).is_err());
        assert!(ScaleGrid::powers_of_two(8).is_err());
    }

    #[test]
    fn box_sums_drop_edges() {
        let m = RealMatrix::filled(10, 7, 1.0);
        let sums = box_sums(&m, 3);
        assert_eq!(sums, vec![9.0; 6]);
    }

    #[test]
    fn threshold_round_trip() {
        for p in [ThresholdPolicy::Mean, ThresholdPolicy::Positive, ThresholdPolicy::Fixed(0.25)] {
            assert_eq!(p.to_string().parse::<ThresholdPolicy>().unwrap(), p);
        }
    }

    #[test]
    fn fit_line_exact() {
        let fit = fit_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((fit.slope - 2.0).abs() < 1e-15);
        assert_eq!(fit.r2, 1.0);
    }
}
