use serde::{Deserialize, Serialize};

use super::{fit_line, occupied_boxes, ScaleGrid, ThresholdPolicy};
use crate::error::Result;
use crate::matrix::RealMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountResult {
    pub fd: f64,
    pub r2: f64,
    /// Nothing survived binarization; `fd` is 0 by convention.
    pub degenerate: bool,
    /// N(ε) per grid scale.
    pub counts: Vec<usize>,
}

/// Box-counting dimension: least-squares slope of log N(ε) against log(1/ε).
pub fn box_count_dimension(
    m: &RealMatrix,
    grid: &ScaleGrid,
    policy: ThresholdPolicy,
) -> Result<BoxCountResult> {
    m.require_finite("box_count_dimension")?;
    grid.check_fits(m)?;
    let mask = policy.binarize(m);
    let counts: Vec<usize> = grid
        .scales()
        .iter()
        .map(|&eps| occupied_boxes(&mask, m.rows(), m.cols(), eps))
        .collect();

    // Scales whose tiling misses every on pixel (it sits in a dropped edge
    // strip) carry no information about the slope.
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid
        .scales()
        .iter()
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .map(|(&eps, &n)| ((1.0 / eps as f64).ln(), (n as f64).ln()))
        .unzip();

    if xs.len() < 2 {
        return Ok(BoxCountResult {
            fd: 0.0,
            r2: 1.0,
            degenerate: true,
            counts,
        });
    }
    let fit = fit_line(&xs, &ys);
    Ok(BoxCountResult {
        fd: fit.slope,
        r2: fit.r2,
        degenerate: false,
        counts,
    })
}
