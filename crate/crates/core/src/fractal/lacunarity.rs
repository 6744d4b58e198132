use serde::{Deserialize, Serialize};

use super::{box_sums, ScaleGrid};
use crate::error::{Error, Result};
use crate::matrix::{pairwise_sum, RealMatrix};

/// Λ(ε) per scale; `None` where the mean box mass is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LacunarityCurve {
    pub scales: Vec<usize>,
    pub values: Vec<Option<f64>>,
}

/// Box-mass lacunarity Var(s)/E(s)² + 1 with population variance, for a
/// non-negative matrix.
pub fn lacunarity(m: &RealMatrix, grid: &ScaleGrid) -> Result<LacunarityCurve> {
    check_nonnegative(m)?;
    grid.check_fits(m)?;
    let values = grid
        .scales()
        .iter()
        .map(|&eps| lacunarity_of_sums(&box_sums(m, eps)))
        .collect();
    Ok(LacunarityCurve {
        scales: grid.scales().to_vec(),
        values,
    })
}

/// Lacunarity at a single box size.
pub fn lacunarity_at(m: &RealMatrix, eps: usize) -> Result<Option<f64>> {
    check_nonnegative(m)?;
    if eps == 0 || eps > m.rows().min(m.cols()) {
        return Err(Error::Argument(format!("box size {eps} does not fit the matrix")));
    }
    Ok(lacunarity_of_sums(&box_sums(m, eps)))
}

fn lacunarity_of_sums(sums: &[f64]) -> Option<f64> {
    let n = sums.len() as f64;
    let mean = pairwise_sum(sums) / n;
    if !(mean > 0.0) {
        return None;
    }
    if sums.iter().all(|&s| s == sums[0]) {
        return Some(1.0);
    }
    let sq: Vec<f64> = sums.iter().map(|s| (s - mean) * (s - mean)).collect();
    let var = pairwise_sum(&sq) / n;
    Some(var / (mean * mean) + 1.0)
}

fn check_nonnegative(m: &RealMatrix) -> Result<()> {
    m.require_finite("lacunarity")?;
    if m.as_slice().iter().any(|&v| v < 0.0) {
        return Err(Error::Argument(
            "lacunarity needs a non-negative matrix; shift signed data by its minimum".into(),
        ));
    }
    Ok(())
}
