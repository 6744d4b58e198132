use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{pairwise_sum, RealMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasicStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

pub fn basic_stats(m: &RealMatrix) -> Result<BasicStats> {
    if m.len() < 2 {
        return Err(Error::Argument("basic statistics need at least 2 elements".into()));
    }
    m.require_finite("basic_stats")?;
    let n = m.len() as f64;
    let mean = pairwise_sum(m.as_slice()) / n;
    let sq: Vec<f64> = m.as_slice().iter().map(|v| (v - mean) * (v - mean)).collect();
    let std = (pairwise_sum(&sq) / n).sqrt();
    Ok(BasicStats { mean, std })
}
