use crate::error::{Error, Result};
use crate::matrix::RealMatrix;

pub const DEFAULT_LEVELS: usize = 256;

// Absorbs representation error when a value sits exactly on a level, e.g.
// (k/255)·255 evaluating to k − 1 ulp.
const LEVEL_SNAP: f64 = 1e-9;

/// Shannon entropy in bits of the histogram of `levels` equal-width bins
/// over the min-max range. A constant matrix has entropy 0.
pub fn shannon_entropy(m: &RealMatrix, levels: usize) -> Result<f64> {
    if levels < 2 {
        return Err(Error::Argument(format!("entropy needs at least 2 levels, got {levels}")));
    }
    m.require_finite("shannon_entropy")?;
    if m.is_empty() {
        return Err(Error::Argument("entropy of an empty matrix".into()));
    }
    let (lo, hi) = m.min_max();
    let range = hi - lo;
    let top = (levels - 1) as f64;
    let mut hist = vec![0usize; levels];
    for &v in m.as_slice() {
        let bin = if range > 0.0 {
            (((v - lo) / range * top) + LEVEL_SNAP).floor().min(top) as usize
        } else {
            0
        };
        hist[bin] += 1;
    }
    let total = m.len() as f64;
    let h = hist
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}
