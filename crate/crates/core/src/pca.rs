//! Per-image PCA: rank-N reconstruction and residual images.
//!
//! The H rows of an image are treated as H samples of dimension W. After
//! column-mean centering, the principal directions are the eigenvectors of
//! the W×W population covariance (equivalently the right-singular vectors of
//! the centered image).

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::image_io::GrayImage;
use crate::matrix::{pairwise_sum, RealMatrix};

/// Recorded in feature metadata: image rows are PCA samples.
pub const ORIENTATION: &str = "rows-as-samples";

/// Eigenvalues below this fraction of the largest are zero.
const RELATIVE_RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PcaDecomposition {
    rows: usize,
    cols: usize,
    column_mean: Vec<f64>,
    /// W × k, column j is u_{j+1}.
    components: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    /// H × k projection coefficients of the centered rows.
    scores: DMatrix<f64>,
    rank: usize,
}

impl PcaDecomposition {
    pub fn column_mean(&self) -> &[f64] {
        &self.column_mean
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Number of stored components, min(H, W). Every count up to this is a
    /// valid argument to [`reconstruct`](Self::reconstruct).
    pub fn component_count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Numerical rank: eigenvalues above the relative tolerance.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.components.column(k).iter().copied().collect()
    }

    pub fn score(&self, row: usize, k: usize) -> f64 {
        self.scores[(row, k)]
    }

    /// Mean image plus the contribution of the top `n` components.
    pub fn reconstruct(&self, n: usize) -> Result<RealMatrix> {
        if n > self.component_count() {
            return Err(Error::Argument(format!(
                "cannot reconstruct with {n} components; decomposition has {}",
                self.component_count()
            )));
        }
        let mut out = RealMatrix::from_fn(self.rows, self.cols, |_, c| self.column_mean[c]);
        if n > 0 {
            let partial = self.scores.columns(0, n) * self.components.columns(0, n).transpose();
            for r in 0..self.rows {
                for c in 0..self.cols {
                    out.set(r, c, out.get(r, c) + partial[(r, c)]);
                }
            }
        }
        Ok(out)
    }

    /// R^(n) = x − x̂^(n) for the image this decomposition came from.
    pub fn residual_of(&self, original: &RealMatrix, n: usize) -> Result<ResidualImage> {
        if original.rows() != self.rows || original.cols() != self.cols {
            return Err(Error::Argument("image shape differs from decomposition".into()));
        }
        let recon = self.reconstruct(n)?;
        let data = RealMatrix::from_fn(self.rows, self.cols, |r, c| {
            original.get(r, c) - recon.get(r, c)
        });
        Ok(ResidualImage {
            data,
            removed_components: n,
        })
    }
}

/// Signed residual after removing the top `removed_components` components.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualImage {
    pub data: RealMatrix,
    pub removed_components: usize,
}

pub fn pca_decompose(img: &GrayImage) -> Result<PcaDecomposition> {
    decompose_matrix(img.matrix())
}

/// Same as [`pca_decompose`] for an arbitrary finite real matrix.
pub fn decompose_matrix(m: &RealMatrix) -> Result<PcaDecomposition> {
    let (h, w) = (m.rows(), m.cols());
    if h < 2 || w < 2 {
        return Err(Error::Argument(format!("PCA needs at least 2x2, got {h}x{w}")));
    }
    m.require_finite("pca_decompose")?;

    let column_mean: Vec<f64> = (0..w).map(|c| column_mean(m, c)).collect();
    let centered = DMatrix::from_fn(h, w, |r, c| m.get(r, c) - column_mean[c]);
    let covariance = centered.tr_mul(&centered) / h as f64;

    let eig = SymmetricEigen::new(covariance);
    let mut order: Vec<usize> = (0..w).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let k = h.min(w);
    let lambda_max = eig.eigenvalues[order[0]].max(0.0);
    let cutoff = lambda_max * RELATIVE_RANK_TOLERANCE;
    let mut eigenvalues = Vec::with_capacity(k);
    let mut components = DMatrix::zeros(w, k);
    for (j, &src) in order.iter().take(k).enumerate() {
        let lambda = eig.eigenvalues[src];
        eigenvalues.push(if lambda > cutoff { lambda } else { 0.0 });
        let mut v = eig.eigenvectors.column(src).clone_owned();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.neg_mut();
            }
        }
        components.set_column(j, &v);
    }
    let rank = eigenvalues.iter().filter(|&&l| l > 0.0).count();
    let scores = &centered * &components;

    Ok(PcaDecomposition {
        rows: h,
        cols: w,
        column_mean,
        components,
        eigenvalues,
        scores,
        rank,
    })
}

fn column_mean(m: &RealMatrix, c: usize) -> f64 {
    let column: Vec<f64> = (0..m.rows()).map(|r| m.get(r, c)).collect();
    // A constant column must center to exact zeros.
    if column.iter().all(|&v| v == column[0]) {
        return column[0];
    }
    pairwise_sum(&column) / column.len() as f64
}

/// Convenience: decompose and subtract the rank-`n` reconstruction.
pub fn residual(img: &GrayImage, n: usize) -> Result<ResidualImage> {
    let dec = pca_decompose(img)?;
    dec.residual_of(img.matrix(), n)
}
