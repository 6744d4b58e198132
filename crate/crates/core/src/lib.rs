//! Low-correlation signal features for generated-image detection.
//!
//! Images are reduced to single-channel intensity, their top principal
//! components are removed, and the residual is characterized by box-counting
//! dimension, lacunarity, Shannon entropy, basic statistics and the
//! multifractal spectrum. Kolmogorov–Smirnov tests then measure how well
//! each feature separates real from generated images.

pub mod error;
pub mod fractal;
pub mod image_io;
pub mod matrix;
pub mod pca;
pub mod pipeline;
pub mod stats;

pub use error::{Error, Result};
pub use image_io::GrayImage;
pub use matrix::RealMatrix;
