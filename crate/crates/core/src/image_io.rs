//! Image decoding, grayscale conversion, canonical cropping and synthetic
//! test images.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use image::{DynamicImage, GrayImage as Luma8Image};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::RealMatrix;

/// Smallest side accepted after cropping; two power-of-two box scales fit.
pub const MIN_SIDE: usize = 8;

/// Side length that every image is normalized to before analysis.
pub const CANONICAL_SIDE: usize = 256;

/// Grayscale intensities in [0, 1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pixels: RealMatrix,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        let pixels = RealMatrix::new(height, width, data)?;
        Self::from_matrix(pixels)
    }

    pub fn from_matrix(pixels: RealMatrix) -> Result<Self> {
        if let Some(bad) = pixels
            .as_slice()
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::Argument(format!(
                "gray intensity {bad} outside [0, 1]"
            )));
        }
        Ok(Self { pixels })
    }

    pub fn width(&self) -> usize {
        self.pixels.cols()
    }

    pub fn height(&self) -> usize {
        self.pixels.rows()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels.get(y, x)
    }

    pub fn data(&self) -> &[f64] {
        self.pixels.as_slice()
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.pixels
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.pixels
    }
}

/// Decodes a PNG or JPEG file to luminance using Rec. 601 weights.
pub fn load_grayscale(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_grayscale(&bytes).map_err(|message| Error::Format {
        path: path.to_path_buf(),
        message,
    })
}

pub(crate) fn decode_grayscale(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let decoded = image::load_from_memory(bytes).map_err(|e| e.to_string())?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let data: Vec<f64> = match &decoded {
        DynamicImage::ImageLuma8(buf) => buf.as_raw().iter().map(|&v| f64::from(v) / 255.0).collect(),
        DynamicImage::ImageLumaA8(_) => decoded
            .to_luma8()
            .as_raw()
            .iter()
            .map(|&v| f64::from(v) / 255.0)
            .collect(),
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) => decoded
            .to_luma16()
            .as_raw()
            .iter()
            .map(|&v| f64::from(v) / 65535.0)
            .collect(),
        DynamicImage::ImageRgb16(_) | DynamicImage::ImageRgba16(_) => decoded
            .to_rgb16()
            .as_raw()
            .chunks_exact(3)
            .map(|p| luma(u64::from(p[0]), u64::from(p[1]), u64::from(p[2]), 65535))
            .collect(),
        _ => decoded
            .to_rgb8()
            .as_raw()
            .chunks_exact(3)
            .map(|p| luma(u64::from(p[0]), u64::from(p[1]), u64::from(p[2]), 255))
            .collect(),
    };
    GrayImage::new(w, h, data).map_err(|e| e.to_string())
}

// Integer weights keep white at exactly 1.0.
fn luma(r: u64, g: u64, b: u64, full_scale: u64) -> f64 {
    (299 * r + 587 * g + 114 * b) as f64 / (1000 * full_scale) as f64
}

/// Writes an image as 8-bit grayscale PNG, rounding to the nearest level.
pub fn save_png(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let raw = img
        .data()
        .iter()
        .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    write_luma8(img.width(), img.height(), raw, path)
}

/// Writes any real matrix (e.g. a signed residual) as an 8-bit PNG after
/// min-max normalization.
pub fn save_png_normalized(m: &RealMatrix, path: impl AsRef<Path>) -> Result<()> {
    let img = GrayImage::from_matrix(m.min_max_normalized())?;
    save_png(&img, path)
}

fn write_luma8(width: usize, height: usize, raw: Vec<u8>, path: &Path) -> Result<()> {
    let buf = Luma8Image::from_raw(width as u32, height as u32, raw)
        .ok_or_else(|| Error::Argument("pixel buffer does not match dimensions".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::Format {
                path: path.to_path_buf(),
                message: other.to_string(),
            },
        })
}

/// Crops the central min(width, height) square and resamples it bilinearly
/// to `side`×`side`.
pub fn center_crop_resize(img: &GrayImage, side: usize) -> Result<GrayImage> {
    if side < MIN_SIDE {
        return Err(Error::Argument(format!(
            "target side {side} is below the minimum of {MIN_SIDE}"
        )));
    }
    let crop = img.width().min(img.height());
    let x0 = (img.width() - crop) / 2;
    let y0 = (img.height() - crop) / 2;
    let scale = crop as f64 / side as f64;
    let max = (crop - 1) as f64;

    // Pixel-center mapping; with scale == 1 every sample lands on a source
    // pixel with zero fractional weight, so the resize is an exact identity.
    let coords: Vec<(usize, usize, f64)> = (0..side)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, max);
            let lo = s.floor() as usize;
            let hi = (lo + 1).min(crop - 1);
            (lo, hi, s - lo as f64)
        })
        .collect();

    let out = RealMatrix::from_fn(side, side, |row, col| {
        let (y_lo, y_hi, fy) = coords[row];
        let (x_lo, x_hi, fx) = coords[col];
        let p = |y: usize, x: usize| img.get(x0 + x, y0 + y);
        let top = p(y_lo, x_lo) * (1.0 - fx) + p(y_lo, x_hi) * fx;
        let bottom = p(y_hi, x_lo) * (1.0 - fx) + p(y_hi, x_hi) * fx;
        (top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0)
    });
    GrayImage::from_matrix(out)
}

/// Deterministic synthetic images used as oracles for the estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthKind {
    Constant(f64),
    UniformNoise(u64),
    SierpinskiCarpet(u32),
    Checkerboard(usize),
}

impl FromStr for SynthKind {
    type Err = Error;

    /// Accepts `constant:V`, `noise:SEED`, `carpet:DEPTH` and `checkerboard:CELL`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Argument(format!("synthetic kind `{s}` needs NAME:PARAM")))?;
        let bad = |_| Error::Argument(format!("bad parameter in synthetic kind `{s}`"));
        match name {
            "constant" => Ok(SynthKind::Constant(arg.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?)),
            "noise" | "uniform_noise" => Ok(SynthKind::UniformNoise(arg.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?)),
            "carpet" | "sierpinski_carpet" => Ok(SynthKind::SierpinskiCarpet(arg.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?)),
            "checkerboard" => Ok(SynthKind::Checkerboard(arg.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?)),
            _ => Err(Error::Argument(format!("unknown synthetic kind `{name}`"))),
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthKind::Constant(v) => write!(f, "constant:{v}"),
            SynthKind::UniformNoise(seed) => write!(f, "noise:{seed}"),
            SynthKind::SierpinskiCarpet(depth) => write!(f, "carpet:{depth}"),
            SynthKind::Checkerboard(cell) => write!(f, "checkerboard:{cell}"),
        }
    }
}

pub fn synth_image(kind: SynthKind, side: usize) -> Result<GrayImage> {
    if side == 0 {
        return Err(Error::Argument("side must be positive".into()));
    }
    let pixels = match kind {
        SynthKind::Constant(v) => {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Argument(format!("constant value {v} outside [0, 1]")));
            }
            RealMatrix::filled(side, side, v)
        }
        SynthKind::UniformNoise(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            RealMatrix::from_fn(side, side, |_, _| rng.gen::<f64>())
        }
        SynthKind::SierpinskiCarpet(depth) => {
            let expected = 3usize
                .checked_pow(depth)
                .ok_or_else(|| Error::Argument(format!("carpet depth {depth} too large")))?;
            if side != expected {
                return Err(Error::Argument(format!(
                    "carpet of depth {depth} needs side {expected}, got {side}"
                )));
            }
            RealMatrix::from_fn(side, side, |r, c| if in_carpet(r, c) { 1.0 } else { 0.0 })
        }
        SynthKind::Checkerboard(cell) => {
            if cell == 0 || !side.is_multiple_of(cell) {
                return Err(Error::Argument(format!(
                    "checkerboard cell {cell} does not divide side {side}"
                )));
            }
            RealMatrix::from_fn(side, side, |r, c| ((r / cell + c / cell) % 2) as f64)
        }
    };
    GrayImage::from_matrix(pixels)
}

fn in_carpet(mut r: usize, mut c: usize) -> bool {
    while r > 0 || c > 0 {
        if r % 3 == 1 && c % 3 == 1 {
            return false;
        }
        r /= 3;
        c /= 3;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Rgb, RgbImage};

    fn encode_png(img: DynamicImage) -> Vec<u8> {
        let mut out = std::io::Cursor::new(Vec::new());
        img.write_to(&mut out, image::ImageFormat::Png).unwrap();
        out.into_inner()
    }

    #[test]
    fn white_rgb_is_one() {
        let png = encode_png(DynamicImage::ImageRgb8(RgbImage::from_pixel(2, 2, Rgb([255, 255, 255]))));
        let img = decode_grayscale(&png).unwrap();
        assert!(img.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn pure_red_uses_luma_weight() {
        let png = encode_png(DynamicImage::ImageRgb8(RgbImage::from_pixel(2, 2, Rgb([255, 0, 0]))));
        let img = decode_grayscale(&png).unwrap();
        assert!(img.data().iter().all(|&v| (v - 0.299).abs() < 1e-15));
    }

    #[test]
    fn gray8_rescales_linearly() {
        let png = encode_png(DynamicImage::ImageLuma8(Luma8Image::from_pixel(2, 2, image::Luma([128]))));
        let img = decode_grayscale(&png).unwrap();
        assert!((img.get(0, 0) - 0.50196).abs() < 1e-5);
        assert_eq!(img.get(1, 1), 128.0 / 255.0);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_grayscale("/nonexistent/definitely/missing.png").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn garbage_bytes_are_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("junk.png");
        std::fs::write(&p, b"not an image at all").unwrap();
        assert!(matches!(load_grayscale(&p).unwrap_err(), Error::Format { .. }));
    }

    #[test]
    fn png_round_trip_is_lossless_at_8_bits() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.png");
        let data: Vec<f64> = (0..256).map(|k| k as f64 / 255.0).collect();
        let img = GrayImage::new(16, 16, data).unwrap();
        save_png(&img, &p).unwrap();
        let back = load_grayscale(&p).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn crop_takes_central_columns() {
        // Column index encoded in the value so the crop window is visible.
        let m = RealMatrix::from_fn(60, 100, |_, c| c as f64 / 99.0);
        let img = GrayImage::from_matrix(m).unwrap();
        let out = center_crop_resize(&img, 60).unwrap();
        assert_eq!((out.width(), out.height()), (60, 60));
        assert_eq!(out.get(0, 0), 20.0 / 99.0);
        assert_eq!(out.get(59, 31), 79.0 / 99.0);
    }

    #[test]
    fn resize_of_square_at_same_side_is_identity() {
        let img = synth_image(SynthKind::UniformNoise(3), 256).unwrap();
        assert_eq!(center_crop_resize(&img, 256).unwrap(), img);
    }

    #[test]
    fn resize_preserves_constant() {
        let img = synth_image(SynthKind::Constant(0.5), 37).unwrap();
        for side in [8, 20, 64, 100] {
            let out = center_crop_resize(&img, side).unwrap();
            assert!(out.data().iter().all(|&v| v == 0.5), "side {side}");
        }
    }

    #[test]
    fn resize_rejects_tiny_side() {
        let img = synth_image(SynthKind::Constant(0.5), 16).unwrap();
        assert!(matches!(center_crop_resize(&img, 7), Err(Error::Argument(_))));
    }

    #[test]
    fn carpet_counts() {
        let c1 = synth_image(SynthKind::SierpinskiCarpet(1), 3).unwrap();
        assert_eq!(c1.data().iter().filter(|&&v| v == 1.0).count(), 8);
        assert_eq!(c1.get(1, 1), 0.0);
        let c3 = synth_image(SynthKind::SierpinskiCarpet(3), 27).unwrap();
        assert_eq!(c3.data().iter().filter(|&&v| v == 1.0).count(), 512);
        assert!(synth_image(SynthKind::SierpinskiCarpet(3), 28).is_err());
    }

    #[test]
    fn constant_and_checkerboard() {
        let c = synth_image(SynthKind::Constant(0.5), 16).unwrap();
        assert_eq!(c.data().len(), 256);
        assert!(c.data().iter().all(|&v| v == 0.5));
        assert!(synth_image(SynthKind::Checkerboard(5), 16).is_err());
        let cb = synth_image(SynthKind::Checkerboard(4), 16).unwrap();
        assert_eq!(cb.data().iter().sum::<f64>(), 128.0);
    }

    #[test]
    fn noise_is_reproducible() {
        let a = synth_image(SynthKind::UniformNoise(11), 32).unwrap();
        let b = synth_image(SynthKind::UniformNoise(11), 32).unwrap();
        let c = synth_image(SynthKind::UniformNoise(12), 32).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn synth_kind_parses() {
        assert_eq!("carpet:5".parse::<SynthKind>().unwrap(), SynthKind::SierpinskiCarpet(5));
        assert_eq!("constant:0.25".parse::<SynthKind>().unwrap(), SynthKind::Constant(0.25));
        assert!("spiral:3".parse::<SynthKind>().is_err());
    }
}
