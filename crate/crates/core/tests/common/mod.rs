//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::path::Path;

use lowcorr::image_io::{save_png, synth_image, GrayImage, SynthKind};
use lowcorr::RealMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// sup |F_a - F_b| evaluated at every sample point, O(n^2).
pub fn brute_force_ks(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    a.iter()
        .chain(b)
        .map(|&x| (ecdf(a, x) - ecdf(b, x)).abs())
        .fold(0.0, f64::max)
}

/// Occupied-box count by direct enumeration of every box.
pub fn brute_force_boxes(m: &RealMatrix, eps: usize, on: impl Fn(f64) -> bool) -> usize {
    let mut count = 0;
    for br in 0..m.rows() / eps {
        for bc in 0..m.cols() / eps {
            let hit = (0..eps).any(|r| (0..eps).any(|c| on(m.get(br * eps + r, bc * eps + c))));
            count += usize::from(hit);
        }
    }
    count
}

/// Naive accumulation of mean and population variance.
pub fn naive_mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let (s, s2) = v.iter().fold((0.0, 0.0), |(s, s2), &x| (s + x, s2 + x * x));
    let mean = s / n;
    (mean, s2 / n - mean * mean)
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> RealMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RealMatrix::from_fn(rows, cols, |_, _| rng.gen::<f64>())
}

/// Smooth gradient plus noise, a crude stand-in for a photograph.
pub fn textured_image(side: usize, seed: u64, noise: f64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = rng.gen_range(1.0..4.0);
    let m = RealMatrix::from_fn(side, side, |r, c| {
        let base = 0.5 + 0.3 * ((r as f64 / side as f64) * f).sin() * ((c as f64 / side as f64) * f).cos();
        (base + noise * (rng.gen::<f64>() - 0.5)).clamp(0.0, 1.0)
    });
    GrayImage::from_matrix(m).unwrap()
}

/// Writes `count` PNGs named img_XX.png; odd indices are noisier when `noisy` is set.
pub fn write_dataset(dir: &Path, count: usize, side: usize, seed: u64, noise: f64) {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..count {
        let img = textured_image(side, seed * 1000 + i as u64, noise);
        save_png(&img, dir.join(format!("img_{i:02}.png"))).unwrap();
    }
}

pub fn write_synth(dir: &Path, kinds: &[SynthKind], side: usize) {
    std::fs::create_dir_all(dir).unwrap();
    for (i, &k) in kinds.iter().enumerate() {
        save_png(&synth_image(k, side).unwrap(), dir.join(format!("s_{i:02}.png"))).unwrap();
    }
}
