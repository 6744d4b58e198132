//! Dataset scan, residual generation and feature calculation.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::FeatureSettings;
use super::features::{compute_features, read_feature_file, write_feature_file, FeatureVector, Label};
use crate::error::{Error, Result};
use crate::image_io::{center_crop_resize, decode_grayscale, save_png_normalized};
use crate::pca::decompose_matrix;

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];
const HASH_PREFIX_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedImage {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractSummary {
    pub output: PathBuf,
    pub images_found: usize,
    pub images_selected: usize,
    pub rows_total: usize,
    pub rows_new: usize,
    pub skipped: Vec<SkippedImage>,
}

/// Image files under `dir`, recursively, sorted by relative path.
pub fn scan_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let entries = std::fs::read_dir(&d).map_err(|e| Error::io(&d, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&d, e))?;
            let path = entry.path();
            let ft = entry.file_type().map_err(|e| Error::io(&path, e))?;
            if ft.is_dir() {
                stack.push(path);
            } else if has_image_extension(&path) {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn has_image_extension(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

/// Relative path plus a content-hash prefix, e.g. `a/b.png#3f2c91d0e4b7`.
pub fn image_id(root: &Path, path: &Path, bytes: &[u8]) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    let rel = rel
        .components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/");
    let digest = hex::encode(Sha256::digest(bytes));
    format!("{rel}#{}", &digest[..HASH_PREFIX_LEN])
}

fn validate_components(n_list: &[usize], settings: &FeatureSettings) -> Result<Vec<usize>> {
    if n_list.is_empty() {
        return Err(Error::Argument("component list is empty".into()));
    }
    let limit = settings.max_components.min(settings.side);
    if let Some(&bad) = n_list.iter().find(|&&n| n > limit) {
        return Err(Error::Argument(format!(
            "component count {bad} exceeds the maximum of {limit}"
        )));
    }
    Ok(n_list.iter().copied().collect::<BTreeSet<_>>().into_iter().collect())
}

enum ImageOutcome {
    Rows(Vec<FeatureVector>),
    Skipped(SkippedImage),
}

/// Extracts features for every image and component count, merging with any
/// rows already present in `out`.
pub fn extract_features(
    dataset_dir: &Path,
    label: Label,
    n_list: &[usize],
    settings: &FeatureSettings,
    out: &Path,
) -> Result<ExtractSummary> {
    let n_list = validate_components(n_list, settings)?;
    settings.scale_grid()?;
    let mut files = scan_images(dataset_dir)?;
    if files.is_empty() {
        return Err(Error::Argument(format!(
            "no PNG or JPEG images under {}",
            dataset_dir.display()
        )));
    }
    let images_found = files.len();
    if let Some(limit) = settings.max_images {
        if limit < files.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            files.shuffle(&mut rng);
            files.truncate(limit);
            files.sort();
        }
    }

    let existing = if out.exists() {
        read_feature_file(out)?
    } else {
        Vec::new()
    };
    let done: HashSet<(String, usize)> = existing.iter().map(FeatureVector::key).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers)
        .build()
        .map_err(|e| Error::Argument(format!("cannot build worker pool: {e}")))?;
    let outcomes: Vec<ImageOutcome> = pool.install(|| {
        files
            .par_iter()
            .map(|path| process_image(dataset_dir, path, label, &n_list, settings, &done))
            .collect()
    });

    let mut rows = existing;
    let mut skipped = Vec::new();
    let mut rows_new = 0;
    for outcome in outcomes {
        match outcome {
            ImageOutcome::Rows(r) => {
                rows_new += r.len();
                rows.extend(r);
            }
            ImageOutcome::Skipped(s) => {
                log::warn!("skipping {}: {}", s.path.display(), s.reason);
                skipped.push(s);
            }
        }
    }
    if rows_new > 0 || !out.exists() {
        write_feature_file(out, &rows)?;
    }
    Ok(ExtractSummary {
        output: out.to_path_buf(),
        images_found,
        images_selected: files.len(),
        rows_total: rows.len(),
        rows_new,
        skipped,
    })
}

fn process_image(
    root: &Path,
    path: &Path,
    label: Label,
    n_list: &[usize],
    settings: &FeatureSettings,
    done: &HashSet<(String, usize)>,
) -> ImageOutcome {
    let skip = |reason: String| {
        ImageOutcome::Skipped(SkippedImage {
            path: path.to_path_buf(),
            reason,
        })
    };
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => return skip(format!("read failed: {e}")),
    };
    let id = image_id(root, path, &bytes);
    let todo: Vec<usize> = n_list
        .iter()
        .copied()
        .filter(|&n| !done.contains(&(id.clone(), n)))
        .collect();
    if todo.is_empty() {
        return ImageOutcome::Rows(Vec::new());
    }
    let gray = match decode_grayscale(&bytes) {
        Ok(g) => g,
        Err(e) => return skip(format!("decode failed: {e}")),
    };
    match features_for(&id, label, &gray, &todo, settings) {
        Ok(rows) => ImageOutcome::Rows(rows),
        Err(e) => skip(e.to_string()),
    }
}

fn features_for(
    id: &str,
    label: Label,
    gray: &crate::image_io::GrayImage,
    todo: &[usize],
    settings: &FeatureSettings,
) -> Result<Vec<FeatureVector>> {
    let img = center_crop_resize(gray, settings.side)?;
    let decomposition = if todo.iter().any(|&n| n > 0) {
        Some(decompose_matrix(img.matrix())?)
    } else {
        None
    };
    todo.iter()
        .map(|&n| {
            let residual = match &decomposition {
                Some(dec) if n > 0 => dec.residual_of(img.matrix(), n)?.data,
                _ => img.matrix().clone(),
            };
            if let Some(dir) = &settings.dump_dir {
                let name = format!("{}_n{n}.png", id.replace(['/', '#'], "_"));
                save_png_normalized(&residual, dir.join(name))?;
            }
            compute_features(id, label, n, &residual, settings)
        })
        .collect()
}
