//! End-to-end experiment: extract both classes, analyze each N, report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::analyze::analyze;
use super::config::{Config, FeatureSettings};
use super::extract::{extract_features, ExtractSummary};
use super::features::Label;
use super::report::{report, ReportFiles};
use crate::error::{Error, Result};
use crate::pca::ORIENTATION;

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub extract_real_ms: u128,
    pub extract_fake_ms: u128,
    pub analyze_ms: u128,
    pub report_ms: u128,
}

/// Machine-readable record of one run, written as `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub config_sha256: String,
    pub version: &'static str,
    pub pca_orientation: &'static str,
    pub real_dir: PathBuf,
    pub fake_dir: PathBuf,
    pub components: Vec<usize>,
    pub settings: FeatureSettings,
    pub real: ExtractSummary,
    pub fake: ExtractSummary,
    pub analysis: PathBuf,
    pub report: ReportFiles,
    pub timings: Timings,
}

pub struct RunPaths {
    pub real_features: PathBuf,
    pub fake_features: PathBuf,
    pub analysis: PathBuf,
    pub report_dir: PathBuf,
    pub manifest: PathBuf,
}

impl RunPaths {
    pub fn new(out_dir: &Path) -> Self {
        Self {
            real_features: out_dir.join("features_real.csv"),
            fake_features: out_dir.join("features_fake.csv"),
            analysis: out_dir.join("analysis.json"),
            report_dir: out_dir.join("report"),
            manifest: out_dir.join("manifest.json"),
        }
    }
}

pub fn run_experiment(config_path: &Path) -> Result<RunManifest> {
    let bytes = std::fs::read(config_path)
        .map_err(|e| Error::io(config_path, e).in_stage("config"))?;
    let config = Config::load(config_path).map_err(|e| e.in_stage("config"))?;
    run_with_config(&config, config_path, &hex::encode(Sha256::digest(&bytes)))
}

pub fn run_with_config(config: &Config, config_path: &Path, config_sha256: &str) -> Result<RunManifest> {
    for dir in [&config.real_dir, &config.fake_dir] {
        if !dir.is_dir() {
            return Err(Error::Argument(format!("{} is not a directory", dir.display())).in_stage("config"));
        }
    }
    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| Error::io(&config.out_dir, e).in_stage("config"))?;
    let paths = RunPaths::new(&config.out_dir);

    let t = Instant::now();
    let real = extract_features(&config.real_dir, Label::Real, &config.components, &config.features, &paths.real_features)
        .map_err(|e| e.in_stage("extract-real"))?;
    let extract_real_ms = t.elapsed().as_millis();
    log::info!("real: {} rows ({} new), {} skipped", real.rows_total, real.rows_new, real.skipped.len());

    let t = Instant::now();
    let fake = extract_features(&config.fake_dir, Label::Fake, &config.components, &config.features, &paths.fake_features)
        .map_err(|e| e.in_stage("extract-fake"))?;
    let extract_fake_ms = t.elapsed().as_millis();
    log::info!("fake: {} rows ({} new), {} skipped", fake.rows_total, fake.rows_new, fake.skipped.len());

    let t = Instant::now();
    let mut n_list = config.components.clone();
    n_list.sort_unstable();
    n_list.dedup();
    let analysis = analyze(&paths.real_features, &paths.fake_features, &n_list)
        .map_err(|e| e.in_stage("analyze"))?;
    analysis.save(&paths.analysis).map_err(|e| e.in_stage("analyze"))?;
    let analyze_ms = t.elapsed().as_millis();

    let t = Instant::now();
    let files = report(&analysis, &paths.report_dir).map_err(|e| e.in_stage("report"))?;
    let report_ms = t.elapsed().as_millis();

    let manifest = RunManifest {
        config_path: config_path.to_path_buf(),
        config_sha256: config_sha256.to_string(),
        version: env!("CARGO_PKG_VERSION"),
        pca_orientation: ORIENTATION,
        real_dir: config.real_dir.clone(),
        fake_dir: config.fake_dir.clone(),
        components: n_list,
        settings: config.features.clone(),
        real,
        fake,
        analysis: paths.analysis.clone(),
        report: files,
        timings: Timings {
            extract_real_ms,
            extract_fake_ms,
            analyze_ms,
            report_ms,
        },
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Estimation(e.to_string()).in_stage("manifest"))?;
    std::fs::write(&paths.manifest, text).map_err(|e| Error::io(&paths.manifest, e).in_stage("manifest"))?;
    Ok(manifest)
}
