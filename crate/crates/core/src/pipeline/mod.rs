//! Batch workflow: dataset scan, residual generation, feature calculation,
//! validity assessment and report emission.

pub mod analyze;
pub mod config;
pub mod extract;
pub mod features;
pub mod report;
pub mod run;
pub mod svg;

pub use analyze::{analyze, analyze_rows, AnalysisReport};
pub use config::{Config, FeatureSettings};
pub use extract::{extract_features, scan_images, ExtractSummary};
pub use features::{compute_features, read_feature_file, write_feature_file, FeatureVector, Label};
pub use report::{report, ReportFiles};
pub use run::{run_experiment, RunManifest, RunPaths};
