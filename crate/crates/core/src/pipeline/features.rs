//! Per-image feature vectors and their on-disk form: a CSV of scalar
//! features plus a JSON Lines sidecar holding the curve-valued features.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::FeatureSettings;
use crate::error::{Error, Result};
use crate::fractal::{
    basic_stats, box_count_dimension, lacunarity, multifractal_spectrum, shannon_entropy,
    LacunarityCurve, MfsCurve,
};
use crate::matrix::RealMatrix;

/// Column order of the scalar feature file.
pub const CSV_HEADER: [&str; 8] = ["image_id", "label", "n", "fd", "fd_r2", "entropy_bits", "mean", "std"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Fake,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Real => "real",
            Label::Fake => "fake",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Label::Real),
            "fake" => Ok(Label::Fake),
            _ => Err(Error::Argument(format!("label must be `real` or `fake`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub image_id: String,
    pub label: Label,
    /// Principal components removed; 0 is the raw image.
    pub removed_components: usize,
    pub fd: f64,
    pub fd_r2: f64,
    pub fd_degenerate: bool,
    pub entropy_bits: f64,
    pub mean: f64,
    pub std: f64,
    pub lacunarity: LacunarityCurve,
    /// `None` when the shifted residual carries no mass (e.g. a constant image).
    pub mfs: Option<MfsCurve>,
}

impl FeatureVector {
    pub fn key(&self) -> (String, usize) {
        (self.image_id.clone(), self.removed_components)
    }
}

/// Computes every feature of one (raw or residual) matrix.
///
/// Box counting, entropy and the basic statistics see the signed values;
/// lacunarity and the multifractal spectrum see the matrix shifted by its
/// minimum, since both need a non-negative measure.
pub fn compute_features(
    image_id: &str,
    label: Label,
    removed_components: usize,
    m: &RealMatrix,
    settings: &FeatureSettings,
) -> Result<FeatureVector> {
    let grid = settings.scale_grid()?;
    let boxes = box_count_dimension(m, &grid, settings.threshold)?;
    if !boxes.degenerate && boxes.r2 < settings.r2_warning {
        log::warn!(
            "{image_id} n={removed_components}: box-counting fit R² = {:.4} below {}",
            boxes.r2,
            settings.r2_warning
        );
    }
    let entropy_bits = shannon_entropy(m, settings.levels)?;
    let stats = basic_stats(m)?;
    let measure = m.shifted_to_nonnegative();
    let lacunarity = lacunarity(&measure, &grid)?;
    let mfs = match multifractal_spectrum(&measure, &settings.q_grid, &grid) {
        Ok(curve) => Some(curve),
        Err(Error::Estimation(msg)) => {
            log::debug!("{image_id} n={removed_components}: no spectrum ({msg})");
            None
        }
        Err(e) => return Err(e),
    };
    Ok(FeatureVector {
        image_id: image_id.to_string(),
        label,
        removed_components,
        fd: boxes.fd,
        fd_r2: boxes.r2,
        fd_degenerate: boxes.degenerate,
        entropy_bits,
        mean: stats.mean,
        std: stats.std,
        lacunarity,
        mfs,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct ScalarRow {
    image_id: String,
    label: Label,
    n: usize,
    fd: f64,
    fd_r2: f64,
    entropy_bits: f64,
    mean: f64,
    std: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    image_id: String,
    n: usize,
    fd_degenerate: bool,
    lacunarity: LacunarityCurve,
    mfs: Option<MfsCurve>,
}

/// Path of the curve sidecar belonging to a feature CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("curves.jsonl")
}

/// Writes rows sorted by (image_id, n) to the CSV and its sidecar. Files are
/// written next to their destination and renamed into place.
pub fn write_feature_file(path: &Path, rows: &[FeatureVector]) -> Result<()> {
    let mut sorted: Vec<&FeatureVector> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.image_id
            .cmp(&b.image_id)
            .then(a.removed_components.cmp(&b.removed_components))
    });

    let csv_tmp = tmp_path(path);
    {
        let file = File::create(&csv_tmp).map_err(|e| Error::io(&csv_tmp, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        if sorted.is_empty() {
            w.write_record(CSV_HEADER).map_err(|e| csv_error(&csv_tmp, e))?;
        }
        for r in &sorted {
            w.serialize(ScalarRow {
                image_id: r.image_id.clone(),
                label: r.label,
                n: r.removed_components,
                fd: r.fd,
                fd_r2: r.fd_r2,
                entropy_bits: r.entropy_bits,
                mean: r.mean,
                std: r.std,
            })
            .map_err(|e| csv_error(&csv_tmp, e))?;
        }
        w.flush().map_err(|e| Error::io(&csv_tmp, e))?;
    }

    let side = sidecar_path(path);
    let side_tmp = tmp_path(&side);
    {
        let file = File::create(&side_tmp).map_err(|e| Error::io(&side_tmp, e))?;
        let mut w = BufWriter::new(file);
        for r in &sorted {
            let row = CurveRow {
                image_id: r.image_id.clone(),
                n: r.removed_components,
                fd_degenerate: r.fd_degenerate,
                lacunarity: r.lacunarity.clone(),
                mfs: r.mfs.clone(),
            };
            let line = serde_json::to_string(&row)
                .map_err(|e| Error::Estimation(format!("non-serializable curve: {e}")))?;
            writeln!(w, "{line}").map_err(|e| Error::io(&side_tmp, e))?;
        }
        w.flush().map_err(|e| Error::io(&side_tmp, e))?;
    }
    std::fs::rename(&csv_tmp, path).map_err(|e| Error::io(path, e))?;
    std::fs::rename(&side_tmp, &side).map_err(|e| Error::io(&side, e))?;
    Ok(())
}

/// Reads a feature CSV and its sidecar back into feature vectors.
pub fn read_feature_file(path: &Path) -> Result<Vec<FeatureVector>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::parse(path, "unexpected feature file header"));
    }
    let scalars: Vec<ScalarRow> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| csv_error(path, e))?;

    let side = sidecar_path(path);
    let file = File::open(&side).map_err(|e| Error::io(&side, e))?;
    let mut curves: BTreeMap<(String, usize), CurveRow> = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&side, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: CurveRow = serde_json::from_str(&line)
            .map_err(|e| Error::parse(&side, format!("line {}: {e}", i + 1)))?;
        curves.insert((row.image_id.clone(), row.n), row);
    }

    scalars
        .into_iter()
        .map(|s| {
            let c = curves.remove(&(s.image_id.clone(), s.n)).ok_or_else(|| {
                Error::parse(&side, format!("no curves for {} n={}", s.image_id, s.n))
            })?;
            Ok(FeatureVector {
                image_id: s.image_id,
                label: s.label,
                removed_components: s.n,
                fd: s.fd,
                fd_r2: s.fd_r2,
                fd_degenerate: c.fd_degenerate,
                entropy_bits: s.entropy_bits,
                mean: s.mean,
                std: s.std,
                lacunarity: c.lacunarity,
                mfs: c.mfs,
            })
        })
        .collect()
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::parse(path, format!("{other:?}")),
        }
    } else {
        Error::parse(path, e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image_io::{synth_image, SynthKind};

    fn settings() -> FeatureSettings {
        FeatureSettings {
            side: 32,
            ..FeatureSettings::default()
        }
    }

    #[test]
    fn constant_image_features() {
        let img = synth_image(SynthKind::Constant(0.5), 32).unwrap();
        let fv = compute_features("c", Label::Real, 0, img.matrix(), &settings()).unwrap();
        assert!(fv.fd_degenerate);
        assert_eq!(fv.fd, 0.0);
        assert_eq!(fv.entropy_bits, 0.0);
        assert_eq!(fv.std, 0.0);
        assert!(fv.mfs.is_none());
    }

    #[test]
    fn file_round_trip_preserves_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let mut rows = Vec::new();
        for (i, seed) in [3u64, 1, 2].iter().enumerate() {
            let img = synth_image(SynthKind::UniformNoise(*seed), 32).unwrap();
            rows.push(compute_features(&format!("img{i}"), Label::Fake, 0, img.matrix(), &settings()).unwrap());
        }
        let c = synth_image(SynthKind::Constant(0.2), 32).unwrap();
        rows.push(compute_features("const", Label::Fake, 0, c.matrix(), &settings()).unwrap());
        write_feature_file(&path, &rows).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("image_id,label,n,fd,fd_r2,entropy_bits,mean,std\n"));
        let back = read_feature_file(&path).unwrap();
        let ids: Vec<&str> = back.iter().map(|r| r.image_id.as_str()).collect();
        assert_eq!(ids, ["const", "img0", "img1", "img2"]);
        rows.sort_by(|a, b| a.image_id.cmp(&b.image_id));
        assert_eq!(back, rows);
    }

    #[test]
    fn empty_file_keeps_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        write_feature_file(&path, &[]).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap().trim(),
            CSV_HEADER.join(",")
        );
        assert!(read_feature_file(&path).unwrap().is_empty());
    }
}
