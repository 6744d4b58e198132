//! Plain-text `key = value` experiment configuration.
//!
//! ```text
//! # paths are relative to this file
//! real_dir = data/ffhq
//! fake_dir = data/fake
//! out_dir = results
//! components = 0,24,26,28,30,32
//! q_grid = -5:5:0.5
//! scales = auto
//! levels = 256
//! threshold = mean
//! workers = 8
//! seed = 7
//! ```

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fractal::{default_q_grid, ScaleGrid, ThresholdPolicy, DEFAULT_LEVELS};
use crate::image_io::CANONICAL_SIDE;

pub const DEFAULT_COMPONENTS: [usize; 6] = [0, 24, 26, 28, 30, 32];
pub const DEFAULT_MAX_COMPONENTS: usize = 32;
pub const DEFAULT_R2_WARNING: f64 = 0.95;

/// Everything that influences the content of a feature file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureSettings {
    pub side: usize,
    pub max_components: usize,
    pub q_grid: Vec<f64>,
    /// `None` selects powers of two up to side/2.
    pub scales: Option<Vec<usize>>,
    pub levels: usize,
    pub threshold: ThresholdPolicy,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Sample at most this many images per directory (seeded).
    pub max_images: Option<usize>,
    pub seed: u64,
    pub r2_warning: f64,
    pub dump_dir: Option<PathBuf>,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        Self {
            side: CANONICAL_SIDE,
            max_components: DEFAULT_MAX_COMPONENTS,
            q_grid: default_q_grid(),
            scales: None,
            levels: DEFAULT_LEVELS,
            threshold: ThresholdPolicy::Mean,
            workers: 0,
            max_images: None,
            seed: 0,
            r2_warning: DEFAULT_R2_WARNING,
            dump_dir: None,
        }
    }
}

impl FeatureSettings {
    pub fn scale_grid(&self) -> Result<ScaleGrid> {
        match &self.scales {
            Some(s) => ScaleGrid::new(s.clone()),
            None => ScaleGrid::powers_of_two(self.side),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub real_dir: PathBuf,
    pub fake_dir: PathBuf,
    pub out_dir: PathBuf,
    pub components: Vec<usize>,
    pub features: FeatureSettings,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base).map_err(|message| Error::parse(path, message))
    }

    /// Parses config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> std::result::Result<Self, String> {
        let mut real_dir = None;
        let mut fake_dir = None;
        let mut out_dir = None;
        let mut components = DEFAULT_COMPONENTS.to_vec();
        let mut f = FeatureSettings::default();
        let resolve = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let err = |e: String| format!("line {}: {key}: {e}", lineno + 1);
            match key {
                "real_dir" => real_dir = Some(resolve(value)),
                "fake_dir" => fake_dir = Some(resolve(value)),
                "out_dir" => out_dir = Some(resolve(value)),
                "components" | "n_list" => components = parse_usize_list(value).map_err(err)?,
                "q_grid" => f.q_grid = parse_q_grid(value).map_err(err)?,
                "scales" => {
                    f.scales = if value == "auto" {
                        None
                    } else {
                        Some(parse_usize_list(value).map_err(err)?)
                    }
                }
                "levels" => f.levels = parse_num(value).map_err(err)?,
                "side" => f.side = parse_num(value).map_err(err)?,
                "max_components" => f.max_components = parse_num(value).map_err(err)?,
                "threshold" => f.threshold = value.parse().map_err(|e: Error| err(e.to_string()))?,
                "workers" => f.workers = parse_num(value).map_err(err)?,
                "seed" => f.seed = parse_num(value).map_err(err)?,
                "max_images" => f.max_images = Some(parse_num(value).map_err(err)?),
                "r2_warning" => f.r2_warning = parse_num(value).map_err(err)?,
                "dump_dir" => f.dump_dir = Some(resolve(value)),
                _ => return Err(format!("line {}: unknown key `{key}`", lineno + 1)),
            }
        }

        Ok(Self {
            real_dir: real_dir.ok_or("missing real_dir")?,
            fake_dir: fake_dir.ok_or("missing fake_dir")?,
            out_dir: out_dir.ok_or("missing out_dir")?,
            components,
            features: f,
        })
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("`{v}`: {e}"))
}

pub fn parse_usize_list(v: &str) -> std::result::Result<Vec<usize>, String> {
    let out: Vec<usize> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_num)
        .collect::<std::result::Result<_, _>>()?;
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

/// Either `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_q_grid(v: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let (start, stop, step): (f64, f64, f64) =
            (parse_num(parts[0])?, parse_num(parts[1])?, parse_num(parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err(format!("bad q range `{v}`"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as i64;
        // Integer multiples keep grid points such as 1.0 exact.
        return Ok((0..=count).map(|i| start + i as f64 * step).collect());
    }
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_num)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\
# experiment
real_dir = real
fake_dir = /abs/fake
out_dir = out   # trailing comment
components = 0, 24, 32
q_grid = -2:2:1
scales = 2,4,8
threshold = fixed:0.4
workers = 3
max_images = 100
";
        let c = Config::parse(text, Path::new("/base")).unwrap();
        assert_eq!(c.real_dir, PathBuf::from("/base/real"));
        assert_eq!(c.fake_dir, PathBuf::from("/abs/fake"));
        assert_eq!(c.components, vec![0, 24, 32]);
        assert_eq!(c.features.q_grid, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(c.features.scales, Some(vec![2, 4, 8]));
        assert_eq!(c.features.threshold, ThresholdPolicy::Fixed(0.4));
        assert_eq!(c.features.workers, 3);
        assert_eq!(c.features.max_images, Some(100));
        assert_eq!(c.features.levels, 256);
    }

    #[test]
    fn defaults_match_experiment() {
        let c = Config::parse("real_dir=a\nfake_dir=b\nout_dir=c\n", Path::new(".")).unwrap();
        assert_eq!(c.components, DEFAULT_COMPONENTS.to_vec());
        assert_eq!(c.features.q_grid, default_q_grid());
        assert_eq!(c.features.scale_grid().unwrap().scales(), &[2, 4, 8, 16, 32, 64, 128]);
    }

    #[test]
    fn default_q_range_matches_builtin_grid() {
        assert_eq!(parse_q_grid("-5:5:0.5").unwrap(), default_q_grid());
    }

    #[test]
    fn rejects_unknown_keys_and_missing_paths() {
        assert!(Config::parse("real_dir=a\nfake_dir=b\nout_dir=c\ncolour=red\n", Path::new(".")).is_err());
        assert!(Config::parse("real_dir=a\n", Path::new(".")).is_err());
        assert!(Config::parse("real_dir a\n", Path::new(".")).is_err());
    }
}
