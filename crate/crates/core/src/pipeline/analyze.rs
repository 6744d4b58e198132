//! Validity assessment: normality and real-vs-fake KS tests per feature.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{read_feature_file, FeatureVector};
use crate::error::{Error, Result};
use crate::stats::{ks_normality, ks_two_sample, KsResult};

/// Rows per label needed for the normality test.
pub const MIN_NORMALITY_ROWS: usize = 8;
/// Rows per label needed for any comparison at all.
pub const MIN_COMPARISON_ROWS: usize = 2;
pub const HISTOGRAM_BINS: usize = 30;

pub const SCALAR_FEATURES: [&str; 4] = ["FD", "Entropy", "Mean", "Std"];
pub const MFS_STATISTICS: [&str; 4] = ["tau", "alpha", "f_alpha", "d_q"];

fn scalar_value(name: &str, f: &FeatureVector) -> f64 {
    match name {
        "FD" => f.fd,
        "Entropy" => f.entropy_bits,
        "Mean" => f.mean,
        "Std" => f.std,
        _ => unreachable!("unknown scalar feature {name}"),
    }
}

fn mfs_value(stat: &str, f: &FeatureVector, qi: usize) -> Option<f64> {
    let c = f.mfs.as_ref()?;
    Some(match stat {
        "tau" => c.tau[qi],
        "alpha" => c.alpha[qi],
        "f_alpha" => c.f_alpha[qi],
        "d_q" => c.d_q[qi],
        _ => unreachable!("unknown MFS statistic {stat}"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub real: Vec<usize>,
    pub fake: Vec<usize>,
}

impl Histogram {
    fn build(real: &[f64], fake: &[f64], bins: usize) -> Self {
        let all = real.iter().chain(fake).copied();
        let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else if lo.is_finite() {
            (lo - 0.5, lo + 0.5)
        } else {
            (0.0, 1.0)
        };
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
        let count = |vals: &[f64]| {
            let mut h = vec![0; bins];
            for &v in vals {
                let b = (((v - lo) / width).floor() as usize).min(bins - 1);
                h[b] += 1;
            }
            h
        };
        Self {
            edges,
            real: count(real),
            fake: count(fake),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarFeatureKs {
    pub feature: String,
    pub normality_real: Option<KsResult>,
    pub normality_fake: Option<KsResult>,
    pub real_vs_fake: Option<KsResult>,
    pub histogram: Histogram,
    /// Why any of the tests above is missing.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSpectrum {
    pub tau: Vec<f64>,
    pub alpha: Vec<f64>,
    pub f_alpha: Vec<f64>,
    pub d_q: Vec<f64>,
    pub images: usize,
}

/// Everything computed at one removed-component count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSection {
    pub n: usize,
    pub rows_real: usize,
    pub rows_fake: usize,
    pub scalar: Vec<ScalarFeatureKs>,
    /// Per MFS statistic, one entry per q.
    pub mfs_ks: Vec<(String, Vec<Option<KsResult>>)>,
    /// One entry per box scale.
    pub lacunarity_ks: Vec<Option<KsResult>>,
    pub mean_mfs_real: Option<MeanSpectrum>,
    pub mean_mfs_fake: Option<MeanSpectrum>,
    pub mean_lacunarity_real: Vec<Option<f64>>,
    pub mean_lacunarity_fake: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub q_grid: Vec<f64>,
    pub scales: Vec<usize>,
    pub sections: Vec<ComponentSection>,
}

impl AnalysisReport {
    pub fn components(&self) -> Vec<usize> {
        self.sections.iter().map(|s| s.n).collect()
    }

    /// KS D of one MFS statistic, indexed [q][section].
    pub fn mfs_matrix(&self, stat: &str) -> Vec<Vec<Option<f64>>> {
        (0..self.q_grid.len())
            .map(|qi| {
                self.sections
                    .iter()
                    .map(|s| {
                        s.mfs_ks
                            .iter()
                            .find(|(name, _)| name == stat)
                            .and_then(|(_, v)| v.get(qi).copied().flatten())
                            .map(|k| k.statistic_d)
                    })
                    .collect()
            })
            .collect()
    }

    /// KS D of lacunarity, indexed [scale][section].
    pub fn lacunarity_matrix(&self) -> Vec<Vec<Option<f64>>> {
        (0..self.scales.len())
            .map(|si| {
                self.sections
                    .iter()
                    .map(|s| s.lacunarity_ks.get(si).copied().flatten().map(|k| k.statistic_d))
                    .collect()
            })
            .collect()
    }

    pub fn has_mfs(&self) -> bool {
        !self.q_grid.is_empty()
            && self
                .sections
                .iter()
                .any(|s| s.mfs_ks.iter().any(|(_, v)| v.iter().any(Option::is_some)))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Estimation(format!("cannot serialize analysis: {e}")))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }
}

/// Reads two feature files and compares them at each requested N.
pub fn analyze(real: &Path, fake: &Path, n_list: &[usize]) -> Result<AnalysisReport> {
    let real_rows = read_feature_file(real)?;
    let fake_rows = read_feature_file(fake)?;
    analyze_rows(&real_rows, &fake_rows, n_list)
}

pub fn analyze_rows(
    real: &[FeatureVector],
    fake: &[FeatureVector],
    n_list: &[usize],
) -> Result<AnalysisReport> {
    if n_list.is_empty() {
        return Err(Error::Argument("no component counts requested".into()));
    }
    let available = |rows: &[FeatureVector]| -> BTreeSet<usize> {
        rows.iter().map(|r| r.removed_components).collect()
    };
    let (avail_real, avail_fake) = (available(real), available(fake));
    for &n in n_list {
        if !avail_real.contains(&n) || !avail_fake.contains(&n) {
            return Err(Error::Argument(format!(
                "N = {n} not present in both feature files (real has {:?}, fake has {:?})",
                avail_real, avail_fake
            )));
        }
    }

    let q_grid = common_grid(real.iter().chain(fake), |f| f.mfs.as_ref().map(|m| m.q.clone()), "q grid")?;
    let scales = common_grid(real.iter().chain(fake), |f| Some(f.lacunarity.scales.clone()), "scale grid")?;

    let sections = n_list
        .iter()
        .map(|&n| {
            let r: Vec<&FeatureVector> = real.iter().filter(|f| f.removed_components == n).collect();
            let k: Vec<&FeatureVector> = fake.iter().filter(|f| f.removed_components == n).collect();
            section(n, &r, &k, q_grid.len(), scales.len())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AnalysisReport {
        q_grid,
        scales,
        sections,
    })
}

fn common_grid<'a, T: PartialEq + Clone + std::fmt::Debug>(
    rows: impl Iterator<Item = &'a FeatureVector>,
    grid_of: impl Fn(&FeatureVector) -> Option<Vec<T>>,
    what: &str,
) -> Result<Vec<T>> {
    let mut grid: Option<Vec<T>> = None;
    for r in rows {
        if let Some(g) = grid_of(r) {
            match &grid {
                None => grid = Some(g),
                Some(existing) if *existing != g => {
                    return Err(Error::Argument(format!(
                        "feature files disagree on the {what}: {existing:?} vs {g:?}"
                    )))
                }
                _ => {}
            }
        }
    }
    Ok(grid.unwrap_or_default())
}

fn finite(values: impl Iterator<Item = Option<f64>>) -> Vec<f64> {
    values.flatten().filter(|v| v.is_finite()).collect()
}

fn two_sample(a: &[f64], b: &[f64]) -> Option<KsResult> {
    if a.len() < MIN_COMPARISON_ROWS || b.len() < MIN_COMPARISON_ROWS {
        return None;
    }
    ks_two_sample(a, b).ok()
}

fn section(
    n: usize,
    real: &[&FeatureVector],
    fake: &[&FeatureVector],
    q_len: usize,
    scale_len: usize,
) -> Result<ComponentSection> {
    if real.len() < MIN_COMPARISON_ROWS || fake.len() < MIN_COMPARISON_ROWS {
        return Err(Error::Degenerate(format!(
            "N = {n}: need at least {MIN_COMPARISON_ROWS} rows per label, have {} real and {} fake",
            real.len(),
            fake.len()
        )));
    }

    let scalar = SCALAR_FEATURES
        .iter()
        .map(|&name| {
            let a = finite(real.iter().map(|f| Some(scalar_value(name, f))));
            let b = finite(fake.iter().map(|f| Some(scalar_value(name, f))));
            let mut notes = Vec::new();
            let mut normality = |sample: &[f64], label: &str| {
                if sample.len() < MIN_NORMALITY_ROWS {
                    notes.push(format!("{label}: {} rows, normality needs {MIN_NORMALITY_ROWS}", sample.len()));
                    return None;
                }
                match ks_normality(sample) {
                    Ok(r) => Some(r),
                    Err(e) => {
                        notes.push(format!("{label}: {e}"));
                        None
                    }
                }
            };
            let normality_real = normality(&a, "real");
            let normality_fake = normality(&b, "fake");
            let real_vs_fake = two_sample(&a, &b);
            if real_vs_fake.is_none() {
                notes.push("too few finite values for the two-sample test".into());
            }
            ScalarFeatureKs {
                feature: name.to_string(),
                normality_real,
                normality_fake,
                real_vs_fake,
                histogram: Histogram::build(&a, &b, HISTOGRAM_BINS),
                notes,
            }
        })
        .collect();

    let mfs_ks = MFS_STATISTICS
        .iter()
        .map(|&stat| {
            let per_q = (0..q_len)
                .map(|qi| {
                    let a = finite(real.iter().map(|f| mfs_value(stat, f, qi)));
                    let b = finite(fake.iter().map(|f| mfs_value(stat, f, qi)));
                    two_sample(&a, &b)
                })
                .collect();
            (stat.to_string(), per_q)
        })
        .collect();

    let lacunarity_ks = (0..scale_len)
        .map(|si| {
            let a = finite(real.iter().map(|f| f.lacunarity.values.get(si).copied().flatten()));
            let b = finite(fake.iter().map(|f| f.lacunarity.values.get(si).copied().flatten()));
            two_sample(&a, &b)
        })
        .collect();

    Ok(ComponentSection {
        n,
        rows_real: real.len(),
        rows_fake: fake.len(),
        scalar,
        mfs_ks,
        lacunarity_ks,
        mean_mfs_real: mean_spectrum(real, q_len),
        mean_mfs_fake: mean_spectrum(fake, q_len),
        mean_lacunarity_real: mean_lacunarity(real, scale_len),
        mean_lacunarity_fake: mean_lacunarity(fake, scale_len),
    })
}

fn mean_of(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn mean_spectrum(rows: &[&FeatureVector], q_len: usize) -> Option<MeanSpectrum> {
    let curves: Vec<_> = rows.iter().filter_map(|f| f.mfs.as_ref()).collect();
    if curves.is_empty() || q_len == 0 {
        return None;
    }
    let avg = |pick: &dyn Fn(&crate::fractal::MfsCurve) -> &Vec<f64>| -> Vec<f64> {
        (0..q_len)
            .map(|i| curves.iter().map(|c| pick(c)[i]).sum::<f64>() / curves.len() as f64)
            .collect()
    };
    Some(MeanSpectrum {
        tau: avg(&|c| &c.tau),
        alpha: avg(&|c| &c.alpha),
        f_alpha: avg(&|c| &c.f_alpha),
        d_q: avg(&|c| &c.d_q),
        images: curves.len(),
    })
}

fn mean_lacunarity(rows: &[&FeatureVector], scale_len: usize) -> Vec<Option<f64>> {
    (0..scale_len)
        .map(|si| mean_of(&finite(rows.iter().map(|f| f.lacunarity.values.get(si).copied().flatten()))))
        .collect()
}
