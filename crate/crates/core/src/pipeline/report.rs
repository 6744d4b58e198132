//! CSV tables and SVG figures from an [`AnalysisReport`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::analyze::{AnalysisReport, MeanSpectrum, MFS_STATISTICS};
use super::svg::{heatmap, histogram_overlay, line_chart, Series, FAKE_COLOR, REAL_COLOR};
use crate::error::{Error, Result};
use crate::stats::KsResult;

const P_VALUE_NOTE: &str = "# p-values use the asymptotic Kolmogorov distribution; normality tests plug in the sample mean and std (Lilliefors setting), so their p-values are conservative";

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportFiles {
    pub csv: Vec<PathBuf>,
    pub svg: Vec<PathBuf>,
}

fn cells(r: Option<&KsResult>) -> String {
    match r {
        Some(k) => format!("{:.6},{:.6}", k.statistic_d, k.p_value),
        None => ",".into(),
    }
}

fn residual_label(n: usize) -> String {
    if n == 0 {
        "raw".into()
    } else {
        format!("{n} components")
    }
}

fn write(path: PathBuf, text: &str, into: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    into.push(path);
    Ok(())
}

pub fn report(analysis: &AnalysisReport, out_dir: &Path) -> Result<ReportFiles> {
    if analysis.sections.is_empty() {
        return Err(Error::Argument("analysis has no sections to report".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = ReportFiles::default();

    write(out_dir.join("table_normality.csv"), &normality_table(analysis), &mut files.csv)?;
    write(out_dir.join("table_separation.csv"), &separation_table(analysis), &mut files.csv)?;
    write(out_dir.join("ks_mfs.csv"), &mfs_table(analysis), &mut files.csv)?;
    write(out_dir.join("ks_lacunarity.csv"), &lacunarity_table(analysis), &mut files.csv)?;

    for s in &analysis.sections {
        for f in &s.scalar {
            let h = &f.histogram;
            let svg = histogram_overlay(
                &format!("{} distribution, {}", f.feature, residual_label(s.n)),
                &f.feature,
                &h.edges,
                &[("real", REAL_COLOR, &h.real), ("fake", FAKE_COLOR, &h.fake)],
            );
            let name = format!("hist_{}_n{}.svg", f.feature.to_lowercase(), s.n);
            write(out_dir.join(name), &svg, &mut files.svg)?;
        }

        let spectrum = |m: &Option<MeanSpectrum>, name: &'static str, color: &'static str| {
            m.as_ref().map(|m| Series {
                name,
                color,
                points: m.alpha.iter().copied().zip(m.f_alpha.iter().copied()).collect(),
            })
        };
        let curves: Vec<Series> = [
            spectrum(&s.mean_mfs_real, "real", REAL_COLOR),
            spectrum(&s.mean_mfs_fake, "fake", FAKE_COLOR),
        ]
        .into_iter()
        .flatten()
        .collect();
        if !curves.is_empty() {
            let svg = line_chart(&format!("Mean MFS, {}", residual_label(s.n)), "alpha", "f(alpha)", &curves);
            write(out_dir.join(format!("mfs_n{}.svg", s.n)), &svg, &mut files.svg)?;
        }

        let lac = |vals: &[Option<f64>], name: &'static str, color: &'static str| Series {
            name,
            color,
            points: analysis
                .scales
                .iter()
                .zip(vals)
                .filter_map(|(&e, v)| v.map(|v| (e as f64, v)))
                .collect(),
        };
        let lac_series = [
            lac(&s.mean_lacunarity_real, "real", REAL_COLOR),
            lac(&s.mean_lacunarity_fake, "fake", FAKE_COLOR),
        ];
        if lac_series.iter().any(|l| !l.points.is_empty()) {
            let svg = line_chart(
                &format!("Mean lacunarity, {}", residual_label(s.n)),
                "box size (px)",
                "lacunarity",
                &lac_series,
            );
            write(out_dir.join(format!("lacunarity_n{}.svg", s.n)), &svg, &mut files.svg)?;
        }
    }

    let cols: Vec<String> = analysis.components().iter().map(|n| n.to_string()).collect();
    if analysis.has_mfs() {
        let rows: Vec<String> = analysis.q_grid.iter().map(|q| format!("{q}")).collect();
        for stat in MFS_STATISTICS {
            let svg = heatmap(
                &format!("KS D of {stat} by q and removed components"),
                "removed components N",
                "q",
                &cols,
                &rows,
                &analysis.mfs_matrix(stat),
            );
            write(out_dir.join(format!("heatmap_ks_{stat}.svg")), &svg, &mut files.svg)?;
        }
    }
    let lac = analysis.lacunarity_matrix();
    if lac.iter().flatten().any(Option::is_some) {
        let rows: Vec<String> = analysis.scales.iter().map(|e| e.to_string()).collect();
        let svg = heatmap(
            "KS D of lacunarity by box size and removed components",
            "removed components N",
            "box size",
            &cols,
            &rows,
            &lac,
        );
        write(out_dir.join("heatmap_ks_lacunarity.svg"), &svg, &mut files.svg)?;
    }
    Ok(files)
}

/// One row per (N, feature): normality per label and real vs fake.
pub fn normality_table(a: &AnalysisReport) -> String {
    let mut out = String::from(
        "n,feature,real_normality_d,real_normality_p,fake_normality_d,fake_normality_p,real_vs_fake_d,real_vs_fake_p\n",
    );
    for s in &a.sections {
        for f in &s.scalar {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.n,
                f.feature,
                cells(f.normality_real.as_ref()),
                cells(f.normality_fake.as_ref()),
                cells(f.real_vs_fake.as_ref())
            );
        }
    }
    for s in &a.sections {
        for f in &s.scalar {
            for note in &f.notes {
                let _ = writeln!(out, "# n={} {}: {}", s.n, f.feature, note);
            }
        }
    }
    out.push_str(P_VALUE_NOTE);
    out.push('\n');
    out
}

/// One row per N with real-vs-fake D and p for each scalar feature.
pub fn separation_table(a: &AnalysisReport) -> String {
    let features: Vec<&str> = a.sections[0].scalar.iter().map(|f| f.feature.as_str()).collect();
    let mut out = String::from("residual");
    for f in &features {
        let lower = f.to_lowercase();
        let _ = write!(out, ",{lower}_d,{lower}_p");
    }
    out.push('\n');
    for s in &a.sections {
        out.push_str(&residual_label(s.n));
        for f in &features {
            let ks = s.scalar.iter().find(|x| x.feature == *f).and_then(|x| x.real_vs_fake.as_ref());
            let _ = write!(out, ",{}", cells(ks));
        }
        out.push('\n');
    }
    out.push_str(P_VALUE_NOTE);
    out.push('\n');
    out
}

pub fn mfs_table(a: &AnalysisReport) -> String {
    let mut out = String::from("statistic,q,n,d,p\n");
    for stat in MFS_STATISTICS {
        for (qi, q) in a.q_grid.iter().enumerate() {
            for s in &a.sections {
                let ks = s
                    .mfs_ks
                    .iter()
                    .find(|(name, _)| name == stat)
                    .and_then(|(_, v)| v.get(qi).copied().flatten());
                if let Some(k) = ks {
                    let _ = writeln!(out, "{stat},{q},{},{}", s.n, cells(Some(&k)));
                }
            }
        }
    }
    if !a.has_mfs() {
        out.push_str("# note: no multifractal spectra in the analysis; heatmaps omitted\n");
    }
    out
}

pub fn lacunarity_table(a: &AnalysisReport) -> String {
    let mut out = String::from("scale,n,d,p\n");
    for (si, e) in a.scales.iter().enumerate() {
        for s in &a.sections {
            if let Some(k) = s.lacunarity_ks.get(si).copied().flatten() {
                let _ = writeln!(out, "{e},{},{}", s.n, cells(Some(&k)));
            }
        }
    }
    out
}
