//! Minimal deterministic SVG charts: histogram overlays, line charts and
//! heatmaps. Coordinates are printed with fixed precision so identical data
//! renders to identical bytes.

use std::fmt::Write;

pub const REAL_COLOR: &str = "#1f77b4";
pub const FAKE_COLOR: &str = "#d62728";

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

pub struct Series<'a> {
    pub name: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    );
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else if a >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let pad = |lo: f64, hi: f64| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (bx, by) = (HEIGHT - BOTTOM, LEFT);
        let _ = writeln!(
            out,
            "<line x1=\"{LEFT}\" y1=\"{bx}\" x2=\"{:.1}\" y2=\"{bx}\" stroke=\"black\"/>\n<line x1=\"{by}\" y1=\"{TOP}\" x2=\"{by}\" y2=\"{bx}\" stroke=\"black\"/>",
            WIDTH - RIGHT
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = self.x0 + t * (self.x1 - self.x0);
            let yv = self.y0 + t * (self.y1 - self.y0);
            let _ = writeln!(
                out,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
                self.px(xv),
                bx + 16.0,
                fmt_tick(xv)
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
                by - 6.0,
                self.py(yv) + 4.0,
                fmt_tick(yv)
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            (LEFT + WIDTH - RIGHT) / 2.0,
            HEIGHT - 14.0,
            escape(xlabel)
        );
        let _ = writeln!(
            out,
            "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
            (TOP + HEIGHT - BOTTOM) / 2.0,
            (TOP + HEIGHT - BOTTOM) / 2.0,
            escape(ylabel)
        );
    }
}

fn legend(out: &mut String, entries: &[(&str, &str)]) {
    for (i, (name, color)) in entries.iter().enumerate() {
        let y = TOP + 8.0 + 16.0 * i as f64;
        let x = WIDTH - RIGHT - 130.0;
        let _ = writeln!(
            out,
            "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"12\" height=\"10\" fill=\"{color}\"/><text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            y - 9.0,
            x + 18.0,
            y,
            escape(name)
        );
    }
}

/// Overlaid histograms sharing bin edges.
pub fn histogram_overlay(title: &str, xlabel: &str, edges: &[f64], series: &[(&str, &str, &[usize])]) -> String {
    let mut out = String::new();
    open(&mut out, title);
    let max = series.iter().flat_map(|s| s.2.iter()).copied().max().unwrap_or(0).max(1);
    let frame = Frame::new(
        edges.first().copied().unwrap_or(0.0),
        edges.last().copied().unwrap_or(1.0),
        0.0,
        max as f64,
    );
    for (_, color, counts) in series {
        for (i, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let (xa, xb) = (frame.px(edges[i]), frame.px(edges[i + 1]));
            let (ya, yb) = (frame.py(c as f64), frame.py(0.0));
            let _ = writeln!(
                out,
                "<rect x=\"{xa:.2}\" y=\"{ya:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\" fill-opacity=\"0.45\"/>",
                (xb - xa).max(0.5),
                yb - ya
            );
        }
    }
    frame.axes(&mut out, xlabel, "count");
    legend(&mut out, &series.iter().map(|s| (s.0, s.1)).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series<'_>]) -> String {
    let mut out = String::new();
    open(&mut out, title);
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let frame = Frame::new(x0, x1, y0, y1);
    for s in series {
        let path: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        if path.is_empty() {
            continue;
        }
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" points=\"{}\"/>",
            s.color,
            path.join(" ")
        );
    }
    frame.axes(&mut out, xlabel, ylabel);
    legend(&mut out, &series.iter().map(|s| (s.name, s.color)).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

// Viridis anchor colors.
const PALETTE: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn color_for(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (PALETTE.len() - 1) as f64;
    let i = (t.floor() as usize).min(PALETTE.len() - 2);
    let f = t - i as f64;
    let (a, b) = (PALETTE[i], PALETTE[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// `values[row][col]`; rows are drawn top to bottom in `row_labels` order.
/// Missing cells are grey. The color scale spans [0, 1].
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, col_labels: &[String], row_labels: &[String], values: &[Vec<Option<f64>>]) -> String {
    let mut out = String::new();
    open(&mut out, title);
    let legend_w = 60.0;
    let cw = (WIDTH - LEFT - RIGHT - legend_w) / col_labels.len().max(1) as f64;
    let ch = (HEIGHT - TOP - BOTTOM) / row_labels.len().max(1) as f64;
    for (r, row) in values.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let fill = v.map(color_for).unwrap_or_else(|| "#cccccc".into());
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"><title>{}</title></rect>",
                LEFT + c as f64 * cw,
                TOP + r as f64 * ch,
                cw,
                ch,
                v.map(|d| format!("{d:.4}")).unwrap_or_else(|| "n/a".into())
            );
        }
    }
    let step = (row_labels.len() / 12).max(1);
    for (r, label) in row_labels.iter().enumerate().step_by(step) {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            LEFT - 6.0,
            TOP + (r as f64 + 0.5) * ch + 4.0,
            escape(label)
        );
    }
    for (c, label) in col_labels.iter().enumerate() {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            LEFT + (c as f64 + 0.5) * cw,
            HEIGHT - BOTTOM + 16.0,
            escape(label)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
        LEFT + (WIDTH - LEFT - RIGHT - legend_w) / 2.0,
        HEIGHT - 14.0,
        escape(xlabel),
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(ylabel)
    );
    let bar_x = WIDTH - RIGHT - 30.0;
    let bar_h = HEIGHT - TOP - BOTTOM;
    for i in 0..50 {
        let t = 1.0 - i as f64 / 49.0;
        let _ = writeln!(
            out,
            "<rect x=\"{bar_x:.1}\" y=\"{:.2}\" width=\"14\" height=\"{:.2}\" fill=\"{}\"/>",
            TOP + i as f64 * bar_h / 50.0,
            bar_h / 50.0 + 0.2,
            color_for(t)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">1</text>\n<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">0</text>",
        bar_x - 4.0,
        TOP + 10.0,
        bar_x - 4.0,
        TOP + bar_h
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_endpoints() {
        assert_eq!(color_for(0.0), "#440154");
        assert_eq!(color_for(1.0), "#fde725");
    }

    #[test]
    fn charts_are_well_formed_and_stable() {
        let s = || {
            line_chart(
                "a<b",
                "x",
                "y",
                &[Series { name: "real", color: REAL_COLOR, points: vec![(0.0, 1.0), (1.0, f64::NAN), (2.0, 3.0)] }],
            )
        };
        let one = s();
        assert_eq!(one, s());
        assert!(one.starts_with("<svg") && one.trim_end().ends_with("</svg>"));
        assert!(one.contains("a&lt;b"));
        let h = heatmap("h", "N", "q", &["24".into()], &["-1".into(), "1".into()], &[vec![Some(0.5)], vec![None]]);
        assert_eq!(h.matches("<title>").count(), 2);
    }
}
