//! Hand-written SVG 1.1 charts.
//!
//! Output depends only on the inputs: coordinates are printed with two
//! decimals and element order follows input order, so identical inputs give
//! byte-identical documents.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::series::{check_same_layout, LabelSeries, ScoreSeries};

const WIDTH: f64 = 960.0;
const PANEL_HEIGHT: f64 = 240.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 40.0;
const SWEEP_HEIGHT: f64 = 360.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    /// `(legend name, series)` pairs drawn in order.
    pub series: Vec<(String, ScoreSeries)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    /// Panels are stacked vertically and share the frame axis.
    pub panels: Vec<Panel>,
    /// Frames labelled 1 are shaded in every panel.
    pub labels: Option<LabelSeries>,
    pub x_label: String,
    pub y_label: String,
}

/// Maximal runs of label 1 as half-open `[start, end)` frame ranges.
pub fn abnormal_runs(labels: &[u8]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &l) in labels.iter().enumerate() {
        match (l == 1, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, labels.len()));
    }
    runs
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Value range padded so a constant series still maps to a finite line.
fn value_range<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, height: f64, mapping: &[&str]) {
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    for line in mapping {
        writeln!(out, "<!-- {line} -->").unwrap();
    }
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {WIDTH:.0} {height:.0}\">"
    )
    .unwrap();
    writeln!(
        out,
        "<rect class=\"background\" x=\"0\" y=\"0\" width=\"{WIDTH:.0}\" height=\"{height:.0}\" fill=\"white\"/>"
    )
    .unwrap();
}

fn axes(out: &mut String, left: f64, top: f64, right: f64, bottom: f64, lo: f64, hi: f64) {
    writeln!(
        out,
        "<rect class=\"axes\" x=\"{left:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        right - left,
        bottom - top
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" text-anchor=\"end\">{}</text>",
        left - 4.0,
        top + 10.0,
        fmt_tick(hi)
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" text-anchor=\"end\">{}</text>",
        left - 4.0,
        bottom,
        fmt_tick(lo)
    )
    .unwrap();
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Frame-indexed curves, one panel per entry in `spec.panels`.
pub fn emit_curve_plot(spec: &PlotSpec) -> Result<String> {
    let first = spec
        .panels
        .first()
        .and_then(|p| p.series.first())
        .map(|(_, s)| s)
        .ok_or(Error::EmptySeries)?;
    let layout = first.layout();
    if layout.total() == 0 {
        return Err(Error::EmptySeries);
    }
    for panel in &spec.panels {
        if panel.series.is_empty() {
            return Err(Error::EmptySeries);
        }
        for (_, s) in &panel.series {
            check_same_layout(layout, s.layout())?;
        }
    }
    if let Some(labels) = &spec.labels {
        check_same_layout(layout, labels.layout())?;
    }

    let n = layout.total();
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let height = PANEL_HEIGHT * spec.panels.len() as f64;
    // frame i occupies [i, i+1) in frame units; its point sits at the centre
    let x_edge = |i: usize| MARGIN_LEFT + i as f64 * plot_w / n as f64;
    let x_point = |i: usize| MARGIN_LEFT + (i as f64 + 0.5) * plot_w / n as f64;

    let mut out = String::new();
    header(
        &mut out,
        height,
        &[
            &format!("frames: {n}; panels: {}; panel height {PANEL_HEIGHT:.0}", spec.panels.len()),
            "x: frame i -> 64 + (i + 0.5) * 880 / frames",
            "y: value v -> panel_top + 28 + 172 * (1 - (v - lo) / (hi - lo)), lo/hi = panel value range",
            "shaded rects: maximal runs of label 1; dashed lines: segment boundaries",
        ],
    );

    let runs = spec
        .labels
        .as_ref()
        .map(|l| abnormal_runs(l.labels()))
        .unwrap_or_default();
    for (p, panel) in spec.panels.iter().enumerate() {
        let top = p as f64 * PANEL_HEIGHT + MARGIN_TOP;
        let bottom = top + plot_h;
        let (lo, hi) = value_range(panel.series.iter().flat_map(|(_, s)| s.values()));
        let y = |v: f64| top + plot_h * (1.0 - (v - lo) / (hi - lo));

        writeln!(out, "<g class=\"panel\">").unwrap();
        writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>",
            MARGIN_LEFT,
            top - 8.0,
            escape(&panel.title)
        )
        .unwrap();
        for &(s, e) in &runs {
            writeln!(
                out,
                "<rect class=\"abnormal\" x=\"{:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{plot_h:.2}\" fill=\"#d62728\" fill-opacity=\"0.25\"/>",
                x_edge(s),
                x_edge(e) - x_edge(s)
            )
            .unwrap();
        }
        for b in layout.boundaries() {
            let x = x_edge(b);
            writeln!(
                out,
                "<line class=\"separator\" x1=\"{x:.2}\" y1=\"{top:.2}\" x2=\"{x:.2}\" y2=\"{bottom:.2}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>"
            )
            .unwrap();
        }
        axes(
            &mut out,
            MARGIN_LEFT,
            top,
            WIDTH - MARGIN_RIGHT,
            bottom,
            lo,
            hi,
        );
        for (k, (name, s)) in panel.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let points: Vec<String> = s
                .values()
                .iter()
                .enumerate()
                .map(|(i, &v)| format!("{:.2},{:.2}", x_point(i), y(v)))
                .collect();
            writeln!(
                out,
                "<polyline class=\"series\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>",
                points.join(" ")
            )
            .unwrap();
            writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" fill=\"{color}\" text-anchor=\"end\">{}</text>",
                WIDTH - MARGIN_RIGHT - 4.0,
                top + 12.0 * (k + 1) as f64,
                escape(name)
            )
            .unwrap();
        }
        writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            MARGIN_LEFT + plot_w / 2.0,
            bottom + 28.0,
            escape(&spec.x_label)
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"16\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
            top + plot_h / 2.0,
            top + plot_h / 2.0,
            escape(&spec.y_label)
        )
        .unwrap();
        writeln!(out, "</g>").unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// AUC against block size, one polyline per `(name, aucs)` curve. Non-finite
/// entries (sizes that failed) are left out of the polyline.
pub fn emit_sweep_plot(sizes: &[usize], curves: &[(String, Vec<f64>)]) -> Result<String> {
    if sizes.len() < 2 {
        return Err(Error::TooFewPoints { got: sizes.len() });
    }
    if curves.is_empty() {
        return Err(Error::EmptySeries);
    }
    for (name, values) in curves {
        if values.len() != sizes.len() {
            return Err(Error::ShapeMismatch(format!(
                "curve {name:?} has {} values for {} block sizes",
                values.len(),
                sizes.len()
            )));
        }
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = SWEEP_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let smin = *sizes.iter().min().unwrap() as f64;
    let smax = *sizes.iter().max().unwrap() as f64;
    let x = |s: usize| {
        if smax > smin {
            MARGIN_LEFT + (s as f64 - smin) / (smax - smin) * plot_w
        } else {
            MARGIN_LEFT + plot_w / 2.0
        }
    };
    let (lo, hi) = value_range(curves.iter().flat_map(|(_, v)| v));
    let y = |v: f64| MARGIN_TOP + plot_h * (1.0 - (v - lo) / (hi - lo));

    let mut out = String::new();
    header(
        &mut out,
        SWEEP_HEIGHT,
        &[
            &format!("block sizes: {sizes:?}"),
            &format!("x: size s -> 64 + (s - {smin}) / ({smax} - {smin}) * 880"),
            &format!("y: auc v -> 28 + 292 * (1 - (v - {lo}) / ({hi} - {lo}))"),
        ],
    );
    axes(
        &mut out,
        MARGIN_LEFT,
        MARGIN_TOP,
        WIDTH - MARGIN_RIGHT,
        MARGIN_TOP + plot_h,
        lo,
        hi,
    );
    for &s in sizes {
        writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" text-anchor=\"middle\">{s}</text>",
            x(s),
            MARGIN_TOP + plot_h + 14.0
        )
        .unwrap();
    }
    for (k, (name, values)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = sizes
            .iter()
            .zip(values)
            .filter(|(_, v)| v.is_finite())
            .map(|(&s, &v)| format!("{:.2},{:.2}", x(s), y(v)))
            .collect();
        writeln!(
            out,
            "<polyline class=\"series\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.join(" ")
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" fill=\"{color}\" text-anchor=\"end\">{}</text>",
            WIDTH - MARGIN_RIGHT - 4.0,
            MARGIN_TOP + 12.0 * (k + 1) as f64,
            escape(name)
        )
        .unwrap();
    }
    writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">block size</text>",
        MARGIN_LEFT + plot_w / 2.0,
        SWEEP_HEIGHT - 8.0
    )
    .unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}
