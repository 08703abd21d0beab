//! Static SVG scatter plots of complexity metrics against tracker scores.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::summary::MetricTable;
use crate::error::Result;
use crate::rank::{rank, ScoreTable};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;

pub struct Scatter<'a> {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// (sequence name, x, y)
    pub points: &'a [(String, f64, f64)],
    /// Integer ticks, for rank axes.
    pub integer_axes: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        let pad = (lo.abs() * 0.1).max(0.5);
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn tick_label(v: f64, span: f64, integer: bool) -> String {
    if integer || span >= 100.0 {
        format!("{v:.0}")
    } else if span >= 10.0 {
        format!("{v:.1}")
    } else if span >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

fn ticks(lo: f64, hi: f64, integer: bool) -> Vec<f64> {
    if integer {
        let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
        let step = ((b - a) / 10 + 1).max(1);
        (a..=b).step_by(step as usize).map(|v| v as f64).collect()
    } else {
        (0..=4).map(|i| lo + (hi - lo) * f64::from(i) / 4.0).collect()
    }
}

/// Renders one scatter plot. Output depends only on the inputs.
pub fn scatter_svg(plot: &Scatter) -> String {
    let (x_lo, x_hi) = padded_range(plot.points.iter().map(|p| p.1));
    let (y_lo, y_hi) = padded_range(plot.points.iter().map(|p| p.2));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(&plot.title)
    );
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black" fill="none"><path d="M{:.2},{:.2} V{:.2} H{:.2}"/></g>"#,
        LEFT,
        TOP,
        TOP + plot_h,
        LEFT + plot_w
    );

    let _ = writeln!(s, r#"<g class="ticks" fill="black">"#);
    for x in ticks(x_lo, x_hi, plot.integer_axes) {
        let px = sx(x);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 4.0,
            TOP + plot_h + 16.0,
            tick_label(x, x_hi - x_lo, plot.integer_axes)
        );
    }
    for y in ticks(y_lo, y_hi, plot.integer_axes) {
        let py = sy(y);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 4.0,
            LEFT - 6.0,
            py + 4.0,
            tick_label(y, y_hi - y_lo, plot.integer_axes)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16,{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + plot_h / 2.0,
        escape(&plot.y_label)
    );

    let _ = writeln!(s, r##"<g class="points" fill="#1f77b4" fill-opacity="0.8">"##);
    for (name, x, y) in plot.points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4"><title>{}</title></circle>"#,
            sx(*x),
            sy(*y),
            escape(name)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

/// One value scatter and one rank-rank scatter per (metric, score) pair.
/// Metric columns without values are skipped with a warning.
pub fn plot_metrics(
    metrics: &MetricTable,
    scores: &ScoreTable,
    out: &Path,
    metric_columns: &[String],
    score_columns: &[String],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let metric_columns: Vec<String> = if metric_columns.is_empty() {
        metrics.columns.clone()
    } else {
        metric_columns.iter().map(|c| c.to_ascii_lowercase()).collect()
    };
    let score_columns: Vec<String> = if score_columns.is_empty() {
        scores.columns.clone()
    } else {
        score_columns.iter().map(|c| c.to_ascii_lowercase()).collect()
    };

    let mut written = Vec::new();
    for m in &metric_columns {
        let metric = metrics.column(m)?;
        if metric.is_empty() {
            log::warn!("metric column {m} is empty; plot skipped");
            continue;
        }
        for sc in &score_columns {
            let score = scores.column(sc)?;
            let shared = metric.names();
            let score = score.restricted_to(&shared);
            let metric = metric.restricted_to(&score.names());
            if metric.is_empty() {
                log::warn!("no sequences shared by {m} and {sc}; plot skipped");
                continue;
            }
            let points: Vec<(String, f64, f64)> = metric
                .entries()
                .iter()
                .map(|(n, x)| (n.clone(), *x, score.get(n).expect("restricted")))
                .collect();
            let path = out.join(format!("{}_vs_{}.svg", file_stem(m), file_stem(sc)));
            fs::write(
                &path,
                scatter_svg(&Scatter {
                    title: format!("{sc} vs {m}"),
                    x_label: m.clone(),
                    y_label: sc.clone(),
                    points: &points,
                    integer_axes: false,
                }),
            )?;
            written.push(path);

            if metric.len() >= 2 {
                let (mr, sr) = (rank(&metric)?, rank(&score)?);
                let points: Vec<(String, f64, f64)> = mr
                    .iter()
                    .map(|(n, &r)| (n.clone(), r as f64, sr[n] as f64))
                    .collect();
                let path = out.join(format!("{}_vs_{}_ranks.svg", file_stem(m), file_stem(sc)));
                fs::write(
                    &path,
                    scatter_svg(&Scatter {
                        title: format!("{sc} rank vs {m} rank (1 = simplest)"),
                        x_label: format!("{m} rank"),
                        y_label: format!("{sc} rank"),
                        points: &points,
                        integer_axes: true,
                    }),
                )?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
