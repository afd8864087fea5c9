//! Deterministic SVG plots. Coordinates are printed with fixed precision so
//! identical inputs give identical bytes.

use std::fmt::Write as _;

use tangram_core::episode::ConfusionMatrix;
use tangram_core::learning::AccuracySeries;

use crate::error::{SimError, SimResult};

const CELL: f64 = 56.0;
const LABEL_LEFT: f64 = 110.0;
const LABEL_TOP: f64 = 96.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn mismatch(detail: String) -> SimError {
    SimError::Config(format!("plot input: {detail}"))
}

/// Grey level for a cell: white for 0, black for the largest count.
pub fn cell_shade(count: u64, max: u64) -> u8 {
    if max == 0 {
        return 255;
    }
    255 - ((255 * count + max / 2) / max) as u8
}

/// Heatmap of intended (rows) against chosen (columns) figures.
pub fn confusion_svg(cm: &ConfusionMatrix, names: &[String]) -> SimResult<String> {
    let n = cm.size();
    if n == 0 || names.len() != n {
        return Err(mismatch(format!("{} names for a {n}×{n} matrix", names.len())));
    }
    let max = cm.rows().iter().flatten().copied().max().unwrap_or(0);
    let width = LABEL_LEFT + CELL * n as f64 + 16.0;
    let height = LABEL_TOP + CELL * n as f64 + 40.0;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (j, name) in names.iter().enumerate() {
        let x = LABEL_LEFT + CELL * (j as f64 + 0.5);
        writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="start" transform="rotate(-45 {x:.1} {:.1})">{}</text>"#,
            LABEL_TOP - 8.0,
            LABEL_TOP - 8.0,
            escape(name)
        )
        .unwrap();
    }
    for (i, row) in cm.rows().iter().enumerate() {
        let y = LABEL_TOP + CELL * i as f64;
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, LABEL_LEFT - 8.0, y + CELL / 2.0 + 4.0, escape(&names[i]))
            .unwrap();
        for (j, &count) in row.iter().enumerate() {
            let x = LABEL_LEFT + CELL * j as f64;
            let shade = cell_shade(count, max);
            let ink = if shade < 128 { "white" } else { "black" };
            writeln!(
                s,
                r##"<rect class="cell" x="{x:.1}" y="{y:.1}" width="{CELL:.1}" height="{CELL:.1}" fill="rgb({shade},{shade},{shade})" stroke="#999999" data-row="{i}" data-col="{j}"/>"##
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" fill="{ink}">{count}</text>"#,
                x + CELL / 2.0,
                y + CELL / 2.0 + 4.0
            )
            .unwrap();
        }
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">chosen (columns) by intended (rows)</text>"#,
        LABEL_LEFT + CELL * n as f64 / 2.0,
        height - 12.0
    )
    .unwrap();
    s.push_str("</svg>\n");
    Ok(s)
}

const PLOT_W: f64 = 560.0;
const PLOT_H: f64 = 320.0;
const PAD_LEFT: f64 = 56.0;
const PAD_TOP: f64 = 24.0;
const PAD_BOTTOM: f64 = 48.0;

/// Accuracy over trials: thin per-run lines, a thick mean line and dotted
/// lines at the chance and initial levels.
pub fn series_svg(series: &AccuracySeries, chance: f64, initial: f64) -> SimResult<String> {
    let cols = series.rows.first().map_or(0, Vec::len);
    if cols == 0 || series.rows.iter().any(|r| r.len() != cols) {
        return Err(mismatch("series rows must be nonempty and of equal length".into()));
    }
    let x_of = |t: usize| PAD_LEFT + if cols == 1 { PLOT_W / 2.0 } else { PLOT_W * t as f64 / (cols - 1) as f64 };
    let y_of = |a: f64| PAD_TOP + PLOT_H * (1.0 - a.clamp(0.0, 1.0));
    let points = |row: &[f64]| -> String {
        row.iter().enumerate().map(|(t, &a)| format!("{:.2},{:.2}", x_of(t), y_of(a))).collect::<Vec<_>>().join(" ")
    };
    let width = PAD_LEFT + PLOT_W + 24.0;
    let height = PAD_TOP + PLOT_H + PAD_BOTTOM;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{PAD_LEFT:.1}" y="{PAD_TOP:.1}" width="{PLOT_W:.1}" height="{PLOT_H:.1}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for tick in 0..=5 {
        let a = tick as f64 / 5.0;
        writeln!(s, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{a:.1}</text>"#, PAD_LEFT - 6.0, y_of(a) + 4.0).unwrap();
    }
    for t in 0..cols {
        writeln!(s, r#"<text x="{:.2}" y="{:.1}" text-anchor="middle">{t}</text>"#, x_of(t), PAD_TOP + PLOT_H + 18.0).unwrap();
    }
    writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">trial</text>"#, PAD_LEFT + PLOT_W / 2.0, height - 8.0).unwrap();
    for (class, level) in [("chance", chance), ("initial", initial)] {
        writeln!(
            s,
            r#"<line class="{class}" x1="{PAD_LEFT:.1}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="black" stroke-dasharray="2 4"/>"#,
            PAD_LEFT + PLOT_W,
            y = y_of(level)
        )
        .unwrap();
    }
    for row in &series.rows {
        writeln!(s, r##"<polyline class="run" points="{}" fill="none" stroke="#6a8caf" stroke-width="1"/>"##, points(row)).unwrap();
    }
    writeln!(
        s,
        r#"<polyline class="mean" points="{}" fill="none" stroke="black" stroke-width="3"/>"#,
        points(&series.column_means())
    )
    .unwrap();
    s.push_str("</svg>\n");
    Ok(s)
}
