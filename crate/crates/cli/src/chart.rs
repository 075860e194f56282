//! Deterministic SVG fan and impulse-response charts: one panel per series,
//! outer 90% band, inner 68% band and the median line.

use std::fmt::Write;

const PANEL_W: f64 = 320.0;
const PANEL_H: f64 = 220.0;
const MARGIN: f64 = 36.0;
const COLUMNS: usize = 3;

/// One chart panel. `bands[h]` holds the 5/16/50/84/95% quantiles at
/// x-position `x0 + h`; `history` is plotted at the positions before `x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPanel {
    pub title: String,
    pub x0: i64,
    pub history: Vec<f64>,
    pub bands: Vec<[f64; 5]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartOptions {
    pub title: String,
    pub x_label: String,
    /// Draw a dashed zero line (impulse responses).
    pub zero_line: bool,
}

fn coord(x: f64) -> String {
    format!("{x:.2}")
}

struct Frame {
    left: f64,
    top: f64,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let w = PANEL_W - 2.0 * MARGIN;
        let span = (self.x_max - self.x_min).max(1e-12);
        self.left + MARGIN + (x - self.x_min) / span * w
    }

    fn py(&self, y: f64) -> f64 {
        let h = PANEL_H - 2.0 * MARGIN;
        let span = self.y_max - self.y_min;
        self.top + PANEL_H - MARGIN - (y - self.y_min) / span * h
    }

    fn point(&self, x: f64, y: f64) -> String {
        format!("{},{}", coord(self.px(x)), coord(self.py(y)))
    }
}

fn y_range(panel: &ChartPanel, zero_line: bool) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in panel.history.iter().chain(panel.bands.iter().flatten()) {
        if v.is_finite() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    if zero_line {
        lo = lo.min(0.0);
        hi = hi.max(0.0);
    }
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { lo.abs().max(1.0) * 0.05 };
    (lo - pad, hi + pad)
}

/// Band polygon between quantile columns `lo` and `hi`, or `None` when the
/// band has zero width everywhere.
fn band_polygon(frame: &Frame, panel: &ChartPanel, lo: usize, hi: usize) -> Option<String> {
    if panel.bands.iter().all(|q| q[lo] == q[hi]) {
        return None;
    }
    let x = |h: usize| (panel.x0 + h as i64) as f64;
    let mut pts: Vec<String> = panel.bands.iter().enumerate().map(|(h, q)| frame.point(x(h), q[hi])).collect();
    pts.extend(panel.bands.iter().enumerate().rev().map(|(h, q)| frame.point(x(h), q[lo])));
    Some(pts.join(" "))
}

fn render_panel(out: &mut String, panel: &ChartPanel, left: f64, top: f64, opts: &ChartOptions) {
    let n_hist = panel.history.len() as i64;
    let x_min = (panel.x0 - n_hist) as f64;
    let x_max = (panel.x0 + panel.bands.len().max(1) as i64 - 1) as f64;
    let (y_min, y_max) = y_range(panel, opts.zero_line);
    let f = Frame { left, top, x_min: x_min.min(x_max - 1.0), x_max, y_min, y_max };

    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#bbbbbb"/>"##,
        coord(left + MARGIN),
        coord(top + MARGIN),
        coord(PANEL_W - 2.0 * MARGIN),
        coord(PANEL_H - 2.0 * MARGIN)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
        coord(left + PANEL_W / 2.0),
        coord(top + MARGIN - 10.0),
        escape(&panel.title)
    );
    for (y, anchor) in [(f.y_min, "end"), (f.y_max, "end")] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="9" text-anchor="{anchor}">{}</text>"#,
            coord(left + MARGIN - 3.0),
            coord(f.py(y) + 3.0),
            format_tick(y)
        );
    }
    for x in [f.x_min, f.x_max] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="9" text-anchor="middle">{}</text>"#,
            coord(f.px(x)),
            coord(top + PANEL_H - MARGIN + 12.0),
            x as i64
        );
    }
    if opts.zero_line && f.y_min < 0.0 && f.y_max > 0.0 {
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#888888" stroke-dasharray="4 3"/>"##,
            coord(f.px(f.x_min)),
            coord(f.px(f.x_max)),
            y = coord(f.py(0.0))
        );
    }
    if let Some(p) = band_polygon(&f, panel, 0, 4) {
        let _ = writeln!(out, r##"<polygon class="band90" points="{p}" fill="#9ecae1" stroke="none"/>"##);
    }
    if let Some(p) = band_polygon(&f, panel, 1, 3) {
        let _ = writeln!(out, r##"<polygon class="band68" points="{p}" fill="#4292c6" stroke="none"/>"##);
    }
    if !panel.history.is_empty() {
        let mut pts: Vec<String> =
            panel.history.iter().enumerate().map(|(i, v)| f.point((panel.x0 - n_hist + i as i64) as f64, *v)).collect();
        if let Some(q) = panel.bands.first() {
            pts.push(f.point(panel.x0 as f64, q[2]));
        }
        let _ =
            writeln!(out, r##"<polyline class="history" points="{}" fill="none" stroke="#333333"/>"##, pts.join(" "));
    }
    let median: Vec<String> =
        panel.bands.iter().enumerate().map(|(h, q)| f.point((panel.x0 + h as i64) as f64, q[2])).collect();
    let _ = writeln!(
        out,
        r##"<polyline class="median" points="{}" fill="none" stroke="#08306b" stroke-width="2"/>"##,
        median.join(" ")
    );
}

fn format_tick(y: f64) -> String {
    if y.abs() >= 1000.0 || (y != 0.0 && y.abs() < 0.01) {
        format!("{y:.2e}")
    } else {
        format!("{y:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Full SVG document with the provenance string in a leading comment.
pub fn render(panels: &[ChartPanel], opts: &ChartOptions, provenance: &str) -> String {
    let cols = panels.len().clamp(1, COLUMNS);
    let rows = panels.len().div_ceil(cols).max(1);
    let width = cols as f64 * PANEL_W;
    let height = rows as f64 * PANEL_H + 40.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        coord(width),
        coord(height),
        coord(width),
        coord(height)
    );
    let _ = writeln!(out, "<!-- {} -->", provenance.replace("--", "- -"));
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        coord(width / 2.0),
        escape(&opts.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="10" text-anchor="middle">{}</text>"#,
        coord(width / 2.0),
        coord(height - 6.0),
        escape(&opts.x_label)
    );
    for (i, p) in panels.iter().enumerate() {
        let _ = writeln!(out, r#"<g class="panel" id="panel-{i}">"#);
        render_panel(&mut out, p, (i % cols) as f64 * PANEL_W, 30.0 + (i / cols) as f64 * PANEL_H, opts);
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
