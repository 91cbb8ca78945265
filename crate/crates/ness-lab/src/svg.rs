//! Minimal SVG rendering for line plots and heatmaps: log or linear axes,
//! decade ticks, legends, and reference lines. No external renderer; figures
//! are plain vector files.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 460.0;
const ML: f64 = 70.0;
const MR: f64 = 25.0;
const MT: f64 = 40.0;
const MB: f64 = 55.0;

#[derive(Clone)]
pub struct Series {
    pub label: String,
    pub color: String,
    pub dash: Option<&'static str>,
    pub markers: bool,
    pub line: bool,
    pub points: Vec<(f64, f64)>,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// horizontal reference lines (value, color, label)
    pub h_lines: Vec<(f64, String, String)>,
    /// vertical reference lines (value, color, label)
    pub v_lines: Vec<(f64, String, String)>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str, log_x: bool, log_y: bool) -> Plot {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x,
            log_y,
            series: Vec::new(),
            h_lines: Vec::new(),
            v_lines: Vec::new(),
        }
    }

    fn tr(&self, v: f64, log: bool) -> f64 {
        if log {
            v.log10()
        } else {
            v
        }
    }

    /// Render to an SVG document. Returns `None` when no finite point exists.
    pub fn render(&self) -> Option<String> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                let (tx, ty) = (self.tr(x, self.log_x), self.tr(y, self.log_y));
                if tx.is_finite() && ty.is_finite() {
                    xs.push(tx);
                    ys.push(ty);
                }
            }
        }
        for (v, _, _) in &self.h_lines {
            let t = self.tr(*v, self.log_y);
            if t.is_finite() {
                ys.push(t);
            }
        }
        for (v, _, _) in &self.v_lines {
            let t = self.tr(*v, self.log_x);
            if t.is_finite() {
                xs.push(t);
            }
        }
        if xs.is_empty() || ys.is_empty() {
            return None;
        }
        let (x0, x1) = padded_range(&xs);
        let (y0, y1) = padded_range(&ys);
        let px = |tx: f64| ML + (tx - x0) / (x1 - x0) * (W - ML - MR);
        let py = |ty: f64| H - MB - (ty - y0) / (y1 - y0) * (H - MT - MB);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(
            out,
            r#"<rect width="{W}" height="{H}" fill="white"/>
<rect x="{ML}" y="{MT}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - ML - MR,
            H - MT - MB
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
            (ML + W - MR) / 2.0,
            esc(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
            (ML + W - MR) / 2.0,
            H - 12.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
            (MT + H - MB) / 2.0,
            (MT + H - MB) / 2.0,
            esc(&self.y_label)
        );

        // ticks
        for (t, label) in ticks(x0, x1, self.log_x) {
            let x = px(t);
            let _ = writeln!(
                out,
                r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#bbb" stroke-width="0.5"/>
<text x="{x:.2}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{label}</text>"##,
                MT,
                H - MB,
                H - MB + 16.0
            );
        }
        for (t, label) in ticks(y0, y1, self.log_y) {
            let y = py(t);
            let _ = writeln!(
                out,
                r##"<line x1="{ML}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#bbb" stroke-width="0.5"/>
<text x="{}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{label}</text>"##,
                W - MR,
                ML - 6.0,
                y + 4.0
            );
        }

        // reference lines
        for (v, color, _) in &self.h_lines {
            let t = self.tr(*v, self.log_y);
            if t.is_finite() && t >= y0 && t <= y1 {
                let y = py(t);
                let _ = writeln!(
                    out,
                    r#"<line x1="{ML}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="{color}" stroke-dasharray="2,3"/>"#,
                    W - MR
                );
            }
        }
        for (v, color, _) in &self.v_lines {
            let t = self.tr(*v, self.log_x);
            if t.is_finite() && t >= x0 && t <= x1 {
                let x = px(t);
                let _ = writeln!(
                    out,
                    r#"<line x1="{x:.2}" y1="{MT}" x2="{x:.2}" y2="{}" stroke="{color}" stroke-dasharray="4,3"/>"#,
                    H - MB
                );
            }
        }

        // data
        for s in &self.series {
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .map(|&(x, y)| (self.tr(x, self.log_x), self.tr(y, self.log_y)))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(x, y)| (px(x), py(y)))
                .collect();
            if s.line && pts.len() > 1 {
                let mut d = String::new();
                for (i, (x, y)) in pts.iter().enumerate() {
                    let _ = write!(d, "{}{x:.2},{y:.2} ", if i == 0 { "M" } else { "L" });
                }
                let dash = s
                    .dash
                    .map(|p| format!(r#" stroke-dasharray="{p}""#))
                    .unwrap_or_default();
                let _ = writeln!(
                    out,
                    r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.6"{dash}/>"#,
                    s.color
                );
            }
            if s.markers {
                for (x, y) in &pts {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.6" fill="{}"/>"#,
                        s.color
                    );
                }
            }
        }

        // legend
        let mut ly = MT + 14.0;
        for s in &self.series {
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{ly:.2}" x2="{}" y2="{ly:.2}" stroke="{}" stroke-width="2"{}/>
<text x="{}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
                ML + 8.0,
                ML + 34.0,
                s.color,
                s.dash
                    .map(|p| format!(r#" stroke-dasharray="{p}""#))
                    .unwrap_or_default(),
                ML + 40.0,
                ly + 4.0,
                esc(&s.label)
            );
            ly += 15.0;
        }
        for (_, color, label) in self.h_lines.iter().chain(&self.v_lines) {
            if !label.is_empty() {
                let _ = writeln!(
                    out,
                    r#"<line x1="{}" y1="{ly:.2}" x2="{}" y2="{ly:.2}" stroke="{color}" stroke-dasharray="3,3"/>
<text x="{}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
                    ML + 8.0,
                    ML + 34.0,
                    ML + 40.0,
                    ly + 4.0,
                    esc(label)
                );
                ly += 15.0;
            }
        }

        out.push_str("</svg>\n");
        Some(out)
    }
}

/// Two-panel heatmap over a (column value, row value) grid; `cells` maps
/// (panel, row index, column index) to an intensity mapped onto a blue-to-red
/// ramp between `lo` and `hi` (log scaled).
pub struct Heatmap {
    pub title: String,
    pub panel_labels: Vec<String>,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    pub cells: Vec<Vec<Vec<f64>>>,
    pub lo: f64,
    pub hi: f64,
}

impl Heatmap {
    pub fn render(&self) -> Option<String> {
        let panels = self.cells.len();
        if panels == 0 || self.x_values.is_empty() || self.y_values.is_empty() {
            return None;
        }
        let pw = 520.0;
        let ph = 180.0;
        let total_h = 50.0 + panels as f64 * (ph + 45.0);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="640" height="{total_h}" viewBox="0 0 640 {total_h}">"#
        );
        let _ = writeln!(out, r#"<rect width="640" height="{total_h}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="320" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
            esc(&self.title)
        );
        for (p, panel) in self.cells.iter().enumerate() {
            let oy = 50.0 + p as f64 * (ph + 45.0);
            let _ = writeln!(
                out,
                r#"<text x="70" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
                oy - 6.0,
                esc(self.panel_labels.get(p).map(String::as_str).unwrap_or(""))
            );
            let cw = pw / self.x_values.len() as f64;
            let ch = ph / self.y_values.len() as f64;
            for (iy, row) in panel.iter().enumerate() {
                for (ix, &v) in row.iter().enumerate() {
                    let x = 70.0 + ix as f64 * cw;
                    // low y index (small value) at the bottom
                    let y = oy + ph - (iy + 1) as f64 * ch;
                    let _ = writeln!(
                        out,
                        r#"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="{}"/>"#,
                        ramp(v, self.lo, self.hi)
                    );
                }
            }
            let _ = writeln!(
                out,
                r#"<rect x="70" y="{oy:.2}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
            );
            // x decade labels
            let lx0 = self.x_values[0].log10();
            let lx1 = self.x_values[self.x_values.len() - 1].log10();
            for d in (lx0.ceil() as i32)..=(lx1.floor() as i32) {
                let frac = (d as f64 - lx0) / (lx1 - lx0);
                let _ = writeln!(
                    out,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="10">1e{d}</text>"#,
                    70.0 + frac * pw,
                    oy + ph + 14.0
                );
            }
            // y labels
            for (iy, yv) in self.y_values.iter().enumerate() {
                let _ = writeln!(
                    out,
                    r#"<text x="64" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10">{yv:.2}</text>"#,
                    oy + ph - (iy as f64 + 0.5) * ch + 3.0
                );
            }
        }
        out.push_str("</svg>\n");
        Some(out)
    }
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn ticks(t0: f64, t1: f64, log: bool) -> Vec<(f64, String)> {
    let mut out = Vec::new();
    if log {
        let mut step = 1usize;
        let decades = (t1.floor() - t0.ceil()) as i64;
        if decades > 9 {
            step = (decades as usize + 9) / 9;
        }
        let mut d = t0.ceil() as i64;
        while d as f64 <= t1 {
            out.push((d as f64, format!("1e{d}")));
            d += step as i64;
        }
    } else {
        let span = t1 - t0;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| span / s <= 6.0)
            .unwrap_or(mag);
        let mut v = (t0 / step).ceil() * step;
        while v <= t1 {
            out.push((v, format!("{v}")));
            v += step;
        }
    }
    out
}

fn ramp(v: f64, lo: f64, hi: f64) -> String {
    if v.is_nan() {
        return "#dddddd".into();
    }
    let t = ((v.max(1e-300).log10() - lo.log10()) / (hi.log10() - lo.log10())).clamp(0.0, 1.0);
    let r = (255.0 * t) as u8;
    let b = (255.0 * (1.0 - t)) as u8;
    let g = (80.0 * (1.0 - (2.0 * t - 1.0).abs())) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
