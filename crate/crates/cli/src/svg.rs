//! Minimal static SVG charts: grouped bars with error bars, and line plots.
//!
//! Coordinates are printed with fixed precision so identical inputs give
//! byte-identical files.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Linear map from data to pixel coordinates.
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        };
        Axis { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    /// Roughly five round tick values inside the range.
    fn ticks(&self) -> Vec<f64> {
        let span = self.hi - self.lo;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| span / s <= 6.0)
            .unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last).map(|k| k as f64 * step).collect()
    }
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
}

fn y_axis(out: &mut String, y: &Axis, label: &str) {
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT:.1}" y1="{TOP:.1}" x2="{LEFT:.1}" y2="{:.1}" stroke="black"/>"#,
        HEIGHT - BOTTOM
    );
    for t in y.ticks() {
        let py = y.map(t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{py:.2}" x2="{LEFT:.1}" y2="{py:.2}" stroke="black"/><text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(label)
    );
}

fn legend(out: &mut String, entries: &[(String, &str)]) {
    for (k, (name, colour)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * k as f64;
        let x = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{colour}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            y - 10.0,
            x + 18.0,
            y,
            escape(name)
        );
    }
}

/// One bar group per category, one bar per series, each with a `+-err` whisker.
pub struct BarSeries {
    pub name: String,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

pub fn bar_chart(title: &str, y_label: &str, categories: &[String], series: &[BarSeries]) -> String {
    let mut lo: f64 = 0.0;
    let mut hi: f64 = 0.0;
    for s in series {
        for (v, e) in s.values.iter().zip(&s.errors) {
            lo = lo.min(v - e);
            hi = hi.max(v + e);
        }
    }
    let pad = 0.05 * (hi - lo).max(1e-12);
    let y = Axis::new(lo - pad, hi + pad, HEIGHT - BOTTOM, TOP);
    let mut out = String::new();
    header(&mut out, title);
    y_axis(&mut out, &y, y_label);
    let zero = y.map(0.0);
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT:.1}" y1="{zero:.2}" x2="{:.1}" y2="{zero:.2}" stroke="black"/>"#,
        WIDTH - RIGHT
    );
    let group = (WIDTH - RIGHT - LEFT) / categories.len().max(1) as f64;
    let bar = 0.8 * group / series.len().max(1) as f64;
    for (c, name) in categories.iter().enumerate() {
        let gx = LEFT + group * c as f64 + 0.1 * group;
        for (k, s) in series.iter().enumerate() {
            let v = s.values[c];
            let e = s.errors[c];
            let x = gx + bar * k as f64;
            let (top, bottom) = (y.map(v.max(0.0)), y.map(v.min(0.0)));
            let colour = PALETTE[k % PALETTE.len()];
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{top:.2}" width="{bar:.2}" height="{:.2}" fill="{colour}"/>"#,
                bottom - top
            );
            let cx = x + bar / 2.0;
            let _ = writeln!(
                out,
                r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#,
                y.map(v - e),
                y.map(v + e)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + group * (c as f64 + 0.5),
            HEIGHT - BOTTOM + 18.0,
            escape(name)
        );
    }
    let names: Vec<(String, &str)> = series
        .iter()
        .enumerate()
        .map(|(k, s)| (s.name.clone(), PALETTE[k % PALETTE.len()]))
        .collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

/// A polyline with optional marker points.
pub struct Line {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub colour: String,
    pub width: f64,
    pub opacity: f64,
}

pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    lines: &[Line],
    points: &[(f64, f64, String)],
    legend_entries: &[(String, String)],
) -> String {
    let all_x = lines.iter().flat_map(|l| l.xs.iter()).chain(points.iter().map(|p| &p.0));
    let all_y = lines.iter().flat_map(|l| l.ys.iter()).chain(points.iter().map(|p| &p.1));
    let (xlo, xhi) = all_x.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (ylo, yhi) = all_y.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let pad = 0.05 * (yhi - ylo).max(1e-12);
    let x = Axis::new(xlo, xhi, LEFT, WIDTH - RIGHT);
    let y = Axis::new(ylo - pad, yhi + pad, HEIGHT - BOTTOM, TOP);
    let mut out = String::new();
    header(&mut out, title);
    y_axis(&mut out, &y, y_label);
    let base = HEIGHT - BOTTOM;
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT:.1}" y1="{base:.1}" x2="{:.1}" y2="{base:.1}" stroke="black"/>"#,
        WIDTH - RIGHT
    );
    for t in x.ticks() {
        let px = x.map(t);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{base:.1}" x2="{px:.2}" y2="{:.1}" stroke="black"/><text x="{px:.2}" y="{:.1}" text-anchor="middle">{}</text>"#,
            base + 5.0,
            base + 18.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    for l in lines {
        let pts: Vec<String> = l
            .xs
            .iter()
            .zip(&l.ys)
            .map(|(&a, &b)| format!("{:.2},{:.2}", x.map(a), y.map(b)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="{:.1}" stroke-opacity="{:.2}" points="{}"/>"#,
            l.colour,
            l.width,
            l.opacity,
            pts.join(" ")
        );
    }
    for (px, py, colour) in points {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{colour}"/>"#,
            x.map(*px),
            y.map(*py)
        );
    }
    let entries: Vec<(String, &str)> = legend_entries.iter().map(|(n, c)| (n.clone(), c.as_str())).collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

/// Blue-to-red colour for `t` in `[0, 1]`.
pub fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (40.0 + 200.0 * t).round() as u8;
    let b = (240.0 - 200.0 * t).round() as u8;
    format!("#{r:02x}50{b:02x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        let a = Axis::new(0.0, 1.0, 0.0, 100.0);
        assert_eq!(a.ticks(), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(fmt_tick(0.6000000000000001), "0.6");
    }

    #[test]
    fn charts_are_well_formed() {
        let bars = bar_chart(
            "t",
            "nats",
            &["a".into(), "b".into()],
            &[BarSeries {
                name: "likelihood".into(),
                values: vec![0.5, -0.1],
                errors: vec![0.1, 0.05],
            }],
        );
        assert!(bars.starts_with("<svg") && bars.trim_end().ends_with("</svg>"));
        assert_eq!(bars.matches("<rect x=").count(), 2 + 1);
        let lines = line_chart(
            "t",
            "x",
            "y",
            &[Line {
                xs: vec![0.0, 1.0],
                ys: vec![1.0, 2.0],
                colour: "black".into(),
                width: 2.0,
                opacity: 1.0,
            }],
            &[(0.5, 1.5, "red".into())],
            &[],
        );
        assert_eq!(lines.matches("<polyline").count(), 1);
        assert_eq!(lines.matches("<circle").count(), 1);
        assert_eq!(ramp(0.0), "#2850f0");
    }
}
