//! Fixed-size SVG plots (800×500 viewBox).

use std::fmt::Write;

const W: f64 = 800.0;
const H: f64 = 500.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" width="{W}" height="{H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.x0 + (x - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.y0 + self.h - (y - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }

    fn polyline(&self, s: &mut String, pts: &[(f64, f64)], color: &str) {
        let mut d = String::new();
        for &(x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            let _ = write!(d, "{:.2},{:.2} ", self.px(x), self.py(y));
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, d.trim_end());
    }

    fn axes(&self, s: &mut String, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            self.x0, self.y0, self.w, self.h
        );
        for (v, anchor) in [(self.xr.0, "start"), (self.xr.1, "end")] {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{}</text>"#,
                self.px(v),
                self.y0 + self.h + 14.0,
                tick(v)
            );
        }
        for v in [self.yr.0, self.yr.1] {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                self.x0 - 4.0,
                self.py(v) + 4.0,
                tick(v)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            self.x0 + self.w / 2.0,
            self.y0 + self.h + 28.0,
            escape(xlabel)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            self.x0 - 34.0,
            self.y0 + self.h / 2.0,
            self.x0 - 34.0,
            self.y0 + self.h / 2.0,
            escape(ylabel)
        );
    }

    fn vline(&self, s: &mut String, x: f64, color: &str) {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="4 3"/>"#,
            self.px(x),
            self.y0,
            self.px(x),
            self.y0 + self.h
        );
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + hi.abs()) {
        let pad = 0.5 * (1.0 + hi.abs()) * 1e-3;
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Eigenfunction gallery: one panel per curve on a 3×2 grid, with the end
/// points `x = ±1` marked.
pub fn gallery(title: &str, curves: &[Curve]) -> String {
    let mut s = header(title);
    let (cols, rows) = (3usize, 2usize);
    let (pw, ph) = ((W - 40.0) / cols as f64, (H - 50.0) / rows as f64);
    for (i, c) in curves.iter().take(cols * rows).enumerate() {
        let (cx, cy) = ((i % cols) as f64, (i / cols) as f64);
        let f = Frame {
            x0: 20.0 + cx * pw + 36.0,
            y0: 40.0 + cy * ph + 18.0,
            w: pw - 50.0,
            h: ph - 60.0,
            xr: (-1.1, 1.1),
            yr: (-1.1, 1.1),
        };
        f.axes(&mut s, "x", "");
        f.vline(&mut s, -1.0, "#888");
        f.vline(&mut s, 1.0, "#888");
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbb"/>"##,
            f.px(-1.1),
            f.py(0.0),
            f.px(1.1),
            f.py(0.0)
        );
        for x in [-1.0, 1.0] {
            let y = c.points.iter().min_by(|p, q| (p.0 - x).abs().total_cmp(&(q.0 - x).abs())).map(|p| p.1).unwrap_or(0.0);
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="black"/>"#, f.px(x), f.py(y));
        }
        f.polyline(&mut s, &c.points, COLORS[i % COLORS.len()]);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            f.x0 + f.w / 2.0,
            f.y0 - 5.0,
            escape(&c.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Bifurcation diagram `(λ, log₁₀‖u‖₀)` with a marker line at `λ = 1`.
pub fn bifurcation(title: &str, curves: &[Curve]) -> String {
    let mut s = header(title);
    let logged: Vec<Vec<(f64, f64)>> =
        curves.iter().map(|c| c.points.iter().map(|&(l, a)| (l, a.max(1e-300).log10())).collect()).collect();
    let xr = range(logged.iter().flatten().map(|p| p.0).chain([1.0]));
    let yr = range(logged.iter().flatten().map(|p| p.1));
    let f = Frame { x0: 80.0, y0: 40.0, w: W - 110.0, h: H - 90.0, xr, yr };
    f.axes(&mut s, "lambda", "log10 |u|_0");
    f.vline(&mut s, 1.0, "#888");
    for (i, (c, pts)) in curves.iter().zip(&logged).enumerate() {
        let color = COLORS[i % COLORS.len()];
        f.polyline(&mut s, pts, color);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            f.x0 + 8.0,
            f.y0 + 16.0 + 14.0 * i as f64,
            escape(&c.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_viewbox() {
        let c = Curve { label: "psi_0".into(), points: (0..=20).map(|i| (-1.0 + i as f64 / 10.0, 0.5)).collect() };
        let g = gallery("g", std::slice::from_ref(&c));
        assert!(g.starts_with(r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 500""#));
        assert_eq!(g.matches("<circle").count(), 2);
        let b = bifurcation("b", &[c]);
        assert!(b.contains("<polyline") && b.ends_with("</svg>\n"));
    }
}
