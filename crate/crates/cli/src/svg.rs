//! Hand-drawn SVG scatter plot: sorted eigenvalues as circles, sorted
//! nodal ratio values as asterisk glyphs. No plotting dependency; the
//! figures are for human inspection, the CSVs carry the data.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 25.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

struct Axis {
    min: f64,
    max: f64,
    px0: f64,
    px1: f64,
}

impl Axis {
    fn map(&self, v: f64) -> f64 {
        let t = if self.max > self.min {
            (v - self.min) / (self.max - self.min)
        } else {
            0.5
        };
        self.px0 + t * (self.px1 - self.px0)
    }

    /// Round tick positions covering the range.
    fn ticks(&self, want: usize) -> Vec<f64> {
        let span = (self.max - self.min).abs().max(1e-300);
        let raw = span / want as f64;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 2.5, 5.0, 10.0]
            .iter()
            .map(|s| s * mag)
            .find(|&s| s >= raw)
            .unwrap_or(mag * 10.0);
        let mut t = (self.min / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.max + 1e-9 * span {
            out.push(t);
            t += step;
        }
        out
    }
}

fn fmt_tick(v: f64) -> String {
    if v == v.round() && v.abs() < 1e7 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Scatter plot of the two sorted sequences against their 1-based index.
pub fn pairing_plot(eigenvalues: &[f64], nodal_values: &[f64], title: &str) -> String {
    let n = eigenvalues.len().max(nodal_values.len()).max(1);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in eigenvalues.iter().chain(nodal_values) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let pad = 0.05 * (hi - lo).max(1e-12);
    let x = Axis {
        min: 1.0,
        max: n as f64,
        px0: MARGIN_L,
        px1: WIDTH - MARGIN_R,
    };
    let y = Axis {
        min: lo - pad,
        max: hi + pad,
        px0: HEIGHT - MARGIN_B,
        px1: MARGIN_T,
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#,
        0.5 * WIDTH
    );
    // Axes.
    let _ = writeln!(
        s,
        r#"<path d="M {l:.2} {t:.2} L {l:.2} {b:.2} L {r:.2} {b:.2}" stroke="black" fill="none"/>"#,
        l = MARGIN_L,
        t = MARGIN_T,
        b = HEIGHT - MARGIN_B,
        r = WIDTH - MARGIN_R
    );
    for tv in x.ticks(8) {
        let px = x.map(tv);
        let by = HEIGHT - MARGIN_B;
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{by:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#,
            by + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            by + 20.0,
            fmt_tick(tv)
        );
    }
    for tv in y.ticks(6) {
        let py = y.map(tv);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="black"/>"#,
            MARGIN_L - 5.0,
            MARGIN_L
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/>"##,
            MARGIN_L,
            WIDTH - MARGIN_R
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            MARGIN_L - 9.0,
            py + 4.0,
            fmt_tick(tv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">sorted index</text>"#,
        0.5 * (MARGIN_L + WIDTH - MARGIN_R),
        HEIGHT - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.2})">value</text>"#,
        0.5 * (MARGIN_T + HEIGHT - MARGIN_B),
        0.5 * (MARGIN_T + HEIGHT - MARGIN_B)
    );

    // Nodal values first so eigenvalue circles stay visible on top.
    for (i, &v) in nodal_values.iter().enumerate() {
        asterisk(&mut s, x.map((i + 1) as f64), y.map(v), 4.5, "#d62728");
    }
    for (i, &v) in eigenvalues.iter().enumerate() {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3.4" stroke="#1f77b4" fill="none" stroke-width="1.2"/>"##,
            x.map((i + 1) as f64),
            y.map(v)
        );
    }

    // Legend.
    let lx = MARGIN_L + 14.0;
    let ly = MARGIN_T + 16.0;
    let _ = writeln!(
        s,
        r##"<circle cx="{lx:.2}" cy="{ly:.2}" r="3.4" stroke="#1f77b4" fill="none" stroke-width="1.2"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13">generalized eigenvalues</text>"#,
        lx + 12.0,
        ly + 4.0
    );
    asterisk(&mut s, lx, ly + 20.0, 4.5, "#d62728");
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13">nodal values of k/g</text>"#,
        lx + 12.0,
        ly + 24.0
    );
    s.push_str("</svg>\n");
    s
}

/// Six-armed asterisk glyph.
fn asterisk(s: &mut String, cx: f64, cy: f64, r: f64, color: &str) {
    for k in 0..3 {
        let ang = std::f64::consts::PI * k as f64 / 3.0 + std::f64::consts::FRAC_PI_2;
        let (dx, dy) = (r * ang.cos(), r * ang.sin());
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.2"/>"#,
            cx - dx,
            cy - dy,
            cx + dx,
            cy + dy
        );
    }
}
