//! Static two-panel plot of ensemble statistics: `det Λ` on top,
//! log-negativity below, each with a min–max band and the mean line.

use std::fmt::Write;

use qnet_core::ensemble::EnsembleStats;

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 240.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const GAP: f64 = 50.0;

struct Series {
    title: &'static str,
    mean: Vec<f64>,
    min: Vec<f64>,
    max: Vec<f64>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    top: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.x1 - self.x0).max(1.0);
        MARGIN_LEFT + (v - self.x0) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let span = if self.y1 > self.y0 { self.y1 - self.y0 } else { 1.0 };
        self.top + PANEL_HEIGHT - (v - self.y0) / span * PANEL_HEIGHT
    }
}

fn points(frame: &Frame, xs: &[f64], ys: &[f64]) -> String {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", frame.x(x), frame.y(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn panel(out: &mut String, xs: &[f64], s: &Series, top: f64) {
    let lo = s.min.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let hi = s.max.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let pad = 0.05 * (hi - lo).max(f64::MIN_POSITIVE);
    let frame = Frame {
        x0: xs.first().copied().unwrap_or(0.0),
        x1: xs.last().copied().unwrap_or(1.0),
        y0: lo - pad,
        y1: hi + pad,
        top,
    };
    let right = WIDTH - MARGIN_RIGHT;
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_LEFT}" y="{top}" width="{}" height="{PANEL_HEIGHT}" fill="none" stroke="black"/>"#,
        right - MARGIN_LEFT
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        (MARGIN_LEFT + right) / 2.0,
        top - 8.0,
        s.title
    );
    let zero = frame.y(0.0);
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN_LEFT}" y1="{zero:.2}" x2="{right}" y2="{zero:.2}" stroke="gray" stroke-dasharray="4 3"/>"#
    );

    let mut band: Vec<String> = vec![points(&frame, xs, &s.max)];
    let rev_x: Vec<f64> = xs.iter().rev().copied().collect();
    let rev_min: Vec<f64> = s.min.iter().rev().copied().collect();
    band.push(points(&frame, &rev_x, &rev_min));
    let _ = writeln!(
        out,
        r#"<polygon points="{}" fill="steelblue" fill-opacity="0.25" stroke="none"/>"#,
        band.join(" ")
    );
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        points(&frame, xs, &s.mean)
    );

    for (v, anchor) in [(frame.y0, "bottom"), (frame.y1, "top")] {
        let y = frame.y(v) + if anchor == "top" { 10.0 } else { 0.0 };
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{y:.2}" font-size="10" text-anchor="end">{v:.3e}</text>"#,
            MARGIN_LEFT - 4.0
        );
    }
    let base = top + PANEL_HEIGHT + 14.0;
    for &a in xs {
        if a as i64 % 2 == 0 {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{base}" font-size="10" text-anchor="middle">{a}</text>"#,
                frame.x(a)
            );
        }
    }
}

pub fn ensemble_svg(stats: &EnsembleStats) -> String {
    let xs: Vec<f64> = stats.lags.iter().map(|l| l.lag as f64).collect();
    let det = Series {
        title: "det Λ",
        mean: stats.lags.iter().map(|l| l.det_mean).collect(),
        min: stats.lags.iter().map(|l| l.det_min).collect(),
        max: stats.lags.iter().map(|l| l.det_max).collect(),
    };
    let ln = Series {
        title: "log-negativity",
        mean: stats.lags.iter().map(|l| l.logneg_mean).collect(),
        min: stats.lags.iter().map(|l| l.logneg_min).collect(),
        max: stats.lags.iter().map(|l| l.logneg_max).collect(),
    };
    let height = MARGIN_TOP + 2.0 * PANEL_HEIGHT + GAP + 30.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    panel(&mut out, &xs, &det, MARGIN_TOP);
    panel(&mut out, &xs, &ln, MARGIN_TOP + PANEL_HEIGHT + GAP);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">a (lag, {} networks)</text>"#,
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        height - 6.0,
        stats.count
    );
    out.push_str("</svg>\n");
    out
}
