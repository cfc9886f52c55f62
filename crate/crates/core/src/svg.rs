//! Static SVG charts: curve families as line charts, effects as bars.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::interpret::{CurveFamily, EffectKind, EffectsTable};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 60.0;

const HEADER: &str = concat!(
    "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n",
    "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n",
);

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round tick spacing (1, 2 or 5 times a power of ten) giving about `n`
/// intervals over `span`.
fn tick_step(span: f64, n: f64) -> f64 {
    let raw = span / n;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

/// Ticks at multiples of the step covering [lo, hi]; the range is widened
/// to the outer ticks.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let step = tick_step(hi - lo, 5.0);
    let start = (lo / step).floor() as i64;
    let end = (hi / step).ceil() as i64;
    (start..=end).map(|k| k as f64 * step).map(|v| if v == 0.0 { 0.0 } else { v }).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }
    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn open(s: &mut String) {
    s.push_str(HEADER);
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    )
    .unwrap();
    writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>").unwrap();
}

fn y_axis(s: &mut String, f: &Frame, yticks: &[f64], label: &str) {
    writeln!(
        s,
        "<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{}\" stroke=\"black\"/>",
        H - BOTTOM
    )
    .unwrap();
    for &t in yticks {
        let y = f.py(t);
        writeln!(
            s,
            "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{LEFT}\" y2=\"{y:.2}\" stroke=\"black\"/><text x=\"{}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            fmt_tick(t)
        )
        .unwrap();
    }
    writeln!(
        s,
        "<text x=\"16\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
        (TOP + H - BOTTOM) / 2.0,
        (TOP + H - BOTTOM) / 2.0,
        escape(label)
    )
    .unwrap();
}

fn x_label(s: &mut String, label: &str) {
    writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 15.0,
        escape(label)
    )
    .unwrap();
}

fn points(f: &Frame, xs: &[f64], ys: &[f64]) -> String {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Grey polyline per curve plus a highlighted polyline for the average.
pub fn render_curves(family: &CurveFamily) -> Result<String> {
    let xs = &family.grid.values;
    if xs.is_empty() || family.average.is_empty() {
        return Err(Error::Config("nothing to plot".into()));
    }
    let (x0, x1) = if xs.len() > 1 && xs[xs.len() - 1] > xs[0] {
        (xs[0], xs[xs.len() - 1])
    } else {
        (xs[0] - 0.5, xs[0] + 0.5)
    };
    let yticks = if family.centered.is_some() {
        let all = family.curves.iter().flatten().chain(&family.average);
        let (lo, hi) = all.fold((0.0f64, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        ticks(lo, hi)
    } else {
        ticks(0.0, 1.0)
    };
    let f = Frame {
        x0,
        x1,
        y0: yticks[0],
        y1: yticks[yticks.len() - 1],
    };
    let mut s = String::new();
    open(&mut s);
    writeln!(
        s,
        "<line x1=\"{LEFT}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        H - BOTTOM,
        W - RIGHT,
        H - BOTTOM
    )
    .unwrap();
    for &t in &ticks(x0, x1) {
        if t < x0 - 1e-9 || t > x1 + 1e-9 {
            continue;
        }
        let x = f.px(t);
        writeln!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/><text x=\"{x:.2}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            H - BOTTOM,
            H - BOTTOM + 5.0,
            H - BOTTOM + 18.0,
            fmt_tick(t)
        )
        .unwrap();
    }
    let ylabel = if family.centered.is_some() {
        "switching probability (centered)"
    } else {
        "switching probability"
    };
    y_axis(&mut s, &f, &yticks, ylabel);
    x_label(&mut s, &family.grid.feature);
    for c in &family.curves {
        writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"#b0b0b0\" stroke-width=\"0.8\" points=\"{}\"/>",
            points(&f, xs, c)
        )
        .unwrap();
    }
    writeln!(
        s,
        "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2.5\" points=\"{}\"/>",
        points(&f, xs, &family.average)
    )
    .unwrap();
    s.push_str("</svg>\n");
    Ok(s)
}

/// One bar per table row with a value; marginal effects in percent.
pub fn render_effects(table: &EffectsTable) -> Result<String> {
    let bars: Vec<(String, f64)> = table
        .rows
        .iter()
        .filter_map(|r| {
            r.value.map(|v| {
                let v = if r.kind == EffectKind::Marginal { v * 100.0 } else { v };
                (format!("{} {} {}", r.feature, r.perturbation, r.segment), v)
            })
        })
        .collect();
    if bars.is_empty() {
        return Err(Error::Config("nothing to plot".into()));
    }
    let (lo, hi) = bars.iter().fold((0.0f64, 0.0f64), |(lo, hi), (_, v)| (lo.min(*v), hi.max(*v)));
    let yticks = ticks(lo, hi);
    let f = Frame {
        x0: 0.0,
        x1: bars.len() as f64,
        y0: yticks[0],
        y1: yticks[yticks.len() - 1],
    };
    let mut s = String::new();
    open(&mut s);
    y_axis(&mut s, &f, &yticks, "change in switching probability (%, or elasticity)");
    let zero = f.py(0.0);
    writeln!(
        s,
        "<line x1=\"{LEFT}\" y1=\"{zero:.2}\" x2=\"{}\" y2=\"{zero:.2}\" stroke=\"black\"/>",
        W - RIGHT
    )
    .unwrap();
    let slot = (W - LEFT - RIGHT) / bars.len() as f64;
    for (k, (label, v)) in bars.iter().enumerate() {
        let x = f.px(k as f64) + 0.15 * slot;
        let y = f.py(*v);
        let (top, h) = if y < zero { (y, zero - y) } else { (zero, y - zero) };
        let color = if *v < 0.0 { "#2c7fb8" } else { "#d95f0e" };
        writeln!(
            s,
            "<rect x=\"{x:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{h:.2}\" fill=\"{color}\"><title>{} {v:.2}</title></rect>",
            0.7 * slot,
            escape(label)
        )
        .unwrap();
    }
    x_label(&mut s, "feature, perturbation and segment");
    s.push_str("</svg>\n");
    Ok(s)
}
