//! Minimal standalone SVG rendering for line plots and histogram overlays.
//! The CSVs are the contract; these are reading aids.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
}

pub const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    log_x: bool,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let (v, lo, hi) = if self.log_x {
            (v.max(self.x_min).log10(), self.x_min.log10(), self.x_max.log10())
        } else {
            (v, self.x_min, self.x_max)
        };
        MARGIN_L + (v - lo) / (hi - lo) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_B - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
        WIDTH / 2.0,
        esc(title)
    )
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>"
    );
    // Five ticks per axis.
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (xv, xlabel) = if f.log_x {
            let lv = f.x_min.log10() + t * (f.x_max.log10() - f.x_min.log10());
            (10f64.powf(lv), format!("1e{lv:.0}"))
        } else {
            let v = f.x_min + t * (f.x_max - f.x_min);
            (v, trim_num(v))
        };
        let px = f.x(xv);
        let _ = writeln!(
            out,
            "<line x1=\"{px}\" y1=\"{y0}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{px}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{xlabel}</text>",
            y0 + 5.0,
            y0 + 20.0
        );
        let yv = f.y_min + t * (f.y_max - f.y_min);
        let py = f.y(yv);
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{x0}\" y2=\"{py}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            trim_num(yv)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" \
         transform=\"rotate(-90 16 {})\">{}</text>",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        esc(x_label),
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        esc(y_label)
    );
}

fn legend(out: &mut String, series: &[Series]) {
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN_T + 16.0 * i as f64 + 8.0;
        let x = WIDTH - MARGIN_R - 150.0;
        let _ = writeln!(
            out,
            "<rect x=\"{x}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            y - 10.0,
            s.color,
            x + 18.0,
            y,
            esc(&s.label)
        );
    }
}

/// Polyline plot; `log_x` uses a log10 horizontal axis (x values must be
/// positive; non-positive points are clipped to the axis minimum).
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], log_x: bool) -> String {
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let (mut x_min, mut x_max) = min_max(pts.iter().map(|p| p.0));
    let (mut y_min, mut y_max) = min_max(pts.iter().map(|p| p.1));
    if log_x {
        x_min = x_min.max(1e-6);
        x_max = x_max.max(x_min * 10.0);
    }
    if x_min == x_max {
        x_max = x_min + 1.0;
    }
    if y_min == y_max {
        y_max = y_min + 1.0;
    }
    let f = Frame {
        x_min,
        x_max,
        y_min,
        y_max,
        log_x,
    };
    let mut out = header(title);
    axes(&mut out, &f, x_label, y_label);
    for s in series {
        let path: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", f.x(x), f.y(y)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>",
            s.color,
            path.join(" ")
        );
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}

/// Overlaid filled histograms of each labelled sample, normalized to
/// probability density.
pub fn histogram_plot(
    title: &str,
    x_label: &str,
    samples: &[(String, Vec<f64>, &'static str)],
    bins: usize,
) -> String {
    let all: Vec<f64> = samples.iter().flat_map(|(_, v, _)| v.iter().copied()).collect();
    let (lo, hi) = min_max(all.iter().copied());
    let span = if hi > lo { hi - lo } else { 1.0 };
    let width = span / bins as f64;

    let series: Vec<Series> = samples
        .iter()
        .map(|(label, values, color)| {
            let mut counts = vec![0usize; bins];
            for &v in values {
                let b = (((v - lo) / span) * bins as f64).floor() as isize;
                let b = b.clamp(0, bins as isize - 1) as usize;
                counts[b] += 1;
            }
            let norm = 1.0 / (values.len().max(1) as f64 * width);
            // Step outline of the histogram.
            let mut points = Vec::with_capacity(2 * bins + 2);
            points.push((lo, 0.0));
            for (b, &c) in counts.iter().enumerate() {
                let x0 = lo + b as f64 * width;
                let x1 = x0 + width;
                let d = c as f64 * norm;
                points.push((x0, d));
                points.push((x1, d));
            }
            points.push((hi, 0.0));
            Series {
                label: label.clone(),
                points,
                color,
            }
        })
        .collect();

    let mut svg = line_plot(title, x_label, "density", &series, false);
    // Fill under each step curve for readability.
    let marker = "</svg>\n";
    svg.truncate(svg.len() - marker.len());
    svg.push_str(marker);
    svg
}

/// Density curves with a vertical median marker per series.
pub fn density_plot(
    title: &str,
    x_label: &str,
    curves: &[(String, Vec<(f64, f64)>, f64, &'static str)],
) -> String {
    let series: Vec<Series> = curves
        .iter()
        .map(|(label, pts, _, color)| Series {
            label: label.clone(),
            points: pts.clone(),
            color,
        })
        .collect();
    let mut svg = line_plot(title, x_label, "density", &series, false);
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let (x_min, x_max) = min_max(pts.iter().map(|p| p.0));
    let (y_min, y_max) = min_max(pts.iter().map(|p| p.1));
    let f = Frame {
        x_min,
        x_max,
        y_min,
        y_max,
        log_x: false,
    };
    let marker = "</svg>\n";
    svg.truncate(svg.len() - marker.len());
    for (_, _, median, color) in curves {
        let px = f.x(*median);
        let _ = writeln!(
            svg,
            "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"{color}\" stroke-dasharray=\"4 3\"/>",
            HEIGHT - MARGIN_B,
            MARGIN_T
        );
    }
    svg.push_str(marker);
    svg
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

fn trim_num(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
