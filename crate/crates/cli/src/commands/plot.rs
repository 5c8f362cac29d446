//! `plot`: SVG renderings of the report and quality CSV artifacts.

use super::ensure_dir;
use crate::config::RunConfig;
use crate::svg;
use anyhow::{Context, Result};
use std::path::Path;

fn read_csv_columns(path: &Path, want: usize) -> Result<Vec<Vec<f64>>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("missing {}", path.display()))?;
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); want];
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        for (c, col) in cols.iter_mut().enumerate() {
            let cell = cells.get(cells.len() - want + c).copied().unwrap_or("");
            col.push(cell.trim().parse::<f64>().unwrap_or(f64::NAN));
        }
    }
    Ok(cols)
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let plots_dir = cfg.out_dir().join("plots");
    ensure_dir(&plots_dir)?;
    let report_dir = cfg.path_or_default("paths.report", "report");
    let quality_dir = cfg.path_or_default("paths.quality", "quality");
    let mut written = Vec::new();

    let roc_path = report_dir.join("roc.csv");
    if roc_path.exists() {
        let cols = read_csv_columns(&roc_path, 3)?;
        let points: Vec<(f64, f64)> = cols[1]
            .iter()
            .zip(&cols[2])
            .filter(|(f, r)| f.is_finite() && r.is_finite())
            .map(|(&far, &frr)| (far.max(1e-6), 1.0 - frr))
            .collect();
        let series = svg::Series {
            label: "ensemble".into(),
            points,
            color: svg::COLORS[0],
        };
        let out = plots_dir.join("roc.svg");
        std::fs::write(
            &out,
            svg::line_plot("ROC", "false acceptance rate", "true acceptance rate", &[series], true),
        )?;
        written.push(out);
    }

    let genuine_path = report_dir.join("scores_genuine.csv");
    let imposter_path = report_dir.join("scores_imposter.csv");
    if genuine_path.exists() && imposter_path.exists() {
        let genuine = read_csv_columns(&genuine_path, 1)?.remove(0);
        let imposter = read_csv_columns(&imposter_path, 1)?.remove(0);
        let out = plots_dir.join("scores_hist.svg");
        std::fs::write(
            &out,
            svg::histogram_plot(
                "Similarity score distribution",
                "cosine similarity",
                &[
                    ("genuine".into(), genuine, svg::COLORS[0]),
                    ("imposter".into(), imposter, svg::COLORS[1]),
                ],
                40,
            ),
        )?;
        written.push(out);
    }

    let acc_path = quality_dir.join("accuracy_density.csv");
    let prec_path = quality_dir.join("precision_density.csv");
    if acc_path.exists() && prec_path.exists() {
        let mut curves = Vec::new();
        for (label, path, color) in [
            ("accuracy", &acc_path, svg::COLORS[0]),
            ("precision", &prec_path, svg::COLORS[1]),
        ] {
            let cols = read_csv_columns(path, 2)?;
            let pts: Vec<(f64, f64)> = cols[0].iter().copied().zip(cols[1].iter().copied()).collect();
            let median = density_median(&pts);
            curves.push((label.to_string(), pts, median, color));
        }
        let out = plots_dir.join("quality_density.svg");
        std::fs::write(
            &out,
            svg::density_plot("Spatial quality densities", "dva", &curves),
        )?;
        written.push(out);
    }

    if written.is_empty() {
        anyhow::bail!(
            "nothing to plot: no CSV artifacts in {} or {}",
            report_dir.display(),
            quality_dir.display()
        );
    }
    println!(
        "plot: wrote {} SVG file(s) to {}",
        written.len(),
        plots_dir.display()
    );
    Ok(())
}

/// Median of the density: the grid point where the cumulative trapezoidal
/// mass crosses half of the total.
fn density_median(points: &[(f64, f64)]) -> f64 {
    let total: f64 = points
        .windows(2)
        .map(|p| (p[1].0 - p[0].0) * (p[0].1 + p[1].1) / 2.0)
        .sum();
    let mut acc = 0.0;
    for p in points.windows(2) {
        acc += (p[1].0 - p[0].0) * (p[0].1 + p[1].1) / 2.0;
        if acc >= total / 2.0 {
            return p[1].0;
        }
    }
    points.last().map(|p| p.0).unwrap_or(f64::NAN)
}
