//! `quality`: spatial precision/accuracy of fixation CSVs plus density curves.

use super::{ensure_dir, S};
use crate::config::RunConfig;
use anyhow::{bail, Context, Result};
use gaze_emb_core::quality::{
    density_grid, kde, silverman_bandwidth, spatial_accuracy, spatial_precision, FixationSegment,
};
use std::fmt::Write as _;
use std::path::PathBuf;

/// Parses an `x,y,tx,ty` fixation CSV; the target is the first row's
/// `(tx, ty)`.
pub fn parse_fixation_csv(text: &str) -> Result<FixationSegment<S>> {
    let mut gaze = Vec::new();
    let mut target = None;
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            let header: Vec<&str> = line.split(',').map(str::trim).collect();
            if header != ["x", "y", "tx", "ty"] {
                bail!("fixation CSV must have header x,y,tx,ty");
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            bail!("row {} needs 4 cells", i + 1);
        }
        let nums: Vec<f64> = cells
            .iter()
            .map(|c| c.trim().parse::<f64>().map_err(|e| anyhow::anyhow!("row {}: {e}", i + 1)))
            .collect::<Result<_>>()?;
        gaze.push((nums[0], nums[1]));
        if target.is_none() {
            target = Some((nums[2], nums[3]));
        }
    }
    let target = target.ok_or_else(|| anyhow::anyhow!("fixation CSV has no data rows"))?;
    Ok(FixationSegment::new(gaze, target, 250)?)
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let fix_dir = cfg.path_or_default("paths.fixations", "fixations");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&fix_dir)
        .with_context(|| format!("missing fixations directory {}", fix_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |e| e == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no fixation CSVs in {}", fix_dir.display());
    }

    let out_dir = cfg.path_or_default("paths.quality", "quality");
    ensure_dir(&out_dir)?;

    let mut accuracies = Vec::new();
    let mut precisions = Vec::new();
    for path in &files {
        let seg = parse_fixation_csv(
            &std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        )
        .with_context(|| format!("parsing {}", path.display()))?;
        let acc = spatial_accuracy(&seg);
        let prec = spatial_precision(&seg);
        accuracies.push(acc);
        precisions.push(prec);

        let stem = path.file_stem().unwrap().to_string_lossy();
        let mut csv = String::from("metric,value\n");
        let _ = writeln!(csv, "spatial_accuracy,{acc}");
        let _ = writeln!(csv, "spatial_precision,{prec}");
        std::fs::write(out_dir.join(format!("{stem}_metrics.csv")), csv)?;
    }

    let grid_points = cfg.usize("quality.grid_points");
    let bandwidth = match cfg.str("quality.bandwidth") {
        "auto" => None,
        text => Some(
            text.parse::<f64>()
                .map_err(|e| anyhow::anyhow!("quality.bandwidth: {e}"))?,
        ),
    };
    for (name, values) in [("accuracy", &accuracies), ("precision", &precisions)] {
        let h = bandwidth.unwrap_or_else(|| silverman_bandwidth(values));
        let grid = density_grid(values, h, 5.0, grid_points);
        let curve = kde(values, Some(h), &grid)?;
        let mut csv = String::from("grid,density\n");
        for (g, d) in curve.grid.iter().zip(&curve.density) {
            let _ = writeln!(csv, "{g},{d}");
        }
        std::fs::write(out_dir.join(format!("{name}_density.csv")), csv)?;
    }

    println!(
        "quality: {} segments; median accuracy {:.4} dva, median precision {:.4} dva -> {}",
        files.len(),
        median(&mut accuracies.clone()),
        median(&mut precisions.clone()),
        out_dir.display()
    );
    Ok(())
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}
