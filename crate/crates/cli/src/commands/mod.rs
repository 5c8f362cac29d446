//! Pipeline stage implementations.

pub mod embed;
pub mod eval;
pub mod plot;
pub mod prep;
pub mod quality;
pub mod synth;
pub mod train;

use crate::config::RunConfig;
use anyhow::{bail, Context, Result};
use gaze_emb_core::net::ModelCheckpoint;
use gaze_emb_core::prep::WindowSet;
use std::path::{Path, PathBuf};

/// Default pipeline scalar.
pub type S = f64;

fn windows_stem(cfg: &RunConfig) -> PathBuf {
    cfg.path_or_default("paths.windows", "windows").join("windows")
}

fn load_windows(cfg: &RunConfig) -> Result<WindowSet<S>> {
    let stem = windows_stem(cfg);
    WindowSet::load(&stem).with_context(|| {
        format!(
            "cannot load windows from {} (run the prep stage first?)",
            stem.with_extension("bin").display()
        )
    })
}

fn checkpoints_dir(cfg: &RunConfig) -> PathBuf {
    cfg.path_or_default("paths.checkpoints", "checkpoints")
}

fn load_checkpoints(cfg: &RunConfig) -> Result<Vec<ModelCheckpoint<S>>> {
    let dir = checkpoints_dir(cfg);
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .with_context(|| format!("missing checkpoint directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |e| e == "ckpt"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no checkpoints (*.ckpt) found in {}", dir.display());
    }
    paths
        .iter()
        .map(|p| {
            ModelCheckpoint::load(p)
                .with_context(|| format!("cannot load checkpoint {}", p.display()))
        })
        .collect()
}

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)
        .with_context(|| format!("cannot create directory {}", path.display()))?;
    Ok(())
}
