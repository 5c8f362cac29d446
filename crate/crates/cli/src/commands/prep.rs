//! `prep`: recordings to velocity windows.

use super::{ensure_dir, S};
use crate::config::RunConfig;
use anyhow::{anyhow, bail, Context, Result};
use gaze_emb_core::gaze::{parse_meta, parse_recording};
use gaze_emb_core::prep::{
    preprocess_recording, ChannelMode, PrepConfig, ScreenBounds, WindowSet,
};
use std::path::PathBuf;

pub fn prep_config(cfg: &RunConfig) -> Result<PrepConfig> {
    let bounds = match cfg.str("prep.bounds") {
        "none" => None,
        "gb" => Some(ScreenBounds::GB),
        "custom" => Some(ScreenBounds {
            x_min: cfg.f64("prep.x_min"),
            x_max: cfg.f64("prep.x_max"),
            y_min: cfg.f64("prep.y_min"),
            y_max: cfg.f64("prep.y_max"),
        }),
        other => bail!("prep.bounds must be none|gb|custom, got `{other}`"),
    };
    let pc = PrepConfig {
        dt_ms: cfg.f64("prep.dt_ms"),
        sg_window: cfg.usize("prep.sg_window"),
        sg_order: cfg.usize("prep.sg_order"),
        clamp: cfg.f64("prep.clamp"),
        window_s: cfg.f64("prep.window_s"),
        segment_windows: cfg.usize("prep.segment_windows"),
        bounds,
        decimate_factor: cfg.usize("prep.decimate_factor"),
    };
    pc.validate()?;
    Ok(pc)
}

pub fn channel_mode(cfg: &RunConfig) -> Result<ChannelMode> {
    Ok(match cfg.str("prep.channels") {
        "auto" => ChannelMode::Auto,
        "mono" => ChannelMode::MonocularLeft,
        "bino" => ChannelMode::Binocular,
        other => bail!("prep.channels must be auto|mono|bino, got `{other}`"),
    })
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let rec_dir = cfg.path_or_default("paths.recordings", "recordings");
    let mut stems: Vec<PathBuf> = std::fs::read_dir(&rec_dir)
        .with_context(|| format!("missing recordings directory {}", rec_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |e| e == "csv"))
        .collect();
    stems.sort();
    if stems.is_empty() {
        bail!("no recordings (*.csv) in {}", rec_dir.display());
    }

    let pc = prep_config(cfg)?;
    let mode = channel_mode(cfg)?;

    let mut set: Option<WindowSet<S>> = None;
    let mut recordings = 0usize;
    for csv_path in &stems {
        let meta_path = csv_path.with_extension("meta");
        let meta = parse_meta(
            &std::fs::read_to_string(&meta_path)
                .with_context(|| format!("missing sidecar {}", meta_path.display()))?,
        )?;
        let text = std::fs::read_to_string(csv_path)
            .with_context(|| format!("reading {}", csv_path.display()))?;
        let rec = parse_recording::<S>(&text, meta)
            .with_context(|| format!("parsing {}", csv_path.display()))?;
        let windows = preprocess_recording(&rec, &pc, mode)
            .with_context(|| format!("preprocessing {}", csv_path.display()))?;
        recordings += 1;
        match &mut set {
            None => {
                let (c, l) = windows
                    .first()
                    .map(|w| (w.n_channels(), w.len()))
                    .ok_or_else(|| anyhow!("{} yields no full window", csv_path.display()))?;
                let mut s = WindowSet::new(c, l);
                s.extend(windows)?;
                set = Some(s);
            }
            Some(s) => s.extend(windows)?,
        }
    }

    let set = set.expect("at least one recording");
    let out_dir = cfg.path_or_default("paths.windows", "windows");
    ensure_dir(&out_dir)?;
    let stem = out_dir.join("windows");
    set.save(&stem)?;
    println!(
        "prep: {recordings} recordings -> {} windows of {}x{} at {}",
        set.len(),
        set.n_channels(),
        set.window_len(),
        stem.with_extension("bin").display()
    );
    Ok(())
}
