//! `embed`: per-window ensemble embeddings as CSV.

use super::{load_checkpoints, load_windows};
use crate::config::RunConfig;
use anyhow::Result;
use gaze_emb_core::eval::ensemble_embed;
use gaze_emb_core::net::ModelCheckpoint;
use std::fmt::Write as _;

pub fn run(cfg: &RunConfig) -> Result<()> {
    let windows = load_windows(cfg)?;
    let checkpoints = load_checkpoints(cfg)?;
    let refs: Vec<&ModelCheckpoint<super::S>> = checkpoints.iter().collect();

    let dim = refs.len() * refs[0].config().embed_dim;
    let mut out = String::from("subject,round,session,task,window_index");
    for d in 0..dim {
        let _ = write!(out, ",e{d}");
    }
    out.push('\n');

    for w in windows.windows() {
        let e = ensemble_embed(&refs, w)?;
        let s = &w.source;
        let _ = write!(
            out,
            "{},{},{},{},{}",
            s.subject_id, s.round, s.session, s.task, s.window_index
        );
        for v in &e.values {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }

    let path = cfg.out_dir().join("embeddings.csv");
    std::fs::write(&path, out)?;
    println!(
        "embed: {} windows -> {dim}-d embeddings at {}",
        windows.len(),
        path.display()
    );
    Ok(())
}
