//! `train`: fold assignment plus 4-fold (configurable) training.

use super::{checkpoints_dir, ensure_dir, load_windows};
use crate::config::RunConfig;
use anyhow::{bail, Result};
use gaze_emb_core::net::NetConfig;
use gaze_emb_core::train::{
    assign_folds, train_all_folds, write_train_log, FoldAssignment, MSLossHParams, TrainConfig,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Fold assignment persisted next to the checkpoints so the eval stage can
/// recover the held-out subject list.
#[derive(Serialize, Deserialize)]
pub struct StoredAssignment {
    pub k: usize,
    pub fold_of_subject: BTreeMap<String, usize>,
    pub held_out: BTreeSet<String>,
}

pub fn net_config(cfg: &RunConfig, in_channels: usize) -> Result<NetConfig> {
    let layers = cfg.usize("net.layers");
    let dilations: Vec<usize> = match cfg.str("net.dilations") {
        "auto" => (0..layers).map(|l| 1usize << l.min(6)).collect(),
        text => text
            .split(',')
            .map(|d| d.trim().parse::<usize>().map_err(|e| anyhow::anyhow!("net.dilations: {e}")))
            .collect::<Result<_>>()?,
    };
    let nc = NetConfig {
        in_channels,
        n_conv_layers: layers,
        growth: cfg.usize("net.growth"),
        kernel: cfg.usize("net.kernel"),
        dilations,
        embed_dim: cfg.usize("net.embed_dim"),
        use_norm: cfg.bool("net.norm"),
    };
    nc.validate()?;
    Ok(nc)
}

pub fn train_config(cfg: &RunConfig) -> Result<TrainConfig> {
    let tc = TrainConfig {
        epochs: cfg.usize("train.epochs"),
        batch_size: cfg.usize("train.batch_size"),
        classes_per_batch: cfg.usize("train.classes_per_batch"),
        samples_per_class: cfg.usize("train.samples_per_class"),
        lr_initial: cfg.f64("train.lr_initial"),
        lr_peak: cfg.f64("train.lr_peak"),
        lr_final: cfg.f64("train.lr_final"),
        peak_epoch: cfg.usize("train.peak_epoch"),
        seed: cfg.u64("seed"),
        adam_beta1: cfg.f64("train.adam_beta1"),
        adam_beta2: cfg.f64("train.adam_beta2"),
        adam_eps: cfg.f64("train.adam_eps"),
    };
    tc.validate()?;
    Ok(tc)
}

pub fn ms_params(cfg: &RunConfig) -> Result<MSLossHParams> {
    let hp = MSLossHParams {
        alpha: cfg.f64("loss.alpha"),
        beta: cfg.f64("loss.beta"),
        base: cfg.f64("loss.base"),
        epsilon: cfg.f64("loss.epsilon"),
    };
    hp.validate()?;
    Ok(hp)
}

pub fn load_assignment(dir: &Path) -> Result<FoldAssignment> {
    let path = dir.join("assignment.json");
    let text = std::fs::read_to_string(&path).map_err(|_| {
        anyhow::anyhow!(
            "missing fold assignment {} (run the train stage first?)",
            path.display()
        )
    })?;
    let stored: StoredAssignment = serde_json::from_str(&text)?;
    Ok(FoldAssignment {
        k: stored.k,
        fold_of_subject: stored.fold_of_subject,
        held_out: stored.held_out,
    })
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let windows = load_windows(cfg)?;
    if windows.is_empty() {
        bail!("window set is empty");
    }

    // Recording count per subject: distinct (round, session, task) tuples.
    let mut recordings: BTreeMap<String, BTreeSet<(u8, u8, String)>> = BTreeMap::new();
    for w in windows.windows() {
        let s = &w.source;
        recordings
            .entry(s.subject_id.clone())
            .or_default()
            .insert((s.round, s.session, s.task.to_string()));
    }
    let counts: BTreeMap<String, usize> = recordings
        .into_iter()
        .map(|(s, set)| (s, set.len()))
        .collect();

    let held_out: BTreeSet<String> = cfg.list("train.held_out").into_iter().collect();
    let seed = cfg.u64("seed");
    let assignment = assign_folds(&counts, cfg.usize("train.folds"), &held_out, seed)?;

    let nc = net_config(cfg, windows.n_channels())?;
    let tc = train_config(cfg)?;
    let hp = ms_params(cfg)?;

    let results = train_all_folds(&windows, &assignment, &nc, &tc, &hp)?;

    let ckpt_dir = checkpoints_dir(cfg);
    ensure_dir(&ckpt_dir)?;
    let mut all_rows = Vec::new();
    for r in &results {
        r.checkpoint
            .save(&ckpt_dir.join(format!("fold{}.ckpt", r.checkpoint.fold_index)))?;
        all_rows.extend(r.log.iter().cloned());
    }
    all_rows.sort_by_key(|r| (r.fold, r.step));
    write_train_log(&all_rows, &cfg.out_dir().join("train_log.csv"))?;

    let stored = StoredAssignment {
        k: assignment.k,
        fold_of_subject: assignment.fold_of_subject.clone(),
        held_out: assignment.held_out.clone(),
    };
    std::fs::write(
        ckpt_dir.join("assignment.json"),
        serde_json::to_string_pretty(&stored)?,
    )?;

    let final_losses: Vec<String> = results
        .iter()
        .map(|r| format!("{:.4}", r.epoch_train_loss.last().copied().unwrap_or(f64::NAN)))
        .collect();
    println!(
        "train: {} folds x {} epochs on {} windows; final train losses [{}]; checkpoints in {}",
        assignment.k,
        tc.epochs,
        windows.len(),
        final_losses.join(", "),
        ckpt_dir.display()
    );
    Ok(())
}
