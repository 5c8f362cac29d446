//! `eval`: biometric evaluation artifacts.

use super::{checkpoints_dir, ensure_dir, load_checkpoints, load_windows};
use crate::config::RunConfig;
use anyhow::{bail, Result};
use gaze_emb_core::eval::{
    evaluate, write_report_json, write_roc_csv, write_scores_csv, EvalProtocol, RoundSession,
    Term,
};
use gaze_emb_core::gaze::{Eyes, Task};
use gaze_emb_core::net::ModelCheckpoint;
use std::collections::BTreeSet;

pub fn run(cfg: &RunConfig) -> Result<()> {
    let windows = load_windows(cfg)?;
    let checkpoints = load_checkpoints(cfg)?;
    let refs: Vec<&ModelCheckpoint<super::S>> = checkpoints.iter().collect();

    let term = match cfg.str("eval.term") {
        "short" => Term::Short,
        "long" => Term::Long,
        other => bail!("eval.term must be short|long, got `{other}`"),
    };
    let task: Task = cfg.str("eval.task").parse()?;
    let eyes = if windows.n_channels() == 4 {
        Eyes::Binocular
    } else {
        Eyes::MonocularLeft
    };
    let protocol = EvalProtocol {
        term,
        task,
        eyes,
        enroll: RoundSession {
            round: cfg.u64("eval.enroll_round") as u8,
            session: cfg.u64("eval.enroll_session") as u8,
        },
        probe: RoundSession {
            round: cfg.u64("eval.probe_round") as u8,
            session: cfg.u64("eval.probe_session") as u8,
        },
        segment_windows: cfg.usize("prep.segment_windows"),
    };

    let subjects: Option<BTreeSet<String>> = match cfg.str("eval.subjects") {
        "all" => None,
        "held_out" => {
            let assignment = super::train::load_assignment(&checkpoints_dir(cfg))?;
            if assignment.held_out.is_empty() {
                bail!(
                    "eval.subjects = held_out, but the stored fold assignment has no held-out subjects; \
                     set train.held_out before training or use eval.subjects = all"
                );
            }
            Some(assignment.held_out)
        }
        list => Some(list.split(',').map(|s| s.trim().to_string()).collect()),
    };

    let report = evaluate(
        &refs,
        &windows,
        &protocol,
        subjects.as_ref(),
        cfg.f64("eval.far_target"),
    )?;

    let dir = cfg.path_or_default("paths.report", "report");
    ensure_dir(&dir)?;
    write_report_json(&report, &dir.join("report.json"))?;
    write_roc_csv(&report.roc, &dir.join("roc.csv"))?;
    write_scores_csv(&report.scores.genuine, &dir.join("scores_genuine.csv"))?;
    write_scores_csv(&report.scores.imposter, &dir.join("scores_imposter.csv"))?;

    println!(
        "eval: {} subjects, EER {:.4}, d' {:.3}, FRR@{:.0e} {:.4}{} -> {}",
        report.counts.subjects,
        report.metrics.eer,
        report.metrics.d_prime,
        report.far_target,
        report.metrics.frr_at_far,
        if report.flags.far_resolution_limited {
            " (FAR resolution-limited)"
        } else {
            ""
        },
        dir.display()
    );
    Ok(())
}
