//! Protocol evaluation and report artifacts.

use super::embedding::{centroid, EmbeddingVector};
use super::metrics::{d_prime, eer, frr_at_far, roc, RocPoint};
use super::scores::{build_score_sets, ScorePair, ScoreSets};
use super::EvalProtocol;
use crate::error::{Error, Result};
use crate::net::{forward, ModelCheckpoint};
use crate::prep::{group_segments, VelocityWindow, WindowSet};
use crate::scalar::Scalar;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

const FRR_SPREAD_DEFINITION: &str =
    "standard deviation of FRR@FAR across the single-model evaluations; point estimates come from the ensemble";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EvalCounts {
    pub subjects: usize,
    pub genuine: usize,
    pub imposter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalMetrics {
    pub eer: f64,
    pub d_prime: f64,
    pub frr_at_far: f64,
    pub frr_threshold: f64,
    pub frr_per_model: Vec<f64>,
    pub frr_spread_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EvalFlags {
    /// The imposter pool is too small to resolve the FAR target.
    pub far_resolution_limited: bool,
}

/// Evaluation result. The JSON serialization carries the protocol, counts,
/// metrics, and flags; raw scores and the ROC go to CSV artifacts.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub protocol: EvalProtocol,
    pub far_target: f64,
    pub counts: EvalCounts,
    pub metrics: EvalMetrics,
    pub flags: EvalFlags,
    pub frr_spread_definition: String,
    #[serde(skip)]
    pub scores: ScoreSets,
    #[serde(skip)]
    pub roc: Vec<RocPoint>,
}

/// Runs one protocol over the held-out (or caller-provided) subjects.
///
/// Per subject and role, the template is the length-normalized centroid of
/// the ensemble embeddings of the first full segment's windows; subjects
/// lacking either template are dropped from both pools. Point estimates come
/// from the ensemble, the FRR spread from per-model evaluations.
pub fn evaluate<S: Scalar>(
    checkpoints: &[&ModelCheckpoint<S>],
    windows: &WindowSet<S>,
    protocol: &EvalProtocol,
    subjects: Option<&BTreeSet<String>>,
    far_target: f64,
) -> Result<EvalReport> {
    protocol.validate()?;
    if checkpoints.is_empty() {
        return Err(Error::Insufficient("evaluation needs at least one model".into()));
    }
    if far_target <= 0.0 || far_target >= 1.0 {
        return Err(Error::Config(format!("far_target must be in (0, 1), got {far_target}")));
    }
    let mut order: Vec<usize> = (0..checkpoints.len()).collect();
    order.sort_by_key(|&i| checkpoints[i].fold_index);
    for pair in order.windows(2) {
        if checkpoints[pair[0]].fold_index == checkpoints[pair[1]].fold_index {
            return Err(Error::Config("duplicate fold_index among checkpoints".into()));
        }
    }
    let ordered: Vec<&ModelCheckpoint<S>> = order.iter().map(|&i| checkpoints[i]).collect();
    for c in &ordered[1..] {
        if c.config() != ordered[0].config() {
            return Err(Error::Config(
                "checkpoints disagree on the architecture".into(),
            ));
        }
    }

    let pool: BTreeSet<String> = match subjects {
        Some(s) => s.clone(),
        None => windows
            .windows()
            .iter()
            .map(|w| w.source.subject_id.clone())
            .collect(),
    };

    // Per-role templates: ensemble plus one per model.
    let n_models = ordered.len();
    let (enroll_any, enroll_templates) =
        role_templates(&ordered, windows, protocol, &pool, true)?;
    let (probe_any, probe_templates) =
        role_templates(&ordered, windows, protocol, &pool, false)?;

    let mut missing = Vec::new();
    if !enroll_any {
        missing.push(format!(
            "enroll recordings (round {}, session {}, task {})",
            protocol.enroll.round, protocol.enroll.session, protocol.task
        ));
    }
    if !probe_any {
        missing.push(format!(
            "probe recordings (round {}, session {}, task {})",
            protocol.probe.round, protocol.probe.session, protocol.task
        ));
    }
    if !missing.is_empty() {
        return Err(Error::Protocol { missing });
    }

    // Variant 0 is the ensemble, variants 1.. are single models.
    let scores_input: Vec<ScoreSets> = (0..=n_models)
        .map(|v| {
            let enroll: BTreeMap<String, EmbeddingVector<S>> = enroll_templates
                .iter()
                .filter_map(|(s, t)| t[v].clone().map(|e| (s.clone(), e)))
                .collect();
            let probe: BTreeMap<String, EmbeddingVector<S>> = probe_templates
                .iter()
                .filter_map(|(s, t)| t[v].clone().map(|e| (s.clone(), e)))
                .collect();
            build_score_sets(&enroll, &probe)
        })
        .collect::<Result<_>>()?;

    let ensemble_scores = &scores_input[0];
    let genuine = ensemble_scores.genuine_scores();
    let imposter = ensemble_scores.imposter_scores();
    let curve = roc(&genuine, &imposter)?;
    let eer_value = eer(&curve);
    let dp = d_prime(&genuine, &imposter)?;
    let frr = frr_at_far(&curve, far_target, imposter.len());

    let mut frr_per_model = Vec::with_capacity(n_models);
    for per_model in &scores_input[1..] {
        let c = roc(&per_model.genuine_scores(), &per_model.imposter_scores())?;
        frr_per_model.push(frr_at_far(&c, far_target, per_model.imposter.len()).frr);
    }
    let frr_spread_std = sample_std(&frr_per_model);

    let n_subjects = ensemble_scores.genuine.len();
    Ok(EvalReport {
        protocol: protocol.clone(),
        far_target,
        counts: EvalCounts {
            subjects: n_subjects,
            genuine: ensemble_scores.genuine.len(),
            imposter: ensemble_scores.imposter.len(),
        },
        metrics: EvalMetrics {
            eer: eer_value,
            d_prime: dp,
            frr_at_far: frr.frr,
            frr_threshold: frr.threshold,
            frr_per_model,
            frr_spread_std,
        },
        flags: EvalFlags {
            far_resolution_limited: frr.resolution_limited,
        },
        frr_spread_definition: FRR_SPREAD_DEFINITION.to_string(),
        scores: ensemble_scores.clone(),
        roc: curve,
    })
}

type SubjectTemplates<S> = BTreeMap<String, Vec<Option<EmbeddingVector<S>>>>;

/// Builds, per subject, the ensemble template followed by one single-model
/// template per checkpoint (None when the subject lacks a full segment).
/// The boolean reports whether any window matched the role coordinates.
fn role_templates<S: Scalar>(
    ordered: &[&ModelCheckpoint<S>],
    windows: &WindowSet<S>,
    protocol: &EvalProtocol,
    pool: &BTreeSet<String>,
    enroll_role: bool,
) -> Result<(bool, SubjectTemplates<S>)> {
    let rs = if enroll_role {
        protocol.enroll
    } else {
        protocol.probe
    };

    let mut any_window = false;
    let mut per_subject: BTreeMap<&str, Vec<&VelocityWindow<S>>> = BTreeMap::new();
    for w in windows.windows() {
        let s = &w.source;
        if s.round == rs.round && s.session == rs.session && s.task == protocol.task {
            any_window = true;
            if pool.contains(s.subject_id.as_str()) {
                per_subject.entry(s.subject_id.as_str()).or_default().push(w);
            }
        }
    }

    let subject_list: Vec<(&str, Vec<&VelocityWindow<S>>)> = per_subject.into_iter().collect();
    let rows: Vec<Result<(String, Option<Vec<Option<EmbeddingVector<S>>>>)>> = subject_list
        .par_iter()
        .map(|(subject, ws)| {
            let mut sorted: Vec<VelocityWindow<S>> = ws.iter().map(|w| (*w).clone()).collect();
            sorted.sort_by_key(|w| w.source.window_index);
            let segments = group_segments(&sorted, protocol.segment_windows)?;
            let Some(first) = segments.first() else {
                return Ok((subject.to_string(), None));
            };
            // Raw per-model outputs per window, assembled into the ensemble
            // and the per-model embeddings.
            let mut ensemble_members = Vec::with_capacity(first.windows.len());
            let mut per_model_members: Vec<Vec<EmbeddingVector<S>>> =
                vec![Vec::with_capacity(first.windows.len()); ordered.len()];
            for w in &first.windows {
                let mut concat = Vec::new();
                for (m, ckpt) in ordered.iter().enumerate() {
                    let out = forward(&ckpt.params, w)?;
                    concat.extend_from_slice(&out);
                    per_model_members[m].push(EmbeddingVector::new(out).normalize()?);
                }
                ensemble_members.push(EmbeddingVector::new(concat).normalize()?);
            }
            let mut templates = Vec::with_capacity(1 + ordered.len());
            templates.push(Some(centroid(&ensemble_members)?));
            for members in &per_model_members {
                templates.push(Some(centroid(members)?));
            }
            Ok((subject.to_string(), Some(templates)))
        })
        .collect();

    let n_variants = 1 + ordered.len();
    let mut out = BTreeMap::new();
    for row in rows {
        let (subject, templates) = row?;
        out.insert(
            subject,
            templates.unwrap_or_else(|| vec![None; n_variants]),
        );
    }
    Ok((any_window, out))
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Pretty JSON plus trailing newline; byte-deterministic for a given report.
pub fn write_report_json(report: &EvalReport, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// `threshold,far,frr` rows over the full curve.
pub fn write_roc_csv(curve: &[RocPoint], path: &Path) -> Result<()> {
    let mut out = String::from("threshold,far,frr\n");
    for p in curve {
        let _ = writeln!(out, "{},{},{}", p.threshold, p.far, p.frr);
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// `enroll,probe,score` rows.
pub fn write_scores_csv(pairs: &[ScorePair], path: &Path) -> Result<()> {
    let mut out = String::from("enroll,probe,score\n");
    for p in pairs {
        let _ = writeln!(out, "{},{},{}", p.enroll_id, p.probe_id, p.score);
    }
    std::fs::write(path, out)?;
    Ok(())
}
