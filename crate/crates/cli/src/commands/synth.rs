//! `synth`: generate deterministic multi-subject recordings.

use super::{ensure_dir, S};
use crate::config::RunConfig;
use anyhow::{Context, Result};
use gaze_emb_core::gaze::{
    recording_seed, serialize_meta, serialize_recording, synth_recording, SubjectParams, Task,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Per-subject dynamics drawn once per subject index within physiological
/// ranges; deterministic in `(seed, index)`.
pub fn subject_params(seed: u64, index: usize) -> SubjectParams {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ ((index as u64 + 1) * 0x00c6_a4a7_9358_79b9));
    SubjectParams {
        saccade_vmax: rng.gen_range(250.0..750.0),
        saccade_c: rng.gen_range(3.0..9.0),
        fixation_noise_sigma: rng.gen_range(0.02..0.4),
        saccade_rate: rng.gen_range(1.0..4.0),
        pursuit_gain: rng.gen_range(0.6..1.0),
        latency_ms: rng.gen_range(80.0..180.0),
    }
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let seed = cfg.u64("seed");
    let n_subjects = cfg.usize("synth.subjects");
    let duration_s = cfg.f64("synth.duration_s");
    let rate_hz = cfg.u64("synth.rate_hz") as u32;
    let rounds = cfg.u64("synth.rounds") as u8;
    let sessions = cfg.u64("synth.sessions") as u8;
    let tasks: Vec<Task> = cfg
        .list("synth.tasks")
        .iter()
        .map(|t| t.parse())
        .collect::<gaze_emb_core::Result<_>>()?;

    let dir = cfg.path_or_default("paths.recordings", "recordings");
    ensure_dir(&dir)?;

    let mut written = 0usize;
    for i in 0..n_subjects {
        let subject = format!("s{i:02}");
        let params = subject_params(seed, i);
        for round in 1..=rounds {
            for session in 1..=sessions {
                for &task in &tasks {
                    let rec_seed = recording_seed(seed, &subject, round, session, task);
                    let rec = synth_recording::<S>(
                        &params, &subject, round, session, task, duration_s, rate_hz, rec_seed,
                    )?;
                    let stem = format!("{subject}_r{round}_s{session}_{task}");
                    std::fs::write(dir.join(format!("{stem}.csv")), serialize_recording(&rec))
                        .with_context(|| format!("writing {stem}.csv"))?;
                    std::fs::write(dir.join(format!("{stem}.meta")), serialize_meta(&rec.meta))
                        .with_context(|| format!("writing {stem}.meta"))?;
                    written += 1;
                }
            }
        }
    }
    println!(
        "synth: wrote {written} recordings ({n_subjects} subjects, {rounds} round(s), {sessions} session(s)) to {}",
        dir.display()
    );
    Ok(())
}
