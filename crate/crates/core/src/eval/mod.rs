//! Biometric evaluation: ensemble embeddings, enrollment/probe templates,
//! genuine/imposter scoring, ROC, EER, d-prime, and FRR at a FAR target.

mod embedding;
mod metrics;
mod reference;
mod report;
mod scores;

pub use embedding::{centroid, cosine_similarity, ensemble_embed, EmbeddingVector};
pub use metrics::{d_prime, eer, frr_at_far, roc, FrrAtFar, RocPoint};
pub use reference::{reference_targets, ReferenceTarget, EER_COMPARISON_BAND_PCT};
pub use report::{
    evaluate, write_report_json, write_roc_csv, write_scores_csv, EvalCounts, EvalFlags,
    EvalMetrics, EvalReport,
};
pub use scores::{build_score_sets, ScorePair, ScoreSets};

use crate::error::{Error, Result};
use crate::gaze::{Eyes, Task};
use serde::{Deserialize, Serialize};

/// Evaluation horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Term {
    Short,
    Long,
}

/// Round/session coordinate of an enrollment or probe pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundSession {
    pub round: u8,
    pub session: u8,
}

/// What to compare against what.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalProtocol {
    pub term: Term,
    pub task: Task,
    pub eyes: Eyes,
    pub enroll: RoundSession,
    pub probe: RoundSession,
    pub segment_windows: usize,
}

impl EvalProtocol {
    /// Short-term default: enroll round 1 session 1, probe round 1 session 2.
    pub fn short_term(task: Task, eyes: Eyes) -> Self {
        EvalProtocol {
            term: Term::Short,
            task,
            eyes,
            enroll: RoundSession { round: 1, session: 1 },
            probe: RoundSession { round: 1, session: 2 },
            segment_windows: 9,
        }
    }

    /// Long-term default: enroll round 1 session 1, probe `last_round` session 1.
    pub fn long_term(task: Task, eyes: Eyes, last_round: u8) -> Self {
        EvalProtocol {
            term: Term::Long,
            task,
            eyes,
            enroll: RoundSession { round: 1, session: 1 },
            probe: RoundSession {
                round: last_round,
                session: 1,
            },
            segment_windows: 9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.enroll == self.probe {
            return Err(Error::Config(
                "enroll and probe must reference different recordings".into(),
            ));
        }
        if self.segment_windows == 0 {
            return Err(Error::Config("segment_windows must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_protocols_are_valid() {
        EvalProtocol::short_term(Task::TEX, Eyes::Binocular)
            .validate()
            .unwrap();
        EvalProtocol::long_term(Task::TEX, Eyes::Binocular, 3)
            .validate()
            .unwrap();
    }

    #[test]
    fn identical_enroll_and_probe_are_rejected() {
        let mut p = EvalProtocol::short_term(Task::TEX, Eyes::Binocular);
        p.probe = p.enroll;
        assert!(p.validate().is_err());
    }
}
