//! Genuine/imposter score construction.

use super::embedding::{cosine_similarity, EmbeddingVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::collections::BTreeMap;

/// One enroll-versus-probe comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorePair {
    pub enroll_id: String,
    pub probe_id: String,
    pub score: f64,
}

/// Similarity scores split by pairing kind.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreSets {
    pub genuine: Vec<ScorePair>,
    pub imposter: Vec<ScorePair>,
}

impl ScoreSets {
    pub fn genuine_scores(&self) -> Vec<f64> {
        self.genuine.iter().map(|p| p.score).collect()
    }

    pub fn imposter_scores(&self) -> Vec<f64> {
        self.imposter.iter().map(|p| p.score).collect()
    }
}

/// Scores every enroll template against every probe template over the
/// subjects present in both maps: same-subject pairs are genuine, ordered
/// cross-subject pairs are imposter. Subjects missing either template are
/// excluded entirely.
pub fn build_score_sets<S: Scalar>(
    enroll: &BTreeMap<String, EmbeddingVector<S>>,
    probe: &BTreeMap<String, EmbeddingVector<S>>,
) -> Result<ScoreSets> {
    let shared: Vec<&String> = enroll.keys().filter(|s| probe.contains_key(*s)).collect();
    if shared.len() < 2 {
        return Err(Error::Insufficient(format!(
            "{} subjects present in both enroll and probe pools; need at least 2",
            shared.len()
        )));
    }

    let mut sets = ScoreSets::default();
    for &e_id in &shared {
        for &p_id in &shared {
            let score = cosine_similarity(&enroll[e_id].values, &probe[p_id].values)?;
            let pair = ScorePair {
                enroll_id: e_id.clone(),
                probe_id: p_id.clone(),
                score,
            };
            if e_id == p_id {
                sets.genuine.push(pair);
            } else {
                sets.imposter.push(pair);
            }
        }
    }
    Ok(sets)
}
