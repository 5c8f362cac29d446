//! Multi-similarity loss with pair mining.
//!
//! Embeddings are length-normalized inside the loss; similarities are dot
//! products of the normalized rows. Mining keeps, per anchor, positives with
//! `s < max_negative + epsilon` and negatives with `s > min_positive -
//! epsilon`, where the extrema run over the anchor's full candidate sets.
//! An anchor without negatives keeps all its positives; an anchor without
//! positives contributes nothing (its mining reference is undefined). The
//! loss is averaged over all anchors; the returned gradient is taken with
//! respect to the unnormalized embeddings.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Multi-similarity hyper-parameters. Defaults follow the configuration
/// lineage of the reference embedding network: alpha 2, beta 50,
/// base 0.5, epsilon 0.1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MSLossHParams {
    /// Positive-pair scaling.
    pub alpha: f64,
    /// Negative-pair scaling.
    pub beta: f64,
    /// Similarity threshold lambda.
    pub base: f64,
    /// Mining margin.
    pub epsilon: f64,
}

impl Default for MSLossHParams {
    fn default() -> Self {
        MSLossHParams {
            alpha: 2.0,
            beta: 50.0,
            base: 0.5,
            epsilon: 0.1,
        }
    }
}

impl MSLossHParams {
    pub fn validate(&self) -> Result<()> {
        if self.alpha <= 0.0 || self.beta <= 0.0 {
            return Err(Error::Config("alpha and beta must be positive".into()));
        }
        if self.epsilon < 0.0 {
            return Err(Error::Config("epsilon must be non-negative".into()));
        }
        if !(-1.0..=1.0).contains(&self.base) {
            return Err(Error::Config("base must lie in [-1, 1]".into()));
        }
        Ok(())
    }
}

/// Computes the loss and its exact gradient w.r.t. the unnormalized
/// embeddings (row-major `batch x dim`).
pub fn ms_loss<S: Scalar>(
    embeddings: &[S],
    labels: &[usize],
    dim: usize,
    hp: &MSLossHParams,
) -> Result<(S, Vec<S>)> {
    hp.validate()?;
    if dim == 0 || embeddings.len() % dim != 0 {
        return Err(Error::Shape(format!(
            "embedding buffer length {} is not a multiple of dim {dim}",
            embeddings.len()
        )));
    }
    let batch = embeddings.len() / dim;
    if labels.len() != batch {
        return Err(Error::Shape(format!(
            "{} labels for a batch of {batch}",
            labels.len()
        )));
    }
    if batch < 2 {
        return Err(Error::Insufficient("loss needs a batch of at least 2".into()));
    }
    let has_positive_pair = (0..batch)
        .any(|i| (0..batch).any(|j| j != i && labels[i] == labels[j]));
    if !has_positive_pair {
        return Err(Error::Insufficient("batch has no positive pairs".into()));
    }

    // Length-normalize rows.
    let mut norms = Vec::with_capacity(batch);
    let mut unit = vec![S::zero(); embeddings.len()];
    for i in 0..batch {
        let row = &embeddings[i * dim..(i + 1) * dim];
        let n = crate::scalar::norm(row);
        if n <= S::zero() || !n.is_finite() {
            return Err(Error::ZeroNorm(format!("embedding {i}")));
        }
        norms.push(n);
        for (u, &x) in unit[i * dim..(i + 1) * dim].iter_mut().zip(row) {
            *u = x / n;
        }
    }

    // Pairwise similarities.
    let mut sim = vec![S::zero(); batch * batch];
    for i in 0..batch {
        for j in (i + 1)..batch {
            let s = crate::scalar::dot(&unit[i * dim..(i + 1) * dim], &unit[j * dim..(j + 1) * dim]);
            sim[i * batch + j] = s;
            sim[j * batch + i] = s;
        }
    }

    let alpha = S::from_f64_lossy(hp.alpha);
    let beta = S::from_f64_lossy(hp.beta);
    let base = S::from_f64_lossy(hp.base);
    let eps = S::from_f64_lossy(hp.epsilon);
    let one = S::one();

    let mut loss = S::zero();
    // d loss / d sim, before the 1/batch averaging.
    let mut g_sim = vec![S::zero(); batch * batch];

    for i in 0..batch {
        let positives: Vec<usize> = (0..batch)
            .filter(|&j| j != i && labels[j] == labels[i])
            .collect();
        if positives.is_empty() {
            continue;
        }
        let negatives: Vec<usize> = (0..batch).filter(|&j| labels[j] != labels[i]).collect();

        let max_neg = negatives
            .iter()
            .map(|&j| sim[i * batch + j])
            .fold(None, |acc: Option<S>, s| Some(acc.map_or(s, |a| a.max(s))));
        let min_pos = positives
            .iter()
            .map(|&j| sim[i * batch + j])
            .fold(None, |acc: Option<S>, s| Some(acc.map_or(s, |a| a.min(s))));

        // Empty negative set keeps every positive.
        let mined_pos: Vec<usize> = match max_neg {
            Some(mn) => positives
                .iter()
                .copied()
                .filter(|&j| sim[i * batch + j] < mn + eps)
                .collect(),
            None => positives.clone(),
        };
        let mined_neg: Vec<usize> = match min_pos {
            Some(mp) => negatives
                .iter()
                .copied()
                .filter(|&j| sim[i * batch + j] > mp - eps)
                .collect(),
            None => Vec::new(),
        };

        let pos_sum: S = mined_pos
            .iter()
            .map(|&j| (-alpha * (sim[i * batch + j] - base)).exp())
            .sum();
        let neg_sum: S = mined_neg
            .iter()
            .map(|&j| (beta * (sim[i * batch + j] - base)).exp())
            .sum();

        loss += (one + pos_sum).ln() / alpha + (one + neg_sum).ln() / beta;

        for &j in &mined_pos {
            let e = (-alpha * (sim[i * batch + j] - base)).exp();
            g_sim[i * batch + j] -= e / (one + pos_sum);
        }
        for &j in &mined_neg {
            let e = (beta * (sim[i * batch + j] - base)).exp();
            g_sim[i * batch + j] += e / (one + neg_sum);
        }
    }

    let inv_b = S::from_usize(batch).unwrap().recip();
    loss *= inv_b;

    // d loss / d unit_i = (1/B) * sum_j (G_ij + G_ji) unit_j,
    // then back through the normalization.
    let mut grad = vec![S::zero(); embeddings.len()];
    for i in 0..batch {
        let mut d_unit = vec![S::zero(); dim];
        for j in 0..batch {
            let w = (g_sim[i * batch + j] + g_sim[j * batch + i]) * inv_b;
            if w != S::zero() {
                for (d, &u) in d_unit.iter_mut().zip(&unit[j * dim..(j + 1) * dim]) {
                    *d += w * u;
                }
            }
        }
        let u_i = &unit[i * dim..(i + 1) * dim];
        let radial = crate::scalar::dot(&d_unit, u_i);
        let inv_n = norms[i].recip();
        for ((g, &d), &u) in grad[i * dim..(i + 1) * dim]
            .iter_mut()
            .zip(&d_unit)
            .zip(u_i)
        {
            *g = (d - radial * u) * inv_n;
        }
    }

    Ok((loss, grad))
}
