//! Embedding vectors, ensembling, templates, and similarity.

use crate::error::{Error, Result};
use crate::net::{forward, ModelCheckpoint};
use crate::prep::VelocityWindow;
use crate::scalar::{dot, norm, Scalar};

/// A real embedding; 128-dimensional from one model, 512 from the
/// four-model ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector<S: Scalar> {
    pub values: Vec<S>,
    pub normalized: bool,
}

impl<S: Scalar> EmbeddingVector<S> {
    pub fn new(values: Vec<S>) -> Self {
        EmbeddingVector {
            values,
            normalized: false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> S {
        norm(&self.values)
    }

    /// Length-normalizes in place; zero norm is an error.
    pub fn normalize(mut self) -> Result<Self> {
        let n = self.norm();
        if n <= S::zero() || !n.is_finite() {
            return Err(Error::ZeroNorm("embedding".into()));
        }
        for v in &mut self.values {
            *v = *v / n;
        }
        self.normalized = true;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding".into()));
        }
        if self.normalized {
            let n = self.norm().to_f64_lossy();
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "normalized embedding has norm {n}"
                )));
            }
        }
        Ok(())
    }
}

/// Embeds one window with every checkpoint, concatenating the per-model
/// outputs in `fold_index` order, then length-normalizing. A single
/// checkpoint yields a normalized single-model embedding.
pub fn ensemble_embed<S: Scalar>(
    checkpoints: &[&ModelCheckpoint<S>],
    window: &VelocityWindow<S>,
) -> Result<EmbeddingVector<S>> {
    if checkpoints.is_empty() {
        return Err(Error::Insufficient("ensemble needs at least one model".into()));
    }
    let mut order: Vec<usize> = (0..checkpoints.len()).collect();
    order.sort_by_key(|&i| checkpoints[i].fold_index);
    for pair in order.windows(2) {
        if checkpoints[pair[0]].fold_index == checkpoints[pair[1]].fold_index {
            return Err(Error::Config(format!(
                "duplicate fold_index {} in ensemble",
                checkpoints[pair[0]].fold_index
            )));
        }
    }
    let config = checkpoints[0].config();
    for c in checkpoints.iter().skip(1) {
        if c.config() != config {
            return Err(Error::Config(
                "ensemble checkpoints disagree on the architecture".into(),
            ));
        }
    }

    let mut values = Vec::with_capacity(checkpoints.len() * config.embed_dim);
    for &i in &order {
        values.extend(forward(&checkpoints[i].params, window)?);
    }
    EmbeddingVector::new(values).normalize()
}

/// Arithmetic mean of the embeddings, length-normalized. A numerically zero
/// mean is a degenerate-template error.
pub fn centroid<S: Scalar>(embeddings: &[EmbeddingVector<S>]) -> Result<EmbeddingVector<S>> {
    let first = embeddings
        .first()
        .ok_or_else(|| Error::Insufficient("centroid of an empty set".into()))?;
    let dim = first.len();
    let mut mean = vec![S::zero(); dim];
    for e in embeddings {
        if e.len() != dim {
            return Err(Error::Shape(format!(
                "embedding length {} != {dim}",
                e.len()
            )));
        }
        for (m, &v) in mean.iter_mut().zip(&e.values) {
            *m += v;
        }
    }
    let inv = S::from_usize(embeddings.len()).unwrap().recip();
    for m in &mut mean {
        *m *= inv;
    }
    if norm(&mean).to_f64_lossy() < 1e-12 {
        return Err(Error::DegenerateTemplate(
            "embedding mean has (numerically) zero norm".into(),
        ));
    }
    EmbeddingVector::new(mean).normalize()
}

/// Cosine similarity in `[-1, 1]` as `f64`; zero-norm inputs are an error.
pub fn cosine_similarity<S: Scalar>(a: &[S], b: &[S]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "similarity of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let na = norm(a);
    let nb = norm(b);
    if na <= S::zero() || nb <= S::zero() || !na.is_finite() || !nb.is_finite() {
        return Err(Error::ZeroNorm("cosine similarity input".into()));
    }
    if a == b {
        // Self-similarity is exactly 1; the quotient below can miss by an ulp.
        return Ok(1.0);
    }
    let s = (dot(a, b) / (na * nb)).to_f64_lossy();
    Ok(s.clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaze::Task;
    use crate::net::{init_model, NetConfig};
    use crate::prep::WindowSource;

    fn tiny_ckpt(fold_index: u8, seed: u64) -> ModelCheckpoint<f64> {
        let cfg = NetConfig {
            in_channels: 2,
            n_conv_layers: 1,
            growth: 2,
            kernel: 3,
            dilations: vec![1],
            embed_dim: 6,
            use_norm: true,
        };
        ModelCheckpoint {
            seed,
            fold_index,
            params: init_model(&cfg, seed).unwrap(),
        }
    }

    fn window() -> VelocityWindow<f64> {
        let data: Vec<f64> = (0..32).map(|i| (i as f64 * 0.7).sin() * 50.0).collect();
        VelocityWindow::new(
            data,
            2,
            16,
            0.0,
            WindowSource {
                subject_id: "t".into(),
                round: 1,
                session: 1,
                task: Task::SYNTH,
                window_index: 0,
            },
        )
        .unwrap()
    }

    #[test]
    fn four_models_give_unit_norm_concatenation() {
        let cks: Vec<ModelCheckpoint<f64>> =
            (0..4).map(|f| tiny_ckpt(f, 10 + f as u64)).collect();
        let refs: Vec<&ModelCheckpoint<f64>> = cks.iter().collect();
        let e = ensemble_embed(&refs, &window()).unwrap();
        assert_eq!(e.len(), 24);
        assert!((e.norm() - 1.0).abs() < 1e-9);
        e.validate().unwrap();
    }

    #[test]
    fn single_model_ensemble_is_normalized_model_output() {
        let ck = tiny_ckpt(0, 5);
        let e = ensemble_embed(&[&ck], &window()).unwrap();
        assert_eq!(e.len(), 6);
        assert!((e.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn argument_order_does_not_matter() {
        let cks: Vec<ModelCheckpoint<f64>> =
            (0..4).map(|f| tiny_ckpt(f, 20 + f as u64)).collect();
        let fwd: Vec<&ModelCheckpoint<f64>> = cks.iter().collect();
        let rev: Vec<&ModelCheckpoint<f64>> = cks.iter().rev().collect();
        assert_eq!(
            ensemble_embed(&fwd, &window()).unwrap(),
            ensemble_embed(&rev, &window()).unwrap()
        );
    }

    #[test]
    fn duplicate_fold_index_is_an_error() {
        let a = tiny_ckpt(1, 1);
        let b = tiny_ckpt(1, 2);
        assert!(ensemble_embed(&[&a, &b], &window()).is_err());
    }

    #[test]
    fn centroid_of_identical_unit_vectors_is_that_vector() {
        let e = EmbeddingVector::<f64>::new(vec![0.0, 1.0, 0.0])
            .normalize()
            .unwrap();
        let c = centroid(&vec![e.clone(); 9]).unwrap();
        for (a, b) in c.values.iter().zip(&e.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn centroid_of_orthogonal_pair_is_diagonal() {
        let e1 = EmbeddingVector::new(vec![1.0, 0.0]).normalize().unwrap();
        let e2 = EmbeddingVector::new(vec![0.0, 1.0]).normalize().unwrap();
        let c = centroid(&[e1, e2]).unwrap();
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        assert!((c.values[0] - inv_sqrt2).abs() < 1e-12);
        assert!((c.values[1] - inv_sqrt2).abs() < 1e-12);
    }

    #[test]
    fn opposite_vectors_make_a_degenerate_template() {
        let v = EmbeddingVector::new(vec![0.6, 0.8]);
        let neg = EmbeddingVector::new(vec![-0.6, -0.8]);
        assert!(matches!(
            centroid(&[v, neg]),
            Err(Error::DegenerateTemplate(_))
        ));
    }

    #[test]
    fn cosine_similarity_basics() {
        let v = vec![1.0, 2.0, 3.0];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((cosine_similarity(&v, &neg).unwrap() + 1.0).abs() < 1e-12);
        let e1 = vec![1.0, 0.0];
        let e2 = vec![0.0, 1.0];
        assert_eq!(cosine_similarity(&e1, &e2).unwrap(), 0.0);
        assert!(cosine_similarity(&[0.0, 0.0], &e1).is_err());
    }
}
