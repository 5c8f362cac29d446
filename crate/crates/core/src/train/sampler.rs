//! Class-balanced batch sampling.

use crate::error::{Error, Result};
use crate::prep::WindowSet;
use crate::scalar::Scalar;
use rand::Rng;
use std::collections::BTreeMap;

/// Window indices grouped by class (subject), ordered by class id.
#[derive(Debug, Clone)]
pub struct ClassPool {
    classes: Vec<(String, Vec<usize>)>,
}

impl ClassPool {
    /// Builds the pool from a window set, keeping only the given subjects.
    pub fn from_windows<S: Scalar>(set: &WindowSet<S>, subjects: &[&str]) -> Self {
        let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, w) in set.windows().iter().enumerate() {
            let sid = w.source.subject_id.as_str();
            if subjects.contains(&sid) {
                by_class.entry(sid).or_default().push(i);
            }
        }
        ClassPool {
            classes: by_class
                .into_iter()
                .map(|(s, idx)| (s.to_string(), idx))
                .collect(),
        }
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn total_windows(&self) -> usize {
        self.classes.iter().map(|(_, v)| v.len()).sum()
    }

    pub fn classes(&self) -> &[(String, Vec<usize>)] {
        &self.classes
    }
}

/// Draws `classes_per_batch` distinct classes uniformly, then
/// `samples_per_class` windows per class (with replacement only when the
/// class is smaller than the request). Returns `(window_index, class_index)`
/// pairs; deterministic given the RNG state.
pub fn sample_batch<R: Rng>(
    pool: &ClassPool,
    classes_per_batch: usize,
    samples_per_class: usize,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    let n = pool.classes.len();
    if n < classes_per_batch {
        return Err(Error::Insufficient(format!(
            "{n} classes available, batch needs {classes_per_batch}"
        )));
    }

    // Partial Fisher-Yates prefix for the class draw.
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..classes_per_batch {
        let j = rng.gen_range(i..n);
        order.swap(i, j);
    }

    let mut batch = Vec::with_capacity(classes_per_batch * samples_per_class);
    for &class_idx in order[..classes_per_batch].iter() {
        let windows = &pool.classes[class_idx].1;
        if windows.len() >= samples_per_class {
            let mut widx: Vec<usize> = (0..windows.len()).collect();
            for i in 0..samples_per_class {
                let j = rng.gen_range(i..windows.len());
                widx.swap(i, j);
            }
            for &w in widx[..samples_per_class].iter() {
                batch.push((windows[w], class_idx));
            }
        } else {
            for _ in 0..samples_per_class {
                let w = rng.gen_range(0..windows.len());
                batch.push((windows[w], class_idx));
            }
        }
    }
    Ok(batch)
}
