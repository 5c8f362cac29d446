//! Training: subject-disjoint fold assignment, class-balanced batch sampling,
//! multi-similarity loss, Adam, the one-cycle cosine schedule, and fold
//! orchestration.

mod adam;
mod folds;
mod ms_loss;
mod sampler;
mod schedule;
mod trainer;

pub use adam::{adam_step, AdamState};
pub use folds::{assign_folds, fold_loads, FoldAssignment};
pub use ms_loss::{ms_loss, MSLossHParams};
pub use sampler::{sample_batch, ClassPool};
pub use schedule::lr_at;
pub use trainer::{train_all_folds, train_fold, write_train_log, FoldResult, TrainLogRow};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Training hyper-parameters. Defaults follow the published recipe: 100
/// epochs, batches of 64 as 8 classes x 8 samples, a one-cycle schedule from
/// 1e-4 to 1e-2 (peak at epoch 30) down to 1e-7, Adam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub classes_per_batch: usize,
    pub samples_per_class: usize,
    pub lr_initial: f64,
    pub lr_peak: f64,
    pub lr_final: f64,
    pub peak_epoch: usize,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 64,
            classes_per_batch: 8,
            samples_per_class: 8,
            lr_initial: 1e-4,
            lr_peak: 1e-2,
            lr_final: 1e-7,
            peak_epoch: 30,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.classes_per_batch * self.samples_per_class != self.batch_size {
            return Err(Error::Config(format!(
                "classes_per_batch {} x samples_per_class {} != batch_size {}",
                self.classes_per_batch, self.samples_per_class, self.batch_size
            )));
        }
        if self.samples_per_class < 2 {
            return Err(Error::Config(
                "samples_per_class must be >= 2 to form positive pairs".into(),
            ));
        }
        if !(self.lr_initial > 0.0 && self.lr_initial <= self.lr_peak) {
            return Err(Error::Config("need 0 < lr_initial <= lr_peak".into()));
        }
        if !(self.lr_final > 0.0 && self.lr_final <= self.lr_peak) {
            return Err(Error::Config("need 0 < lr_final <= lr_peak".into()));
        }
        if self.peak_epoch == 0 || self.peak_epoch >= self.epochs {
            return Err(Error::Config(format!(
                "peak_epoch must satisfy 0 < {} < epochs {}",
                self.peak_epoch, self.epochs
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_train_config_is_valid() {
        TrainConfig::default().validate().unwrap();
    }

    #[test]
    fn mismatched_batch_composition_is_rejected() {
        let cfg = TrainConfig {
            classes_per_batch: 7,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
