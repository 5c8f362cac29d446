//! Fold training orchestration.

use super::{
    adam_step, lr_at, ms_loss, sample_batch, AdamState, ClassPool, FoldAssignment, MSLossHParams,
    TrainConfig,
};
use crate::error::{Error, Result};
use crate::net::{backward_batch, forward_batch, init_model, ModelCheckpoint, NetConfig};
use crate::prep::{VelocityWindow, WindowSet};
use crate::scalar::Scalar;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::fmt::Write as _;
use std::path::Path;

/// One training-log record; `val_loss` is present on epoch-final steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLogRow {
    pub fold: usize,
    pub epoch: usize,
    pub step: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

/// Outcome of one fold: the final-epoch checkpoint plus the loss history.
#[derive(Debug, Clone)]
pub struct FoldResult<S: Scalar> {
    pub checkpoint: ModelCheckpoint<S>,
    pub log: Vec<TrainLogRow>,
    pub epoch_train_loss: Vec<f64>,
    pub epoch_val_loss: Vec<Option<f64>>,
}

fn fold_seed(base: u64, fold_index: usize) -> u64 {
    base ^ (fold_index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Trains the model for one fold: all other folds are the training set, the
/// fold itself is validation. Deterministic given the seeds.
pub fn train_fold<S: Scalar>(
    windows: &WindowSet<S>,
    assignment: &FoldAssignment,
    fold_index: usize,
    net_cfg: &NetConfig,
    train_cfg: &TrainConfig,
    ms: &MSLossHParams,
) -> Result<FoldResult<S>> {
    if fold_index >= assignment.k {
        return Err(Error::Config(format!(
            "fold_index {fold_index} out of range for k = {}",
            assignment.k
        )));
    }
    net_cfg.validate()?;
    train_cfg.validate()?;
    ms.validate()?;
    assignment.validate()?;

    let train_subjects = assignment.training_subjects(fold_index);
    let val_subjects = assignment.validation_subjects(fold_index);
    let pool = ClassPool::from_windows(windows, &train_subjects);
    if pool.total_windows() == 0 {
        return Err(Error::Insufficient(format!(
            "fold {fold_index} has an empty training set"
        )));
    }
    let val_pool = ClassPool::from_windows(windows, &val_subjects);

    let seed = fold_seed(train_cfg.seed, fold_index);
    let mut params = init_model::<S>(net_cfg, seed)?;
    let mut state = AdamState::new(&params);
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5bd1_e995);

    let steps_per_epoch =
        (pool.total_windows() + train_cfg.batch_size - 1) / train_cfg.batch_size;
    let steps_per_epoch = steps_per_epoch.max(1);

    let mut log = Vec::with_capacity(train_cfg.epochs * steps_per_epoch);
    let mut epoch_train_loss = Vec::with_capacity(train_cfg.epochs);
    let mut epoch_val_loss = Vec::with_capacity(train_cfg.epochs);

    for epoch in 0..train_cfg.epochs {
        let mut epoch_loss = 0.0f64;
        for step in 0..steps_per_epoch {
            let global_step = epoch * steps_per_epoch + step;
            let lr = lr_at(global_step, train_cfg, steps_per_epoch);

            let batch = sample_batch(
                &pool,
                train_cfg.classes_per_batch,
                train_cfg.samples_per_class,
                &mut rng,
            )?;
            let refs: Vec<&VelocityWindow<S>> =
                batch.iter().map(|&(w, _)| &windows.windows()[w]).collect();
            let labels: Vec<usize> = batch.iter().map(|&(_, c)| c).collect();

            let (embeds, caches) = forward_batch(&params, &refs)?;
            let (loss, d_embed) = ms_loss(&embeds, &labels, net_cfg.embed_dim, ms)?;
            let grads = backward_batch(&params, &caches, &d_embed)?;
            adam_step(&mut params, &grads, &mut state, lr, train_cfg)?;

            let loss = loss.to_f64_lossy();
            epoch_loss += loss;
            let val_loss = if step + 1 == steps_per_epoch {
                validation_loss(&params, windows, &val_pool, net_cfg, train_cfg, ms, seed, epoch)?
            } else {
                None
            };
            log.push(TrainLogRow {
                fold: fold_index,
                epoch,
                step: global_step,
                lr,
                train_loss: loss,
                val_loss,
            });
        }
        epoch_train_loss.push(epoch_loss / steps_per_epoch as f64);
        epoch_val_loss.push(log.last().and_then(|r| r.val_loss));
    }

    Ok(FoldResult {
        checkpoint: ModelCheckpoint {
            seed,
            fold_index: fold_index as u8,
            params,
        },
        log,
        epoch_train_loss,
        epoch_val_loss,
    })
}

/// Mean multi-similarity loss over two deterministic validation batches;
/// `None` when the fold has no validation windows.
#[allow(clippy::too_many_arguments)]
fn validation_loss<S: Scalar>(
    params: &crate::net::ModelParams<S>,
    windows: &WindowSet<S>,
    val_pool: &ClassPool,
    net_cfg: &NetConfig,
    train_cfg: &TrainConfig,
    ms: &MSLossHParams,
    seed: u64,
    epoch: usize,
) -> Result<Option<f64>> {
    if val_pool.n_classes() == 0 {
        return Ok(None);
    }
    let classes = train_cfg.classes_per_batch.min(val_pool.n_classes());
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ val_epoch_seed(epoch));
    let mut total = 0.0f64;
    let n_batches = 2;
    for _ in 0..n_batches {
        let batch = sample_batch(val_pool, classes, train_cfg.samples_per_class, &mut rng)?;
        let refs: Vec<&VelocityWindow<S>> =
            batch.iter().map(|&(w, _)| &windows.windows()[w]).collect();
        let labels: Vec<usize> = batch.iter().map(|&(_, c)| c).collect();
        let (embeds, _) = forward_batch(params, &refs)?;
        let (loss, _) = ms_loss(&embeds, &labels, net_cfg.embed_dim, ms)?;
        total += loss.to_f64_lossy();
    }
    Ok(Some(total / n_batches as f64))
}

fn val_epoch_seed(epoch: usize) -> u64 {
    0x1234_5678u64 ^ ((epoch as u64) << 17)
}

/// Trains every fold, one worker thread each, returning results in fold order.
pub fn train_all_folds<S: Scalar>(
    windows: &WindowSet<S>,
    assignment: &FoldAssignment,
    net_cfg: &NetConfig,
    train_cfg: &TrainConfig,
    ms: &MSLossHParams,
) -> Result<Vec<FoldResult<S>>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..assignment.k)
            .map(|fold| {
                scope.spawn(move || {
                    train_fold(windows, assignment, fold, net_cfg, train_cfg, ms)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fold worker panicked"))
            .collect()
    })
}

/// Writes the `fold,epoch,step,lr,train_loss,val_loss` CSV.
pub fn write_train_log(rows: &[TrainLogRow], path: &Path) -> Result<()> {
    let mut out = String::from("fold,epoch,step,lr,train_loss,val_loss\n");
    for r in rows {
        let val = r.val_loss.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.fold, r.epoch, r.step, r.lr, r.train_loss, val
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaze::Task;
    use crate::prep::WindowSource;
    use rand::Rng;
    use std::collections::{BTreeMap, BTreeSet};

    /// Synthetic window set: each subject's windows carry a subject-specific
    /// velocity signature plus noise, trivially separable.
    fn toy_windows(subjects: usize, per_subject: usize, l_len: usize) -> WindowSet<f64> {
        let mut set = WindowSet::new(2, l_len);
        let mut rng = ChaCha20Rng::seed_from_u64(1234);
        for s in 0..subjects {
            let scale = 20.0 + 60.0 * s as f64;
            for w in 0..per_subject {
                let data: Vec<f64> = (0..2 * l_len)
                    .map(|i| {
                        let phase = (i % l_len) as f64 * 0.2 + s as f64;
                        scale * phase.sin() + rng.gen_range(-2.0..2.0)
                    })
                    .collect();
                let src = WindowSource {
                    subject_id: format!("s{s:02}"),
                    round: 1,
                    session: 1,
                    task: Task::SYNTH,
                    window_index: w as u32,
                };
                set.push(VelocityWindow::new(data, 2, l_len, 0.0, src).unwrap())
                    .unwrap();
            }
        }
        set
    }

    fn tiny_net() -> NetConfig {
        NetConfig {
            in_channels: 2,
            n_conv_layers: 2,
            growth: 4,
            kernel: 3,
            dilations: vec![1, 2],
            embed_dim: 8,
            use_norm: true,
        }
    }

    fn tiny_train(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: 8,
            classes_per_batch: 2,
            samples_per_class: 4,
            peak_epoch: (epochs / 3).max(1),
            seed: 7,
            ..TrainConfig::default()
        }
    }

    fn assignment(subjects: usize, k: usize) -> FoldAssignment {
        let counts: BTreeMap<String, usize> =
            (0..subjects).map(|s| (format!("s{s:02}"), 1)).collect();
        super::super::assign_folds(&counts, k, &BTreeSet::new(), 0).unwrap()
    }

    #[test]
    fn toy_training_reduces_loss() {
        let windows = toy_windows(8, 12, 64);
        let a = assignment(8, 4);
        let result =
            train_fold(&windows, &a, 0, &tiny_net(), &tiny_train(10), &MSLossHParams::default())
                .unwrap();
        let first = result.epoch_train_loss[0];
        let last = *result.epoch_train_loss.last().unwrap();
        assert!(
            last < first,
            "loss should fall: first {first}, last {last}"
        );
        assert_eq!(result.checkpoint.fold_index, 0);
        assert_eq!(result.epoch_train_loss.len(), 10);
    }

    #[test]
    fn training_is_bit_deterministic() {
        let windows = toy_windows(4, 6, 32);
        let a = assignment(4, 2);
        let cfg = tiny_train(3);
        let x = train_fold(&windows, &a, 1, &tiny_net(), &cfg, &MSLossHParams::default()).unwrap();
        let y = train_fold(&windows, &a, 1, &tiny_net(), &cfg, &MSLossHParams::default()).unwrap();
        assert_eq!(x.checkpoint.params, y.checkpoint.params);
        assert_eq!(x.log, y.log);
    }

    #[test]
    fn out_of_range_fold_is_an_error() {
        let windows = toy_windows(4, 6, 32);
        let a = assignment(4, 4);
        assert!(train_fold(
            &windows,
            &a,
            5,
            &tiny_net(),
            &tiny_train(3),
            &MSLossHParams::default()
        )
        .is_err());
    }

    #[test]
    fn empty_training_set_is_an_error() {
        let windows = toy_windows(2, 4, 32);
        // Hand-built degenerate assignment: every subject in fold 0.
        let a = FoldAssignment {
            k: 2,
            fold_of_subject: [("s00".to_string(), 0), ("s01".to_string(), 0)]
                .into_iter()
                .collect(),
            held_out: BTreeSet::new(),
        };
        let err = train_fold(
            &windows,
            &a,
            0,
            &tiny_net(),
            &tiny_train(3),
            &MSLossHParams::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("empty training set"));
    }
}
