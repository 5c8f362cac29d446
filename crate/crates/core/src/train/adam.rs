//! Adam with bias correction, operating over named parameter blocks.

use super::TrainConfig;
use crate::error::{Error, Result};
use crate::net::ModelParams;
use crate::scalar::Scalar;

/// First/second moment accumulators, one pair per parameter block.
#[derive(Debug, Clone)]
pub struct AdamState<S: Scalar> {
    step: u64,
    m: Vec<Vec<S>>,
    v: Vec<Vec<S>>,
}

impl<S: Scalar> AdamState<S> {
    pub fn new(params: &ModelParams<S>) -> Self {
        let shapes: Vec<usize> = params.blocks().iter().map(|(_, d)| d.len()).collect();
        AdamState {
            step: 0,
            m: shapes.iter().map(|&n| vec![S::zero(); n]).collect(),
            v: shapes.iter().map(|&n| vec![S::zero(); n]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected update in place. Fails on non-finite gradients,
/// naming the offending block.
pub fn adam_step<S: Scalar>(
    params: &mut ModelParams<S>,
    grads: &ModelParams<S>,
    state: &mut AdamState<S>,
    lr: f64,
    cfg: &TrainConfig,
) -> Result<()> {
    for (name, g) in grads.blocks() {
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("gradient block {name}")));
        }
    }

    state.step += 1;
    let b1 = S::from_f64_lossy(cfg.adam_beta1);
    let b2 = S::from_f64_lossy(cfg.adam_beta2);
    let eps = S::from_f64_lossy(cfg.adam_eps);
    let lr = S::from_f64_lossy(lr);
    let one = S::one();
    let c1 = one - b1.powi(state.step as i32);
    let c2 = one - b2.powi(state.step as i32);

    let grad_blocks = grads.blocks();
    for (b, (_, p)) in params.blocks_mut().into_iter().enumerate() {
        let g = grad_blocks[b].1;
        let m = &mut state.m[b];
        let v = &mut state.v[b];
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (one - b1) * g[i];
            v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] = p[i] - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
