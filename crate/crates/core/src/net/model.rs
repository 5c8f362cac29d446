//! Forward pass and exact reverse-mode gradients.
//!
//! The running feature buffer holds the raw input rows followed by each
//! layer's post-activation output, so dense concatenation is a prefix slice.
//! Backward walks the layers in reverse, accumulating into the same buffer
//! layout.

use super::params::ModelParams;
use super::NetConfig;
use crate::error::{Error, Result};
use crate::prep::{VelocityWindow, WindowSource};
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

const NORM_EPS: f64 = 1e-5;

/// Gradients use the same block layout as the parameters.
pub type BatchGrads<S> = ModelParams<S>;

pub(crate) struct Cache<S: Scalar> {
    /// `total_features x L` post-activation buffer (input rows first).
    features: Vec<S>,
    /// Per layer: normalized pre-affine values, `growth x L`.
    xhat: Vec<Vec<S>>,
    /// Per layer: per-channel reciprocal standard deviation.
    inv_std: Vec<Vec<S>>,
    /// `total_features` time-averaged values.
    pooled: Vec<S>,
    /// Smallest |pre-rectification activation|: the distance to the nearest
    /// ReLU kink, where finite differences stop being trustworthy.
    kink_margin: S,
    len: usize,
}

/// Embeds one window. The output is not length-normalized; the loss and the
/// evaluator normalize explicitly.
pub fn forward<S: Scalar>(params: &ModelParams<S>, window: &VelocityWindow<S>) -> Result<Vec<S>> {
    let (embed, _) = forward_cached(params, window)?;
    Ok(embed)
}

fn forward_cached<S: Scalar>(
    params: &ModelParams<S>,
    window: &VelocityWindow<S>,
) -> Result<(Vec<S>, Cache<S>)> {
    let cfg = &params.config;
    if window.n_channels() != cfg.in_channels {
        return Err(Error::Shape(format!(
            "window has {} channels, network expects {}",
            window.n_channels(),
            cfg.in_channels
        )));
    }
    let l_len = window.len();
    let total = cfg.total_features();

    let mut features = vec![S::zero(); total * l_len];
    features[..cfg.in_channels * l_len].copy_from_slice(window.data());

    let mut xhat_all = Vec::with_capacity(cfg.n_conv_layers);
    let mut inv_std_all = Vec::with_capacity(cfg.n_conv_layers);
    let mut pre = vec![S::zero(); cfg.growth * l_len];
    let mut kink_margin = S::infinity();

    for (l, block) in params.layers.iter().enumerate() {
        let in_ch = cfg.layer_in_channels(l);
        conv_forward(
            &features[..in_ch * l_len],
            &block.weight,
            &block.bias,
            cfg.growth,
            in_ch,
            l_len,
            cfg.kernel,
            cfg.dilations[l],
            &mut pre,
        );

        let out_rows = &mut features[in_ch * l_len..(in_ch + cfg.growth) * l_len];
        if cfg.use_norm {
            let mut xhat = vec![S::zero(); cfg.growth * l_len];
            let mut inv_std = vec![S::zero(); cfg.growth];
            for c in 0..cfg.growth {
                let row = &pre[c * l_len..(c + 1) * l_len];
                let mean = row.iter().copied().sum::<S>() / S::from_usize(l_len).unwrap();
                let var = row
                    .iter()
                    .map(|&v| (v - mean) * (v - mean))
                    .sum::<S>()
                    / S::from_usize(l_len).unwrap();
                let istd = (var + S::from_f64_lossy(NORM_EPS)).sqrt().recip();
                inv_std[c] = istd;
                let xr = &mut xhat[c * l_len..(c + 1) * l_len];
                let yr = &mut out_rows[c * l_len..(c + 1) * l_len];
                let (g, b) = (block.gamma[c], block.beta[c]);
                for ((x, y), &p) in xr.iter_mut().zip(yr.iter_mut()).zip(row) {
                    *x = (p - mean) * istd;
                    let act = g * *x + b;
                    kink_margin = kink_margin.min(act.abs());
                    *y = act.max(S::zero());
                }
            }
            xhat_all.push(xhat);
            inv_std_all.push(inv_std);
        } else {
            for (y, &p) in out_rows.iter_mut().zip(pre.iter()) {
                kink_margin = kink_margin.min(p.abs());
                *y = p.max(S::zero());
            }
            xhat_all.push(Vec::new());
            inv_std_all.push(Vec::new());
        }
    }

    // Global average pooling over time, then the fully connected head.
    let inv_len = S::from_usize(l_len).unwrap().recip();
    let mut pooled = vec![S::zero(); total];
    for (f, p) in pooled.iter_mut().enumerate() {
        *p = features[f * l_len..(f + 1) * l_len]
            .iter()
            .copied()
            .sum::<S>()
            * inv_len;
    }
    let mut embed = params.head_bias.clone();
    for (e, out) in embed.iter_mut().enumerate() {
        let row = &params.head_weight[e * total..(e + 1) * total];
        *out += crate::scalar::dot(row, &pooled);
    }

    Ok((
        embed,
        Cache {
            features,
            xhat: xhat_all,
            inv_std: inv_std_all,
            pooled,
            kink_margin,
            len: l_len,
        },
    ))
}

/// Embeds a batch in parallel, keeping the per-window caches for a following
/// [`backward_batch`]. Returns row-major `batch x embed_dim` embeddings.
pub(crate) fn forward_batch<S: Scalar>(
    params: &ModelParams<S>,
    windows: &[&VelocityWindow<S>],
) -> Result<(Vec<S>, Vec<Cache<S>>)> {
    let pairs: Vec<Result<(Vec<S>, Cache<S>)>> = windows
        .par_iter()
        .map(|w| forward_cached(params, w))
        .collect();
    let mut embeds = Vec::with_capacity(windows.len() * params.config.embed_dim);
    let mut caches = Vec::with_capacity(windows.len());
    for pair in pairs {
        let (e, c) = pair?;
        embeds.extend(e);
        caches.push(c);
    }
    Ok((embeds, caches))
}

/// Reverse pass over a batch whose forward caches are already available.
pub(crate) fn backward_batch<S: Scalar>(
    params: &ModelParams<S>,
    caches: &[Cache<S>],
    upstream: &[S],
) -> Result<BatchGrads<S>> {
    let cfg = &params.config;
    if upstream.len() != caches.len() * cfg.embed_dim {
        return Err(Error::Shape(format!(
            "upstream gradient length {} != batch {} x embed_dim {}",
            upstream.len(),
            caches.len(),
            cfg.embed_dim
        )));
    }
    let partials: Vec<Result<BatchGrads<S>>> = caches
        .par_iter()
        .zip(upstream.par_chunks(cfg.embed_dim))
        .map(|(c, u)| backward_one(params, c, u))
        .collect();

    let mut total = ModelParams::zeros(cfg)?;
    for partial in partials {
        let partial = partial?;
        accumulate(&mut total, &partial);
    }
    Ok(total)
}

/// Exact reverse-mode gradients of the batch embeddings contracted with
/// `upstream` (row-major `batch x embed_dim`), summed over the batch.
pub fn backprop<S: Scalar>(
    params: &ModelParams<S>,
    windows: &[&VelocityWindow<S>],
    upstream: &[S],
) -> Result<BatchGrads<S>> {
    let cfg = &params.config;
    if upstream.len() != windows.len() * cfg.embed_dim {
        return Err(Error::Shape(format!(
            "upstream gradient length {} != batch {} x embed_dim {}",
            upstream.len(),
            windows.len(),
            cfg.embed_dim
        )));
    }
    let (_, caches) = forward_batch(params, windows)?;
    backward_batch(params, &caches, upstream)
}

fn accumulate<S: Scalar>(total: &mut ModelParams<S>, part: &ModelParams<S>) {
    for (t, p) in total.layers.iter_mut().zip(&part.layers) {
        add_into(&mut t.weight, &p.weight);
        add_into(&mut t.bias, &p.bias);
        add_into(&mut t.gamma, &p.gamma);
        add_into(&mut t.beta, &p.beta);
    }
    add_into(&mut total.head_weight, &part.head_weight);
    add_into(&mut total.head_bias, &part.head_bias);
}

fn add_into<S: Scalar>(dst: &mut [S], src: &[S]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += *s;
    }
}

fn backward_one<S: Scalar>(
    params: &ModelParams<S>,
    cache: &Cache<S>,
    upstream: &[S],
) -> Result<BatchGrads<S>> {
    let cfg = &params.config;
    let l_len = cache.len;
    let total = cfg.total_features();
    let mut grads = ModelParams::zeros(cfg)?;

    // Head.
    let mut d_pooled = vec![S::zero(); total];
    for (e, &u) in upstream.iter().enumerate() {
        grads.head_bias[e] += u;
        let w_row = &params.head_weight[e * total..(e + 1) * total];
        let g_row = &mut grads.head_weight[e * total..(e + 1) * total];
        for f in 0..total {
            g_row[f] += u * cache.pooled[f];
            d_pooled[f] += u * w_row[f];
        }
    }

    // Pooling spreads each feature's gradient uniformly over time.
    let inv_len = S::from_usize(l_len).unwrap().recip();
    let mut d_features = vec![S::zero(); total * l_len];
    for (f, &dp) in d_pooled.iter().enumerate() {
        let v = dp * inv_len;
        for d in &mut d_features[f * l_len..(f + 1) * l_len] {
            *d = v;
        }
    }

    let mut d_pre = vec![S::zero(); cfg.growth * l_len];
    for l in (0..cfg.n_conv_layers).rev() {
        let block = &params.layers[l];
        let g_block = &mut grads.layers[l];
        let in_ch = cfg.layer_in_channels(l);
        let out_start = in_ch * l_len;

        // ReLU: pass gradient only where the stored activation is positive.
        // Then normalization (when enabled), then the convolution.
        for c in 0..cfg.growth {
            let act = &cache.features[out_start + c * l_len..out_start + (c + 1) * l_len];
            let dy = &mut d_features[out_start + c * l_len..out_start + (c + 1) * l_len];
            for (d, &a) in dy.iter_mut().zip(act) {
                if a <= S::zero() {
                    *d = S::zero();
                }
            }

            let dp = &mut d_pre[c * l_len..(c + 1) * l_len];
            if cfg.use_norm {
                let xhat = &cache.xhat[l][c * l_len..(c + 1) * l_len];
                let istd = cache.inv_std[l][c];
                let gamma = block.gamma[c];
                let mut sum_dy = S::zero();
                let mut sum_dy_x = S::zero();
                for (&d, &x) in dy.iter().zip(xhat) {
                    sum_dy += d;
                    sum_dy_x += d * x;
                }
                g_block.gamma[c] += sum_dy_x;
                g_block.beta[c] += sum_dy;
                let m1 = gamma * sum_dy * inv_len;
                let m2 = gamma * sum_dy_x * inv_len;
                for ((p, &d), &x) in dp.iter_mut().zip(dy.iter()).zip(xhat) {
                    *p = istd * (gamma * d - m1 - x * m2);
                }
            } else {
                dp.copy_from_slice(dy);
            }
        }

        conv_backward(
            &cache.features[..in_ch * l_len],
            &block.weight,
            &d_pre,
            cfg.growth,
            in_ch,
            l_len,
            cfg.kernel,
            cfg.dilations[l],
            &mut g_block.weight,
            &mut g_block.bias,
            &mut d_features[..in_ch * l_len],
        );
    }

    Ok(grads)
}

/// `dst[t] += w * src[t + off]` over the valid overlap.
#[inline]
fn axpy_shifted<S: Scalar>(dst: &mut [S], src: &[S], w: S, off: isize) {
    let n = dst.len() as isize;
    if off >= n || -off >= n {
        return;
    }
    if off >= 0 {
        let off = off as usize;
        for (d, &s) in dst[..src.len() - off].iter_mut().zip(&src[off..]) {
            *d += w * s;
        }
    } else {
        let o = (-off) as usize;
        for (d, &s) in dst[o..].iter_mut().zip(&src[..src.len() - o]) {
            *d += w * s;
        }
    }
}

/// `sum_t a[t] * b[t + off]` over the valid overlap.
#[inline]
fn dot_shifted<S: Scalar>(a: &[S], b: &[S], off: isize) -> S {
    let n = a.len() as isize;
    if off >= n || -off >= n {
        return S::zero();
    }
    if off >= 0 {
        let off = off as usize;
        a[..a.len() - off]
            .iter()
            .zip(&b[off..])
            .map(|(&x, &y)| x * y)
            .sum()
    } else {
        let o = (-off) as usize;
        a[o..]
            .iter()
            .zip(&b[..b.len() - o])
            .map(|(&x, &y)| x * y)
            .sum()
    }
}

#[allow(clippy::too_many_arguments)]
fn conv_forward<S: Scalar>(
    input: &[S],
    weight: &[S],
    bias: &[S],
    growth: usize,
    in_ch: usize,
    l_len: usize,
    kernel: usize,
    dilation: usize,
    out: &mut [S],
) {
    let half = (kernel / 2) as isize;
    for o in 0..growth {
        let out_row = &mut out[o * l_len..(o + 1) * l_len];
        out_row.fill(bias.get(o).copied().unwrap_or_else(S::zero));
        for c in 0..in_ch {
            let x = &input[c * l_len..(c + 1) * l_len];
            let w_base = (o * in_ch + c) * kernel;
            for k in 0..kernel {
                let off = (k as isize - half) * dilation as isize;
                axpy_shifted(out_row, x, weight[w_base + k], off);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn conv_backward<S: Scalar>(
    input: &[S],
    weight: &[S],
    d_out: &[S],
    growth: usize,
    in_ch: usize,
    l_len: usize,
    kernel: usize,
    dilation: usize,
    d_weight: &mut [S],
    d_bias: &mut [S],
    d_input: &mut [S],
) {
    let half = (kernel / 2) as isize;
    for o in 0..growth {
        let dy = &d_out[o * l_len..(o + 1) * l_len];
        if let Some(db) = d_bias.get_mut(o) {
            *db += dy.iter().copied().sum::<S>();
        }
        for c in 0..in_ch {
            let x = &input[c * l_len..(c + 1) * l_len];
            let dx = &mut d_input[c * l_len..(c + 1) * l_len];
            let w_base = (o * in_ch + c) * kernel;
            for k in 0..kernel {
                let off = (k as isize - half) * dilation as isize;
                d_weight[w_base + k] += dot_shifted(dy, x, off);
                axpy_shifted(dx, dy, weight[w_base + k], -off);
            }
        }
    }
}

/// Compares the analytic parameter gradients against central finite
/// differences (`h = 1e-5`) on a small random model and batch; returns the
/// maximum relative error `|a - n| / max(|n|, 1e-8)`. Cost grows with the
/// parameter count, so keep configs small.
pub fn grad_check<S: Scalar>(config: &NetConfig, seed: u64, window_len: usize) -> Result<f64> {
    config.validate()?;
    let mut params: ModelParams<S> = super::init_model(config, seed)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);

    // Finite differences are only trustworthy away from the ReLU kinks:
    // redraw the probe batch until every activation clears this margin,
    // far beyond what the h-perturbation can move one.
    const KINK_MARGIN: f64 = 1e-3;
    let batch = 2usize;
    let mut windows = Vec::new();
    for _attempt in 0..64 {
        let candidate: Vec<VelocityWindow<S>> = (0..batch)
            .map(|i| {
                let data: Vec<S> = (0..config.in_channels * window_len)
                    .map(|_| S::from_f64_lossy(rng.gen_range(-1.0..1.0)))
                    .collect();
                VelocityWindow::new(
                    data,
                    config.in_channels,
                    window_len,
                    0.0,
                    WindowSource {
                        subject_id: "gradcheck".into(),
                        round: 1,
                        session: 1,
                        task: crate::gaze::Task::SYNTH,
                        window_index: i as u32,
                    },
                )
                .expect("finite window")
            })
            .collect();
        let clears_kinks = candidate
            .iter()
            .map(|w| forward_cached(&params, w).map(|(_, c)| c.kink_margin.to_f64_lossy()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .all(|m| m > KINK_MARGIN);
        if clears_kinks {
            windows = candidate;
            break;
        }
    }
    if windows.is_empty() {
        return Err(Error::Config(
            "could not draw a probe batch clear of activation kinks".into(),
        ));
    }
    let upstream: Vec<S> = (0..batch * config.embed_dim)
        .map(|_| S::from_f64_lossy(rng.gen_range(-1.0..1.0)))
        .collect();

    let refs: Vec<&VelocityWindow<S>> = windows.iter().collect();
    let analytic = backprop(&params, &refs, &upstream)?;
    let analytic_flat: Vec<f64> = analytic
        .blocks()
        .into_iter()
        .flat_map(|(_, d)| d.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>())
        .collect();

    let objective = |params: &ModelParams<S>, refs: &[&VelocityWindow<S>]| -> Result<f64> {
        let mut j = 0.0f64;
        for (w, u) in refs.iter().zip(upstream.chunks(config.embed_dim)) {
            let e = forward(params, w)?;
            for (&ei, &ui) in e.iter().zip(u) {
                j += ei.to_f64_lossy() * ui.to_f64_lossy();
            }
        }
        Ok(j)
    };

    let h = 1e-5f64;
    let n_blocks = params.blocks().len();
    let mut max_rel = 0.0f64;
    let mut flat_idx = 0usize;
    for b in 0..n_blocks {
        let block_len = params.blocks()[b].1.len();
        for i in 0..block_len {
            let orig = params.blocks()[b].1[i].to_f64_lossy();
            set_param(&mut params, b, i, S::from_f64_lossy(orig + h));
            let j_plus = objective(&params, &refs)?;
            set_param(&mut params, b, i, S::from_f64_lossy(orig - h));
            let j_minus = objective(&params, &refs)?;
            set_param(&mut params, b, i, S::from_f64_lossy(orig));

            let numeric = (j_plus - j_minus) / (2.0 * h);
            let rel = (analytic_flat[flat_idx] - numeric).abs() / numeric.abs().max(1e-8);
            if rel > max_rel {
                max_rel = rel;
            }
            flat_idx += 1;
        }
    }
    Ok(max_rel)
}

fn set_param<S: Scalar>(params: &mut ModelParams<S>, block: usize, idx: usize, value: S) {
    params.blocks_mut()[block].1[idx] = value;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::init_model;

    fn window(cfg: &NetConfig, l_len: usize, seed: u64) -> VelocityWindow<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..cfg.in_channels * l_len)
            .map(|_| rng.gen_range(-100.0..100.0))
            .collect();
        VelocityWindow::new(
            data,
            cfg.in_channels,
            l_len,
            0.0,
            WindowSource {
                subject_id: "t".into(),
                round: 1,
                session: 1,
                task: crate::gaze::Task::SYNTH,
                window_index: 0,
            },
        )
        .unwrap()
    }

    fn tiny_config() -> NetConfig {
        NetConfig {
            in_channels: 2,
            n_conv_layers: 2,
            growth: 3,
            kernel: 3,
            dilations: vec![1, 2],
            embed_dim: 4,
            use_norm: true,
        }
    }

    #[test]
    fn default_config_embeds_1250_window_to_128() {
        let cfg = NetConfig::default();
        let params: ModelParams<f64> = init_model(&cfg, 7).unwrap();
        let w = window(&cfg, 1250, 1);
        let e = forward(&params, &w).unwrap();
        assert_eq!(e.len(), 128);
        assert!(e.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn zero_head_gives_zero_embedding() {
        let cfg = tiny_config();
        let mut params: ModelParams<f64> = init_model(&cfg, 3).unwrap();
        params.head_weight.fill(0.0);
        params.head_bias.fill(0.0);
        let e = forward(&params, &window(&cfg, 32, 2)).unwrap();
        assert!(e.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_is_pure() {
        let cfg = tiny_config();
        let params: ModelParams<f64> = init_model(&cfg, 3).unwrap();
        let w = window(&cfg, 32, 2);
        assert_eq!(forward(&params, &w).unwrap(), forward(&params, &w).unwrap());
    }

    #[test]
    fn channel_mismatch_is_an_error() {
        let cfg = tiny_config();
        let params: ModelParams<f64> = init_model(&cfg, 3).unwrap();
        let four = NetConfig {
            in_channels: 4,
            ..tiny_config()
        };
        assert!(forward(&params, &window(&four, 32, 2)).is_err());
    }

    #[test]
    fn long_dilation_preserves_window_length() {
        // Dilation far beyond the window length still yields a full-length
        // feature map under zero padding.
        let cfg = NetConfig {
            in_channels: 2,
            n_conv_layers: 1,
            growth: 2,
            kernel: 3,
            dilations: vec![64],
            embed_dim: 3,
            use_norm: false,
        };
        let params: ModelParams<f64> = init_model(&cfg, 9).unwrap();
        let e = forward(&params, &window(&cfg, 16, 4)).unwrap();
        assert_eq!(e.len(), 3);
        assert!(e.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn time_reversal_changes_the_embedding_for_random_kernels() {
        let cfg = tiny_config();
        let params: ModelParams<f64> = init_model(&cfg, 11).unwrap();
        let w = window(&cfg, 64, 5);
        let mut rev_data = Vec::with_capacity(w.data().len());
        for c in 0..w.n_channels() {
            let mut row: Vec<f64> = w.channel(c).to_vec();
            row.reverse();
            rev_data.extend(row);
        }
        let rev =
            VelocityWindow::new(rev_data, w.n_channels(), w.len(), 0.0, w.source.clone()).unwrap();
        let a = forward(&params, &w).unwrap();
        let b = forward(&params, &rev).unwrap();
        let diff: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        assert!(diff > 1e-6, "embedding should depend on time direction");
    }

    #[test]
    fn zero_upstream_gives_zero_grads_and_doubling_doubles() {
        let cfg = tiny_config();
        let params: ModelParams<f64> = init_model(&cfg, 13).unwrap();
        let w0 = window(&cfg, 32, 6);
        let w1 = window(&cfg, 32, 7);
        let refs = vec![&w0, &w1];

        let zeros = vec![0.0f64; 2 * cfg.embed_dim];
        let g0 = backprop(&params, &refs, &zeros).unwrap();
        assert!(g0.blocks().iter().all(|(_, d)| d.iter().all(|&v| v == 0.0)));

        let mut rng = ChaCha20Rng::seed_from_u64(99);
        let u: Vec<f64> = (0..2 * cfg.embed_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u2: Vec<f64> = u.iter().map(|v| 2.0 * v).collect();
        let g1 = backprop(&params, &refs, &u).unwrap();
        let g2 = backprop(&params, &refs, &u2).unwrap();
        for ((_, a), (_, b)) in g1.blocks().into_iter().zip(g2.blocks()) {
            for (&x, &y) in a.iter().zip(b) {
                assert!((2.0 * x - y).abs() <= 1e-9 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn upstream_shape_mismatch_is_an_error() {
        let cfg = tiny_config();
        let params: ModelParams<f64> = init_model(&cfg, 13).unwrap();
        let w = window(&cfg, 32, 6);
        assert!(backprop(&params, &[&w], &vec![0.0f64; 3]).is_err());
    }

    #[test]
    fn grad_check_tiny_model_beats_1e4() {
        let cfg = tiny_config();
        let err = grad_check::<f64>(&cfg, 17, 16).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn grad_check_is_deterministic() {
        let cfg = tiny_config();
        let a = grad_check::<f64>(&cfg, 5, 16).unwrap();
        let b = grad_check::<f64>(&cfg, 5, 16).unwrap();
        assert_eq!(a, b);
    }
}
