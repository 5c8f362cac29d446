//! Parameter storage, initialization, and block iteration.

use super::NetConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// One conv layer's parameters. `gamma`/`beta` are empty when normalization
/// is disabled; `bias` is empty when it is enabled, because the per-channel
/// mean subtraction cancels a conv bias exactly (`beta` takes its role).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvBlock<S: Scalar> {
    /// Kernel, row-major `[growth][in_channels][kernel]`.
    pub weight: Vec<S>,
    pub bias: Vec<S>,
    pub gamma: Vec<S>,
    pub beta: Vec<S>,
}

/// All learnable parameters plus the architecture they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<S: Scalar> {
    pub config: NetConfig,
    pub layers: Vec<ConvBlock<S>>,
    /// Fully connected head, row-major `[embed_dim][total_features]`.
    pub head_weight: Vec<S>,
    pub head_bias: Vec<S>,
}

impl<S: Scalar> ModelParams<S> {
    /// All-zero parameters with the shapes implied by `config`. Also serves
    /// as the gradient accumulator layout.
    pub fn zeros(config: &NetConfig) -> Result<Self> {
        config.validate()?;
        let mut layers = Vec::with_capacity(config.n_conv_layers);
        for l in 0..config.n_conv_layers {
            let in_ch = config.layer_in_channels(l);
            let norm_len = if config.use_norm { config.growth } else { 0 };
            let bias_len = if config.use_norm { 0 } else { config.growth };
            layers.push(ConvBlock {
                weight: vec![S::zero(); config.growth * in_ch * config.kernel],
                bias: vec![S::zero(); bias_len],
                gamma: vec![S::zero(); norm_len],
                beta: vec![S::zero(); norm_len],
            });
        }
        Ok(ModelParams {
            config: config.clone(),
            layers,
            head_weight: vec![S::zero(); config.embed_dim * config.total_features()],
            head_bias: vec![S::zero(); config.embed_dim],
        })
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|b| b.weight.len() + b.bias.len() + b.gamma.len() + b.beta.len())
            .sum::<usize>()
            + self.head_weight.len()
            + self.head_bias.len()
    }

    /// Named parameter blocks with shapes, in checkpoint payload order.
    pub fn named_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let cfg = &self.config;
        let mut out = Vec::new();
        for l in 0..cfg.n_conv_layers {
            out.push((
                format!("conv{l}.weight"),
                vec![cfg.growth, cfg.layer_in_channels(l), cfg.kernel],
            ));
            if cfg.use_norm {
                out.push((format!("norm{l}.gamma"), vec![cfg.growth]));
                out.push((format!("norm{l}.beta"), vec![cfg.growth]));
            } else {
                out.push((format!("conv{l}.bias"), vec![cfg.growth]));
            }
        }
        out.push((
            "head.weight".to_string(),
            vec![cfg.embed_dim, cfg.total_features()],
        ));
        out.push(("head.bias".to_string(), vec![cfg.embed_dim]));
        out
    }

    /// Parameter blocks in the same order as [`ModelParams::named_shapes`].
    pub fn blocks(&self) -> Vec<(String, &[S])> {
        let mut out: Vec<(String, &[S])> = Vec::new();
        for (l, b) in self.layers.iter().enumerate() {
            out.push((format!("conv{l}.weight"), &b.weight));
            if self.config.use_norm {
                out.push((format!("norm{l}.gamma"), &b.gamma));
                out.push((format!("norm{l}.beta"), &b.beta));
            } else {
                out.push((format!("conv{l}.bias"), &b.bias));
            }
        }
        out.push(("head.weight".to_string(), &self.head_weight));
        out.push(("head.bias".to_string(), &self.head_bias));
        out
    }

    /// Mutable variant of [`ModelParams::blocks`].
    pub fn blocks_mut(&mut self) -> Vec<(String, &mut [S])> {
        let use_norm = self.config.use_norm;
        let mut out: Vec<(String, &mut [S])> = Vec::new();
        for (l, b) in self.layers.iter_mut().enumerate() {
            out.push((format!("conv{l}.weight"), b.weight.as_mut_slice()));
            if use_norm {
                out.push((format!("norm{l}.gamma"), b.gamma.as_mut_slice()));
                out.push((format!("norm{l}.beta"), b.beta.as_mut_slice()));
            } else {
                out.push((format!("conv{l}.bias"), b.bias.as_mut_slice()));
            }
        }
        out.push(("head.weight".to_string(), self.head_weight.as_mut_slice()));
        out.push(("head.bias".to_string(), self.head_bias.as_mut_slice()));
        out
    }

    pub fn check_finite(&self) -> Result<()> {
        for (name, data) in self.blocks() {
            if data.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(())
    }
}

/// Initializes parameters: kernels and head from a zero-mean uniform with a
/// fan-in bound `sqrt(6 / fan_in)`, biases zero, normalization at identity.
/// Deterministic in `(config, seed)`.
pub fn init_model<S: Scalar>(config: &NetConfig, seed: u64) -> Result<ModelParams<S>> {
    let mut params = ModelParams::zeros(config)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for (l, block) in params.layers.iter_mut().enumerate() {
        let fan_in = (config.layer_in_channels(l) * config.kernel) as f64;
        let bound = (6.0 / fan_in).sqrt();
        for w in block.weight.iter_mut() {
            *w = S::from_f64_lossy(rng.gen_range(-bound..bound));
        }
        for g in block.gamma.iter_mut() {
            *g = S::one();
        }
    }
    let fan_in = config.total_features() as f64;
    let bound = (6.0 / fan_in).sqrt();
    for w in params.head_weight.iter_mut() {
        *w = S::from_f64_lossy(rng.gen_range(-bound..bound));
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> NetConfig {
        NetConfig {
            in_channels: 2,
            n_conv_layers: 4,
            growth: 8,
            kernel: 3,
            dilations: vec![1, 2, 4, 8],
            embed_dim: 16,
            use_norm: true,
        }
    }

    #[test]
    fn init_is_deterministic_in_seed() {
        let cfg = small_config();
        let a: ModelParams<f64> = init_model(&cfg, 42).unwrap();
        let b: ModelParams<f64> = init_model(&cfg, 42).unwrap();
        assert_eq!(a, b);
        let c: ModelParams<f64> = init_model(&cfg, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn biases_are_zero_and_norms_identity_at_init() {
        let p: ModelParams<f64> = init_model(&small_config(), 1).unwrap();
        for b in &p.layers {
            assert!(b.gamma.iter().all(|&v| v == 1.0));
            assert!(b.beta.iter().all(|&v| v == 0.0));
        }
        assert!(p.head_bias.iter().all(|&v| v == 0.0));

        let plain: ModelParams<f64> = init_model(
            &NetConfig {
                use_norm: false,
                ..small_config()
            },
            1,
        )
        .unwrap();
        for b in &plain.layers {
            assert_eq!(b.bias.len(), 8);
            assert!(b.bias.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn param_count_matches_shape_walk_oracle() {
        // Independent count: sum over layers of kernel*in_l*growth kernels
        // plus the per-layer offset parameters (gamma+beta under
        // normalization, a conv bias otherwise), plus the head.
        for use_norm in [true, false] {
            let cfg = NetConfig {
                use_norm,
                ..small_config()
            };
            let p: ModelParams<f64> = init_model(&cfg, 0).unwrap();
            let mut expected = 0usize;
            for l in 0..4 {
                let in_l = 2 + 8 * l;
                expected += 3 * in_l * 8; // kernels
                expected += if use_norm { 2 * 8 } else { 8 };
            }
            let total_features = 2 + 8 * 4;
            expected += 16 * total_features + 16; // head
            assert_eq!(p.param_count(), expected, "use_norm = {use_norm}");
        }
    }

    #[test]
    fn named_shapes_cover_all_parameters() {
        let p: ModelParams<f64> = init_model(&small_config(), 0).unwrap();
        let by_shape: usize = p
            .named_shapes()
            .iter()
            .map(|(_, s)| s.iter().product::<usize>())
            .sum();
        assert_eq!(by_shape, p.param_count());
        let by_blocks: usize = p.blocks().iter().map(|(_, d)| d.len()).sum();
        assert_eq!(by_blocks, p.param_count());
    }
}
