//! Dense-concatenation 1-D convolutional embedding network.
//!
//! Every conv layer consumes the channel-concatenation of the raw input and
//! all previous layers' outputs; feature maps are globally averaged over time
//! and mapped to the embedding by a fully connected head. Forward and exact
//! reverse-mode gradients are implemented directly on the layer structure.

mod checkpoint;
mod model;
mod params;

pub use checkpoint::ModelCheckpoint;
pub(crate) use model::{backward_batch, forward_batch};
pub use model::{backprop, forward, grad_check, BatchGrads};
pub use params::{init_model, ConvBlock, ModelParams};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Architecture configuration. Defaults give the eight-layer network with
/// doubling dilations and a 128-dimensional embedding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    pub in_channels: usize,
    pub n_conv_layers: usize,
    /// Feature maps added by each conv layer.
    pub growth: usize,
    /// Odd kernel width.
    pub kernel: usize,
    /// Per-layer dilation factors; length must equal `n_conv_layers`.
    pub dilations: Vec<usize>,
    pub embed_dim: usize,
    /// Per-channel normalization over time inside each layer.
    pub use_norm: bool,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            in_channels: 2,
            n_conv_layers: 8,
            growth: 32,
            kernel: 3,
            dilations: vec![1, 2, 4, 8, 16, 32, 64, 64],
            embed_dim: 128,
            use_norm: true,
        }
    }
}

impl NetConfig {
    /// Reduced four-layer variant for desk-scale runs.
    pub fn reduced(in_channels: usize) -> Self {
        NetConfig {
            in_channels,
            n_conv_layers: 4,
            growth: 8,
            kernel: 3,
            dilations: vec![1, 2, 4, 8],
            embed_dim: 128,
            use_norm: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_channels != 2 && self.in_channels != 4 {
            return Err(Error::Config(format!(
                "in_channels must be 2 or 4, got {}",
                self.in_channels
            )));
        }
        if self.n_conv_layers == 0 || self.n_conv_layers != self.dilations.len() {
            return Err(Error::Config(format!(
                "dilations length {} must equal n_conv_layers {}",
                self.dilations.len(),
                self.n_conv_layers
            )));
        }
        if self.kernel % 2 == 0 || self.kernel == 0 {
            return Err(Error::Config(format!("kernel must be odd, got {}", self.kernel)));
        }
        if self.embed_dim == 0 || self.growth == 0 {
            return Err(Error::Config("embed_dim and growth must be >= 1".into()));
        }
        if self.dilations.iter().any(|&d| d == 0) {
            return Err(Error::Config("dilations must be >= 1".into()));
        }
        Ok(())
    }

    /// Input channels seen by conv layer `l` (0-based): raw input plus all
    /// previous layers' outputs.
    pub fn layer_in_channels(&self, l: usize) -> usize {
        self.in_channels + self.growth * l
    }

    /// Channels in the final concatenation fed to pooling.
    pub fn total_features(&self) -> usize {
        self.in_channels + self.growth * self.n_conv_layers
    }
}
