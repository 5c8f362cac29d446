//! Checkpoint persistence: a JSON header, a blank line, then little-endian
//! 32-bit floats in header-declared block order.

use super::params::ModelParams;
use super::NetConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

/// One trained fold model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCheckpoint<S: Scalar> {
    pub seed: u64,
    pub fold_index: u8,
    pub params: ModelParams<S>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: NetConfig,
    seed: u64,
    fold_index: u8,
    shapes: Vec<(String, Vec<usize>)>,
}

impl<S: Scalar> ModelCheckpoint<S> {
    pub fn config(&self) -> &NetConfig {
        &self.params.config
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let header = Header {
            config: self.params.config.clone(),
            seed: self.seed,
            fold_index: self.fold_index,
            shapes: self.params.named_shapes(),
        };
        let mut bytes = serde_json::to_string(&header)?.into_bytes();
        bytes.push(b'\n');
        bytes.push(b'\n');
        for (_, data) in self.params.blocks() {
            for &v in data {
                bytes.extend_from_slice(&(v.to_f64_lossy() as f32).to_le_bytes());
            }
        }
        fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        let boundary = bytes
            .windows(2)
            .position(|w| w == b"\n\n")
            .ok_or_else(|| Error::Format {
                path: path.display().to_string(),
                detail: "missing blank line after JSON header".into(),
            })?;
        let header: Header = serde_json::from_slice(&bytes[..boundary])?;
        header.config.validate()?;

        let mut params: ModelParams<S> = ModelParams::zeros(&header.config)?;
        let expected = params.named_shapes();
        if header.shapes != expected {
            return Err(Error::Format {
                path: path.display().to_string(),
                detail: "shape list does not match the declared config".into(),
            });
        }

        let payload = &bytes[boundary + 2..];
        let n_params = params.param_count();
        if payload.len() != n_params * 4 {
            return Err(Error::Format {
                path: path.display().to_string(),
                detail: format!(
                    "payload holds {} bytes, expected {}",
                    payload.len(),
                    n_params * 4
                ),
            });
        }
        let mut off = 0usize;
        for (_, data) in params.blocks_mut() {
            for v in data.iter_mut() {
                let raw = f32::from_le_bytes([
                    payload[off],
                    payload[off + 1],
                    payload[off + 2],
                    payload[off + 3],
                ]);
                *v = S::from_f64_lossy(raw as f64);
                off += 4;
            }
        }
        params.check_finite()?;
        Ok(ModelCheckpoint {
            seed: header.seed,
            fold_index: header.fold_index,
            params,
        })
    }
}
