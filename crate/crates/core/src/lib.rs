//! Eye-movement biometric embedding pipeline.
//!
//! The crate covers the full authentication pipeline for gaze recordings:
//! parsing and synthesis of gaze data ([`gaze`]), velocity preprocessing
//! ([`prep`]), a dense-concatenation 1-D convolutional embedding network with
//! its own reverse-mode gradients ([`net`]), metric-learning training
//! ([`train`]), biometric evaluation ([`eval`]), and signal-quality metrics
//! ([`quality`]).
//!
//! All numeric code is generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); the aliases below fix the common concrete choices.

pub mod error;
pub mod eval;
pub mod gaze;
pub mod net;
pub mod prep;
pub mod quality;
pub mod scalar;
pub mod train;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Gaze recording with `f64` positions, the default pipeline precision.
pub type Recording64 = gaze::GazeRecording<f64>;
/// Gaze recording with `f32` positions.
pub type Recording32 = gaze::GazeRecording<f32>;
/// Velocity window in `f64`.
pub type Window64 = prep::VelocityWindow<f64>;
/// Velocity window in `f32`.
pub type Window32 = prep::VelocityWindow<f32>;
/// Window collection in `f64`.
pub type WindowSet64 = prep::WindowSet<f64>;
/// Model parameters in `f64`.
pub type ModelParams64 = net::ModelParams<f64>;
/// Fold checkpoint in `f64`.
pub type Checkpoint64 = net::ModelCheckpoint<f64>;
/// Embedding vector in `f64`.
pub type Embedding64 = eval::EmbeddingVector<f64>;
