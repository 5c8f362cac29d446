//! Velocity preprocessing: timestamp regularization, off-screen masking,
//! Savitzky-Golay differentiation with clamping, decimation, windowing, and
//! segment grouping.

mod pipeline;
mod resample;
mod savgol;
mod store;
mod window;

pub use pipeline::{preprocess_recording, ChannelMode};
pub use resample::{apply_screen_bounds, decimate, regularize_timestamps};
pub use savgol::{differentiate_sg, sg_derivative_coefficients};
pub use store::WindowSet;
pub use window::{group_segments, make_windows};

use crate::error::{Error, Result};
use crate::gaze::Task;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Screen extent in dva; samples outside are masked to NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl ScreenBounds {
    /// Bounds of the high-end tracker setup: x in [-23.3, 23.3],
    /// y in [-18.5, 11.7] dva.
    pub const GB: ScreenBounds = ScreenBounds {
        x_min: -23.3,
        x_max: 23.3,
        y_min: -18.5,
        y_max: 11.7,
    };

    pub fn validate(&self) -> Result<()> {
        if self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::Config("screen bounds must have min < max".into()));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }
}

/// Preprocessing configuration. Defaults give the 250 Hz pipeline with
/// 5-second windows grouped nine at a time into 45-second segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepConfig {
    /// Target sample period after regularization/decimation, ms.
    pub dt_ms: f64,
    /// Savitzky-Golay window, odd sample count.
    pub sg_window: usize,
    /// Savitzky-Golay polynomial order.
    pub sg_order: usize,
    /// Velocity clamp, °/s.
    pub clamp: f64,
    /// Window length, seconds.
    pub window_s: f64,
    /// Windows per segment.
    pub segment_windows: usize,
    /// Optional off-screen mask; applied only when set.
    pub bounds: Option<ScreenBounds>,
    /// Decimation factor used when the native rate is above the target.
    pub decimate_factor: usize,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            dt_ms: 4.0,
            sg_window: 7,
            sg_order: 2,
            clamp: 1000.0,
            window_s: 5.0,
            segment_windows: 9,
            bounds: None,
            decimate_factor: 4,
        }
    }
}

impl PrepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sg_window % 2 == 0 || self.sg_window <= self.sg_order {
            return Err(Error::Config(format!(
                "sg_window must be odd and > sg_order (got window {}, order {})",
                self.sg_window, self.sg_order
            )));
        }
        if self.clamp <= 0.0 {
            return Err(Error::Config("clamp must be positive".into()));
        }
        if self.segment_windows < 1 {
            return Err(Error::Config("segment_windows must be >= 1".into()));
        }
        if self.dt_ms <= 0.0 || self.window_s <= 0.0 {
            return Err(Error::Config("dt_ms and window_s must be positive".into()));
        }
        if self.decimate_factor < 1 {
            return Err(Error::Config("decimate_factor must be >= 1".into()));
        }
        if let Some(b) = &self.bounds {
            b.validate()?;
        }
        Ok(())
    }

    /// Window length in samples at the target rate.
    pub fn window_len(&self) -> usize {
        (self.window_s * 1000.0 / self.dt_ms).round() as usize
    }
}

/// Identifies where a window came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindowSource {
    pub subject_id: String,
    pub round: u8,
    pub session: u8,
    pub task: Task,
    pub window_index: u32,
}

/// Fixed-length multi-channel velocity tensor, the network's input unit.
///
/// `channels` is row-major `C x L`; all values are finite (NaN already
/// substituted by zero) and clamped. `nan_fraction` records the NaN share
/// before substitution.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityWindow<S: Scalar> {
    channels: Vec<S>,
    n_channels: usize,
    len: usize,
    pub nan_fraction: f64,
    pub source: WindowSource,
}

impl<S: Scalar> VelocityWindow<S> {
    pub fn new(
        channels: Vec<S>,
        n_channels: usize,
        len: usize,
        nan_fraction: f64,
        source: WindowSource,
    ) -> Result<Self> {
        if channels.len() != n_channels * len {
            return Err(Error::Shape(format!(
                "window data length {} != {} channels x {} samples",
                channels.len(),
                n_channels,
                len
            )));
        }
        if channels.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("velocity window".into()));
        }
        Ok(VelocityWindow {
            channels,
            n_channels,
            len,
            nan_fraction,
            source,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// One channel's time series.
    pub fn channel(&self, c: usize) -> &[S] {
        &self.channels[c * self.len..(c + 1) * self.len]
    }

    /// Flat `C x L` row-major data.
    pub fn data(&self) -> &[S] {
        &self.channels
    }
}

/// Exactly `segment_windows` consecutive windows from one recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<S: Scalar> {
    pub windows: Vec<VelocityWindow<S>>,
}

impl<S: Scalar> Segment<S> {
    pub fn new(windows: Vec<VelocityWindow<S>>, expected: usize) -> Result<Self> {
        if windows.len() != expected {
            return Err(Error::Shape(format!(
                "segment needs exactly {expected} windows, got {}",
                windows.len()
            )));
        }
        let first = &windows[0].source;
        for (i, w) in windows.iter().enumerate() {
            let s = &w.source;
            if (s.subject_id.as_str(), s.round, s.session, s.task)
                != (
                    first.subject_id.as_str(),
                    first.round,
                    first.session,
                    first.task,
                )
            {
                return Err(Error::Shape("segment mixes recordings".into()));
            }
            if i > 0 && s.window_index != windows[i - 1].source.window_index + 1 {
                return Err(Error::Shape("segment windows must be consecutive".into()));
            }
        }
        Ok(Segment { windows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_window_lengths() {
        let cfg = PrepConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.window_len(), 1250);
        let fast = PrepConfig {
            dt_ms: 1.0,
            ..PrepConfig::default()
        };
        assert_eq!(fast.window_len(), 5000);
    }

    #[test]
    fn config_rejects_even_sg_window() {
        let cfg = PrepConfig {
            sg_window: 6,
            ..PrepConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn window_rejects_non_finite_values() {
        let src = WindowSource {
            subject_id: "s".into(),
            round: 1,
            session: 1,
            task: Task::RAN,
            window_index: 0,
        };
        assert!(VelocityWindow::new(vec![0.0, f64::NAN], 1, 2, 0.0, src).is_err());
    }
}
