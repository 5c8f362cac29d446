//! Recording-to-windows preprocessing driver.

use super::{
    apply_screen_bounds, decimate, differentiate_sg, make_windows, regularize_timestamps,
    PrepConfig, VelocityWindow, WindowSource,
};
use crate::error::{Error, Result};
use crate::gaze::{Eyes, GazeRecording};
use crate::scalar::Scalar;

/// Which velocity channels to extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMode {
    /// Follow the recording metadata: 4 channels for binocular, 2 for monocular.
    Auto,
    /// Left eye only (2 channels), even for binocular recordings.
    MonocularLeft,
    /// Both eyes (4 channels); requires a binocular recording.
    Binocular,
}

impl ChannelMode {
    fn n_channels(self, eyes: Eyes) -> Result<usize> {
        match (self, eyes) {
            (ChannelMode::MonocularLeft, _) => Ok(2),
            (ChannelMode::Binocular, Eyes::Binocular) => Ok(4),
            (ChannelMode::Binocular, Eyes::MonocularLeft) => Err(Error::Config(
                "binocular channels requested from a monocular recording".into(),
            )),
            (ChannelMode::Auto, Eyes::Binocular) => Ok(4),
            (ChannelMode::Auto, Eyes::MonocularLeft) => Ok(2),
        }
    }
}

/// Runs the full preprocessing chain on one recording:
/// regularize -> mask (if bounds configured) -> decimate to the target rate
/// -> Savitzky-Golay velocities with clamping -> non-overlapping windows.
///
/// Regularization happens at the recording's native period; when the target
/// period `dt_ms` is coarser, the configured `decimate_factor` is applied and
/// must bridge the two rates exactly.
pub fn preprocess_recording<S: Scalar>(
    rec: &GazeRecording<S>,
    cfg: &PrepConfig,
    mode: ChannelMode,
) -> Result<Vec<VelocityWindow<S>>> {
    cfg.validate()?;
    rec.meta.validate()?;

    let native_dt = 1000.0 / rec.meta.rate_hz as f64;
    if cfg.dt_ms < native_dt {
        return Err(Error::Config(format!(
            "target period {} ms is finer than the native period {} ms",
            cfg.dt_ms, native_dt
        )));
    }

    let mut work = regularize_timestamps(rec, native_dt)?;
    if let Some(bounds) = &cfg.bounds {
        work = apply_screen_bounds(&work, bounds);
    }
    if cfg.dt_ms > native_dt {
        let factor = cfg.decimate_factor;
        if (native_dt * factor as f64 - cfg.dt_ms).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "decimate_factor {factor} does not bridge {native_dt} ms to {} ms",
                cfg.dt_ms
            )));
        }
        work = decimate(&work, factor)?;
    }

    let n_channels = mode.n_channels(rec.meta.eyes)?;
    let mut positions: Vec<Vec<S>> = Vec::with_capacity(n_channels);
    positions.push(work.samples.iter().map(|s| s.lx).collect());
    positions.push(work.samples.iter().map(|s| s.ly).collect());
    if n_channels == 4 {
        positions.push(work.samples.iter().map(|s| s.rx).collect());
        positions.push(work.samples.iter().map(|s| s.ry).collect());
    }

    let mut velocities = Vec::with_capacity(n_channels);
    for pos in &positions {
        velocities.push(differentiate_sg(
            pos,
            cfg.dt_ms,
            cfg.sg_window,
            cfg.sg_order,
            cfg.clamp,
        )?);
    }

    let source = WindowSource {
        subject_id: rec.meta.subject_id.clone(),
        round: rec.meta.round,
        session: rec.meta.session,
        task: rec.meta.task,
        window_index: 0,
    };
    make_windows(&velocities, cfg.window_len(), &source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaze::{synth_recording, SubjectParams, Task};
    use crate::prep::group_segments;

    fn params() -> SubjectParams {
        SubjectParams {
            saccade_vmax: 500.0,
            saccade_c: 5.0,
            fixation_noise_sigma: 0.05,
            saccade_rate: 2.0,
            pursuit_gain: 1.0,
            latency_ms: 100.0,
        }
    }

    #[test]
    fn sixty_seconds_at_250hz_gives_12_windows_and_one_segment() {
        let rec: GazeRecording<f64> =
            synth_recording(&params(), "s1", 1, 1, Task::RAN, 60.0, 250, 1).unwrap();
        let cfg = PrepConfig::default();
        let windows = preprocess_recording(&rec, &cfg, ChannelMode::Auto).unwrap();
        assert_eq!(windows.len(), 12);
        assert_eq!(windows[0].len(), 1250);
        assert_eq!(windows[0].n_channels(), 4);
        let segs = group_segments(&windows, cfg.segment_windows).unwrap();
        assert_eq!(segs.len(), 1);
    }

    #[test]
    fn thousand_hz_native_windows_have_5000_samples() {
        let rec: GazeRecording<f64> =
            synth_recording(&params(), "s1", 1, 1, Task::RAN, 10.0, 1000, 1).unwrap();
        let cfg = PrepConfig {
            dt_ms: 1.0,
            ..PrepConfig::default()
        };
        let windows = preprocess_recording(&rec, &cfg, ChannelMode::MonocularLeft).unwrap();
        assert_eq!(windows.len(), 2);
        assert_eq!(windows[0].len(), 5000);
        assert_eq!(windows[0].n_channels(), 2);
    }

    #[test]
    fn thousand_hz_downsampled_to_250hz_windows() {
        let rec: GazeRecording<f64> =
            synth_recording(&params(), "s1", 1, 1, Task::RAN, 10.0, 1000, 1).unwrap();
        let cfg = PrepConfig::default(); // dt 4 ms, factor 4
        let windows = preprocess_recording(&rec, &cfg, ChannelMode::Auto).unwrap();
        assert_eq!(windows.len(), 2);
        assert_eq!(windows[0].len(), 1250);
    }

    #[test]
    fn all_nan_recording_still_yields_finite_windows() {
        let mut rec: GazeRecording<f64> =
            synth_recording(&params(), "s1", 1, 1, Task::RAN, 10.0, 250, 1).unwrap();
        for s in &mut rec.samples {
            s.lx = f64::NAN;
            s.ly = f64::NAN;
            s.rx = f64::NAN;
            s.ry = f64::NAN;
        }
        let windows = preprocess_recording(&rec, &PrepConfig::default(), ChannelMode::Auto).unwrap();
        assert_eq!(windows.len(), 2);
        for w in &windows {
            assert_eq!(w.nan_fraction, 1.0);
            assert!(w.data().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn velocity_values_respect_clamp_bound() {
        let rec: GazeRecording<f64> =
            synth_recording(&params(), "s1", 1, 1, Task::RAN, 30.0, 250, 3).unwrap();
        let windows = preprocess_recording(&rec, &PrepConfig::default(), ChannelMode::Auto).unwrap();
        for w in &windows {
            for &v in w.data() {
                assert!(v.is_finite() && v.abs() <= 1000.0);
            }
        }
    }

    #[test]
    fn determinism_identical_inputs_identical_windows() {
        let rec: GazeRecording<f64> =
            synth_recording(&params(), "s1", 1, 1, Task::TEX, 20.0, 250, 9).unwrap();
        let a = preprocess_recording(&rec, &PrepConfig::default(), ChannelMode::Auto).unwrap();
        let b = preprocess_recording(&rec, &PrepConfig::default(), ChannelMode::Auto).unwrap();
        assert_eq!(a, b);
    }
}
