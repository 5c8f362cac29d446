//! Timestamp regularization, off-screen masking, and decimation.

use super::ScreenBounds;
use crate::error::{Error, Result};
use crate::gaze::{GazeRecording, GazeSample};
use crate::scalar::Scalar;

/// Resamples a recording onto the exact grid `0, dt, 2*dt, ...` up to the
/// last input timestamp. Each position channel is linearly interpolated
/// between its bracketing input samples; a NaN bracket yields NaN. Grid
/// points on an input timestamp take that sample's values directly.
pub fn regularize_timestamps<S: Scalar>(
    rec: &GazeRecording<S>,
    dt_ms: f64,
) -> Result<GazeRecording<S>> {
    if dt_ms <= 0.0 {
        return Err(Error::Config(format!("dt_ms must be positive, got {dt_ms}")));
    }
    if rec.samples.len() < 2 {
        return Err(Error::Insufficient(
            "regularization needs at least 2 samples".into(),
        ));
    }

    let last_t = rec.samples.last().unwrap().t_ms;
    let n_out = (last_t / dt_ms).floor() as usize + 1;
    let mut out = Vec::with_capacity(n_out);
    let mut hi = 0usize; // first input index with t >= grid point

    for k in 0..n_out {
        let t = k as f64 * dt_ms;
        while hi < rec.samples.len() && rec.samples[hi].t_ms < t {
            hi += 1;
        }
        let sample = if hi < rec.samples.len() && rec.samples[hi].t_ms == t {
            let s = rec.samples[hi];
            GazeSample { t_ms: t, ..s }
        } else if hi == 0 || hi >= rec.samples.len() {
            // Before the first input sample (recording starts late): no bracket.
            nan_sample(t)
        } else {
            let a = rec.samples[hi - 1];
            let b = rec.samples[hi];
            let w = (t - a.t_ms) / (b.t_ms - a.t_ms);
            GazeSample {
                t_ms: t,
                lx: lerp(a.lx, b.lx, w),
                ly: lerp(a.ly, b.ly, w),
                rx: lerp(a.rx, b.rx, w),
                ry: lerp(a.ry, b.ry, w),
                tx: lerp(a.tx, b.tx, w),
                ty: lerp(a.ty, b.ty, w),
            }
        };
        out.push(sample);
    }

    Ok(GazeRecording {
        meta: rec.meta.clone(),
        samples: out,
    })
}

fn nan_sample<S: Scalar>(t: f64) -> GazeSample<S> {
    let nan = S::nan();
    GazeSample {
        t_ms: t,
        lx: nan,
        ly: nan,
        rx: nan,
        ry: nan,
        tx: nan,
        ty: nan,
    }
}

/// NaN-propagating linear interpolation.
fn lerp<S: Scalar>(a: S, b: S, w: f64) -> S {
    if a.is_nan() || b.is_nan() {
        S::nan()
    } else {
        a + (b - a) * S::from_f64_lossy(w)
    }
}

/// Masks samples outside the screen: if either component of an eye is out of
/// bounds, both components of that eye become NaN at that sample. Target
/// channels are left untouched.
pub fn apply_screen_bounds<S: Scalar>(
    rec: &GazeRecording<S>,
    bounds: &ScreenBounds,
) -> GazeRecording<S> {
    let mut out = rec.clone();
    for s in &mut out.samples {
        mask_eye(&mut s.lx, &mut s.ly, bounds);
        mask_eye(&mut s.rx, &mut s.ry, bounds);
    }
    out
}

fn mask_eye<S: Scalar>(x: &mut S, y: &mut S, bounds: &ScreenBounds) {
    let xf = x.to_f64_lossy();
    let yf = y.to_f64_lossy();
    // NaN comparisons are false, so already-missing samples stay as they are
    // unless the finite component is out of bounds.
    let x_out = xf < bounds.x_min || xf > bounds.x_max;
    let y_out = yf < bounds.y_min || yf > bounds.y_max;
    if x_out || y_out {
        *x = S::nan();
        *y = S::nan();
    }
}

/// Keeps every `factor`-th sample starting at index 0 and divides the rate.
/// No anti-alias filtering.
pub fn decimate<S: Scalar>(rec: &GazeRecording<S>, factor: usize) -> Result<GazeRecording<S>> {
    if factor < 1 {
        return Err(Error::Config("decimation factor must be >= 1".into()));
    }
    if factor == 1 {
        return Ok(rec.clone());
    }
    if rec.meta.rate_hz % factor as u32 != 0 {
        return Err(Error::Config(format!(
            "decimation factor {factor} does not divide rate {}",
            rec.meta.rate_hz
        )));
    }
    let mut meta = rec.meta.clone();
    meta.rate_hz /= factor as u32;
    Ok(GazeRecording {
        meta,
        samples: rec.samples.iter().step_by(factor).copied().collect(),
    })
}
