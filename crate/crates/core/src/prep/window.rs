//! Windowing and segment grouping.

use super::{Segment, VelocityWindow, WindowSource};
use crate::error::Result;
use crate::scalar::Scalar;

/// Splits `C x N` velocity channels into non-overlapping windows of length
/// `window_len`; the trailing remainder is dropped. NaN entries are replaced
/// by zero after recording the window's `nan_fraction`.
pub fn make_windows<S: Scalar>(
    channels: &[Vec<S>],
    window_len: usize,
    source: &WindowSource,
) -> Result<Vec<VelocityWindow<S>>> {
    assert!(window_len >= 1, "window_len must be >= 1");
    let c = channels.len();
    let n = channels.first().map_or(0, |ch| ch.len());
    debug_assert!(channels.iter().all(|ch| ch.len() == n));

    let count = n / window_len;
    let mut out = Vec::with_capacity(count);
    for w in 0..count {
        let start = w * window_len;
        let mut data = Vec::with_capacity(c * window_len);
        let mut nan_count = 0usize;
        for ch in channels {
            for &v in &ch[start..start + window_len] {
                if v.is_nan() {
                    nan_count += 1;
                    data.push(S::zero());
                } else {
                    data.push(v);
                }
            }
        }
        let src = WindowSource {
            window_index: w as u32,
            ..source.clone()
        };
        out.push(VelocityWindow::new(
            data,
            c,
            window_len,
            nan_count as f64 / (c * window_len) as f64,
            src,
        )?);
    }
    Ok(out)
}

/// Groups consecutive runs of `segment_windows` windows into segments; the
/// trailing remainder is dropped. Windows must be ordered by `window_index`
/// within one recording.
pub fn group_segments<S: Scalar>(
    windows: &[VelocityWindow<S>],
    segment_windows: usize,
) -> Result<Vec<Segment<S>>> {
    let mut out = Vec::with_capacity(windows.len() / segment_windows);
    for chunk in windows.chunks_exact(segment_windows) {
        out.push(Segment::new(chunk.to_vec(), segment_windows)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaze::Task;

    fn source() -> WindowSource {
        WindowSource {
            subject_id: "s".into(),
            round: 1,
            session: 1,
            task: Task::RAN,
            window_index: 0,
        }
    }

    #[test]
    fn exact_multiple_yields_full_cover() {
        let ch = vec![(0..2500).map(|i| i as f64).collect::<Vec<_>>()];
        let w = make_windows(&ch, 1250, &source()).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[0].channel(0)[0], 0.0);
        assert_eq!(w[1].channel(0)[0], 1250.0);
        assert_eq!(w[1].source.window_index, 1);
    }

    #[test]
    fn remainder_is_dropped() {
        let ch = vec![vec![1.0f64; 3000]];
        let w = make_windows(&ch, 1250, &source()).unwrap();
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn nan_becomes_zero_with_recorded_fraction() {
        let mut data = vec![1.0f64; 10];
        data[3] = f64::NAN;
        data[7] = f64::NAN;
        let w = make_windows(&[data], 10, &source()).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].channel(0)[3], 0.0);
        assert_eq!(w[0].channel(0)[7], 0.0);
        assert!((w[0].nan_fraction - 0.2).abs() < 1e-12);
    }

    #[test]
    fn windows_are_disjoint_and_ordered() {
        let ch = vec![(0..20).map(|i| i as f64).collect::<Vec<_>>()];
        let w = make_windows(&ch, 5, &source()).unwrap();
        assert_eq!(w.len(), 4);
        for (k, win) in w.iter().enumerate() {
            assert_eq!(win.source.window_index, k as u32);
            assert_eq!(win.channel(0)[0], (k * 5) as f64);
        }
    }

    #[test]
    fn segment_grouping_counts() {
        let ch = vec![vec![0.0f64; 27 * 4]];
        let w = make_windows(&ch, 4, &source()).unwrap();
        assert_eq!(group_segments(&w, 9).unwrap().len(), 3);

        let w10 = &w[..10];
        let segs = group_segments(w10, 9).unwrap();
        assert_eq!(segs.len(), 1);

        let none: Vec<VelocityWindow<f64>> = vec![];
        assert!(group_segments(&none, 9).unwrap().is_empty());
    }
}
