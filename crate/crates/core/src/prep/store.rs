//! Window persistence: flat little-endian f32 binary plus a sidecar index CSV.
//!
//! Binary layout: one header line `C=<c> L=<l> count=<n>` followed by raw
//! 32-bit floats in window-major, channel-major, time-minor order. The index
//! CSV carries `subject,round,session,task,window_index,nan_fraction` in the
//! same window order.

use super::{VelocityWindow, WindowSource};
use crate::error::{Error, Result};
use crate::gaze::Task;
use crate::scalar::Scalar;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// A uniform collection of velocity windows (same channel count and length).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet<S: Scalar> {
    n_channels: usize,
    window_len: usize,
    windows: Vec<VelocityWindow<S>>,
}

impl<S: Scalar> WindowSet<S> {
    pub fn new(n_channels: usize, window_len: usize) -> Self {
        WindowSet {
            n_channels,
            window_len,
            windows: Vec::new(),
        }
    }

    pub fn push(&mut self, w: VelocityWindow<S>) -> Result<()> {
        if w.n_channels() != self.n_channels || w.len() != self.window_len {
            return Err(Error::Shape(format!(
                "window {}x{} does not fit set {}x{}",
                w.n_channels(),
                w.len(),
                self.n_channels,
                self.window_len
            )));
        }
        self.windows.push(w);
        Ok(())
    }

    pub fn extend(&mut self, ws: Vec<VelocityWindow<S>>) -> Result<()> {
        for w in ws {
            self.push(w)?;
        }
        Ok(())
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn windows(&self) -> &[VelocityWindow<S>] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// Writes `<stem>.bin` and `<stem>_index.csv`.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let bin_path = stem.with_extension("bin");
        let mut bytes = Vec::with_capacity(
            32 + self.windows.len() * self.n_channels * self.window_len * 4,
        );
        bytes.extend_from_slice(
            format!(
                "C={} L={} count={}\n",
                self.n_channels,
                self.window_len,
                self.windows.len()
            )
            .as_bytes(),
        );
        for w in &self.windows {
            for &v in w.data() {
                bytes.extend_from_slice(&(v.to_f64_lossy() as f32).to_le_bytes());
            }
        }
        fs::write(&bin_path, bytes)?;

        let mut csv = String::from("subject,round,session,task,window_index,nan_fraction\n");
        for w in &self.windows {
            let s = &w.source;
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                s.subject_id, s.round, s.session, s.task, s.window_index, w.nan_fraction
            );
        }
        fs::write(index_path(stem), csv)?;
        Ok(())
    }

    /// Loads a set previously written by [`WindowSet::save`].
    pub fn load(stem: &Path) -> Result<Self> {
        let bin_path = stem.with_extension("bin");
        let bytes = fs::read(&bin_path)?;
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| format_err(&bin_path, "missing header line"))?;
        let header = std::str::from_utf8(&bytes[..nl])
            .map_err(|_| format_err(&bin_path, "header is not UTF-8"))?;

        let mut c = None;
        let mut l = None;
        let mut count = None;
        for field in header.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| format_err(&bin_path, "malformed header field"))?;
            let v: usize = v
                .parse()
                .map_err(|_| format_err(&bin_path, "non-numeric header field"))?;
            match k {
                "C" => c = Some(v),
                "L" => l = Some(v),
                "count" => count = Some(v),
                _ => return Err(format_err(&bin_path, "unknown header field")),
            }
        }
        let (c, l, count) = match (c, l, count) {
            (Some(c), Some(l), Some(n)) => (c, l, n),
            _ => return Err(format_err(&bin_path, "incomplete header")),
        };

        let payload = &bytes[nl + 1..];
        if payload.len() != count * c * l * 4 {
            return Err(format_err(&bin_path, "payload size does not match header"));
        }

        let index = fs::read_to_string(index_path(stem))?;
        let sources = parse_index(&index, stem)?;
        if sources.len() != count {
            return Err(format_err(stem, "index row count does not match header"));
        }

        let mut set = WindowSet::new(c, l);
        for (w, (src, nan_fraction)) in sources.into_iter().enumerate() {
            let start = w * c * l * 4;
            let mut data = Vec::with_capacity(c * l);
            for k in 0..c * l {
                let off = start + k * 4;
                let v = f32::from_le_bytes([
                    payload[off],
                    payload[off + 1],
                    payload[off + 2],
                    payload[off + 3],
                ]);
                data.push(S::from_f64_lossy(v as f64));
            }
            set.push(VelocityWindow::new(data, c, l, nan_fraction, src)?)?;
        }
        Ok(set)
    }
}

fn index_path(stem: &Path) -> std::path::PathBuf {
    let mut name = stem
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str("_index.csv");
    stem.with_file_name(name)
}

fn format_err(path: &Path, detail: &str) -> Error {
    Error::Format {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}

fn parse_index(text: &str, stem: &Path) -> Result<Vec<(WindowSource, f64)>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 6 {
            return Err(format_err(stem, "index row does not have 6 cells"));
        }
        let src = WindowSource {
            subject_id: cells[0].to_string(),
            round: cells[1]
                .parse()
                .map_err(|_| format_err(stem, "bad round"))?,
            session: cells[2]
                .parse()
                .map_err(|_| format_err(stem, "bad session"))?,
            task: cells[3].parse::<Task>()?,
            window_index: cells[4]
                .parse()
                .map_err(|_| format_err(stem, "bad window_index"))?,
        };
        let nan_fraction: f64 = cells[5]
            .parse()
            .map_err(|_| format_err(stem, "bad nan_fraction"))?;
        rows.push((src, nan_fraction));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn window(idx: u32, fill: f32) -> VelocityWindow<f64> {
        let src = WindowSource {
            subject_id: "s7".into(),
            round: 1,
            session: 2,
            task: Task::TEX,
            window_index: idx,
        };
        let data: Vec<f64> = (0..8).map(|i| fill as f64 + i as f64 * 0.25).collect();
        VelocityWindow::new(data, 2, 4, 0.125, src).unwrap()
    }

    #[test]
    fn save_load_round_trip_preserves_everything() {
        let dir = tempdir().unwrap();
        let stem = dir.path().join("windows");
        let mut set = WindowSet::new(2, 4);
        set.push(window(0, 1.0)).unwrap();
        set.push(window(1, -3.5)).unwrap();
        set.save(&stem).unwrap();

        let back: WindowSet<f64> = WindowSet::load(&stem).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn save_is_byte_deterministic() {
        let dir = tempdir().unwrap();
        let mut set = WindowSet::new(2, 4);
        set.push(window(0, 2.0)).unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        set.save(&a).unwrap();
        set.save(&b).unwrap();
        assert_eq!(
            fs::read(a.with_extension("bin")).unwrap(),
            fs::read(b.with_extension("bin")).unwrap()
        );
    }

    #[test]
    fn mismatched_window_shape_is_rejected() {
        let mut set: WindowSet<f64> = WindowSet::new(4, 4);
        assert!(set.push(window(0, 0.0)).is_err());
    }

    #[test]
    fn truncated_payload_is_a_format_error() {
        let dir = tempdir().unwrap();
        let stem = dir.path().join("w");
        let mut set = WindowSet::new(2, 4);
        set.push(window(0, 1.0)).unwrap();
        set.save(&stem).unwrap();
        let bin = stem.with_extension("bin");
        let mut bytes = fs::read(&bin).unwrap();
        bytes.truncate(bytes.len() - 4);
        fs::write(&bin, bytes).unwrap();
        assert!(WindowSet::<f64>::load(&stem).is_err());
    }
}
