//! Gaze data model: samples, recordings, metadata, parsing, and synthesis.

mod csv;
mod synth;

pub use csv::{parse_meta, parse_recording, serialize_meta, serialize_recording};
pub use synth::{recording_seed, synth_recording, SubjectParams, VERGENCE_OFFSET_DVA};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Recording task. `SYNTH` marks generated data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum Task {
    TEX,
    RAN,
    PUR,
    VD,
    VRG,
    FXS,
    HSS,
    VD1,
    VD2,
    BLG,
    SYNTH,
}

impl Task {
    pub const ALL: [Task; 11] = [
        Task::TEX,
        Task::RAN,
        Task::PUR,
        Task::VD,
        Task::VRG,
        Task::FXS,
        Task::HSS,
        Task::VD1,
        Task::VD2,
        Task::BLG,
        Task::SYNTH,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Task::TEX => "TEX",
            Task::RAN => "RAN",
            Task::PUR => "PUR",
            Task::VD => "VD",
            Task::VRG => "VRG",
            Task::FXS => "FXS",
            Task::HSS => "HSS",
            Task::VD1 => "VD1",
            Task::VD2 => "VD2",
            Task::BLG => "BLG",
            Task::SYNTH => "SYNTH",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .iter()
            .copied()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown task `{s}`")))
    }
}

/// Which eyes a recording carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Eyes {
    MonocularLeft,
    Binocular,
}

impl Eyes {
    pub fn as_str(&self) -> &'static str {
        match self {
            Eyes::MonocularLeft => "mono",
            Eyes::Binocular => "bino",
        }
    }
}

impl FromStr for Eyes {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mono" => Ok(Eyes::MonocularLeft),
            "bino" => Ok(Eyes::Binocular),
            other => Err(Error::Config(format!("unknown eyes mode `{other}`"))),
        }
    }
}

/// One gaze sample. Positions are degrees of visual angle; missing data is NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeSample<S: Scalar> {
    /// Milliseconds since recording start.
    pub t_ms: f64,
    pub lx: S,
    pub ly: S,
    pub rx: S,
    pub ry: S,
    /// Stimulus target position; NaN when no target is defined.
    pub tx: S,
    pub ty: S,
}

impl<S: Scalar> GazeSample<S> {
    /// Position fields must be finite or NaN, never infinite.
    pub fn validate(&self) -> Result<()> {
        if !self.t_ms.is_finite() || self.t_ms < 0.0 {
            return Err(Error::NonFinite("gaze sample timestamp".into()));
        }
        for v in [self.lx, self.ly, self.rx, self.ry, self.tx, self.ty] {
            if v.is_infinite() {
                return Err(Error::NonFinite("gaze sample position".into()));
            }
        }
        Ok(())
    }
}

/// Recording-level metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub subject_id: String,
    pub round: u8,
    pub session: u8,
    pub task: Task,
    pub rate_hz: u32,
    pub eyes: Eyes,
}

impl RecordingMeta {
    pub fn validate(&self) -> Result<()> {
        if self.rate_hz != 250 && self.rate_hz != 1000 {
            return Err(Error::Config(format!(
                "rate_hz must be 250 or 1000, got {}",
                self.rate_hz
            )));
        }
        Ok(())
    }
}

/// A full recording: metadata plus time-ordered samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GazeRecording<S: Scalar> {
    pub meta: RecordingMeta,
    pub samples: Vec<GazeSample<S>>,
}

impl<S: Scalar> GazeRecording<S> {
    /// Checks the type invariants: non-empty, strictly increasing timestamps,
    /// NaN right eye for monocular recordings.
    pub fn validate(&self) -> Result<()> {
        self.meta.validate()?;
        if self.samples.is_empty() {
            return Err(Error::Insufficient("recording has no samples".into()));
        }
        for (i, s) in self.samples.iter().enumerate() {
            s.validate()?;
            if i > 0 && s.t_ms <= self.samples[i - 1].t_ms {
                return Err(Error::Ordering { row: i + 1 });
            }
            if self.meta.eyes == Eyes::MonocularLeft && (!s.rx.is_nan() || !s.ry.is_nan()) {
                return Err(Error::Config(
                    "monocular recording carries right-eye data".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn duration_ms(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t_ms - a.t_ms,
            _ => 0.0,
        }
    }
}
