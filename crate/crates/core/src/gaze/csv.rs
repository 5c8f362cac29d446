//! Canonical recording CSV and `.meta` sidecar parsing/serialization.
//!
//! Recording CSV: header `t_ms,lx,ly,rx,ry,tx,ty`, UTF-8, decimal point,
//! NaN spelled `nan`, empty cells also NaN. Sidecar line:
//! `subject=<id> round=<n> session=<n> task=<name> rate_hz=<n> eyes=<mono|bino>`.

use super::{Eyes, GazeRecording, GazeSample, RecordingMeta, Task};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::fmt::Write as _;

pub const CSV_COLUMNS: [&str; 7] = ["t_ms", "lx", "ly", "rx", "ry", "tx", "ty"];

/// Parses a canonical recording CSV into a recording with the given metadata.
///
/// Columns may appear in any order; extra columns are ignored. Literal `nan`
/// (any case) and empty cells become NaN.
pub fn parse_recording<S: Scalar>(text: &str, meta: RecordingMeta) -> Result<GazeRecording<S>> {
    meta.validate()?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Insufficient("empty recording file".into()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();

    let mut col = [0usize; 7];
    for (k, want) in CSV_COLUMNS.iter().enumerate() {
        col[k] = names
            .iter()
            .position(|n| n == want)
            .ok_or_else(|| Error::Schema {
                column: (*want).into(),
            })?;
    }

    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 2; // 1-based, header is row 1
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let mut vals = [0.0f64; 7];
        for (k, &c) in col.iter().enumerate() {
            let cell = cells.get(c).copied().unwrap_or("");
            vals[k] = parse_cell(cell, row, CSV_COLUMNS[k])?;
        }
        let t_ms = vals[0];
        if t_ms.is_nan() {
            return Err(Error::Parse {
                row,
                column: "t_ms".into(),
                detail: "timestamp must be numeric".into(),
            });
        }
        if let Some(prev) = samples.last() {
            let prev: &GazeSample<S> = prev;
            if t_ms <= prev.t_ms {
                return Err(Error::Ordering { row });
            }
        }
        samples.push(GazeSample {
            t_ms,
            lx: S::from_f64_lossy(vals[1]),
            ly: S::from_f64_lossy(vals[2]),
            rx: S::from_f64_lossy(vals[3]),
            ry: S::from_f64_lossy(vals[4]),
            tx: S::from_f64_lossy(vals[5]),
            ty: S::from_f64_lossy(vals[6]),
        });
    }
    let rec = GazeRecording { meta, samples };
    rec.validate()?;
    Ok(rec)
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64> {
    if cell.is_empty() || cell.eq_ignore_ascii_case("nan") {
        return Ok(f64::NAN);
    }
    cell.parse::<f64>().map_err(|e| Error::Parse {
        row,
        column: column.into(),
        detail: e.to_string(),
    })
}

/// Serializes a recording to the canonical CSV. Inverse of [`parse_recording`]
/// for valid recordings, NaN included.
pub fn serialize_recording<S: Scalar>(rec: &GazeRecording<S>) -> String {
    let mut out = String::with_capacity(rec.samples.len() * 32 + 32);
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for s in &rec.samples {
        let _ = write!(out, "{}", fmt_num(s.t_ms));
        for v in [s.lx, s.ly, s.rx, s.ry, s.tx, s.ty] {
            out.push(',');
            let _ = write!(out, "{}", fmt_scalar(v));
        }
        out.push('\n');
    }
    out
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

fn fmt_scalar<S: Scalar>(v: S) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

/// Serializes the `.meta` sidecar line.
pub fn serialize_meta(meta: &RecordingMeta) -> String {
    format!(
        "subject={} round={} session={} task={} rate_hz={} eyes={}\n",
        meta.subject_id,
        meta.round,
        meta.session,
        meta.task,
        meta.rate_hz,
        meta.eyes.as_str()
    )
}

/// Parses a `.meta` sidecar line.
pub fn parse_meta(text: &str) -> Result<RecordingMeta> {
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::Insufficient("empty meta file".into()))?;
    let mut subject = None;
    let mut round = None;
    let mut session = None;
    let mut task = None;
    let mut rate = None;
    let mut eyes = None;
    for field in line.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("malformed meta field `{field}`")))?;
        match key {
            "subject" => subject = Some(value.to_string()),
            "round" => round = Some(parse_meta_int(value, "round")?),
            "session" => session = Some(parse_meta_int(value, "session")?),
            "task" => task = Some(value.parse::<Task>()?),
            "rate_hz" => {
                rate = Some(value.parse::<u32>().map_err(|e| {
                    Error::Config(format!("bad rate_hz `{value}`: {e}"))
                })?)
            }
            "eyes" => eyes = Some(value.parse::<Eyes>()?),
            other => return Err(Error::Config(format!("unknown meta key `{other}`"))),
        }
    }
    let meta = RecordingMeta {
        subject_id: subject.ok_or_else(|| missing("subject"))?,
        round: round.ok_or_else(|| missing("round"))?,
        session: session.ok_or_else(|| missing("session"))?,
        task: task.ok_or_else(|| missing("task"))?,
        rate_hz: rate.ok_or_else(|| missing("rate_hz"))?,
        eyes: eyes.ok_or_else(|| missing("eyes"))?,
    };
    meta.validate()?;
    Ok(meta)
}

fn parse_meta_int(value: &str, key: &str) -> Result<u8> {
    value
        .parse::<u8>()
        .map_err(|e| Error::Config(format!("bad {key} `{value}`: {e}")))
}

fn missing(key: &str) -> Error {
    Error::Config(format!("meta file missing `{key}`"))
}
