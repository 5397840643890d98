//! Text-level CSV codecs for the pipeline's file formats.
//!
//! Three shapes, all UTF-8 with LF line endings:
//!  - feature files: header `timestamp,f_0,...,f_{n-1}`, one row per 2 Hz step;
//!  - label / prediction files: header `timestamp,value` on the 2 Hz grid;
//!  - raw signal files: header `timestamp,value` at any constant step (the
//!    sampling rate is inferred from the step).
//!
//! Floats are rendered with Rust's shortest round-trip formatting, so a
//! write/parse cycle reproduces every value bit for bit. File IO lives in
//! the companion CLI crate; this module only maps between strings and types.

use super::{Dimension, FeatureSequence, LabelSequence, SeqError};
use crate::ecg::RawSignal;
use crate::mat::Mat;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

fn malformed(line: usize, reason: impl Into<String>) -> SeqError {
    SeqError::MalformedCsv {
        line,
        reason: reason.into(),
    }
}

type HeaderAndRows = (String, Vec<(i64, Vec<f64>)>);

fn parse_rows(text: &str, expected_header: Option<&str>) -> Result<HeaderAndRows, SeqError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| malformed(1, "empty file"))?;
    if let Some(h) = expected_header {
        if header != h {
            return Err(malformed(1, format!("expected header {h:?}, got {header:?}")));
        }
    }
    let arity = header.split(',').count();
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let mut fields = line.split(',');
        let ts_text = fields.next().ok_or_else(|| malformed(lineno, "empty row"))?;
        let ts: i64 = ts_text
            .parse()
            .map_err(|_| malformed(lineno, format!("bad timestamp {ts_text:?}")))?;
        let mut values = Vec::with_capacity(arity - 1);
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| malformed(lineno, format!("bad value {f:?}")))?;
            values.push(v);
        }
        if values.len() != arity - 1 {
            return Err(malformed(
                lineno,
                format!("expected {} values, got {}", arity - 1, values.len()),
            ));
        }
        rows.push((ts, values));
    }
    Ok((header.to_string(), rows))
}

fn feature_header(dim: usize) -> String {
    let mut h = String::from("timestamp");
    for i in 0..dim {
        let _ = write!(h, ",f_{i}");
    }
    h
}

/// Parses a feature CSV. `expected_dim`, when given, is enforced against the
/// header width.
pub fn parse_feature_csv(
    text: &str,
    subject_id: &str,
    modality: &str,
    expected_dim: Option<usize>,
) -> Result<FeatureSequence, SeqError> {
    let (header, rows) = parse_rows(text, None)?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.is_empty() || cols[0] != "timestamp" {
        return Err(malformed(1, "header must start with \"timestamp\""));
    }
    let dim = cols.len() - 1;
    for (i, c) in cols.iter().skip(1).enumerate() {
        if *c != format!("f_{i}") {
            return Err(malformed(1, format!("expected column f_{i}, got {c:?}")));
        }
    }
    if dim == 0 {
        return Err(malformed(1, "feature file needs at least one f_ column"));
    }
    if let Some(exp) = expected_dim {
        if dim != exp {
            return Err(SeqError::DimensionMismatch {
                expected: exp,
                actual: dim,
            });
        }
    }
    let mut timestamps = Vec::with_capacity(rows.len());
    let mut data = Vec::with_capacity(rows.len() * dim);
    for (ts, vals) in rows {
        timestamps.push(ts);
        data.extend_from_slice(&vals);
    }
    FeatureSequence::new(
        subject_id,
        modality,
        timestamps,
        Mat::from_vec(data.len() / dim.max(1), dim, data),
    )
}

pub fn render_feature_csv(seq: &FeatureSequence) -> String {
    let mut out = feature_header(seq.dim());
    out.push('\n');
    for (t, ts) in seq.timestamps_ms().iter().enumerate() {
        let _ = write!(out, "{ts}");
        for v in seq.values().row(t) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_label_csv(
    text: &str,
    subject_id: &str,
    dimension: Dimension,
) -> Result<LabelSequence, SeqError> {
    let (_, rows) = parse_rows(text, Some("timestamp,value"))?;
    let mut timestamps = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for (ts, vals) in rows {
        timestamps.push(ts);
        values.push(vals[0]);
    }
    LabelSequence::new(subject_id, dimension, timestamps, values)
}

pub fn render_label_csv(seq: &LabelSequence) -> String {
    render_series(seq.timestamps_ms(), seq.values())
}

/// Renders a `timestamp,value` file from parallel slices (labels,
/// predictions, raw signals).
pub fn render_series(timestamps_ms: &[i64], values: &[f64]) -> String {
    let mut out = String::from("timestamp,value\n");
    for (ts, v) in timestamps_ms.iter().zip(values) {
        let _ = writeln!(out, "{ts},{v}");
    }
    out
}

/// Parses a `timestamp,value` signal file with a constant step, inferring
/// the sampling rate from the step (1 ms -> 1000 Hz, 500 ms -> 2 Hz).
pub fn parse_signal_csv(text: &str) -> Result<RawSignal, SeqError> {
    let (_, rows) = parse_rows(text, Some("timestamp,value"))?;
    if rows.len() < 2 {
        return Err(SeqError::TooShort { len: rows.len() });
    }
    let step = rows[1].0 - rows[0].0;
    if step <= 0 {
        return Err(SeqError::NonMonotoneTimestamps { row: 1 });
    }
    let mut values = Vec::with_capacity(rows.len());
    let start = rows[0].0;
    for (i, (ts, vals)) in rows.iter().enumerate() {
        if i > 0 {
            let d = ts - rows[i - 1].0;
            if d <= 0 {
                return Err(SeqError::NonMonotoneTimestamps { row: i });
            }
            if d != step {
                return Err(SeqError::IrregularGrid { row: i });
            }
        }
        if !vals[0].is_finite() {
            return Err(SeqError::NonFiniteValue { row: i, col: 0 });
        }
        values.push(vals[0]);
    }
    RawSignal::new(values, 1000.0 / step as f64, start).map_err(|e| SeqError::InvalidSpec {
        detail: alloc::string::ToString::to_string(&e),
    })
}

pub fn render_signal_csv(signal: &RawSignal) -> String {
    let step = 1000.0 / signal.rate_hz();
    let mut out = String::from("timestamp,value\n");
    for (i, v) in signal.samples().iter().enumerate() {
        let ts = signal.start_ms() + (i as f64 * step) as i64;
        let _ = writeln!(out, "{ts},{v}");
    }
    out
}
