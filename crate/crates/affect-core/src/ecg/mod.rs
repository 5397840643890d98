//! Physiological signal processing: R-peak detection on raw ECG, 18
//! time-domain heart-rate-variability features, and assembly of the 21-d
//! physiological feature sequence on the 2 Hz grid.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

mod detect;
pub mod hrv;
mod phys;

pub use detect::detect_r_peaks;
pub use hrv::{hrv_time_features, HrvVector, HRV_FEATURE_COUNT, HRV_FEATURE_NAMES};
pub use phys::{extract_phys_sequence, PHYS_DIM};

#[derive(Debug, Clone, PartialEq)]
pub enum EcgError {
    SignalTooShort { len: usize, min: usize },
    TooFewIntervals { count: usize },
    NonPositiveInterval { index: usize },
    NonFiniteSample { index: usize },
    BadRate { expected: f64, actual: f64 },
    GridMismatch { detail: String },
    CoverageError { detail: String },
    RefractoryViolation { index: usize },
}

impl fmt::Display for EcgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EcgError::SignalTooShort { len, min } => {
                write!(f, "signal too short: {len} samples, need {min}")
            }
            EcgError::TooFewIntervals { count } => {
                write!(f, "need at least 2 NN intervals, got {count}")
            }
            EcgError::NonPositiveInterval { index } => {
                write!(f, "non-positive NN interval at index {index}")
            }
            EcgError::NonFiniteSample { index } => {
                write!(f, "non-finite sample at index {index}")
            }
            EcgError::BadRate { expected, actual } => {
                write!(f, "expected sampling rate {expected} Hz, got {actual} Hz")
            }
            EcgError::GridMismatch { detail } => write!(f, "2 Hz grids disagree: {detail}"),
            EcgError::CoverageError { detail } => {
                write!(f, "raw ECG does not cover the grid: {detail}")
            }
            EcgError::RefractoryViolation { index } => {
                write!(f, "peaks at index {index} violate the 250 ms refractory gap")
            }
        }
    }
}

impl core::error::Error for EcgError {}

/// A uniformly sampled real signal (raw ECG at 1000 Hz, or the provided
/// 2 Hz RESP / BPM / downsampled-ECG channels).
#[derive(Debug, Clone, PartialEq)]
pub struct RawSignal {
    samples: Vec<f64>,
    rate_hz: f64,
    start_ms: i64,
}

impl RawSignal {
    pub fn new(samples: Vec<f64>, rate_hz: f64, start_ms: i64) -> Result<Self, EcgError> {
        if !rate_hz.is_finite() || rate_hz <= 0.0 {
            return Err(EcgError::BadRate {
                expected: f64::NAN,
                actual: rate_hz,
            });
        }
        if samples.len() < 2 {
            return Err(EcgError::SignalTooShort {
                len: samples.len(),
                min: 2,
            });
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(EcgError::NonFiniteSample { index });
        }
        Ok(RawSignal {
            samples,
            rate_hz,
            start_ms,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    pub fn start_ms(&self) -> i64 {
        self.start_ms
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Milliseconds covered per sample.
    pub fn step_ms(&self) -> f64 {
        1000.0 / self.rate_hz
    }

    /// Timestamp of the last sample.
    pub fn end_ms(&self) -> i64 {
        self.start_ms + ((self.samples.len() - 1) as f64 * self.step_ms()) as i64
    }
}

/// Detected R-peak positions, as strictly increasing sample indices into the
/// signal they were detected on.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakList {
    indices: Vec<usize>,
    rate_hz: f64,
}

impl PeakList {
    /// Minimum gap between peaks, physiological refractory period.
    pub const REFRACTORY_MS: f64 = 250.0;

    pub fn new(indices: Vec<usize>, rate_hz: f64) -> Result<Self, EcgError> {
        let min_gap = (Self::REFRACTORY_MS * rate_hz / 1000.0) as usize;
        for i in 1..indices.len() {
            if indices[i] <= indices[i - 1] || indices[i] - indices[i - 1] < min_gap {
                return Err(EcgError::RefractoryViolation { index: i });
            }
        }
        Ok(PeakList { indices, rate_hz })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Successive peak-to-peak (NN) intervals in milliseconds.
    pub fn nn_intervals_ms(&self) -> Vec<f64> {
        self.indices
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64 * 1000.0 / self.rate_hz)
            .collect()
    }
}
