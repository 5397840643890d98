//! Assembly of the 21-d physiological feature sequence.
//!
//! Each 2 Hz grid point gets one row: the three provided channels
//! (downsampled ECG, RESP, BPM) passed through bit-identically, followed by
//! the 18 HRV features computed from a 4000-sample raw-ECG window centered
//! on the grid point. The raw trace is edge-padded by 2000 samples per side
//! so the first and last windows are full. Windows that yield fewer than two
//! NN intervals reuse the previous row's HRV block (zeros for a degenerate
//! first window), keeping the output dense and finite.

use super::{detect_r_peaks, hrv_time_features, EcgError, RawSignal, HRV_FEATURE_COUNT};
use crate::mat::Mat;
use crate::seqdata::{FeatureSequence, GRID_STEP_MS};
use alloc::format;
use alloc::vec::Vec;

/// Output width: 3 pass-through channels + 18 HRV features.
pub const PHYS_DIM: usize = 3 + HRV_FEATURE_COUNT;

/// Raw-ECG sampling rate the window arithmetic is defined for.
const RAW_RATE_HZ: f64 = 1000.0;
/// Sliding window length in raw samples (4 s at 1000 Hz).
const WINDOW_SAMPLES: usize = 4000;
/// Edge padding per side.
const PAD_SAMPLES: usize = WINDOW_SAMPLES / 2;

fn check_2hz_grid(name: &str, reference: &RawSignal, signal: &RawSignal) -> Result<(), EcgError> {
    if signal.rate_hz() != 2.0 {
        return Err(EcgError::BadRate {
            expected: 2.0,
            actual: signal.rate_hz(),
        });
    }
    if signal.start_ms() != reference.start_ms() || signal.len() != reference.len() {
        return Err(EcgError::GridMismatch {
            detail: format!(
                "{name}: start {} len {} vs start {} len {}",
                signal.start_ms(),
                signal.len(),
                reference.start_ms(),
                reference.len()
            ),
        });
    }
    Ok(())
}

/// Extracts the 21-d physiological feature sequence on the 2 Hz grid shared
/// by `ecg_2hz`, `resp`, and `bpm`.
pub fn extract_phys_sequence(
    subject_id: &str,
    modality: &str,
    raw_ecg: &RawSignal,
    resp: &RawSignal,
    bpm: &RawSignal,
    ecg_2hz: &RawSignal,
) -> Result<FeatureSequence, EcgError> {
    if ecg_2hz.rate_hz() != 2.0 {
        return Err(EcgError::BadRate {
            expected: 2.0,
            actual: ecg_2hz.rate_hz(),
        });
    }
    check_2hz_grid("resp", ecg_2hz, resp)?;
    check_2hz_grid("bpm", ecg_2hz, bpm)?;
    if raw_ecg.rate_hz() != RAW_RATE_HZ {
        return Err(EcgError::BadRate {
            expected: RAW_RATE_HZ,
            actual: raw_ecg.rate_hz(),
        });
    }

    let steps = ecg_2hz.len();
    let grid: Vec<i64> = (0..steps as i64)
        .map(|i| ecg_2hz.start_ms() + i * GRID_STEP_MS)
        .collect();
    if raw_ecg.start_ms() > grid[0] || raw_ecg.end_ms() < *grid.last().unwrap() {
        return Err(EcgError::CoverageError {
            detail: format!(
                "raw [{}, {}] ms vs grid [{}, {}] ms",
                raw_ecg.start_ms(),
                raw_ecg.end_ms(),
                grid[0],
                grid.last().unwrap()
            ),
        });
    }

    // Edge-replicated padding keeps every centered window full-width.
    let x = raw_ecg.samples();
    let mut padded = Vec::with_capacity(x.len() + 2 * PAD_SAMPLES);
    padded.resize(PAD_SAMPLES, x[0]);
    padded.extend_from_slice(x);
    padded.resize(x.len() + 2 * PAD_SAMPLES, x[x.len() - 1]);

    let mut values = Mat::zeros(steps, PHYS_DIM);
    let mut carry = [0.0; HRV_FEATURE_COUNT];
    for (i, &ts) in grid.iter().enumerate() {
        // One raw sample per millisecond; the window is centered on the
        // grid instant, so in padded coordinates it starts at the raw index.
        let center = (ts - raw_ecg.start_ms()) as usize;
        let window = &padded[center..center + WINDOW_SAMPLES];
        let win_signal = RawSignal::new(window.to_vec(), RAW_RATE_HZ, 0)?;
        let peaks = detect_r_peaks(&win_signal)?;
        let nn = peaks.nn_intervals_ms();
        if nn.len() >= 2 {
            carry = hrv_time_features(&nn)?.to_array();
        }
        let row = values.row_mut(i);
        row[0] = ecg_2hz.samples()[i];
        row[1] = resp.samples()[i];
        row[2] = bpm.samples()[i];
        row[3..].copy_from_slice(&carry);
    }

    FeatureSequence::new(subject_id, modality, grid, values).map_err(|e| EcgError::GridMismatch {
        detail: alloc::string::ToString::to_string(&e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::seqdata::synth::render_ecg;
    use alloc::vec;

    fn grid_signal(values: Vec<f64>) -> RawSignal {
        RawSignal::new(values, 2.0, 0).unwrap()
    }

    #[test]
    fn sixty_seconds_yield_120_by_21() {
        // 80 bpm -> 750 ms beat spacing.
        let hr = vec![80.0; 120];
        let mut rng = SplitMix64::new(4);
        let (raw, _) = render_ecg(&hr, 0.0, &mut rng);
        let steps = 120;
        let ecg_2hz = grid_signal((0..steps).map(|i| raw.samples()[i * 500]).collect());
        let resp = grid_signal((0..steps).map(|i| (i as f64 * 0.1).sin()).collect());
        let bpm = grid_signal(vec![80.0; steps]);
        let seq = extract_phys_sequence("s", "phys", &raw, &resp, &bpm, &ecg_2hz).unwrap();
        assert_eq!(seq.len(), 120);
        assert_eq!(seq.dim(), 21);

        // Pass-through columns are bit-identical.
        for i in 0..steps {
            assert_eq!(seq.values().get(i, 0), ecg_2hz.samples()[i]);
            assert_eq!(seq.values().get(i, 1), resp.samples()[i]);
            assert_eq!(seq.values().get(i, 2), bpm.samples()[i]);
        }

        // MeanNN column tracks the true beat spacing on interior rows.
        for i in 10..steps - 10 {
            let mean_nn = seq.values().get(i, 3);
            assert!((mean_nn - 750.0).abs() <= 10.0, "row {i}: MeanNN {mean_nn}");
        }
    }

    #[test]
    fn degenerate_windows_carry_previous_row() {
        // Flat ECG: no peaks anywhere, so the HRV block stays zero.
        let raw = RawSignal::new(vec![0.0; 30_000], 1000.0, 0).unwrap();
        let steps = 30_000 / 500;
        let ecg_2hz = grid_signal(vec![0.0; steps]);
        let resp = grid_signal(vec![0.5; steps]);
        let bpm = grid_signal(vec![70.0; steps]);
        let seq = extract_phys_sequence("s", "phys", &raw, &resp, &bpm, &ecg_2hz).unwrap();
        for i in 0..steps {
            for c in 3..21 {
                assert_eq!(seq.values().get(i, c), 0.0);
            }
        }
    }

    #[test]
    fn grid_mismatch_detected() {
        let raw = RawSignal::new(vec![0.0; 10_000], 1000.0, 0).unwrap();
        let ecg_2hz = grid_signal(vec![0.0; 20]);
        let resp = grid_signal(vec![0.0; 19]);
        let bpm = grid_signal(vec![0.0; 20]);
        assert!(matches!(
            extract_phys_sequence("s", "phys", &raw, &resp, &bpm, &ecg_2hz),
            Err(EcgError::GridMismatch { .. })
        ));
    }

    #[test]
    fn missing_coverage_detected() {
        let raw = RawSignal::new(vec![0.0; 5_000], 1000.0, 0).unwrap();
        let steps = 20; // grid to 9500 ms, raw ends at 4999 ms
        let ecg_2hz = grid_signal(vec![0.0; steps]);
        let resp = grid_signal(vec![0.0; steps]);
        let bpm = grid_signal(vec![0.0; steps]);
        assert!(matches!(
            extract_phys_sequence("s", "phys", &raw, &resp, &bpm, &ecg_2hz),
            Err(EcgError::CoverageError { .. })
        ));
    }
}
