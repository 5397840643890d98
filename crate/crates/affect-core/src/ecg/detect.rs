//! R-peak detection: a simplified Pan–Tompkins chain.
//!
//! Pipeline: smoothed derivative (derivative-of-Gaussian kernel, which
//! keeps QRS flanks while suppressing wideband noise) → squaring → 150 ms
//! centered moving-window integration → candidate local maxima above an
//! adaptive threshold (half a rolling peak-height estimate) → position
//! refinement to the raw-signal maximum → 250 ms refractory enforcement.
//!
//! The detector is fully deterministic and assumes positive-deflection QRS
//! complexes, which is what the synthetic generator produces.

use super::{EcgError, PeakList, RawSignal};
use crate::math;
use alloc::vec;
use alloc::vec::Vec;

/// Minimum input length: two seconds of signal.
const MIN_SECONDS: f64 = 2.0;
/// Width of the derivative-of-Gaussian kernel, seconds.
const DERIVATIVE_SIGMA_S: f64 = 0.008;
/// Moving-integration window, seconds.
const INTEGRATION_S: f64 = 0.150;
/// Half-width of the raw-maximum refinement window, seconds.
const REFINE_HALF_S: f64 = 0.075;
/// Candidate threshold as a fraction of the rolling peak estimate.
const THRESHOLD_FRACTION: f64 = 0.5;
/// Rolling update weight for the peak-height estimate.
const PEAK_ESTIMATE_ALPHA: f64 = 0.125;

/// Derivative-of-Gaussian taps, normalized to unit response on a unit
/// ramp; radius is 3 sigma.
fn derivative_kernel(rate: f64) -> Vec<f64> {
    let sigma = DERIVATIVE_SIGMA_S * rate;
    let radius = (3.0 * sigma) as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|j| -(j as f64) * math::exp(-(j * j) as f64 / (2.0 * sigma * sigma)))
        .collect();
    let ramp_gain: f64 = taps
        .iter()
        .enumerate()
        .map(|(i, w)| -w * (i as i64 - radius) as f64)
        .sum();
    for w in taps.iter_mut() {
        *w /= ramp_gain;
    }
    taps
}

/// Detects R peaks in a raw ECG trace.
pub fn detect_r_peaks(ecg: &RawSignal) -> Result<PeakList, EcgError> {
    let rate = ecg.rate_hz();
    let min = (MIN_SECONDS * rate) as usize;
    let x = ecg.samples();
    if x.len() < min {
        return Err(EcgError::SignalTooShort { len: x.len(), min });
    }

    // Smoothed derivative, squared.
    let n = x.len();
    let taps = derivative_kernel(rate);
    let radius = taps.len() / 2;
    let mut energy = vec![0.0; n];
    for i in radius..n - radius {
        let mut d = 0.0;
        for (k, w) in taps.iter().enumerate() {
            d += w * x[i + k - radius];
        }
        energy[i] = d * d;
    }

    // Centered moving-window integration via prefix sums, clamped at edges.
    let half = ((INTEGRATION_S * rate) as usize / 2).max(1);
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + energy[i];
    }
    let integ: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect();

    // Rolling peak-height estimate, seeded from the first two seconds.
    let warmup = (MIN_SECONDS * rate) as usize;
    let mut estimate = integ[..warmup.min(n)]
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);
    if estimate <= 0.0 {
        return PeakList::new(Vec::new(), rate);
    }

    let refractory = (PeakList::REFRACTORY_MS * rate / 1000.0) as usize;
    let refine_half = (REFINE_HALF_S * rate) as usize;
    let mut peaks: Vec<usize> = Vec::new();
    for i in 1..n - 1 {
        // Local maximum; `>=` on the left edge picks the end of a plateau.
        if !(integ[i] >= integ[i - 1] && integ[i] > integ[i + 1]) {
            continue;
        }
        if integ[i] <= THRESHOLD_FRACTION * estimate {
            continue;
        }
        // Refine to the raw-signal maximum near the energy peak.
        let lo = i.saturating_sub(refine_half);
        let hi = (i + refine_half + 1).min(n);
        let mut best = lo;
        for j in lo..hi {
            if x[j] > x[best] {
                best = j;
            }
        }
        if let Some(&last) = peaks.last() {
            if best <= last || best - last < refractory {
                continue;
            }
        }
        peaks.push(best);
        estimate = (1.0 - PEAK_ESTIMATE_ALPHA) * estimate + PEAK_ESTIMATE_ALPHA * integ[i];
    }
    PeakList::new(peaks, rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::seqdata::synth::render_ecg;
    use alloc::vec::Vec;

    #[test]
    fn flat_signal_yields_no_peaks() {
        let sig = RawSignal::new(vec![0.0; 5000], 1000.0, 0).unwrap();
        assert!(detect_r_peaks(&sig).unwrap().is_empty());
    }

    #[test]
    fn too_short_signal_rejected() {
        let sig = RawSignal::new(vec![0.0; 1500], 1000.0, 0).unwrap();
        assert_eq!(
            detect_r_peaks(&sig).unwrap_err(),
            EcgError::SignalTooShort {
                len: 1500,
                min: 2000
            }
        );
    }

    #[test]
    fn clean_constant_spacing_recovered() {
        // 75 bpm -> beats exactly every 800 ms over 30 s.
        let hr = vec![75.0; 60];
        let mut rng = SplitMix64::new(1);
        let (sig, truth) = render_ecg(&hr, 0.0, &mut rng);
        assert!(truth.len() > 30);
        let peaks = detect_r_peaks(&sig).unwrap();
        let nn = peaks.nn_intervals_ms();
        // Interior beats: skip the first and last detected interval.
        for iv in &nn[1..nn.len() - 1] {
            assert!((iv - 800.0).abs() <= 10.0, "interval {iv}");
        }
    }

    #[test]
    fn translation_equivariance_for_interior_peaks() {
        let hr = vec![72.0; 80];
        let mut rng = SplitMix64::new(2);
        let (sig, _) = render_ecg(&hr, 0.0, &mut rng);
        let full = detect_r_peaks(&sig).unwrap();
        let k = 1234usize;
        let shifted = RawSignal::new(sig.samples()[k..].to_vec(), 1000.0, 0).unwrap();
        let cut = detect_r_peaks(&shifted).unwrap();
        let full_interior: Vec<usize> = full
            .indices()
            .iter()
            .copied()
            .filter(|&p| p >= k + 3000 && p + 3000 < sig.len())
            .collect();
        for p in full_interior {
            assert!(
                cut.indices().contains(&(p - k)),
                "peak {p} not found at shifted position"
            );
        }
    }

    #[test]
    fn noisy_signal_keeps_precision_and_recall() {
        // 10 dB SNR relative to the clean trace power.
        let hr: Vec<f64> = (0..120).map(|i| 70.0 + 10.0 * ((i as f64) * 0.05).sin()).collect();
        let mut rng = SplitMix64::new(3);
        let (clean, truth) = render_ecg(&hr, 0.0, &mut rng);
        let power = clean.samples().iter().map(|v| v * v).sum::<f64>() / clean.len() as f64;
        let sigma = (power / 10.0).sqrt();
        let mut noise_rng = SplitMix64::new(99);
        let noisy: Vec<f64> = clean
            .samples()
            .iter()
            .map(|v| v + sigma * noise_rng.normal())
            .collect();
        let sig = RawSignal::new(noisy, 1000.0, 0).unwrap();
        let peaks = detect_r_peaks(&sig).unwrap();

        let (recall, precision) = match_rate(&truth, peaks.indices(), 50);
        assert!(recall >= 0.95, "recall {recall}");
        assert!(precision >= 0.95, "precision {precision}");
    }

    /// Greedy one-to-one matching within +/- `tol` samples. Truth positions
    /// come from the generator in milliseconds (= samples at 1000 Hz).
    pub fn match_rate(truth: &[i64], detected: &[usize], tol: u64) -> (f64, f64) {
        let mut used = vec![false; detected.len()];
        let mut hits = 0usize;
        for &t in truth {
            if let Some((j, _)) = detected
                .iter()
                .enumerate()
                .filter(|(j, &d)| !used[*j] && (d as i64).abs_diff(t) <= tol)
                .min_by_key(|(_, &d)| (d as i64).abs_diff(t))
            {
                used[j] = true;
                hits += 1;
            }
        }
        (
            hits as f64 / truth.len() as f64,
            hits as f64 / detected.len().max(1) as f64,
        )
    }
}
