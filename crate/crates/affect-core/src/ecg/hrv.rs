//! Time-domain heart-rate-variability features over NN intervals.
//!
//! All 18 features have closed forms. Conventions: sample standard
//! deviation (divisor `n - 1`) for SDNN and SDSD; percentiles by linear
//! interpolation between order statistics; strict `>` for the pNN
//! threshold comparisons; HTI histogram bins of 1000/128 ms anchored at 0.

use super::EcgError;
use crate::math;
use alloc::vec::Vec;

/// Number of HRV features.
pub const HRV_FEATURE_COUNT: usize = 18;

/// Feature names in output order.
pub const HRV_FEATURE_NAMES: [&str; HRV_FEATURE_COUNT] = [
    "MeanNN", "SDNN", "RMSSD", "SDSD", "CVNN", "CVSD", "MedianNN", "MadNN", "MCVNN", "IQRNN",
    "Prc20NN", "Prc80NN", "pNN50", "pNN20", "MinNN", "MaxNN", "RangeNN", "HTI",
];

/// Histogram bin width for the HRV triangular index, milliseconds
/// (the conventional 1/128 s).
pub const HTI_BIN_MS: f64 = 7.8125;

/// The 18 time-domain HRV features of one analysis window.
///
/// NN-interval statistics are in milliseconds, coefficient-of-variation
/// features are dimensionless, pNN features are percentages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrvVector {
    pub mean_nn: f64,
    pub sdnn: f64,
    pub rmssd: f64,
    pub sdsd: f64,
    pub cvnn: f64,
    pub cvsd: f64,
    pub median_nn: f64,
    pub mad_nn: f64,
    pub mcv_nn: f64,
    pub iqr_nn: f64,
    pub prc20_nn: f64,
    pub prc80_nn: f64,
    pub pnn50: f64,
    pub pnn20: f64,
    pub min_nn: f64,
    pub max_nn: f64,
    pub range_nn: f64,
    pub hti: f64,
}

impl HrvVector {
    /// Features in the fixed output order of [`HRV_FEATURE_NAMES`].
    pub fn to_array(self) -> [f64; HRV_FEATURE_COUNT] {
        [
            self.mean_nn,
            self.sdnn,
            self.rmssd,
            self.sdsd,
            self.cvnn,
            self.cvsd,
            self.median_nn,
            self.mad_nn,
            self.mcv_nn,
            self.iqr_nn,
            self.prc20_nn,
            self.prc80_nn,
            self.pnn50,
            self.pnn20,
            self.min_nn,
            self.max_nn,
            self.range_nn,
            self.hti,
        ]
    }
}

/// Linear-interpolation percentile over a sorted slice, `q` in `[0, 100]`.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = q / 100.0 * (n - 1) as f64;
    let lo = math::floor(rank) as usize;
    let frac = rank - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    math::sqrt(ss / (n - 1.0))
}

/// Computes the 18 time-domain HRV features from NN intervals in
/// milliseconds.
pub fn hrv_time_features(nn_intervals: &[f64]) -> Result<HrvVector, EcgError> {
    if nn_intervals.len() < 2 {
        return Err(EcgError::TooFewIntervals {
            count: nn_intervals.len(),
        });
    }
    if let Some(index) = nn_intervals
        .iter()
        .position(|v| !v.is_finite() || *v <= 0.0)
    {
        return Err(EcgError::NonPositiveInterval { index });
    }
    let n = nn_intervals.len();
    let nf = n as f64;
    let mean_nn = nn_intervals.iter().sum::<f64>() / nf;
    let sdnn = sample_std(nn_intervals);

    let diffs: Vec<f64> = nn_intervals.windows(2).map(|w| w[1] - w[0]).collect();
    let m = diffs.len() as f64;
    let rmssd = math::sqrt(diffs.iter().map(|d| d * d).sum::<f64>() / m);
    let sdsd = sample_std(&diffs);

    let mut sorted = nn_intervals.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let median_nn = percentile(&sorted, 50.0);
    let mut abs_dev: Vec<f64> = nn_intervals.iter().map(|v| math::abs(v - median_nn)).collect();
    abs_dev.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mad_nn = percentile(&abs_dev, 50.0) * 1.4826;

    let pnn = |threshold: f64| 100.0 * diffs.iter().filter(|d| math::abs(**d) > threshold).count() as f64 / m;

    // Triangular index: total count over the tallest 7.8125 ms histogram bin.
    let mut bins: Vec<(i64, usize)> = Vec::new();
    for v in nn_intervals {
        let b = math::floor(v / HTI_BIN_MS) as i64;
        match bins.iter_mut().find(|(bin, _)| *bin == b) {
            Some((_, c)) => *c += 1,
            None => bins.push((b, 1)),
        }
    }
    let max_bin = bins.iter().map(|(_, c)| *c).max().unwrap();

    let min_nn = sorted[0];
    let max_nn = sorted[n - 1];
    Ok(HrvVector {
        mean_nn,
        sdnn,
        rmssd,
        sdsd,
        cvnn: sdnn / mean_nn,
        cvsd: rmssd / mean_nn,
        median_nn,
        mad_nn,
        mcv_nn: mad_nn / median_nn,
        iqr_nn: percentile(&sorted, 75.0) - percentile(&sorted, 25.0),
        prc20_nn: percentile(&sorted, 20.0),
        prc80_nn: percentile(&sorted, 80.0),
        pnn50: pnn(50.0),
        pnn20: pnn(20.0),
        min_nn,
        max_nn,
        range_nn: max_nn - min_nn,
        hti: nf / max_bin as f64,
    })
}
