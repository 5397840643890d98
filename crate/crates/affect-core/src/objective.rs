//! Concordance correlation coefficient: evaluation metric, training loss
//! (`1 - CCC`) with analytic gradient, and the combined two-dimension score.
//!
//! All statistics use the population convention (divide by `T`), which keeps
//! the metric and the loss identical in form:
//!
//! ```text
//! CCC = 2 cov(x, y) / (var(x) + var(y) + (mean(x) - mean(y))^2)
//! ```

use crate::math;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum CccError {
    /// Prediction and target lengths differ.
    LengthMismatch { pred: usize, target: usize },
    /// Fewer than two points.
    TooShort { len: usize },
    /// Both sequences constant and equal: the denominator is zero.
    Degenerate,
}

impl fmt::Display for CccError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CccError::LengthMismatch { pred, target } => {
                write!(f, "length mismatch: {pred} predictions vs {target} targets")
            }
            CccError::TooShort { len } => write!(f, "need at least 2 points, got {len}"),
            CccError::Degenerate => {
                write!(f, "both sequences constant and equal; CCC denominator is zero")
            }
        }
    }
}

impl core::error::Error for CccError {}

/// CCC value together with the statistics it was assembled from.
#[derive(Debug, Clone, PartialEq)]
pub struct CccBreakdown {
    pub ccc: f64,
    /// Pearson correlation; defined as 0 when either sequence is constant.
    pub pearson: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    /// Population standard deviations.
    pub std_x: f64,
    pub std_y: f64,
    /// `var(x) + var(y) + (mean(x) - mean(y))^2`, recorded for diagnostics.
    pub denominator: f64,
}

struct Moments {
    mean_x: f64,
    mean_y: f64,
    var_x: f64,
    var_y: f64,
    cov: f64,
    denom: f64,
}

fn moments(x: &[f64], y: &[f64]) -> Result<Moments, CccError> {
    if x.len() != y.len() {
        return Err(CccError::LengthMismatch {
            pred: x.len(),
            target: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(CccError::TooShort { len: x.len() });
    }
    let t = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / t;
    let mean_y = y.iter().sum::<f64>() / t;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    let mut cov = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        var_x += dx * dx;
        var_y += dy * dy;
        cov += dx * dy;
    }
    var_x /= t;
    var_y /= t;
    cov /= t;
    let md = mean_x - mean_y;
    let denom = var_x + var_y + md * md;
    if denom == 0.0 {
        return Err(CccError::Degenerate);
    }
    Ok(Moments {
        mean_x,
        mean_y,
        var_x,
        var_y,
        cov,
        denom,
    })
}

/// Concordance correlation between two equal-length sequences.
pub fn ccc(x: &[f64], y: &[f64]) -> Result<CccBreakdown, CccError> {
    let m = moments(x, y)?;
    let std_x = math::sqrt(m.var_x);
    let std_y = math::sqrt(m.var_y);
    let pearson = if std_x * std_y > 0.0 {
        m.cov / (std_x * std_y)
    } else {
        0.0
    };
    Ok(CccBreakdown {
        ccc: 2.0 * m.cov / m.denom,
        pearson,
        mean_x: m.mean_x,
        mean_y: m.mean_y,
        std_x,
        std_y,
        denominator: m.denom,
    })
}

/// CCC training loss `1 - CCC(pred, target)` and its analytic gradient with
/// respect to each prediction (the target is a constant).
pub fn ccc_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>), CccError> {
    let m = moments(pred, target)?;
    let t = pred.len() as f64;
    let num = 2.0 * m.cov;
    let md = m.mean_x - m.mean_y;
    let inv_denom2 = 1.0 / (m.denom * m.denom);
    let mut grad = vec![0.0; pred.len()];
    for (g, (&xi, &yi)) in grad.iter_mut().zip(pred.iter().zip(target)) {
        let dnum = 2.0 * (yi - m.mean_y) / t;
        let dden = 2.0 * (xi - m.mean_x) / t + 2.0 * md / t;
        // loss = 1 - num/denom
        *g = -(dnum * m.denom - num * dden) * inv_denom2;
    }
    Ok((1.0 - num / m.denom, grad))
}

/// The combined leaderboard score: arithmetic mean of the arousal and
/// valence CCCs.
pub fn combined_score(arousal_ccc: f64, valence_ccc: f64) -> f64 {
    (arousal_ccc + valence_ccc) / 2.0
}
