//! Shared helpers for the integration and acceptance suites. Everything in
//! here is deliberately independent of the library's internal code paths:
//! oracles are direct transcriptions of the defining formulas.

// Each test binary uses its own subset of these helpers.
#![allow(dead_code)]

use affect_core::seqdata::AlignedSample;

/// Ridge-regularized least squares via Gaussian elimination with partial
/// pivoting: solves `(X^T X + lambda I) w = X^T y`.
pub fn lstsq_ridge(rows: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
    let n = rows[0].len();
    let mut gram = vec![vec![0.0; n + 1]; n];
    for (row, target) in rows.iter().zip(y) {
        for i in 0..n {
            for j in 0..n {
                gram[i][j] += row[i] * row[j];
            }
            gram[i][n] += row[i] * target;
        }
    }
    for (i, row) in gram.iter_mut().enumerate() {
        row[i] += lambda;
    }
    // Forward elimination with partial pivoting.
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| {
                gram[a][col]
                    .abs()
                    .partial_cmp(&gram[b][col].abs())
                    .unwrap()
            })
            .unwrap();
        gram.swap(col, pivot);
        let diag = gram[col][col];
        for r in col + 1..n {
            let factor = gram[r][col] / diag;
            let (above, below) = gram.split_at_mut(r);
            for (c, cell) in below[0].iter_mut().enumerate().skip(col) {
                *cell -= factor * above[col][c];
            }
        }
    }
    let mut w = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = gram[col][n];
        for c in col + 1..n {
            acc -= gram[col][c] * w[c];
        }
        w[col] = acc / gram[col][col];
    }
    w
}

/// Feature rows of a sample as plain vectors, optionally with a trailing
/// intercept column of ones.
pub fn feature_rows(sample: &AlignedSample, intercept: bool) -> Vec<Vec<f64>> {
    let m = sample.concat_features();
    (0..m.rows())
        .map(|r| {
            let mut row = m.row(r).to_vec();
            if intercept {
                row.push(1.0);
            }
            row
        })
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Direct transcription of the population-statistics CCC definition.
pub fn ccc_oracle(x: &[f64], y: &[f64]) -> f64 {
    let t = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let vx = x.iter().map(|v| (v - mx) * (v - mx)).sum::<f64>() / t;
    let vy = y.iter().map(|v| (v - my) * (v - my)).sum::<f64>() / t;
    let cov = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / t;
    2.0 * cov / (vx + vy + (mx - my) * (mx - my))
}

/// Greedy one-to-one peak matching within `tol` milliseconds (equals
/// samples at 1000 Hz). Returns (recall, precision).
pub fn peak_match_rate(truth_ms: &[i64], detected: &[usize], tol: u64) -> (f64, f64) {
    let mut used = vec![false; detected.len()];
    let mut hits = 0usize;
    for &t in truth_ms {
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
        hits as f64 / truth_ms.len().max(1) as f64,
        hits as f64 / detected.len().max(1) as f64,
    )
}
