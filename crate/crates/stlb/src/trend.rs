//! Decile summaries of residual sequences.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trend {
    pub decile_means: Vec<f64>,
    /// First decile mean over last decile mean.
    pub reduction: f64,
    /// Decile means never increase.
    pub monotone: bool,
    /// `reduction >= 2`.
    pub pass: bool,
}

/// Splits `ys` into ten contiguous groups of near-equal size and compares
/// the first group mean with the last.
pub fn decile_trend(ys: &[f64]) -> Option<Trend> {
    if ys.len() < 10 {
        return None;
    }
    let n = ys.len();
    let decile_means: Vec<f64> = (0..10)
        .map(|d| {
            let (lo, hi) = (d * n / 10, (d + 1) * n / 10);
            ys[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let reduction = decile_means[0] / decile_means[9];
    let monotone = decile_means.windows(2).all(|w| w[1] <= w[0]);
    Some(Trend { reduction, monotone, pass: reduction >= 2.0, decile_means })
}
