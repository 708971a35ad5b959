//! Brier score as a function of question progress.

use crate::error::{Error, Result};

pub const PROFILE_BINS: usize = 100;
/// Smoothing bandwidth, in bins.
pub const PROFILE_SIGMA: f64 = 5.0;

/// Averages daily Briers into 100 progress bins and smooths them.
///
/// `daily_briers[q][d]` is question `q`'s Brier on its `d`-th active day.
/// Progress is `d / (days - 1)`, with single-day questions at progress 0.
/// Empty bins take the value of the nearest nonempty bin (the lower one on a
/// tie), then a Gaussian kernel with sigma 5 bins, truncated at 3 sigma and
/// renormalised at the edges, is applied.
pub fn time_profile<S: AsRef<[f64]>>(daily_briers: &[S]) -> Result<Vec<f64>> {
    let mut sum = [0.0f64; PROFILE_BINS];
    let mut count = [0usize; PROFILE_BINS];
    for series in daily_briers {
        let series = series.as_ref();
        let last = series.len().saturating_sub(1);
        for (d, &b) in series.iter().enumerate() {
            let progress = if last == 0 { 0.0 } else { d as f64 / last as f64 };
            let bin = ((progress * PROFILE_BINS as f64).floor() as usize).min(PROFILE_BINS - 1);
            sum[bin] += b;
            count[bin] += 1;
        }
    }
    let filled: Vec<usize> = (0..PROFILE_BINS).filter(|&b| count[b] > 0).collect();
    if filled.is_empty() {
        return Err(Error::Undefined("time profile of no data".into()));
    }
    let raw: Vec<f64> = (0..PROFILE_BINS)
        .map(|b| {
            let src = *filled.iter().min_by_key(|&&f| (f.abs_diff(b), f)).expect("nonempty");
            sum[src] / count[src] as f64
        })
        .collect();
    Ok(gaussian_smooth(&raw, PROFILE_SIGMA))
}

fn gaussian_smooth(values: &[f64], sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let n = values.len() as i64;
    (0..n)
        .map(|i| {
            let (mut acc, mut norm) = (0.0, 0.0);
            for k in -radius..=radius {
                let j = i + k;
                if (0..n).contains(&j) {
                    let w = kernel[(k + radius) as usize];
                    acc += w * values[j as usize];
                    norm += w;
                }
            }
            acc / norm
        })
        .collect()
}
