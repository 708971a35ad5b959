//! Calibration bins and ROC curves over one-vs-rest expanded forecasts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of equal-width calibration bins on `[0, 1]`.
pub const CALIBRATION_BINS: usize = 10;

/// Expands a multi-option forecast into one `(probability, hit)` instance per
/// option.
pub fn expand_one_vs_rest(probs: &[f64], resolved_index: usize) -> impl Iterator<Item = (f64, bool)> + '_ {
    probs.iter().enumerate().map(move |(k, &p)| (p, k == resolved_index))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub positives: usize,
    /// Mean predicted probability in the bin; `None` when empty.
    pub mean_predicted: Option<f64>,
    /// Observed frequency `positives / count`; `None` when empty.
    pub frequency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBins {
    pub bins: Vec<CalibrationBin>,
}

impl CalibrationBins {
    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.count).sum()
    }
}

fn bin_of(p: f64) -> usize {
    ((p * CALIBRATION_BINS as f64).floor() as usize).min(CALIBRATION_BINS - 1)
}

/// Reliability table with ten bins of width 0.1. The last bin is closed on
/// the right so that `p = 1` lands in it.
pub fn calibration(pairs: &[(f64, bool)]) -> CalibrationBins {
    let mut count = [0usize; CALIBRATION_BINS];
    let mut hits = [0usize; CALIBRATION_BINS];
    let mut mass = [0.0f64; CALIBRATION_BINS];
    for &(p, hit) in pairs {
        let b = bin_of(p.clamp(0.0, 1.0));
        count[b] += 1;
        mass[b] += p;
        if hit {
            hits[b] += 1;
        }
    }
    let width = 1.0 / CALIBRATION_BINS as f64;
    let bins = (0..CALIBRATION_BINS)
        .map(|b| CalibrationBin {
            lower: b as f64 * width,
            upper: (b + 1) as f64 * width,
            count: count[b],
            positives: hits[b],
            mean_predicted: (count[b] > 0).then(|| mass[b] / count[b] as f64),
            frequency: (count[b] > 0).then(|| hits[b] as f64 / count[b] as f64),
        })
        .collect();
    CalibrationBins { bins }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Threshold-sweep ROC curve with trapezoidal AUC. Instances with equal
/// scores enter at the same threshold.
pub fn roc_auc(pairs: &[(f64, bool)]) -> Result<RocCurve> {
    let positives = pairs.iter().filter(|(_, h)| *h).count();
    let negatives = pairs.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Undefined(
            "ROC needs both positive and negative instances".into(),
        ));
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let next = RocPoint {
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
        };
        let prev = points[points.len() - 1];
        auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
        points.push(next);
    }
    Ok(RocCurve { points, auc })
}
