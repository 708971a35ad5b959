//! Brier-family scores and the evaluation statistics built on them.
//!
//! The unordered score is `Σ (p_i - o_i)^2` and lies in `[0, 2]`. The ordered
//! score compares cumulative probabilities from both ends, so mass placed on an
//! option adjacent to the truth is penalised less than mass placed further
//! away:
//!
//! ```text
//! B(p) = 1/(n-1) Σ_{i=1}^{n-1} [ (Σ_{j<=i} p_j - Σ_{j<=i} o_j)^2 + (Σ_{j>=i} p_j - Σ_{j>=i} o_j)^2 ]
//! ```

mod binary;
mod profile;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::domain::{Question, SUM_TOLERANCE};
use crate::error::{contract, Error, Result};

pub use binary::{calibration, expand_one_vs_rest, roc_auc, CalibrationBin, CalibrationBins, RocCurve, RocPoint};
pub use profile::{time_profile, PROFILE_BINS, PROFILE_SIGMA};

/// A validated probability vector over 2 to 5 options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if !(2..=crate::domain::MAX_OPTIONS).contains(&values.len()) {
            return Err(contract(format!("probability vector of length {}", values.len())));
        }
        if values.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(contract("probability outside [0, 1]"));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(contract(format!("probabilities sum to {sum}")));
        }
        Ok(Self(values))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// One-hot outcome vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeVector {
    n: usize,
    index: usize,
}

impl OutcomeVector {
    pub fn new(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(contract(format!("outcome index {index} out of range for {n} options")));
        }
        Ok(Self { n, index })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.n];
        v[self.index] = 1.0;
        v
    }
}

fn check_len(p: &[f64], o: &[f64]) -> Result<()> {
    if p.len() != o.len() {
        return Err(contract(format!(
            "forecast has {} entries, outcome has {}",
            p.len(),
            o.len()
        )));
    }
    Ok(())
}

/// `Σ (p_i - o_i)^2`.
pub fn unordered_brier(p: &[f64], o: &[f64]) -> Result<f64> {
    check_len(p, o)?;
    Ok(p.iter().zip(o).map(|(p, o)| (p - o).powi(2)).sum())
}

/// Cumulative (ordinal) Brier score.
pub fn ordered_brier(p: &[f64], o: &[f64]) -> Result<f64> {
    check_len(p, o)?;
    let n = p.len();
    if n < 2 {
        return Err(contract("ordered Brier needs at least two options"));
    }
    let mut total = 0.0;
    for i in 0..n - 1 {
        let head: f64 = (0..=i).map(|j| p[j] - o[j]).sum();
        let tail: f64 = (i..n).map(|j| p[j] - o[j]).sum();
        total += head * head + tail * tail;
    }
    Ok(total / (n - 1) as f64)
}

/// Ordered Brier for ordinal questions, unordered otherwise.
pub fn brier(p: &[f64], o: &[f64], ordinal: bool) -> Result<f64> {
    if ordinal {
        ordered_brier(p, o)
    } else {
        unordered_brier(p, o)
    }
}

/// Gradient of [`brier`] with respect to `p`.
pub fn brier_grad(p: &[f64], o: &[f64], ordinal: bool) -> Result<Vec<f64>> {
    check_len(p, o)?;
    let n = p.len();
    if !ordinal {
        return Ok(p.iter().zip(o).map(|(p, o)| 2.0 * (p - o)).collect());
    }
    if n < 2 {
        return Err(contract("ordered Brier needs at least two options"));
    }
    let scale = 2.0 / (n - 1) as f64;
    let mut g = vec![0.0; n];
    for i in 0..n - 1 {
        let head: f64 = (0..=i).map(|j| p[j] - o[j]).sum();
        let tail: f64 = (i..n).map(|j| p[j] - o[j]).sum();
        for gj in &mut g[..=i] {
            *gj += scale * head;
        }
        for gj in &mut g[i..] {
            *gj += scale * tail;
        }
    }
    Ok(g)
}

/// Mean daily Brier of one question: `daily[d]` is the aggregate for the
/// question's `d`-th active day.
pub fn question_score<P: AsRef<[f64]>>(daily: &[P], question: &Question) -> Result<f64> {
    let days = question.duration_days() + 1;
    if daily.len() as i64 != days {
        return Err(contract(format!(
            "question `{}` has {days} active days but {} aggregates",
            question.id,
            daily.len()
        )));
    }
    let o = question.outcome();
    let mut total = 0.0;
    for p in daily {
        total += brier(p.as_ref(), &o, question.is_ordinal)?;
    }
    Ok(total / daily.len() as f64)
}

/// Mean of mean daily Brier scores.
pub fn mmdb(per_question: &[f64]) -> Result<f64> {
    if per_question.is_empty() {
        return Err(contract("MMDB of zero questions"));
    }
    Ok(per_question.iter().sum::<f64>() / per_question.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub z: f64,
    /// Upper-tail probability of `z` under the standard normal.
    pub p: f64,
}

/// One-sided two-sample z-test of `mean_a > mean_b` with `n` samples each.
pub fn one_sided_z(mean_a: f64, var_a: f64, mean_b: f64, var_b: f64, n: usize) -> Result<ZTest> {
    if n < 2 {
        return Err(contract("z-test needs n >= 2"));
    }
    if var_a < 0.0 || var_b < 0.0 {
        return Err(contract("negative variance"));
    }
    let se = ((var_a + var_b) / n as f64).sqrt();
    let diff = mean_a - mean_b;
    let z = if se == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            return Err(Error::Undefined("zero pooled variance with unequal means".into()));
        }
    } else {
        diff / se
    };
    let normal = Normal::standard();
    Ok(ZTest { z, p: normal.sf(z) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub mean: f64,
    pub variance: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub n: usize,
}

/// Linear-interpolation (type 7) quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Sample mean, `n - 1` variance and quartiles.
pub fn score_summary(scores: &[f64]) -> Result<ScoreSummary> {
    if scores.is_empty() {
        return Err(contract("summary of zero scores"));
    }
    let n = scores.len();
    let mean = scores.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(ScoreSummary {
        mean,
        variance,
        q25: quantile_sorted(&sorted, 0.25),
        q50: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
        n,
    })
}

/// Fraction of individuals whose score is strictly lower (better) than the
/// aggregate. Ties do not count as better.
pub fn rank_percentile(aggregate: f64, individuals: &[f64]) -> f64 {
    if individuals.is_empty() {
        return 0.0;
    }
    let better = individuals.iter().filter(|&&s| s < aggregate).count();
    better as f64 / individuals.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    /// Two-sided p-value from the t distribution with `n - 2` degrees of
    /// freedom; absent when `n < 3`.
    pub p: Option<f64>,
    pub n: usize,
}

/// Pearson correlation with its significance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<Correlation> {
    if xs.len() != ys.len() {
        return Err(contract("pearson inputs differ in length"));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Undefined("correlation needs at least two pairs".into()));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("correlation with a constant series".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let p = if n < 3 {
        None
    } else if r.abs() == 1.0 {
        Some(0.0)
    } else {
        let df = (n - 2) as f64;
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Undefined(e.to_string()))?;
        Some(2.0 * dist.sf(t.abs()))
    };
    Ok(Correlation { r, p, n })
}
