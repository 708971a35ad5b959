//! Statistical machine forecasters over a latent daily series.
//!
//! Both models produce a Gaussian predictive law for the value `horizon`
//! steps ahead and bin it by the question's thresholds: option `k` covers
//! `(t_k, t_{k+1}]` with `t_0 = -inf` and `t_n = +inf`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{contract, Result};
use crate::scoring::ProbVector;

/// Index of the option whose interval contains `value`.
pub fn bin_of(value: f64, thresholds: &[f64]) -> usize {
    thresholds.partition_point(|&t| t < value)
}

/// Probability mass of `Normal(mean, variance)` in each option interval.
/// A zero variance puts all the mass on the bin containing `mean`.
pub fn binned_normal(mean: f64, variance: f64, thresholds: &[f64]) -> Result<ProbVector> {
    check_thresholds(thresholds)?;
    let n = thresholds.len() + 1;
    if !(variance > 0.0) || !variance.is_finite() {
        let mut p = vec![0.0; n];
        p[bin_of(mean, thresholds)] = 1.0;
        return ProbVector::new(p);
    }
    let law = Normal::new(mean, variance.sqrt()).map_err(|e| contract(e.to_string()))?;
    let mut cdf = Vec::with_capacity(n + 1);
    cdf.push(0.0);
    cdf.extend(thresholds.iter().map(|&t| law.cdf(t)));
    cdf.push(1.0);
    let mut p: Vec<f64> = cdf.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    ProbVector::new(p)
}

fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() || thresholds.len() >= crate::domain::MAX_OPTIONS {
        return Err(contract(format!("{} thresholds", thresholds.len())));
    }
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) || thresholds.iter().any(|t| !t.is_finite()) {
        return Err(contract("thresholds must be finite and strictly increasing"));
    }
    Ok(())
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Arithmetic random walk: `Normal(last, s² h)` where `s²` is the sample
/// variance of first differences.
pub fn random_walk_forecast(history: &[f64], horizon: u32, thresholds: &[f64]) -> Result<ProbVector> {
    if history.len() < 2 {
        return Err(contract("random walk needs at least two history points"));
    }
    if horizon == 0 {
        return Err(contract("horizon must be positive"));
    }
    let diffs: Vec<f64> = history.windows(2).map(|w| w[1] - w[0]).collect();
    let var = if diffs.len() < 2 {
        diffs[0] * diffs[0]
    } else {
        sample_variance(&diffs)
    };
    let last = *history.last().expect("nonempty");
    binned_normal(last, var * horizon as f64, thresholds)
}

pub const PHI_LIMIT: f64 = 0.999;

/// Least-squares AR(1) fit `y_t = mu + phi (y_{t-1} - mu) + e_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Fit {
    pub mu: f64,
    pub phi: f64,
    /// Residual variance.
    pub sigma2: f64,
}

impl Ar1Fit {
    /// Returns `None` when the regressor has no variance.
    pub fn estimate(history: &[f64]) -> Option<Self> {
        let m = history.len().checked_sub(1)? as f64;
        let (x, y) = (&history[..history.len() - 1], &history[1..]);
        let mx = x.iter().sum::<f64>() / m;
        let my = y.iter().sum::<f64>() / m;
        let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        if !(sxx > 0.0) || !sxx.is_finite() {
            return None;
        }
        let phi = (sxy / sxx).clamp(-PHI_LIMIT, PHI_LIMIT);
        let intercept = my - phi * mx;
        let mu = intercept / (1.0 - phi);
        let sigma2 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - phi * a).powi(2))
            .sum::<f64>()
            / m;
        let fit = Self { mu, phi, sigma2 };
        [mu, phi, sigma2].iter().all(|v| v.is_finite()).then_some(fit)
    }

    /// Mean and variance of the value `horizon` steps after `last`.
    pub fn predictive(&self, last: f64, horizon: u32) -> (f64, f64) {
        let decay = self.phi.powi(horizon as i32);
        let mean = self.mu + decay * (last - self.mu);
        let var = self.sigma2 * (0..horizon).map(|i| self.phi.powi(2 * i as i32)).sum::<f64>();
        (mean, var)
    }
}

/// AR(1) forecast, falling back to the random walk when the fit degenerates.
pub fn ar1_forecast(history: &[f64], horizon: u32, thresholds: &[f64]) -> Result<ProbVector> {
    if history.len() < 3 {
        return Err(contract("AR(1) needs at least three history points"));
    }
    if horizon == 0 {
        return Err(contract("horizon must be positive"));
    }
    match Ar1Fit::estimate(history) {
        Some(fit) => {
            let (mean, var) = fit.predictive(*history.last().expect("nonempty"), horizon);
            binned_normal(mean, var, thresholds)
        }
        None => random_walk_forecast(history, horizon, thresholds),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn bins_are_right_closed() {
        let t = [0.0, 1.0];
        assert_eq!(bin_of(-3.0, &t), 0);
        assert_eq!(bin_of(0.0, &t), 0);
        assert_eq!(bin_of(0.5, &t), 1);
        assert_eq!(bin_of(1.0, &t), 1);
        assert_eq!(bin_of(7.0, &t), 2);
    }

    #[test]
    fn symmetric_law_at_threshold_splits_evenly() {
        let p = random_walk_forecast(&[0.3, -0.2, 0.4, 0.5], 3, &[0.5]).unwrap();
        assert_abs_diff_eq!(p.as_slice()[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.as_slice()[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn constant_history_is_a_point_mass() {
        let p = random_walk_forecast(&[2.5; 6], 4, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 0.0, 0.0, 1.0, 0.0]);
        let p = ar1_forecast(&[2.5; 6], 4, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn alternating_history_matches_gaussian_tail() {
        let history: Vec<f64> = (0..201).map(|i| (i % 2) as f64).collect();
        let p = random_walk_forecast(&history, 1, &[0.5]).unwrap();
        // 200 differences of +-1 with mean 0: sample variance 200 / 199.
        let sd = (200.0f64 / 199.0).sqrt();
        let upper = 0.5 * erfc_series(0.5 / (sd * std::f64::consts::SQRT_2));
        assert_abs_diff_eq!(p.as_slice()[1], upper, epsilon = 1e-9);
        // Close to the unit-variance law.
        assert_abs_diff_eq!(p.as_slice()[1], 0.308538, epsilon = 2e-3);
    }

    /// Complementary error function by a series independent of statrs.
    fn erfc_series(x: f64) -> f64 {
        // erf via its Maclaurin series, fine for |x| < 2.
        let mut term = x;
        let mut sum = x;
        for n in 1..80 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    }

    #[test]
    fn zero_phi_reverts_to_the_mean() {
        let fit = Ar1Fit {
            mu: 3.0,
            phi: 0.0,
            sigma2: 2.0,
        };
        for h in 1..6 {
            let (mean, var) = fit.predictive(-10.0, h);
            assert_eq!(mean, 3.0);
            assert_eq!(var, 2.0);
        }
    }

    #[test]
    fn fit_recovers_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut y = vec![5.0];
        for _ in 0..20_000 {
            let e: f64 = StandardNormal.sample(&mut rng);
            let last = *y.last().unwrap();
            y.push(5.0 + 0.6 * (last - 5.0) + 0.5 * e);
        }
        let fit = Ar1Fit::estimate(&y).unwrap();
        assert_abs_diff_eq!(fit.phi, 0.6, epsilon = 0.02);
        assert_abs_diff_eq!(fit.mu, 5.0, epsilon = 0.02);
        assert_abs_diff_eq!(fit.sigma2, 0.25, epsilon = 0.01);
    }

    #[test]
    fn near_unit_root_behaves_like_random_walk() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut y = vec![0.0];
        for _ in 0..400 {
            let e: f64 = StandardNormal.sample(&mut rng);
            let last = *y.last().unwrap();
            y.push(0.99999 * last + e);
        }
        let last = *y.last().unwrap();
        let thresholds = [last - 1.5, last - 0.2, last + 0.4, last + 2.0];
        for h in [1, 2, 4] {
            let a = ar1_forecast(&y, h, &thresholds).unwrap();
            let r = random_walk_forecast(&y, h, &thresholds).unwrap();
            for (x, z) in a.as_slice().iter().zip(r.as_slice()) {
                assert!((x - z).abs() < 0.05, "h={h}: {a:?} vs {r:?}");
            }
        }
    }

    #[test]
    fn forecasts_are_deterministic_and_valid() {
        let y = [1.0, 1.4, 0.9, 1.7, 2.2, 1.8, 2.5];
        let t = [1.0, 2.0, 3.0];
        let a = ar1_forecast(&y, 5, &t).unwrap();
        assert_eq!(a, ar1_forecast(&y, 5, &t).unwrap());
        assert_abs_diff_eq!(a.as_slice().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(ar1_forecast(&y[..2], 1, &t).is_err());
        assert!(random_walk_forecast(&y[..1], 1, &t).is_err());
        assert!(random_walk_forecast(&y, 1, &[1.0, 1.0]).is_err());
    }
}
