//! Linear opinion pools with temporal decay, performance weighting and
//! extremization (the M0, M1 and M2 baselines).
//!
//! The pooled forecast is
//!
//! ```text
//! p̄ ∝ Σ_i λ^age_i · w_i^γ · p_i
//! ```
//!
//! followed by a log-odds extremization that pushes each option away from the
//! uniform value `1/a`:
//!
//! ```text
//! log(p̂_k (a-1) / (1 - p̂_k)) = α · log(p̄_k (a-1) / (1 - p̄_k))
//! ```
//!
//! and a final renormalization. Ordinal questions extremize cumulative
//! probabilities with the binary (`a = 2`) map instead.

use std::collections::HashMap;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::domain::{end_of_day, latest_per_forecaster, Forecast, Question, Tournament};
use crate::error::{contract, Error, Result};
use crate::scoring::{self, brier};

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` before any
/// log-odds transform.
pub const PROB_CLAMP: f64 = 1e-6;

/// Floor on a forecaster's mean Brier when inverting it into a weight.
pub const WEIGHT_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    M0,
    M1,
    M2,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::M0, Variant::M1, Variant::M2];

    pub fn name(self) -> &'static str {
        match self {
            Variant::M0 => "m0",
            Variant::M1 => "m1",
            Variant::M2 => "m2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub variant: Variant,
    pub decay_lambda: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub subset_latest: bool,
}

impl BaselineConfig {
    /// Builds a configuration, forcing `gamma = 0` for M0/M1 and `alpha = 1`
    /// for M0.
    pub fn new(variant: Variant, decay_lambda: f64, gamma: f64, alpha: f64) -> Result<Self> {
        if !(decay_lambda > 0.0 && decay_lambda <= 1.0) {
            return Err(contract(format!("decay lambda {decay_lambda} outside (0, 1]")));
        }
        if !(gamma >= 0.0) {
            return Err(contract(format!("gamma {gamma} is negative")));
        }
        if !(alpha >= 1.0) {
            return Err(contract(format!("alpha {alpha} is below 1")));
        }
        let (gamma, alpha) = match variant {
            Variant::M0 => (0.0, 1.0),
            Variant::M1 => (0.0, alpha),
            Variant::M2 => (gamma, alpha),
        };
        Ok(Self {
            variant,
            decay_lambda,
            gamma,
            alpha,
            subset_latest: true,
        })
    }
}

/// Per-forecaster accuracy weights; forecasters never seen in training get 1.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForecasterWeights {
    weights: HashMap<String, f64>,
}

impl ForecasterWeights {
    pub fn get(&self, forecaster_id: &str) -> f64 {
        self.weights.get(forecaster_id).copied().unwrap_or(1.0)
    }

    pub fn insert(&mut self, forecaster_id: impl Into<String>, weight: f64) {
        self.weights.insert(forecaster_id.into(), weight);
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            weights: self.weights.iter().map(|(k, w)| (k.clone(), w * factor)).collect(),
        }
    }
}

/// `λ^age`, with age in whole calendar days between the two instants.
pub fn decay_weight(now: NaiveDateTime, forecast_time: NaiveDateTime, lambda: f64) -> Result<f64> {
    if forecast_time > now {
        return Err(contract(format!("forecast at {forecast_time} is after {now}")));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(contract(format!("decay lambda {lambda} outside (0, 1]")));
    }
    let age = (now.date() - forecast_time.date()).num_days();
    Ok(lambda.powi(age as i32))
}

/// Inverse mean Brier of each forecaster over its training forecasts, floored
/// at [`WEIGHT_EPSILON`].
pub fn fit_weights(train: &Tournament) -> ForecasterWeights {
    let mut acc: HashMap<&str, (f64, usize)> = HashMap::new();
    for f in train.forecasts() {
        let Ok(q) = train.question(&f.question_id) else {
            continue;
        };
        let Ok(b) = brier(&f.probs, &q.outcome(), q.is_ordinal) else {
            continue;
        };
        let e = acc.entry(f.forecaster_id.as_str()).or_default();
        e.0 += b;
        e.1 += 1;
    }
    let mut weights = ForecasterWeights::default();
    for (id, (sum, n)) in acc {
        weights.insert(id, 1.0 / (sum / n as f64).max(WEIGHT_EPSILON));
    }
    weights
}

fn normalize(p: &mut [f64]) {
    let s: f64 = p.iter().sum();
    if s > 0.0 {
        p.iter_mut().for_each(|x| *x /= s);
    } else {
        let u = 1.0 / p.len() as f64;
        p.iter_mut().for_each(|x| *x = u);
    }
}

/// Solves `log(q (a-1)/(1-q)) = α log(p (a-1)/(1-p))` for `q`. Exact 0 and 1
/// are fixed.
fn extremize_one(p: f64, alpha: f64, a: usize) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    let k = (a - 1) as f64;
    let log_odds = (p * k / (1.0 - p)).ln();
    let r = (alpha * log_odds).exp();
    r / (r + k)
}

/// Log-odds extremization of a pooled distribution. With `ordinal`, the binary
/// map is applied to each cumulative probability and differenced back.
pub fn extremize(p_bar: &[f64], alpha: f64, ordinal: bool) -> Result<Vec<f64>> {
    if !(alpha >= 1.0) {
        return Err(contract(format!("alpha {alpha} is below 1")));
    }
    let a = p_bar.len();
    if a < 2 {
        return Err(contract("extremization needs at least two options"));
    }
    if alpha == 1.0 {
        return Ok(p_bar.to_vec());
    }
    let mut out = if ordinal {
        let mut cum = 0.0;
        let mut prev = 0.0;
        let mut dens = Vec::with_capacity(a);
        for &p in &p_bar[..a - 1] {
            cum += p;
            let c = extremize_one(cum.min(1.0), alpha, 2);
            dens.push((c - prev).max(0.0));
            prev = c;
        }
        dens.push((1.0 - prev).max(0.0));
        dens
    } else {
        p_bar.iter().map(|&p| extremize_one(p, alpha, a)).collect::<Vec<_>>()
    };
    normalize(&mut out);
    Ok(out)
}

/// Pools the given forecasts for `question` at instant `now`.
///
/// Forecasts after `now` are a contract error; an empty list yields
/// [`Error::NoForecasts`] so callers can fall back to uniform.
pub fn aggregate_baseline(
    forecasts: &[&Forecast],
    question: &Question,
    now: NaiveDateTime,
    cfg: &BaselineConfig,
    weights: &ForecasterWeights,
) -> Result<Vec<f64>> {
    if forecasts.is_empty() {
        return Err(Error::NoForecasts(question.id.clone()));
    }
    let subset;
    let pool: &[&Forecast] = if cfg.subset_latest {
        subset = latest_per_forecaster(forecasts);
        &subset
    } else {
        forecasts
    };
    let n = question.n_options();
    let mut p_bar = vec![0.0; n];
    for f in pool {
        if f.probs.len() != n {
            return Err(contract(format!(
                "forecast has {} options, question `{}` has {n}",
                f.probs.len(),
                question.id
            )));
        }
        let mut w = decay_weight(now, f.timestamp, cfg.decay_lambda)?;
        if cfg.gamma != 0.0 {
            w *= weights.get(&f.forecaster_id).powf(cfg.gamma);
        }
        for (acc, p) in p_bar.iter_mut().zip(&f.probs) {
            *acc += w * p;
        }
    }
    normalize(&mut p_bar);
    extremize(&p_bar, cfg.alpha, question.is_ordinal)
}

/// A fitted baseline ready to produce daily aggregates.
#[derive(Debug, Clone)]
pub struct BaselineModel {
    pub config: BaselineConfig,
    pub weights: ForecasterWeights,
}

impl BaselineModel {
    /// Fits forecaster weights and grid-searches the remaining parameters on
    /// `train`.
    pub fn fit(train: &Tournament, variant: Variant, grid: &Grid) -> Result<Self> {
        let weights = fit_weights(train);
        let config = grid_search_with(train, variant, grid, &weights)?;
        Ok(Self { config, weights })
    }

    /// One aggregate per active day; days with nothing visible get the
    /// uniform distribution.
    pub fn daily_series(&self, tournament: &Tournament, question: &Question) -> Result<Vec<Vec<f64>>> {
        question
            .active_days()
            .into_iter()
            .map(|day| {
                let visible = tournament.visible_on(&question.id, day)?;
                match aggregate_baseline(&visible, question, end_of_day(day), &self.config, &self.weights) {
                    Err(Error::NoForecasts(_)) => Ok(vec![1.0 / question.n_options() as f64; question.n_options()]),
                    other => other,
                }
            })
            .collect()
    }
}

/// Candidate values for grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub alphas: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            lambdas: vec![0.9, 0.95, 0.99, 1.0],
            gammas: vec![0.0, 0.5, 1.0, 2.0],
            alphas: vec![1.0, 1.5, 2.0, 2.5, 3.0],
        }
    }
}

/// Grid search with weights fitted on `train`.
pub fn grid_search(train: &Tournament, variant: Variant, grid: &Grid) -> Result<BaselineConfig> {
    grid_search_with(train, variant, grid, &fit_weights(train))
}

struct Target<'a> {
    question: &'a Question,
    outcome: Vec<f64>,
    /// (age in days, forecaster weight, probabilities) of the pooled forecasts.
    pool: Vec<(i32, f64, &'a [f64])>,
}

/// Exhaustive search minimizing training MMDB. Ties go to the smaller alpha,
/// then the larger lambda, then the smaller gamma.
pub fn grid_search_with(
    train: &Tournament,
    variant: Variant,
    grid: &Grid,
    weights: &ForecasterWeights,
) -> Result<BaselineConfig> {
    if grid.lambdas.is_empty() || grid.gammas.is_empty() || grid.alphas.is_empty() {
        return Err(contract("empty grid"));
    }
    let mut alphas = grid.alphas.clone();
    alphas.sort_by(f64::total_cmp);
    let mut lambdas = grid.lambdas.clone();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let mut gammas = grid.gammas.clone();
    gammas.sort_by(f64::total_cmp);
    match variant {
        Variant::M0 => {
            alphas = vec![1.0];
            gammas = vec![0.0];
        }
        Variant::M1 => gammas = vec![0.0],
        Variant::M2 => {}
    }

    // Per question, per day: the pooled forecasts do not depend on the
    // searched parameters when subsetting to the latest forecast.
    let mut per_question: Vec<Vec<Target>> = Vec::new();
    for q in train.questions() {
        let mut days = Vec::new();
        for day in q.active_days() {
            let visible = train.visible_on(&q.id, day)?;
            let pool = latest_per_forecaster(&visible)
                .into_iter()
                .map(|f| {
                    let age = (day - f.timestamp.date()).num_days() as i32;
                    (age, weights.get(&f.forecaster_id), f.probs.as_slice())
                })
                .collect();
            days.push(Target {
                question: q,
                outcome: q.outcome(),
                pool,
            });
        }
        per_question.push(days);
    }
    if per_question.is_empty() {
        return Err(contract("grid search on an empty tournament"));
    }

    let mut best: Option<(f64, BaselineConfig)> = None;
    let mut pooled = Vec::new();
    for &alpha in &alphas {
        for &lambda in &lambdas {
            for &gamma in &gammas {
                let cfg = BaselineConfig::new(variant, lambda, gamma, alpha)?;
                let mut mdbs = Vec::with_capacity(per_question.len());
                for days in &per_question {
                    let mut total = 0.0;
                    for t in days {
                        let n = t.question.n_options();
                        pooled.clear();
                        pooled.resize(n, 0.0);
                        if t.pool.is_empty() {
                            pooled.iter_mut().for_each(|p| *p = 1.0 / n as f64);
                        } else {
                            for &(age, w, probs) in &t.pool {
                                let mut d = cfg.decay_lambda.powi(age);
                                if cfg.gamma != 0.0 {
                                    d *= w.powf(cfg.gamma);
                                }
                                for (acc, p) in pooled.iter_mut().zip(probs) {
                                    *acc += d * p;
                                }
                            }
                            normalize(&mut pooled);
                        }
                        let p = if t.pool.is_empty() {
                            pooled.clone()
                        } else {
                            extremize(&pooled, cfg.alpha, t.question.is_ordinal)?
                        };
                        total += brier(&p, &t.outcome, t.question.is_ordinal)?;
                    }
                    mdbs.push(total / days.len() as f64);
                }
                let score = scoring::mmdb(&mdbs)?;
                if best.is_none_or(|(b, _)| score < b) {
                    best = Some((score, cfg));
                }
            }
        }
    }
    Ok(best.expect("grid is nonempty").1)
}
