//! Seeded synthetic tournaments with known forecaster skill.
//!
//! Ordinal questions follow a latent AR(1) series whose value on the close
//! date, binned by thresholds, is the outcome. Categorical questions draw
//! their outcome directly. A human with noise level `eps` on a question of
//! category `c` reports
//!
//! ```text
//! p = normalize((1 - eps_c) * soft(t) + eps_c * noise)
//! soft(t) = (1 - w) * onehot(outcome) + w * uniform,   w = 0.5 * (1 - t / T)
//! noise   = h * shared_q + (1 - h) * own,              shared_q, own ~ Dirichlet(1)
//! ```
//!
//! The shared part of the noise is common to every forecaster on the
//! question, so it does not average out and the crowd can be confidently
//! wrong. Machine forecasters emit once a day on ordinal questions.

pub mod machine;

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate, NaiveTime};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution, Exp, Exp1, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

use crate::domain::{Forecast, Forecaster, ForecasterKind, Question, Tournament, MAX_OPTIONS};
use crate::error::{contract, Result};
use crate::rng::{substream, Stream};

pub use machine::{ar1_forecast, bin_of, binned_normal, random_walk_forecast, Ar1Fit};

const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseDistribution {
    Uniform { low: f64, high: f64 },
    Beta { a: f64, b: f64 },
}

impl NoiseDistribution {
    fn check(&self) -> Result<()> {
        match *self {
            NoiseDistribution::Uniform { low, high } if (0.0..=high).contains(&low) && high <= 1.0 => Ok(()),
            NoiseDistribution::Beta { a, b } if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() => Ok(()),
            other => Err(contract(format!("invalid noise distribution {other:?}"))),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseDistribution::Uniform { low, high } => {
                if low == high {
                    low
                } else {
                    rng.random_range(low..=high)
                }
            }
            NoiseDistribution::Beta { a, b } => Beta::new(a, b).expect("checked").sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MachineModel {
    RandomWalk,
    Ar1,
    /// Uninformative control that always reports the uniform distribution.
    Uniform,
}

impl MachineModel {
    pub fn forecaster_id(self) -> &'static str {
        match self {
            MachineModel::RandomWalk => "machine_rw",
            MachineModel::Ar1 => "machine_ar1",
            MachineModel::Uniform => "machine_uniform",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_questions: usize,
    pub n_humans: usize,
    /// Distribution of each human's base noise level.
    pub noise: NoiseDistribution,
    /// Standard deviation of a human's per-category shift in noise level.
    pub category_noise_spread: f64,
    /// Weight of the question-wide component in the noise term.
    pub shared_noise: f64,
    pub fraction_ordinal: f64,
    pub min_options: usize,
    pub max_options: usize,
    /// Question length as `close - open`, in days.
    pub min_duration_days: i64,
    pub max_duration_days: i64,
    /// Humans forecasting on each question, drawn by activity level.
    pub participants_per_question: usize,
    /// Log-scale standard deviation of the lognormal activity levels. Larger
    /// values give a few regulars and a long tail of occasional forecasters.
    pub activity_spread: f64,
    /// Expected revisions per participant per day after the first forecast.
    pub update_rate: f64,
    pub machines: Vec<MachineModel>,
    /// Latent-series days available to machines before the open date.
    pub history_days: usize,
    pub latent_phi: f64,
    pub latent_sigma: f64,
    pub start_date: NaiveDate,
    /// Open dates are spread uniformly over this many days after the start.
    pub open_window_days: i64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_questions: 60,
            n_humans: 200,
            noise: NoiseDistribution::Uniform { low: 0.0, high: 1.0 },
            category_noise_spread: 0.15,
            shared_noise: 0.7,
            fraction_ordinal: 0.5,
            min_options: 2,
            max_options: 5,
            min_duration_days: 5,
            max_duration_days: 20,
            participants_per_question: 20,
            activity_spread: 2.0,
            update_rate: 0.1,
            machines: vec![MachineModel::RandomWalk, MachineModel::Ar1],
            history_days: 30,
            latent_phi: 0.95,
            latent_sigma: 1.0,
            start_date: NaiveDate::from_ymd_opt(2018, 3, 1).expect("valid date"),
            open_window_days: 150,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n_questions", self.n_questions),
            ("n_humans", self.n_humans),
            ("participants_per_question", self.participants_per_question),
            ("history_days", self.history_days),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(contract(format!("{name} must be positive")));
            }
        }
        if self.participants_per_question > self.n_humans {
            return Err(contract("participants_per_question exceeds n_humans"));
        }
        self.noise.check()?;
        let unit = [
            ("category_noise_spread", self.category_noise_spread),
            ("shared_noise", self.shared_noise),
            ("fraction_ordinal", self.fraction_ordinal),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(contract(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if !(2 <= self.min_options && self.min_options <= self.max_options && self.max_options <= MAX_OPTIONS) {
            return Err(contract(format!(
                "option range {}..={} outside 2..={MAX_OPTIONS}",
                self.min_options, self.max_options
            )));
        }
        if !(0 <= self.min_duration_days && self.min_duration_days <= self.max_duration_days) {
            return Err(contract("invalid duration range"));
        }
        if self.open_window_days < 0 {
            return Err(contract("open_window_days must be nonnegative"));
        }
        if !(self.activity_spread >= 0.0 && self.activity_spread.is_finite()) {
            return Err(contract("activity_spread must be nonnegative"));
        }
        if !(self.update_rate >= 0.0 && self.update_rate.is_finite()) {
            return Err(contract("update_rate must be nonnegative"));
        }
        if !(self.latent_phi.abs() < 1.0) || !(self.latent_sigma > 0.0) {
            return Err(contract("latent series needs |phi| < 1 and sigma > 0"));
        }
        Ok(())
    }
}

/// Latent daily series behind an ordinal question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentSeries {
    /// Values from `history_days` before the open date through the close date.
    pub values: Vec<f64>,
    /// Index of the open date in `values`.
    pub open_offset: usize,
    pub thresholds: Vec<f64>,
}

impl LatentSeries {
    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("nonempty series")
    }
}

/// What generated the data, for tests and diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Base noise level per human.
    pub noise: BTreeMap<String, f64>,
    /// Effective noise level per human and category.
    pub category_noise: BTreeMap<String, BTreeMap<String, f64>>,
    pub series: BTreeMap<String, LatentSeries>,
}

/// Contents of `manifest.json` next to generated data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub generator: String,
    pub version: String,
    pub seed: u64,
    pub config: SynthConfig,
    pub n_questions: usize,
    pub n_forecasters: usize,
    pub n_forecasts: usize,
    pub forecaster_noise: BTreeMap<String, f64>,
    /// Wall-clock creation time; the only nondeterministic field.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

pub fn manifest(config: &SynthConfig, tournament: &Tournament, truth: &GroundTruth) -> Manifest {
    Manifest {
        generator: "anchor-agg synthdata".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: config.seed,
        config: config.clone(),
        n_questions: tournament.questions().len(),
        n_forecasters: tournament.forecasters().len(),
        n_forecasts: tournament.forecasts().len(),
        forecaster_noise: truth.noise.clone(),
        created_at: None,
    }
}

const COUNTRIES: [&str; 6] = ["hungary", "brazil", "japan", "kenya", "india", "germany"];
const MONTHS: [&str; 6] = ["july", "august", "september", "october", "november", "december"];
pub const CATEGORIES: [&str; 4] = ["economics", "health", "politics", "security"];

const ORDINAL_TEMPLATES: [(&str, &str); 8] = [
    ("economics", "what will be the interest rate for {c} in {m}"),
    ("economics", "what will be the unemployment rate for {c} in {m}"),
    ("economics", "what will be the inflation rate for {c} in {m}"),
    ("economics", "what will be the exchange rate for {c} in {m}"),
    ("economics", "what will be the oil closing price on {m}"),
    ("health", "how many flu cases reported in {c} in {m}"),
    ("security", "how many attacks reported in {c} in {m}"),
    ("security", "how many protest attacks reported in {c} in {m}"),
];

const CATEGORICAL_TEMPLATES: [(&str, &str); 6] = [
    ("politics", "will the prime minister for {c} leave office before {m}"),
    ("politics", "will {c} hold an election before {m}"),
    ("politics", "will {c} sign a treaty before {m}"),
    ("security", "will {c} sign a peace deal before {m}"),
    ("health", "will {c} vaccine flu cases before {m}"),
    ("economics", "will {c} tax oil before {m}"),
];

fn dirichlet_one<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

fn format_threshold(t: f64) -> String {
    format!("{t:.2}")
}

fn ordinal_labels(thresholds: &[f64]) -> Vec<String> {
    let n = thresholds.len() + 1;
    (0..n)
        .map(|k| match k {
            0 => format!("at most {}", format_threshold(thresholds[0])),
            k if k == n - 1 => format!("above {}", format_threshold(thresholds[k - 1])),
            k => format!(
                "above {} up to {}",
                format_threshold(thresholds[k - 1]),
                format_threshold(thresholds[k])
            ),
        })
        .collect()
}

fn categorical_labels(n: usize) -> Vec<String> {
    if n == 2 {
        vec!["yes".into(), "no".into()]
    } else {
        (1..=n).map(|k| format!("option {k}")).collect()
    }
}

struct Human {
    id: String,
    noise: f64,
    category_noise: BTreeMap<String, f64>,
    activity: f64,
}

/// Generates a tournament; see [`generate_with_truth`].
pub fn generate(config: &SynthConfig) -> Result<Tournament> {
    generate_with_truth(config).map(|(t, _)| t)
}

/// Generates a tournament together with the skill levels and latent series
/// that produced it. The result depends only on the config (including its
/// seed).
pub fn generate_with_truth(config: &SynthConfig) -> Result<(Tournament, GroundTruth)> {
    config.validate()?;
    let mut rng = substream(config.seed, Stream::Generation);
    let width = config.n_humans.to_string().len().max(3);
    let spread = Normal::new(0.0, config.category_noise_spread).map_err(|e| contract(e.to_string()))?;

    let humans: Vec<Human> = (0..config.n_humans)
        .map(|j| {
            let noise = config.noise.sample(&mut rng);
            let category_noise = CATEGORIES
                .iter()
                .map(|c| (c.to_string(), (noise + spread.sample(&mut rng)).clamp(0.0, 1.0)))
                .collect();
            let z: f64 = StandardNormal.sample(&mut rng);
            Human {
                id: format!("h{j:0width$}"),
                noise,
                category_noise,
                activity: (config.activity_spread * z).exp(),
            }
        })
        .collect();

    let mut questions = Vec::with_capacity(config.n_questions);
    let mut forecasts = Vec::new();
    let mut truth = GroundTruth {
        noise: humans.iter().map(|h| (h.id.clone(), h.noise)).collect(),
        category_noise: humans
            .iter()
            .map(|h| (h.id.clone(), h.category_noise.clone()))
            .collect(),
        series: BTreeMap::new(),
    };
    let qwidth = config.n_questions.to_string().len().max(3);
    let stationary_sd = config.latent_sigma / (1.0 - config.latent_phi.powi(2)).sqrt();

    for i in 0..config.n_questions {
        let id = format!("q{i:0qwidth$}");
        let ordinal = rng.random_bool(config.fraction_ordinal);
        let n = rng.random_range(config.min_options..=config.max_options);
        let duration = rng.random_range(config.min_duration_days..=config.max_duration_days);
        let open_date = config.start_date + Duration::days(rng.random_range(0..=config.open_window_days));
        let close_date = open_date + Duration::days(duration);
        let templates: &[(&str, &str)] = if ordinal {
            &ORDINAL_TEMPLATES
        } else {
            &CATEGORICAL_TEMPLATES
        };
        let (category, template) = *templates.choose(&mut rng).expect("nonempty");
        let text = template
            .replace("{c}", COUNTRIES.choose(&mut rng).expect("nonempty"))
            .replace("{m}", MONTHS.choose(&mut rng).expect("nonempty"));

        let (labels, resolved, series) = if ordinal {
            let series = latent_series(config, duration, n, stationary_sd, &mut rng)?;
            let resolved = bin_of(series.final_value(), &series.thresholds);
            (ordinal_labels(&series.thresholds), resolved, Some(series))
        } else {
            (categorical_labels(n), rng.random_range(0..n), None)
        };
        let question = Question {
            id: id.clone(),
            text,
            option_labels: labels,
            is_ordinal: ordinal,
            category: category.to_string(),
            open_date,
            close_date,
            resolved_index: resolved,
        };

        human_forecasts(config, &question, &humans, &mut rng, &mut forecasts)?;
        if let Some(series) = &series {
            machine_forecasts(config, &question, series, &mut forecasts)?;
        }
        if let Some(series) = series {
            truth.series.insert(id, series);
        }
        questions.push(question);
    }

    let mut forecasters: Vec<Forecaster> = humans
        .iter()
        .map(|h| Forecaster {
            id: h.id.clone(),
            kind: ForecasterKind::Human,
        })
        .collect();
    let mut machines = config.machines.clone();
    machines.sort();
    machines.dedup();
    forecasters.extend(machines.iter().map(|m| Forecaster {
        id: m.forecaster_id().into(),
        kind: ForecasterKind::Machine,
    }));
    Ok((Tournament::new(questions, forecasters, forecasts), truth))
}

fn latent_series<R: Rng + ?Sized>(
    config: &SynthConfig,
    duration: i64,
    n: usize,
    stationary_sd: f64,
    rng: &mut R,
) -> Result<LatentSeries> {
    let step = Normal::new(0.0, config.latent_sigma).map_err(|e| contract(e.to_string()))?;
    let len = config.history_days + duration as usize + 1;
    let mut values = Vec::with_capacity(len);
    let start: f64 = Normal::new(0.0, stationary_sd)
        .map_err(|e| contract(e.to_string()))?
        .sample(rng);
    values.push(start);
    while values.len() < len {
        let last = *values.last().expect("nonempty");
        values.push(config.latent_phi * last + step.sample(rng));
    }
    // Thresholds at equal-probability quantiles of the close value as seen
    // the day before the question opens.
    let horizon = duration + 1;
    let seen = values[config.history_days - 1];
    let phi = config.latent_phi;
    let mean = phi.powi(horizon as i32) * seen;
    let var = config.latent_sigma.powi(2) * (0..horizon).map(|k| phi.powi(2 * k as i32)).sum::<f64>();
    let law = StatNormal::new(mean, var.sqrt()).map_err(|e| contract(e.to_string()))?;
    let thresholds = (1..n).map(|k| law.inverse_cdf(k as f64 / n as f64)).collect();
    Ok(LatentSeries {
        values,
        open_offset: config.history_days,
        thresholds,
    })
}

fn human_forecasts<R: Rng + ?Sized>(
    config: &SynthConfig,
    question: &Question,
    humans: &[Human],
    rng: &mut R,
    out: &mut Vec<Forecast>,
) -> Result<()> {
    let n = question.n_options();
    let window = (question.duration_days() + 1) * SECONDS_PER_DAY;
    let shared = dirichlet_one(n, rng);
    let outcome = question.outcome();
    let participants: Vec<&Human> = humans
        .choose_multiple_weighted(rng, config.participants_per_question, |h| h.activity)
        .map_err(|e| contract(e.to_string()))?
        .collect();
    let gap = (config.update_rate > 0.0).then(|| Exp::new(config.update_rate).expect("positive rate"));
    let open = question.open_date.and_time(NaiveTime::MIN);
    for human in participants {
        let eps = human.category_noise[&question.category];
        let mut t = rng.random_range(0..window);
        loop {
            let progress = t as f64 / window as f64;
            let w = 0.5 * (1.0 - progress);
            let own = dirichlet_one(n, rng);
            let mut p: Vec<f64> = (0..n)
                .map(|k| {
                    let soft = (1.0 - w) * outcome[k] + w / n as f64;
                    let noise = config.shared_noise * shared[k] + (1.0 - config.shared_noise) * own[k];
                    (1.0 - eps) * soft + eps * noise
                })
                .collect();
            let total: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= total);
            out.push(Forecast {
                question_id: question.id.clone(),
                forecaster_id: human.id.clone(),
                timestamp: open + Duration::seconds(t),
                probs: p,
            });
            let Some(gap) = &gap else { break };
            let days: f64 = gap.sample(rng);
            t += (days * SECONDS_PER_DAY as f64).ceil() as i64;
            if t >= window {
                break;
            }
        }
    }
    Ok(())
}

fn machine_forecasts(
    config: &SynthConfig,
    question: &Question,
    series: &LatentSeries,
    out: &mut Vec<Forecast>,
) -> Result<()> {
    let mut machines = config.machines.clone();
    machines.sort();
    machines.dedup();
    let n = question.n_options();
    let duration = question.duration_days();
    for (d, day) in question.active_days().into_iter().enumerate() {
        let history = &series.values[..series.open_offset + d];
        let horizon = (duration - d as i64 + 1) as u32;
        for &m in &machines {
            let probs = match m {
                MachineModel::RandomWalk => random_walk_forecast(history, horizon, &series.thresholds)?.into_inner(),
                MachineModel::Ar1 => ar1_forecast(history, horizon, &series.thresholds)?.into_inner(),
                MachineModel::Uniform => vec![1.0 / n as f64; n],
            };
            out.push(Forecast {
                question_id: question.id.clone(),
                forecaster_id: m.forecaster_id().into(),
                timestamp: day.and_hms_opt(6, 0, 0).expect("valid time"),
                probs,
            });
        }
    }
    Ok(())
}
