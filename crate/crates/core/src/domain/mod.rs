//! Tournament data model: questions, forecasters, timestamped forecasts.
//!
//! A [`Tournament`] keeps a per-question index of its forecasts sorted by
//! `(timestamp, forecaster_id, insertion order)`, so "what was visible at time
//! `t`" is always a prefix of that list.

mod io;

use std::collections::{HashMap, HashSet};

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{read_forecasters, read_forecasts, read_questions, read_tournament, write_tournament};
pub use io::{FORECASTERS_FILE, FORECASTS_FILE, QUESTIONS_FILE};

/// Largest number of answer options a question may have.
pub const MAX_OPTIONS: usize = 5;

/// Tolerance on the sum of a probability vector.
pub const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
    pub option_labels: Vec<String>,
    pub is_ordinal: bool,
    pub category: String,
    pub open_date: NaiveDate,
    pub close_date: NaiveDate,
    pub resolved_index: usize,
}

impl Question {
    pub fn n_options(&self) -> usize {
        self.option_labels.len()
    }

    /// One-hot vector on the resolved option.
    pub fn outcome(&self) -> Vec<f64> {
        let mut o = vec![0.0; self.n_options()];
        if let Some(slot) = o.get_mut(self.resolved_index) {
            *slot = 1.0;
        }
        o
    }

    /// `close_date - open_date` in days. A question open for a single day has
    /// duration 0.
    pub fn duration_days(&self) -> i64 {
        (self.close_date - self.open_date).num_days()
    }

    pub fn active_days(&self) -> Vec<NaiveDate> {
        active_days(self)
    }

    /// Zero-based day index of `day` relative to the open date.
    pub fn day_index(&self, day: NaiveDate) -> i64 {
        (day - self.open_date).num_days()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForecasterKind {
    Human,
    Machine,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Forecaster {
    pub id: String,
    pub kind: ForecasterKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub question_id: String,
    pub forecaster_id: String,
    pub timestamp: NaiveDateTime,
    pub probs: Vec<f64>,
}

/// Last representable instant of `day` at second resolution.
///
/// Daily aggregates use an end-of-day cutoff: anything forecast on day `D`
/// is visible to the aggregate for `D`.
pub fn end_of_day(day: NaiveDate) -> NaiveDateTime {
    day.and_time(NaiveTime::from_hms_opt(23, 59, 59).expect("valid time"))
}

/// Inclusive list of calendar days from open to close.
pub fn active_days(question: &Question) -> Vec<NaiveDate> {
    question
        .open_date
        .iter_days()
        .take_while(|d| *d <= question.close_date)
        .collect()
}

/// Keeps each forecaster's most recent forecast. Among equal timestamps the
/// one appearing later in the input wins. Survivors keep their input order.
pub fn latest_per_forecaster<'a>(forecasts: &[&'a Forecast]) -> Vec<&'a Forecast> {
    let mut best: HashMap<&str, usize> = HashMap::new();
    for (i, f) in forecasts.iter().enumerate() {
        best.entry(f.forecaster_id.as_str())
            .and_modify(|j| {
                if f.timestamp >= forecasts[*j].timestamp {
                    *j = i;
                }
            })
            .or_insert(i);
    }
    let keep: HashSet<usize> = best.into_values().collect();
    forecasts
        .iter()
        .enumerate()
        .filter(|(i, _)| keep.contains(i))
        .map(|(_, f)| *f)
        .collect()
}

/// Questions, forecasters and forecasts with per-question time ordering.
#[derive(Debug, Clone, Default)]
pub struct Tournament {
    questions: Vec<Question>,
    forecasters: Vec<Forecaster>,
    forecasts: Vec<Forecast>,
    question_index: HashMap<String, usize>,
    forecaster_index: HashMap<String, usize>,
    by_question: HashMap<String, Vec<usize>>,
}

impl Tournament {
    /// Builds the indexes. Dangling references are kept in `forecasts` (so
    /// [`validate`] can report them) but are never returned by queries.
    pub fn new(questions: Vec<Question>, forecasters: Vec<Forecaster>, forecasts: Vec<Forecast>) -> Self {
        let mut question_index = HashMap::new();
        for (i, q) in questions.iter().enumerate() {
            question_index.entry(q.id.clone()).or_insert(i);
        }
        let mut forecaster_index = HashMap::new();
        for (i, f) in forecasters.iter().enumerate() {
            forecaster_index.entry(f.id.clone()).or_insert(i);
        }
        let mut by_question: HashMap<String, Vec<usize>> =
            questions.iter().map(|q| (q.id.clone(), Vec::new())).collect();
        for (i, f) in forecasts.iter().enumerate() {
            if let Some(list) = by_question.get_mut(&f.question_id) {
                list.push(i);
            }
        }
        for list in by_question.values_mut() {
            list.sort_by(|&a, &b| {
                let (fa, fb) = (&forecasts[a], &forecasts[b]);
                fa.timestamp
                    .cmp(&fb.timestamp)
                    .then_with(|| fa.forecaster_id.cmp(&fb.forecaster_id))
                    .then(a.cmp(&b))
            });
        }
        Self {
            questions,
            forecasters,
            forecasts,
            question_index,
            forecaster_index,
            by_question,
        }
    }

    pub fn questions(&self) -> &[Question] {
        &self.questions
    }

    pub fn forecasters(&self) -> &[Forecaster] {
        &self.forecasters
    }

    /// All forecasts in insertion order.
    pub fn forecasts(&self) -> &[Forecast] {
        &self.forecasts
    }

    pub fn question(&self, id: &str) -> Result<&Question> {
        self.question_index
            .get(id)
            .map(|&i| &self.questions[i])
            .ok_or_else(|| Error::UnknownId {
                kind: "question",
                id: id.to_string(),
            })
    }

    pub fn forecaster(&self, id: &str) -> Option<&Forecaster> {
        self.forecaster_index.get(id).map(|&i| &self.forecasters[i])
    }

    /// Every forecast on a question, time-ordered.
    pub fn question_forecasts(&self, question_id: &str) -> Result<Vec<&Forecast>> {
        let idx = self.by_question.get(question_id).ok_or_else(|| Error::UnknownId {
            kind: "question",
            id: question_id.to_string(),
        })?;
        Ok(idx.iter().map(|&i| &self.forecasts[i]).collect())
    }

    /// Forecasts on `question_id` with `timestamp <= t`, time-ordered with
    /// ties broken by forecaster id and then insertion order.
    pub fn forecasts_before(&self, question_id: &str, t: NaiveDateTime) -> Result<Vec<&Forecast>> {
        let all = self.question_forecasts(question_id)?;
        let cut = all.partition_point(|f| f.timestamp <= t);
        Ok(all[..cut].to_vec())
    }

    /// Forecasts visible to the aggregate for `day`.
    pub fn visible_on(&self, question_id: &str, day: NaiveDate) -> Result<Vec<&Forecast>> {
        self.forecasts_before(question_id, end_of_day(day))
    }

    /// Restriction to a set of questions, keeping every forecaster.
    pub fn with_questions(&self, ids: &HashSet<String>) -> Tournament {
        let questions = self.questions.iter().filter(|q| ids.contains(&q.id)).cloned().collect();
        let forecasts = self
            .forecasts
            .iter()
            .filter(|f| ids.contains(&f.question_id))
            .cloned()
            .collect();
        Tournament::new(questions, self.forecasters.clone(), forecasts)
    }

    /// Keeps only forecasts satisfying `keep`. Questions left without any
    /// forecast are dropped.
    pub fn filter_forecasts(&self, mut keep: impl FnMut(&Forecast, Option<&Forecaster>) -> bool) -> Tournament {
        let forecasts: Vec<Forecast> = self
            .forecasts
            .iter()
            .filter(|f| keep(f, self.forecaster(&f.forecaster_id)))
            .cloned()
            .collect();
        let live: HashSet<&str> = forecasts.iter().map(|f| f.question_id.as_str()).collect();
        let questions = self
            .questions
            .iter()
            .filter(|q| live.contains(q.id.as_str()))
            .cloned()
            .collect();
        Tournament::new(questions, self.forecasters.clone(), forecasts)
    }

    pub fn into_parts(self) -> (Vec<Question>, Vec<Forecaster>, Vec<Forecast>) {
        (self.questions, self.forecasters, self.forecasts)
    }
}

/// Where a violation was found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "at", rename_all = "snake_case")]
pub enum Locator {
    Question(String),
    Forecaster(String),
    /// Index into [`Tournament::forecasts`].
    Forecast(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub locator: Locator,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, locator: Locator, message: impl Into<String>) {
        self.violations.push(Violation {
            locator,
            message: message.into(),
        });
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.violations {
            let at = match &v.locator {
                Locator::Question(id) => format!("question {id}"),
                Locator::Forecaster(id) => format!("forecaster {id}"),
                Locator::Forecast(i) => format!("forecast #{i}"),
            };
            writeln!(f, "{at}: {}", v.message)?;
        }
        Ok(())
    }
}

/// Lists every invariant violation in the tournament. Never fails.
pub fn validate(tournament: &Tournament) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = HashSet::new();
    for q in &tournament.questions {
        let at = || Locator::Question(q.id.clone());
        if !seen.insert(q.id.as_str()) {
            report.push(at(), "duplicate question id");
        }
        let n = q.n_options();
        if !(2..=MAX_OPTIONS).contains(&n) {
            report.push(at(), format!("has {n} options, expected 2..={MAX_OPTIONS}"));
        }
        if q.open_date > q.close_date {
            report.push(
                at(),
                format!("open date {} after close date {}", q.open_date, q.close_date),
            );
        }
        if q.resolved_index >= n {
            report.push(
                at(),
                format!("resolved index {} out of range for {n} options", q.resolved_index),
            );
        }
    }

    let mut seen = HashSet::new();
    for f in &tournament.forecasters {
        if !seen.insert(f.id.as_str()) {
            report.push(Locator::Forecaster(f.id.clone()), "duplicate forecaster id");
        }
    }

    for (i, f) in tournament.forecasts.iter().enumerate() {
        let at = || Locator::Forecast(i);
        if tournament.forecaster(&f.forecaster_id).is_none() {
            report.push(at(), format!("unknown forecaster `{}`", f.forecaster_id));
        }
        let Ok(q) = tournament.question(&f.question_id) else {
            report.push(at(), format!("unknown question `{}`", f.question_id));
            continue;
        };
        if f.probs.len() != q.n_options() {
            report.push(
                at(),
                format!("has {} probabilities for {} options", f.probs.len(), q.n_options()),
            );
        }
        if f.probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            report.push(at(), "probability outside [0, 1]");
        }
        let sum: f64 = f.probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            report.push(at(), format!("probabilities sum to {sum}"));
        }
        let day = f.timestamp.date();
        if day < q.open_date || day > q.close_date {
            report.push(
                at(),
                format!("timestamp {} outside [{}, {}]", f.timestamp, q.open_date, q.close_date),
            );
        }
    }

    for q in &tournament.questions {
        if tournament.by_question.get(&q.id).is_none_or(|v| v.is_empty()) {
            report.push(Locator::Question(q.id.clone()), "question has no forecasts");
        }
    }
    report
}
