//! Evaluation reports and their CSV exports.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::domain::{end_of_day, Question, Tournament};
use crate::error::{contract, Result};
use crate::model::AttentionPair;
use crate::scoring::{
    self, calibration, expand_one_vs_rest, mmdb, rank_percentile, roc_auc, score_summary, time_profile,
    CalibrationBins, RocCurve, ScoreSummary,
};

/// An aggregator's daily outputs on one held-out question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionResult {
    pub question_id: String,
    pub fold: usize,
    /// One distribution per active day.
    pub daily: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionScore {
    pub question_id: String,
    pub fold: usize,
    pub mdb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyBrier {
    pub question_id: String,
    pub day: NaiveDate,
    pub brier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankPercentile {
    pub question_id: String,
    pub percentile: f64,
    pub aggregate_mdb: f64,
    /// Number of individual forecasters ranked against.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub aggregator: String,
    pub mmdb: f64,
    pub summary: ScoreSummary,
    pub calibration: CalibrationBins,
    pub roc: RocCurve,
    pub rank_percentiles: Vec<RankPercentile>,
    pub time_profile: Vec<f64>,
    pub question_scores: Vec<QuestionScore>,
    pub daily_briers: Vec<DailyBrier>,
}

/// Each forecaster's mean daily Brier on `question`, counted from the day of
/// their first forecast to the close date with their latest forecast carried
/// forward. Sorted by forecaster id.
pub fn individual_scores(tournament: &Tournament, question: &Question) -> Result<Vec<(String, f64)>> {
    let forecasts = tournament.question_forecasts(&question.id)?;
    let outcome = question.outcome();
    let mut latest: BTreeMap<&str, f64> = BTreeMap::new();
    let mut totals: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    let mut next = 0;
    for day in question.active_days() {
        let cut = end_of_day(day);
        while next < forecasts.len() && forecasts[next].timestamp <= cut {
            let f = forecasts[next];
            latest.insert(
                &f.forecaster_id,
                scoring::brier(&f.probs, &outcome, question.is_ordinal)?,
            );
            next += 1;
        }
        for (&id, &b) in &latest {
            let e = totals.entry(id).or_default();
            e.0 += b;
            e.1 += 1;
        }
    }
    Ok(totals
        .into_iter()
        .map(|(id, (sum, n))| (id.to_string(), sum / n as f64))
        .collect())
}

/// Scores an aggregator's held-out outputs against `tournament`.
pub fn evaluate(aggregator: &str, tournament: &Tournament, results: &[QuestionResult]) -> Result<EvaluationReport> {
    if results.is_empty() {
        return Err(contract("evaluation of zero questions"));
    }
    let mut question_scores = Vec::with_capacity(results.len());
    let mut daily_briers = Vec::new();
    let mut per_question_daily = Vec::with_capacity(results.len());
    let mut pairs = Vec::new();
    let mut rank_percentiles = Vec::with_capacity(results.len());
    for r in results {
        let q = tournament.question(&r.question_id)?;
        let mdb = scoring::question_score(&r.daily, q)?;
        let outcome = q.outcome();
        let mut series = Vec::with_capacity(r.daily.len());
        for (day, p) in q.active_days().into_iter().zip(&r.daily) {
            let b = scoring::brier(p, &outcome, q.is_ordinal)?;
            series.push(b);
            daily_briers.push(DailyBrier {
                question_id: q.id.clone(),
                day,
                brier: b,
            });
            pairs.extend(expand_one_vs_rest(p, q.resolved_index));
        }
        per_question_daily.push(series);
        let individuals: Vec<f64> = individual_scores(tournament, q)?.into_iter().map(|(_, s)| s).collect();
        rank_percentiles.push(RankPercentile {
            question_id: q.id.clone(),
            percentile: rank_percentile(mdb, &individuals),
            aggregate_mdb: mdb,
            count: individuals.len(),
        });
        question_scores.push(QuestionScore {
            question_id: q.id.clone(),
            fold: r.fold,
            mdb,
        });
    }
    let mdbs: Vec<f64> = question_scores.iter().map(|s| s.mdb).collect();
    Ok(EvaluationReport {
        aggregator: aggregator.to_string(),
        mmdb: mmdb(&mdbs)?,
        summary: score_summary(&mdbs)?,
        calibration: calibration(&pairs),
        roc: roc_auc(&pairs)?,
        rank_percentiles,
        time_profile: time_profile(&per_question_daily)?,
        question_scores,
        daily_briers,
    })
}

/// One row of `brier_summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub aggregator: String,
    /// Fold index, or `all` for the pooled row.
    pub fold: String,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
}

impl SummaryRow {
    pub fn new(aggregator: &str, fold: impl Into<String>, s: &ScoreSummary) -> Self {
        Self {
            aggregator: aggregator.into(),
            fold: fold.into(),
            n: s.n,
            mean: s.mean,
            variance: s.variance,
            q25: s.q25,
            q50: s.q50,
            q75: s.q75,
        }
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CalibrationRow {
    bin: usize,
    lower: f64,
    upper: f64,
    count: usize,
    positives: usize,
    mean_predicted: Option<f64>,
    value: Option<f64>,
}

#[derive(Serialize)]
struct RocRow {
    point: usize,
    fpr: f64,
    tpr: f64,
    auc: f64,
}

#[derive(Serialize)]
struct ProfileRow {
    bin: usize,
    value: f64,
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_rows(path, rows)
}

/// Columns: `bin,lower,upper,count,positives,mean_predicted,value` where
/// `value` is the observed frequency (empty for empty bins).
pub fn write_calibration_csv(path: &Path, bins: &CalibrationBins) -> Result<()> {
    write_rows(
        path,
        bins.bins.iter().enumerate().map(|(i, b)| CalibrationRow {
            bin: i,
            lower: b.lower,
            upper: b.upper,
            count: b.count,
            positives: b.positives,
            mean_predicted: b.mean_predicted,
            value: b.frequency,
        }),
    )
}

pub fn write_roc_csv(path: &Path, roc: &RocCurve) -> Result<()> {
    write_rows(
        path,
        roc.points.iter().enumerate().map(|(i, p)| RocRow {
            point: i,
            fpr: p.fpr,
            tpr: p.tpr,
            auc: roc.auc,
        }),
    )
}

pub fn write_rank_percentiles_csv(path: &Path, rows: &[RankPercentile]) -> Result<()> {
    write_rows(path, rows)
}

pub fn write_time_profile_csv(path: &Path, curve: &[f64]) -> Result<()> {
    write_rows(
        path,
        curve.iter().enumerate().map(|(bin, &value)| ProfileRow { bin, value }),
    )
}

pub fn write_question_scores_csv(path: &Path, rows: &[QuestionScore]) -> Result<()> {
    write_rows(path, rows)
}

pub fn write_daily_briers_csv(path: &Path, rows: &[DailyBrier]) -> Result<()> {
    write_rows(path, rows)
}

pub fn write_attention_csv(path: &Path, pairs: &[AttentionPair]) -> Result<()> {
    write_rows(path, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::tests::{at, forecast, question};
    use crate::domain::{Forecaster, ForecasterKind};
    use approx::assert_abs_diff_eq;

    fn toy() -> Tournament {
        let q = question("q", 2, "2018-07-01", "2018-07-03");
        let people = ["a", "b"]
            .iter()
            .map(|id| Forecaster {
                id: id.to_string(),
                kind: ForecasterKind::Human,
            })
            .collect();
        Tournament::new(
            vec![q],
            people,
            vec![
                forecast("q", "a", at("2018-07-01", 3), &[0.5, 0.5]),
                forecast("q", "a", at("2018-07-02", 3), &[1.0, 0.0]),
                forecast("q", "b", at("2018-07-03", 3), &[0.0, 1.0]),
            ],
        )
    }

    #[test]
    fn individuals_carry_forward_from_first_forecast() {
        let t = toy();
        let s = individual_scores(&t, &t.questions()[0]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].0, "a");
        assert_abs_diff_eq!(s[0].1, 0.5 / 3.0, epsilon = 1e-12);
        assert_eq!(s[1], ("b".to_string(), 2.0));
    }

    #[test]
    fn evaluation_bundles_every_metric() {
        let t = toy();
        let daily = vec![vec![0.6, 0.4], vec![0.8, 0.2], vec![0.9, 0.1]];
        let r = evaluate(
            "m0",
            &t,
            &[QuestionResult {
                question_id: "q".into(),
                fold: 0,
                daily: daily.clone(),
            }],
        )
        .unwrap();
        let expect = (0.32 + 0.08 + 0.02) / 3.0;
        assert_abs_diff_eq!(r.mmdb, expect, epsilon = 1e-12);
        assert_eq!(r.summary.n, 1);
        assert_eq!(r.calibration.total(), 6);
        assert_eq!(r.roc.auc, 1.0);
        assert_eq!(r.rank_percentiles[0].percentile, 0.0);
        assert_eq!(r.time_profile.len(), 100);
        assert_eq!(r.daily_briers.len(), 3);

        let json = serde_json::to_value(&r).unwrap();
        for key in [
            "mmdb",
            "summary",
            "calibration",
            "roc",
            "rank_percentiles",
            "time_profile",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert!(evaluate("m0", &t, &[]).is_err());
    }

    #[test]
    fn csv_headers_are_stable() {
        let t = toy();
        let r = evaluate(
            "m1",
            &t,
            &[QuestionResult {
                question_id: "q".into(),
                fold: 0,
                daily: vec![vec![0.5, 0.5]; 3],
            }],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = |name: &str| dir.path().join(name);
        write_calibration_csv(&p("c.csv"), &r.calibration).unwrap();
        write_roc_csv(&p("r.csv"), &r.roc).unwrap();
        write_time_profile_csv(&p("t.csv"), &r.time_profile).unwrap();
        write_rank_percentiles_csv(&p("k.csv"), &r.rank_percentiles).unwrap();
        write_summary_csv(&p("s.csv"), &[SummaryRow::new("m1", "all", &r.summary)]).unwrap();
        let head = |name: &str| {
            std::fs::read_to_string(p(name))
                .unwrap()
                .lines()
                .next()
                .unwrap()
                .to_string()
        };
        assert_eq!(head("c.csv"), "bin,lower,upper,count,positives,mean_predicted,value");
        assert_eq!(head("r.csv"), "point,fpr,tpr,auc");
        assert_eq!(head("t.csv"), "bin,value");
        assert_eq!(head("k.csv"), "question_id,percentile,aggregate_mdb,count");
        assert_eq!(head("s.csv"), "aggregator,fold,n,mean,variance,q25,q50,q75");
    }
}
