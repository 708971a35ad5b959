//! Question-level k-fold cross-validation of every aggregator.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{train_with_spec, TrainConfig, TrainingHistory};
use crate::baseline::{BaselineConfig, BaselineModel, Grid, Variant};
use crate::domain::Tournament;
use crate::error::{contract, Result};
use crate::features::{FeatureSpec, WordVectorTable};
use crate::model::{attention_pairs, AttentionPair};
use crate::report::{evaluate, EvaluationReport, QuestionResult};
use crate::rng::{substream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    M0,
    M1,
    M2,
    Attention,
}

impl Aggregator {
    pub const ALL: [Aggregator; 4] = [Aggregator::M0, Aggregator::M1, Aggregator::M2, Aggregator::Attention];

    pub fn name(self) -> &'static str {
        match self {
            Aggregator::M0 => "m0",
            Aggregator::M1 => "m1",
            Aggregator::M2 => "m2",
            Aggregator::Attention => "attention",
        }
    }

    fn variant(self) -> Option<Variant> {
        match self {
            Aggregator::M0 => Some(Variant::M0),
            Aggregator::M1 => Some(Variant::M1),
            Aggregator::M2 => Some(Variant::M2),
            Aggregator::Attention => None,
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Aggregator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Aggregator::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Aggregator::ALL.iter().map(|a| a.name()).collect();
            format!("unknown aggregator `{s}`; valid names: {}", names.join(", "))
        })
    }
}

/// Which fold each question is tested in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub folds: BTreeMap<String, usize>,
}

impl FoldAssignment {
    /// Seeded shuffle of the sorted ids dealt round-robin into `k` folds, so
    /// fold sizes differ by at most one.
    pub fn new(question_ids: &[String], k: usize, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(contract(format!("cross-validation needs k >= 2, got {k}")));
        }
        let mut ids: Vec<&String> = question_ids.iter().collect();
        ids.sort();
        ids.dedup();
        if ids.len() < k {
            return Err(contract(format!("{} questions cannot fill {k} folds", ids.len())));
        }
        ids.shuffle(&mut substream(seed, Stream::Folds));
        let folds = ids.into_iter().enumerate().map(|(i, id)| (id.clone(), i % k)).collect();
        Ok(Self { k, folds })
    }

    pub fn fold_of(&self, question_id: &str) -> Option<usize> {
        self.folds.get(question_id).copied()
    }

    pub fn test_ids(&self, fold: usize) -> HashSet<String> {
        self.folds
            .iter()
            .filter(|(_, &f)| f == fold)
            .map(|(id, _)| id.clone())
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &f in self.folds.values() {
            s[f] += 1;
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct CvOptions {
    pub k: usize,
    pub seed: u64,
    pub aggregators: Vec<Aggregator>,
    pub train: TrainConfig,
    pub grid: Grid,
    pub words: WordVectorTable,
}

impl CvOptions {
    /// Five folds, every aggregator, desk-scale training.
    pub fn new(seed: u64) -> Self {
        Self {
            k: 5,
            seed,
            aggregators: Aggregator::ALL.to_vec(),
            train: TrainConfig {
                seed,
                ..TrainConfig::desk_scale()
            },
            grid: Grid::default(),
            words: WordVectorTable::builtin(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AggregatorRun {
    pub aggregator: Aggregator,
    /// Held-out daily outputs, in question order.
    pub results: Vec<QuestionResult>,
    pub fold_reports: Vec<EvaluationReport>,
    /// Metrics pooled over all held-out questions.
    pub report: EvaluationReport,
    /// Attention only: one history per fold.
    pub histories: Vec<TrainingHistory>,
    /// Attention only: every held-out (weight, forecast Brier) pair.
    pub attention_pairs: Vec<AttentionPair>,
    /// Baselines only: the grid-selected configuration per fold.
    pub baseline_configs: Vec<BaselineConfig>,
}

#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub assignment: FoldAssignment,
    pub runs: Vec<AggregatorRun>,
}

impl CrossValidation {
    pub fn run(&self, aggregator: Aggregator) -> Option<&AggregatorRun> {
        self.runs.iter().find(|r| r.aggregator == aggregator)
    }
}

#[derive(Default)]
struct Collected {
    results: Vec<QuestionResult>,
    fold_reports: Vec<EvaluationReport>,
    histories: Vec<TrainingHistory>,
    pairs: Vec<AttentionPair>,
    configs: Vec<BaselineConfig>,
}

/// Trains every requested aggregator on `k - 1` folds and scores it on the
/// held-out fold, for each fold. Nothing about a held-out question (its
/// forecasts included) reaches the parameters used to aggregate it.
pub fn cross_validate(tournament: &Tournament, opts: &CvOptions) -> Result<CrossValidation> {
    let ids: Vec<String> = tournament.questions().iter().map(|q| q.id.clone()).collect();
    let assignment = FoldAssignment::new(&ids, opts.k, opts.seed)?;
    let spec = FeatureSpec::from_questions(tournament.questions(), opts.train.model.forecast_time_dim);
    let mut aggregators = opts.aggregators.clone();
    aggregators.sort();
    aggregators.dedup();

    let mut per_agg: Vec<Collected> = aggregators.iter().map(|_| Collected::default()).collect();

    for fold in 0..opts.k {
        let test_ids = assignment.test_ids(fold);
        let train_ids: HashSet<String> = ids.iter().filter(|id| !test_ids.contains(*id)).cloned().collect();
        let train_t = tournament.with_questions(&train_ids);
        let test_qs: Vec<_> = tournament
            .questions()
            .iter()
            .filter(|q| test_ids.contains(&q.id))
            .collect();

        for (slot, &agg) in aggregators.iter().enumerate() {
            let acc = &mut per_agg[slot];
            let mut fold_results = Vec::with_capacity(test_qs.len());
            match agg.variant() {
                Some(variant) => {
                    let model = BaselineModel::fit(&train_t, variant, &opts.grid)?;
                    for q in &test_qs {
                        fold_results.push(QuestionResult {
                            question_id: q.id.clone(),
                            fold,
                            daily: model.daily_series(tournament, q)?,
                        });
                    }
                    acc.configs.push(model.config);
                }
                None => {
                    let (model, history) = train_with_spec(&train_t, &opts.train, &opts.words, spec.clone())?;
                    for q in &test_qs {
                        let prepared = model.prepare(tournament, q, &opts.words, opts.train.use_forecaster_ids)?;
                        let outputs = model.daily_series(&prepared);
                        acc.pairs.extend(attention_pairs(&prepared, &outputs));
                        fold_results.push(QuestionResult {
                            question_id: q.id.clone(),
                            fold,
                            daily: outputs.into_iter().map(|o| o.probs).collect(),
                        });
                    }
                    acc.histories.push(history);
                }
            }
            acc.fold_reports.push(evaluate(agg.name(), tournament, &fold_results)?);
            acc.results.extend(fold_results);
        }
    }

    let order: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut runs = Vec::with_capacity(aggregators.len());
    for (agg, mut acc) in aggregators.into_iter().zip(per_agg) {
        acc.results.sort_by_key(|r| order[r.question_id.as_str()]);
        let report = evaluate(agg.name(), tournament, &acc.results)?;
        runs.push(AggregatorRun {
            aggregator: agg,
            results: acc.results,
            fold_reports: acc.fold_reports,
            report,
            histories: acc.histories,
            attention_pairs: acc.pairs,
            baseline_configs: acc.configs,
        });
    }
    Ok(CrossValidation { assignment, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdata::{generate, SynthConfig};

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("q{i:03}")).collect()
    }

    #[test]
    fn folds_partition_questions() {
        let a = FoldAssignment::new(&ids(60), 5, 1).unwrap();
        assert_eq!(a.sizes(), vec![12; 5]);
        let b = FoldAssignment::new(&ids(375), 5, 1).unwrap();
        assert_eq!(b.sizes(), vec![75; 5]);
        let mut seen = HashSet::new();
        for f in 0..5 {
            for id in a.test_ids(f) {
                assert!(seen.insert(id));
            }
        }
        assert_eq!(seen.len(), 60);
        assert_eq!(a, FoldAssignment::new(&ids(60), 5, 1).unwrap());
        assert_ne!(a, FoldAssignment::new(&ids(60), 5, 2).unwrap());
        assert_eq!(FoldAssignment::new(&ids(7), 3, 0).unwrap().sizes(), vec![3, 2, 2]);
        assert!(FoldAssignment::new(&ids(4), 5, 0).is_err());
        assert!(FoldAssignment::new(&ids(4), 1, 0).is_err());
    }

    #[test]
    fn aggregator_names_round_trip() {
        for a in Aggregator::ALL {
            assert_eq!(a.name().parse::<Aggregator>().unwrap(), a);
        }
        let err = "m3".parse::<Aggregator>().unwrap_err();
        assert!(err.contains("m0, m1, m2, attention"), "{err}");
    }

    #[test]
    fn every_question_is_scored_once_per_aggregator() {
        let t = generate(&SynthConfig {
            n_questions: 8,
            n_humans: 15,
            participants_per_question: 6,
            min_duration_days: 2,
            max_duration_days: 4,
            seed: 3,
            ..SynthConfig::default()
        })
        .unwrap();
        let mut opts = CvOptions::new(7);
        opts.k = 4;
        opts.train.max_epochs = 2;
        opts.train.model = crate::model::tests::small_config();
        opts.grid = Grid {
            lambdas: vec![0.9, 1.0],
            gammas: vec![0.0, 1.0],
            alphas: vec![1.0, 2.0],
        };
        let cv = cross_validate(&t, &opts).unwrap();
        assert_eq!(cv.runs.len(), 4);
        for run in &cv.runs {
            assert_eq!(run.results.len(), 8);
            assert_eq!(run.fold_reports.len(), 4);
            assert_eq!(run.report.summary.n, 8);
            for r in &run.results {
                assert_eq!(cv.assignment.fold_of(&r.question_id), Some(r.fold));
            }
        }
        let att = cv.run(Aggregator::Attention).unwrap();
        assert_eq!(att.histories.len(), 4);
        assert!(!att.attention_pairs.is_empty());
        for (fold, h) in att.histories.iter().enumerate() {
            let held_out = cv.assignment.test_ids(fold);
            assert!(h
                .train_questions
                .iter()
                .chain(&h.validation_questions)
                .all(|q| !held_out.contains(q)));
        }
        assert_eq!(cv.run(Aggregator::M2).unwrap().baseline_configs.len(), 4);
        let again = cross_validate(&t, &opts).unwrap();
        for (a, b) in cv.runs.iter().zip(&again.runs) {
            assert_eq!(a.report, b.report);
        }
    }
}
