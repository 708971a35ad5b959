//! Training the anchor-attention model: MMDB loss with exact gradients, Adam,
//! the plateau schedule, and question-level cross-validation.

pub mod ablation;
pub mod adam;
pub mod cv;
pub mod gradcheck;
pub mod schedule;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Question, Tournament};
use crate::error::{contract, Error, Result};
use crate::features::{FeatureSpec, ForecastFeatures, WordVectorTable};
use crate::linalg::Matrix;
use crate::model::{
    head, head_backward, project, projection_backward, AnchorModel, Gradients, ModelConfig, ModelParams,
    PreparedQuestion,
};
use crate::rng::{substream, Stream};
use crate::scoring;

pub use ablation::{ablation_run, ablation_table, AblationCell, FeatureToggle, SourceToggle};
pub use adam::{adam_step, AdamState};
pub use cv::{cross_validate, Aggregator, AggregatorRun, CrossValidation, CvOptions, FoldAssignment};
pub use schedule::{PlateauSchedule, ScheduleEvent};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub lr_decay_factor: f64,
    /// Epochs without a new best validation loss before each decay.
    pub lr_decay_patience: usize,
    /// Epochs without a new best validation loss before restoring the best
    /// weights.
    pub reset_patience: usize,
    pub dropout_rate: f64,
    /// Share of training questions held out for the schedule.
    pub validation_fraction: f64,
    /// When false every forecast uses the shared unknown-forecaster embedding.
    pub use_forecaster_ids: bool,
    /// Forecasters seen on fewer training questions than this share the
    /// unknown-forecaster row, which is then trained like any other.
    pub min_forecaster_questions: usize,
    /// Relabel the options of every training question each epoch so the model
    /// cannot tie outcomes to option positions: categorical questions are
    /// shuffled, ordinal ones reversed with probability one half.
    pub permute_options: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            learning_rate: 1e-4,
            batch_size: 256,
            max_epochs: 100,
            lr_decay_factor: 0.95,
            lr_decay_patience: 5,
            reset_patience: 20,
            dropout_rate: 0.1,
            validation_fraction: 0.15,
            use_forecaster_ids: true,
            min_forecaster_questions: 1,
            permute_options: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Sized for tournaments of a few dozen questions on a single core: a
    /// two-dimensional forecaster embedding, no sinusoidal forecast-time
    /// feature, heavier dropout and small batches. Forecasters seen on fewer
    /// than three training questions share the unknown embedding row.
    pub fn desk_scale() -> Self {
        Self {
            model: ModelConfig {
                forecaster_dim: 2,
                key_dim: 16,
                time_dim: 16,
                forecast_time_dim: 0,
            },
            learning_rate: 3e-3,
            batch_size: 8,
            max_epochs: 150,
            dropout_rate: 0.3,
            min_forecaster_questions: 3,
            permute_options: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lr_decay_patience == 0 || self.reset_patience == 0 || self.batch_size == 0 || self.max_epochs == 0 {
            return Err(contract("patience, batch size and epoch count must be positive"));
        }
        let m = &self.model;
        if m.forecaster_dim == 0 || m.key_dim == 0 || m.time_dim == 0 {
            return Err(contract("model dimensions must be positive"));
        }
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        if !unit(self.learning_rate) || !unit(self.lr_decay_factor) {
            return Err(contract("learning rate and decay factor must be in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(contract("dropout rate must be in [0, 1)"));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(contract("validation fraction must be in (0, 1)"));
        }
        Ok(())
    }
}

/// An aggregation target: question `question` (index into the prepared
/// slice) on its `day`-th active day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Target {
    pub question: usize,
    pub day: usize,
}

/// Every (question, day) pair with at least one visible forecast.
pub fn targets(prepared: &[PreparedQuestion]) -> Vec<Target> {
    prepared
        .iter()
        .enumerate()
        .flat_map(|(q, p)| {
            p.visible
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0)
                .map(move |(day, _)| Target { question: q, day })
        })
        .collect()
}

fn check_targets(prepared: &[PreparedQuestion], targets: &[Target]) -> Result<()> {
    for t in targets {
        let visible = prepared
            .get(t.question)
            .and_then(|p| p.visible.get(t.day))
            .ok_or_else(|| contract(format!("target {t:?} out of range")))?;
        if *visible == 0 {
            return Err(Error::NoForecasts(prepared[t.question].question.id.clone()));
        }
    }
    Ok(())
}

/// Mean Brier of the model's aggregates over `targets`, with dropout off.
pub fn loss(params: &ModelParams, prepared: &[PreparedQuestion], targets: &[Target]) -> Result<f64> {
    evaluate_batch(params, prepared, targets, None, false).map(|(l, _)| l)
}

/// Loss and its exact gradient. `masks[i]` optionally fixes which visible
/// forecasts target `i` keeps under dropout.
pub fn loss_and_gradients(
    params: &ModelParams,
    prepared: &[PreparedQuestion],
    targets: &[Target],
    masks: Option<&[Vec<bool>]>,
) -> Result<(f64, Gradients)> {
    let (l, g) = evaluate_batch(params, prepared, targets, masks, true)?;
    Ok((l, g.expect("gradients requested")))
}

pub fn gradients(
    params: &ModelParams,
    prepared: &[PreparedQuestion],
    targets: &[Target],
    masks: Option<&[Vec<bool>]>,
) -> Result<Gradients> {
    loss_and_gradients(params, prepared, targets, masks).map(|(_, g)| g)
}

fn evaluate_batch(
    params: &ModelParams,
    prepared: &[PreparedQuestion],
    targets: &[Target],
    masks: Option<&[Vec<bool>]>,
    want_grads: bool,
) -> Result<(f64, Option<Gradients>)> {
    if targets.is_empty() {
        return Err(contract("loss over an empty batch"));
    }
    check_targets(prepared, targets)?;
    if let Some(m) = masks {
        if m.len() != targets.len() {
            return Err(contract("one dropout mask per target required"));
        }
    }
    let d_k = params.w_k.cols;
    let scale = 1.0 / targets.len() as f64;
    let mut grads = want_grads.then(|| Gradients::zeros_like(params));
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by_key(|&i| targets[i]);

    let mut total = 0.0;
    let mut start = 0;
    while start < order.len() {
        let qi = targets[order[start]].question;
        let end = start
            + order[start..]
                .iter()
                .take_while(|&&i| targets[i].question == qi)
                .count();
        let group = &order[start..end];
        start = end;

        let p = &prepared[qi];
        let n = p.question.n_options();
        let outcome = p.outcome();
        let span = group
            .iter()
            .map(|&i| p.visible[targets[i].day])
            .max()
            .expect("nonempty group");
        let feats: Vec<&ForecastFeatures> = p.inputs[..span].iter().map(|x| &x.features).collect();
        let proj = project(params, &feats, d_k);
        let (mut dk, mut dv) = (Matrix::zeros(span, d_k), Matrix::zeros(span, d_k));
        for &i in group {
            let t = targets[i];
            let visible = p.visible[t.day];
            let keep = masks.map(|m| m[i].as_slice());
            if keep.is_some_and(|k| k.len() != visible) {
                return Err(contract("dropout mask length differs from visible count"));
            }
            let q_in = &p.query_inputs[t.day];
            let trace = head(params, q_in, &proj, visible, n, keep);
            let out = &trace.probs[..n];
            total += scoring::brier(out, &outcome, p.question.is_ordinal)?;
            if let Some(g) = grads.as_mut() {
                let mut d = scoring::brier_grad(out, &outcome, p.question.is_ordinal)?;
                d.iter_mut().for_each(|x| *x *= scale);
                head_backward(params, q_in, &proj, &trace, keep, &d, g, &mut dk, &mut dv);
            }
        }
        if let Some(g) = grads.as_mut() {
            projection_backward(params, &proj, &dk, &dv, span, g);
        }
    }
    Ok((total * scale, grads))
}

/// Per-target dropout masks drawn with keep probability `1 - rate`.
pub fn dropout_masks<R: Rng + ?Sized>(
    prepared: &[PreparedQuestion],
    targets: &[Target],
    rate: f64,
    rng: &mut R,
) -> Vec<Vec<bool>> {
    targets
        .iter()
        .map(|t| {
            let visible = prepared[t.question].visible[t.day];
            (0..visible).map(|_| rng.random::<f64>() >= rate).collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Learning rate used during the epoch.
    pub lr: f64,
    pub improved: bool,
    pub decayed: bool,
    pub reset: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub train_questions: Vec<String>,
    pub validation_questions: Vec<String>,
}

/// Writes `fold,epoch,train_loss,val_loss,lr,improved,decayed,reset` rows.
pub fn write_history_csv(path: &Path, histories: &[TrainingHistory]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record([
        "fold",
        "epoch",
        "train_loss",
        "val_loss",
        "lr",
        "improved",
        "decayed",
        "reset",
    ])?;
    for (fold, h) in histories.iter().enumerate() {
        for r in &h.epochs {
            w.serialize((
                fold,
                r.epoch,
                r.train_loss,
                r.val_loss,
                r.lr,
                r.improved,
                r.decayed,
                r.reset,
            ))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Forecasters with forecasts on at least `min_questions` of `questions`,
/// sorted.
pub fn active_forecasters<'a>(
    tournament: &Tournament,
    questions: impl IntoIterator<Item = &'a Question>,
    min_questions: usize,
) -> Result<Vec<String>> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for q in questions {
        let ids: BTreeSet<&str> = tournament
            .question_forecasts(&q.id)?
            .iter()
            .map(|f| f.forecaster_id.as_str())
            .collect();
        for id in ids {
            *counts.entry(id).or_default() += 1;
        }
    }
    Ok(counts
        .into_iter()
        .filter(|&(_, c)| c >= min_questions.max(1))
        .map(|(id, _)| id.to_string())
        .collect())
}

/// A random relabelling of the question's options: `perm[k]` is the new
/// position of option `k`. An ordinal question is only ever reversed, so it
/// stays a valid ordinal question.
pub fn option_permutation<R: Rng + ?Sized>(question: &Question, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..question.n_options()).collect();
    if !question.is_ordinal {
        perm.shuffle(rng);
    } else if rng.random_bool(0.5) {
        perm.reverse();
    }
    perm
}

/// Copy of a prepared question with option `k` moved to position `perm[k]`
/// in every forecast and in the outcome.
pub fn relabel_options(prepared: &PreparedQuestion, perm: &[usize]) -> PreparedQuestion {
    let mut out = prepared.clone();
    for input in &mut out.inputs {
        let old = input.features.probs;
        for (k, &to) in perm.iter().enumerate() {
            input.features.probs[to] = old[k];
        }
    }
    let q = &mut out.question;
    let labels = q.option_labels.clone();
    for (k, &to) in perm.iter().enumerate() {
        q.option_labels[to] = labels[k].clone();
    }
    q.resolved_index = perm[q.resolved_index];
    out
}

/// Trains on every question of `tournament` using its own category list.
pub fn train(
    tournament: &Tournament,
    config: &TrainConfig,
    words: &WordVectorTable,
) -> Result<(AnchorModel, TrainingHistory)> {
    let spec = FeatureSpec::from_questions(tournament.questions(), config.model.forecast_time_dim);
    train_with_spec(tournament, config, words, spec)
}

/// Trains a fresh model. A seeded share of the questions is held out to
/// drive the schedule; the returned model carries the weights with the
/// lowest validation loss.
pub fn train_with_spec(
    tournament: &Tournament,
    config: &TrainConfig,
    words: &WordVectorTable,
    spec: FeatureSpec,
) -> Result<(AnchorModel, TrainingHistory)> {
    config.validate()?;
    let n = tournament.questions().len();
    if n < 2 {
        return Err(contract(format!("training needs at least two questions, got {n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut substream(config.seed, Stream::Validation));
    let n_val = ((config.validation_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let (val_idx, train_idx) = idx.split_at(n_val);
    let (mut val_idx, mut train_idx) = (val_idx.to_vec(), train_idx.to_vec());
    val_idx.sort_unstable();
    train_idx.sort_unstable();

    let ids = active_forecasters(
        tournament,
        train_idx.iter().map(|&i| &tournament.questions()[i]),
        config.min_forecaster_questions,
    )?;
    let mut model = AnchorModel::new(config.model, spec, words.dim(), &ids, config.seed);
    let prep = |set: &[usize]| -> Result<Vec<PreparedQuestion>> {
        set.iter()
            .map(|&i| model.prepare(tournament, &tournament.questions()[i], words, config.use_forecaster_ids))
            .collect()
    };
    let train_prep = prep(&train_idx)?;
    let val_prep = prep(&val_idx)?;
    let mut train_targets = targets(&train_prep);
    let val_targets = targets(&val_prep);
    if train_targets.is_empty() || val_targets.is_empty() {
        return Err(contract("no aggregation targets with visible forecasts"));
    }

    let mut params = model.params.clone();
    let mut adam = AdamState::new(&params);
    let mut schedule = PlateauSchedule::new(
        config.learning_rate,
        config.lr_decay_factor,
        config.lr_decay_patience,
        config.reset_patience,
    );
    let mut shuffle_rng = substream(config.seed, Stream::Shuffle);
    let mut dropout_rng = substream(config.seed, Stream::Dropout);
    let mut augment_rng = substream(config.seed, Stream::Augment);
    let mut best = params.clone();
    let mut history = TrainingHistory {
        epochs: Vec::with_capacity(config.max_epochs),
        best_epoch: 0,
        best_val_loss: f64::INFINITY,
        train_questions: train_idx
            .iter()
            .map(|&i| tournament.questions()[i].id.clone())
            .collect(),
        validation_questions: val_idx.iter().map(|&i| tournament.questions()[i].id.clone()).collect(),
    };

    for epoch in 1..=config.max_epochs {
        let lr = schedule.learning_rate();
        train_targets.shuffle(&mut shuffle_rng);
        let relabelled: Vec<PreparedQuestion>;
        let epoch_prep = if config.permute_options {
            relabelled = train_prep
                .iter()
                .map(|p| relabel_options(p, &option_permutation(&p.question, &mut augment_rng)))
                .collect();
            &relabelled
        } else {
            &train_prep
        };
        let mut train_loss = 0.0;
        for batch in train_targets.chunks(config.batch_size) {
            let masks = (config.dropout_rate > 0.0)
                .then(|| dropout_masks(epoch_prep, batch, config.dropout_rate, &mut dropout_rng));
            let (l, g) = loss_and_gradients(&params, epoch_prep, batch, masks.as_deref())?;
            train_loss += l * batch.len() as f64;
            adam_step(&mut params, &g, &mut adam, lr);
        }
        train_loss /= train_targets.len() as f64;
        if !params.is_finite() {
            return Err(Error::Undefined(format!("parameters diverged in epoch {epoch}")));
        }
        let val_loss = loss(&params, &val_prep, &val_targets)?;
        let event = schedule.observe(val_loss);
        if event.improved {
            best = params.clone();
            history.best_epoch = epoch;
            history.best_val_loss = val_loss;
        }
        if event.reset {
            params = best.clone();
            adam = AdamState::new(&params);
        }
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            lr,
            improved: event.improved,
            decayed: event.decayed,
            reset: event.reset,
        });
    }
    model.params = best;
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{toy_model, toy_tournament};
    use crate::model::TensorId;
    use approx::assert_abs_diff_eq;

    fn toy_batch(seed: u64) -> (AnchorModel, Vec<PreparedQuestion>) {
        let t = toy_tournament();
        let model = toy_model(&t, seed);
        let words = WordVectorTable::builtin();
        let prep = t
            .questions()
            .iter()
            .map(|q| model.prepare(&t, q, &words, true).unwrap())
            .collect();
        (model, prep)
    }

    #[test]
    fn loss_matches_scoring_module() {
        let (model, prep) = toy_batch(1);
        let all = targets(&prep);
        let mut expect = 0.0;
        for t in &all {
            let out = &model.daily_series(&prep[t.question])[t.day].probs;
            let q = &prep[t.question].question;
            expect += scoring::brier(out, &q.outcome(), q.is_ordinal).unwrap();
        }
        expect /= all.len() as f64;
        assert_abs_diff_eq!(loss(&model.params, &prep, &all).unwrap(), expect, epsilon = 1e-12);

        let one = [all[0]];
        let two = [all[0], all[3]];
        let l0 = loss(&model.params, &prep, &one).unwrap();
        let l1 = loss(&model.params, &prep, &[all[3]]).unwrap();
        assert_abs_diff_eq!(
            loss(&model.params, &prep, &two).unwrap(),
            (l0 + l1) / 2.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn empty_day_target_is_rejected() {
        let (model, prep) = toy_batch(1);
        let q2 = prep.iter().position(|p| p.question.id == "q2").unwrap();
        assert_eq!(prep[q2].visible[0], 0);
        let bad = [Target { question: q2, day: 0 }];
        assert!(matches!(loss(&model.params, &prep, &bad), Err(Error::NoForecasts(_))));
        assert!(!targets(&prep).contains(&bad[0]));
    }

    #[test]
    fn duplicated_target_doubles_its_share() {
        let (model, prep) = toy_batch(2);
        let all = targets(&prep);
        let (a, b) = (all[1], all[5]);
        let ga = gradients(&model.params, &prep, &[a], None).unwrap();
        let gb = gradients(&model.params, &prep, &[b], None).unwrap();
        let g = gradients(&model.params, &prep, &[a, a, b], None).unwrap();
        for &id in &TensorId::ALL {
            for ((x, y), z) in g.get(id).iter().zip(ga.get(id)).zip(gb.get(id)) {
                assert_abs_diff_eq!(*x, (2.0 * y + z) / 3.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn perfect_fit_has_vanishing_gradient() {
        // Output weights off and a saturated bias on the resolved option: the
        // aggregate equals the outcome to machine precision.
        let (mut model, mut prep) = toy_batch(3);
        prep[0].question.resolved_index = 1;
        model.params.w_o.fill(0.0);
        model.params.b_o = vec![0.0, 60.0, 0.0, 0.0, 0.0];
        let target = Target { question: 0, day: 2 };
        let (l, grads) = loss_and_gradients(&model.params, &prep, &[target], None).unwrap();
        assert!(l < 1e-40, "{l}");
        assert!(grads.norm() < 1e-8, "{}", grads.norm());
    }

    #[test]
    fn training_is_deterministic_and_returns_best_snapshot() {
        let cfg = crate::synthdata::SynthConfig {
            n_questions: 10,
            n_humans: 12,
            participants_per_question: 6,
            min_duration_days: 2,
            max_duration_days: 5,
            seed: 4,
            ..Default::default()
        };
        let t = crate::synthdata::generate(&cfg).unwrap();
        let tc = TrainConfig {
            model: crate::model::tests::small_config(),
            learning_rate: 1e-2,
            batch_size: 8,
            max_epochs: 6,
            seed: 5,
            ..TrainConfig::default()
        };
        let words = WordVectorTable::builtin();
        let (m1, h1) = train(&t, &tc, &words).unwrap();
        let (m2, h2) = train(&t, &tc, &words).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(m1, m2);
        assert_eq!(h1.epochs.len(), 6);
        assert_eq!(h1.validation_questions.len(), 2);
        let best = h1.epochs.iter().map(|e| e.val_loss).fold(f64::INFINITY, f64::min);
        assert_eq!(h1.best_val_loss, best);
        assert!(h1.epochs.windows(2).all(|w| w[1].lr <= w[0].lr));

        let val: std::collections::HashSet<String> = h1.validation_questions.iter().cloned().collect();
        let vt = t.with_questions(&val);
        let prep: Vec<_> = vt
            .questions()
            .iter()
            .map(|q| m1.prepare(&t, q, &words, true).unwrap())
            .collect();
        assert_abs_diff_eq!(loss(&m1.params, &prep, &targets(&prep)).unwrap(), best, epsilon = 1e-12);

        let single = t.with_questions(&[t.questions()[0].id.clone()].into_iter().collect());
        assert!(train(&single, &tc, &words).is_err());
        assert!(TrainConfig {
            lr_decay_patience: 0,
            ..tc.clone()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            dropout_rate: 1.0,
            ..tc
        }
        .validate()
        .is_err());
    }

    #[test]
    fn relabelling_moves_probabilities_with_the_outcome() {
        let (_, prep) = toy_batch(4);
        let mut rng = substream(9, Stream::Augment);
        for p in &prep {
            let n = p.question.n_options();
            for _ in 0..20 {
                let perm = option_permutation(&p.question, &mut rng);
                let mut sorted = perm.clone();
                sorted.sort_unstable();
                assert_eq!(sorted, (0..n).collect::<Vec<_>>());
                let reversed: Vec<usize> = (0..n).rev().collect();
                if p.question.is_ordinal {
                    assert!(perm == sorted || perm == reversed);
                }
                let r = relabel_options(p, &perm);
                assert_eq!(
                    r.question.option_labels[perm[p.question.resolved_index]],
                    p.question.option_labels[p.question.resolved_index]
                );
                for (i, (a, b)) in r.inputs.iter().zip(&p.inputs).enumerate() {
                    assert!(a.features.probs[n..].iter().all(|&x| x == 0.0));
                    assert_eq!(a.features.engineered, b.features.engineered);
                    for (k, &pk) in perm.iter().enumerate() {
                        assert_eq!(a.features.probs[pk], b.features.probs[k]);
                    }
                    if !p.question.is_ordinal {
                        assert_abs_diff_eq!(r.input_brier(i), p.input_brier(i), epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn history_csv_has_stable_header() {
        let h = TrainingHistory {
            epochs: vec![EpochRecord {
                epoch: 1,
                train_loss: 0.5,
                val_loss: 0.4,
                lr: 0.01,
                improved: true,
                decayed: false,
                reset: false,
            }],
            best_epoch: 1,
            best_val_loss: 0.4,
            train_questions: vec![],
            validation_questions: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        write_history_csv(&path, &[h]).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(
            text,
            "fold,epoch,train_loss,val_loss,lr,improved,decayed,reset\n0,1,0.5,0.4,0.01,true,false,false\n"
        );
    }
}
