//! The anchor-attention aggregator.
//!
//! For a question with anchor `A` (mean word vector of its text) and an
//! aggregation day `D` with time embedding `I(D)`, every forecast visible at
//! the end of `D` contributes an input row `X_i = [P_i, U_i, F_i]`:
//!
//! ```text
//! K_i = X_i W_K        V_i = X_i W_V        q = [A, I(D)] W_A
//! α   = softmax_i(q · K_i / √d_k)
//! c   = Σ_i α_i V_i
//! O   = softmax_valid(LeakyReLU(c) W_o + b_o)
//! ```
//!
//! The query never depends on the inputs, so no forecast position is
//! privileged: the output depends only on the multiset of visible forecasts.
//! Inputs are put in a canonical order before any summation, which makes that
//! invariance exact in floating point as well.

use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::domain::{end_of_day, Question, Tournament, MAX_OPTIONS};
use crate::error::{contract, Error, Result};
use crate::features::{
    build_question_features, init_forecaster_embeddings, question_anchor, time_embedding, FeatureSpec,
    ForecastFeatures, ForecasterEmbeddingTable, WordVectorTable,
};
use crate::linalg::{axpy, dot, softmax, Matrix};
use crate::rng::{substream, Stream};
use crate::scoring::{self, pearson, Correlation};

pub const LEAKY_SLOPE: f64 = 0.01;

const CHECKPOINT_FORMAT: &str = "anchor-agg-checkpoint";
const CHECKPOINT_VERSION: u32 = 1;

/// Size choices for the model. The defaults are the published setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub forecaster_dim: usize,
    pub key_dim: usize,
    pub time_dim: usize,
    pub forecast_time_dim: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            forecaster_dim: 300,
            key_dim: 64,
            time_dim: crate::features::DEFAULT_TIME_DIM,
            forecast_time_dim: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    /// Forecaster embedding width.
    pub d_embed: usize,
    /// Key / value / query width.
    pub d_k: usize,
    /// Question anchor width (word-vector dimension).
    pub d_word: usize,
    pub d_time: usize,
    /// Length of the engineered block `F_i`.
    pub d_features: usize,
    pub max_options: usize,
}

impl ModelDims {
    pub fn new(config: &ModelConfig, word_dim: usize, spec: &FeatureSpec) -> Self {
        Self {
            d_embed: config.forecaster_dim,
            d_k: config.key_dim,
            d_word: word_dim,
            d_time: config.time_dim,
            d_features: spec.len(),
            max_options: MAX_OPTIONS,
        }
    }

    pub fn d_in(&self) -> usize {
        self.max_options + self.d_embed + self.d_features
    }

    pub fn d_anchor_in(&self) -> usize {
        self.d_word + self.d_time + 1
    }
}

/// The trainable tensors, in a fixed order shared by gradients and the
/// optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TensorId {
    KeyProjection,
    ValueProjection,
    AnchorProjection,
    OutputWeights,
    OutputBias,
    ForecasterEmbeddings,
}

impl TensorId {
    pub const ALL: [TensorId; 6] = [
        TensorId::KeyProjection,
        TensorId::ValueProjection,
        TensorId::AnchorProjection,
        TensorId::OutputWeights,
        TensorId::OutputBias,
        TensorId::ForecasterEmbeddings,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TensorId::KeyProjection => "w_k",
            TensorId::ValueProjection => "w_v",
            TensorId::AnchorProjection => "w_a",
            TensorId::OutputWeights => "w_o",
            TensorId::OutputBias => "b_o",
            TensorId::ForecasterEmbeddings => "embeddings",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub w_k: Matrix,
    pub w_v: Matrix,
    pub w_a: Matrix,
    pub w_o: Matrix,
    pub b_o: Vec<f64>,
    pub embeddings: ForecasterEmbeddingTable,
}

fn xavier<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let dist = Uniform::new_inclusive(-bound, bound).expect("valid range");
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| dist.sample(rng)).collect())
}

impl ModelParams {
    /// Glorot-uniform projections, zero output bias and unit-variance
    /// forecaster embeddings, all from the seed's init stream.
    pub fn init(dims: &ModelDims, forecaster_ids: &[String], seed: u64) -> Self {
        let mut rng = substream(seed, Stream::Init);
        let w_k = xavier(dims.d_in(), dims.d_k, &mut rng);
        let w_v = xavier(dims.d_in(), dims.d_k, &mut rng);
        let w_a = xavier(dims.d_anchor_in(), dims.d_k, &mut rng);
        let w_o = xavier(dims.d_k, dims.max_options, &mut rng);
        let embeddings = init_forecaster_embeddings(forecaster_ids, dims.d_embed, &mut rng);
        Self {
            w_k,
            w_v,
            w_a,
            w_o,
            b_o: vec![0.0; dims.max_options],
            embeddings,
        }
    }

    pub fn tensor(&self, id: TensorId) -> &[f64] {
        match id {
            TensorId::KeyProjection => &self.w_k.data,
            TensorId::ValueProjection => &self.w_v.data,
            TensorId::AnchorProjection => &self.w_a.data,
            TensorId::OutputWeights => &self.w_o.data,
            TensorId::OutputBias => &self.b_o,
            TensorId::ForecasterEmbeddings => &self.embeddings.matrix.data,
        }
    }

    pub fn tensor_mut(&mut self, id: TensorId) -> &mut [f64] {
        match id {
            TensorId::KeyProjection => &mut self.w_k.data,
            TensorId::ValueProjection => &mut self.w_v.data,
            TensorId::AnchorProjection => &mut self.w_a.data,
            TensorId::OutputWeights => &mut self.w_o.data,
            TensorId::OutputBias => &mut self.b_o,
            TensorId::ForecasterEmbeddings => &mut self.embeddings.matrix.data,
        }
    }

    pub fn is_finite(&self) -> bool {
        TensorId::ALL
            .iter()
            .all(|&t| self.tensor(t).iter().all(|x| x.is_finite()))
    }

    pub fn check_shapes(&self, dims: &ModelDims) -> Result<()> {
        let expect = [
            (TensorId::KeyProjection, self.w_k.shape(), (dims.d_in(), dims.d_k)),
            (TensorId::ValueProjection, self.w_v.shape(), (dims.d_in(), dims.d_k)),
            (
                TensorId::AnchorProjection,
                self.w_a.shape(),
                (dims.d_anchor_in(), dims.d_k),
            ),
            (TensorId::OutputWeights, self.w_o.shape(), (dims.d_k, dims.max_options)),
            (TensorId::OutputBias, (1, self.b_o.len()), (1, dims.max_options)),
            (
                TensorId::ForecasterEmbeddings,
                (self.embeddings.matrix.rows, self.embeddings.dim()),
                (self.embeddings.ids.len() + 1, dims.d_embed),
            ),
        ];
        for (id, got, want) in expect {
            if got != want {
                return Err(contract(format!("{} has shape {got:?}, expected {want:?}", id.name())));
            }
        }
        Ok(())
    }
}

/// Gradient buffers shaped like [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    tensors: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Self {
            tensors: TensorId::ALL
                .iter()
                .map(|&t| vec![0.0; params.tensor(t).len()])
                .collect(),
        }
    }

    pub fn get(&self, id: TensorId) -> &[f64] {
        &self.tensors[id.index()]
    }

    pub fn get_mut(&mut self, id: TensorId) -> &mut [f64] {
        &mut self.tensors[id.index()]
    }

    pub fn scale(&mut self, factor: f64) {
        for t in &mut self.tensors {
            t.iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn norm(&self) -> f64 {
        self.tensors.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// One forecast as seen by the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastInput {
    pub timestamp: NaiveDateTime,
    pub features: ForecastFeatures,
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

/// Total order used to fix summation order: time, forecaster row, then the
/// feature values themselves.
pub fn canonical_cmp(a: &ForecastInput, b: &ForecastInput) -> Ordering {
    a.timestamp
        .cmp(&b.timestamp)
        .then(a.features.forecaster_row.cmp(&b.features.forecaster_row))
        .then_with(|| lex(&a.features.probs, &b.features.probs))
        .then_with(|| lex(&a.features.engineered, &b.features.engineered))
}

/// `[A, I(D)]`: the anchor followed by the aggregation-day time embedding.
pub fn anchor_input(anchor: &[f64], question: &Question, day: NaiveDate, d_time: usize) -> Vec<f64> {
    let idx = question.day_index(day).clamp(0, question.duration_days().max(0));
    let mut v = anchor.to_vec();
    v.extend(time_embedding(idx, question.duration_days(), d_time).to_vec());
    v
}

/// Softmax of `query · key / √d_k` over the keys.
pub fn alignment(query: &[f64], keys: &[&[f64]]) -> Result<Vec<f64>> {
    if keys.is_empty() {
        return Err(contract("alignment over zero keys"));
    }
    let scale = (query.len() as f64).sqrt();
    let scores: Vec<f64> = keys.iter().map(|k| dot(query, k) / scale).collect();
    Ok(softmax(&scores))
}

/// Intermediate values of one aggregation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardTrace {
    /// For each trace position, the index of the input it came from.
    pub order: Vec<usize>,
    pub query: Vec<f64>,
    /// Attention weights after the softmax over visible forecasts.
    pub alpha: Vec<f64>,
    /// Weights actually used for the context (differs from `alpha` only
    /// under training-time dropout).
    pub alpha_used: Vec<f64>,
    pub context: Vec<f64>,
    pub hidden: Vec<f64>,
    /// Output pre-activations; padded options hold `-inf`.
    #[serde(skip)]
    pub logits: [f64; MAX_OPTIONS],
    /// Output distribution padded to five options with exact zeros.
    pub probs: [f64; MAX_OPTIONS],
}

/// Input rows and their key/value projections for a run of inputs.
pub(crate) struct Projected {
    pub x: Matrix,
    pub k: Matrix,
    pub v: Matrix,
    pub rows: Vec<usize>,
}

pub(crate) fn project(params: &ModelParams, inputs: &[&ForecastFeatures], d_k: usize) -> Projected {
    let d_in = params.w_k.rows;
    let m = inputs.len();
    let mut x = Matrix::zeros(m, d_in);
    let mut k = Matrix::zeros(m, d_k);
    let mut v = Matrix::zeros(m, d_k);
    let mut row = Vec::with_capacity(d_in);
    for (i, f) in inputs.iter().enumerate() {
        f.assemble(&params.embeddings, &mut row);
        x.row_mut(i).copy_from_slice(&row);
        params.w_k.vec_mul_into(&row, k.row_mut(i));
        params.w_v.vec_mul_into(&row, v.row_mut(i));
    }
    Projected {
        x,
        k,
        v,
        rows: inputs.iter().map(|f| f.forecaster_row).collect(),
    }
}

/// Attention over the first `visible` projected inputs plus the output head.
/// `keep` optionally drops inputs (training-time dropout) before
/// renormalizing the weights.
pub(crate) fn head(
    params: &ModelParams,
    query_in: &[f64],
    proj: &Projected,
    visible: usize,
    n_options: usize,
    keep: Option<&[bool]>,
) -> ForwardTrace {
    let query = params.w_a.vec_mul(query_in);
    let keys: Vec<&[f64]> = (0..visible).map(|i| proj.k.row(i)).collect();
    let alpha = alignment(&query, &keys).expect("visible inputs");
    let alpha_used = match keep {
        Some(keep) if keep[..visible].iter().any(|&k| k) => {
            let total: f64 = alpha.iter().zip(keep).filter(|(_, &k)| k).map(|(a, _)| a).sum();
            alpha
                .iter()
                .zip(keep)
                .map(|(a, &k)| if k { a / total } else { 0.0 })
                .collect()
        }
        _ => alpha.clone(),
    };
    let mut context = vec![0.0; proj.k.cols];
    for (i, a) in alpha_used.iter().enumerate() {
        axpy(*a, proj.v.row(i), &mut context);
    }
    let hidden: Vec<f64> = context
        .iter()
        .map(|&c| if c > 0.0 { c } else { LEAKY_SLOPE * c })
        .collect();
    let mut logits = [f64::NEG_INFINITY; MAX_OPTIONS];
    let raw = params.w_o.vec_mul(&hidden);
    for k in 0..n_options {
        logits[k] = raw[k] + params.b_o[k];
    }
    let p = softmax(&logits);
    let mut probs = [0.0; MAX_OPTIONS];
    probs.copy_from_slice(&p);
    ForwardTrace {
        order: (0..visible).collect(),
        query,
        alpha,
        alpha_used,
        context,
        hidden,
        logits,
        probs,
    }
}

/// Backpropagates `dprobs` (gradient of the loss with respect to the first
/// `n_options` output probabilities) through [`head`], accumulating parameter
/// gradients and the gradients of the projected keys and values.
#[allow(clippy::too_many_arguments)]
pub(crate) fn head_backward(
    params: &ModelParams,
    query_in: &[f64],
    proj: &Projected,
    trace: &ForwardTrace,
    keep: Option<&[bool]>,
    dprobs: &[f64],
    grads: &mut Gradients,
    dk: &mut Matrix,
    dv: &mut Matrix,
) {
    let n = dprobs.len();
    let visible = trace.alpha.len();
    let d_k = proj.k.cols;

    let inner: f64 = (0..n).map(|k| trace.probs[k] * dprobs[k]).sum();
    let mut dz = [0.0; MAX_OPTIONS];
    for k in 0..n {
        dz[k] = trace.probs[k] * (dprobs[k] - inner);
    }
    for (g, d) in grads.get_mut(TensorId::OutputBias).iter_mut().zip(&dz) {
        *g += d;
    }
    {
        let mut w_o = Matrix::from_vec(
            d_k,
            MAX_OPTIONS,
            std::mem::take(&mut grads.tensors[TensorId::OutputWeights.index()]),
        );
        w_o.add_outer(&trace.hidden, &dz);
        grads.tensors[TensorId::OutputWeights.index()] = w_o.data;
    }
    let mut dc = vec![0.0; d_k];
    params.w_o.mul_vec_into(&dz, &mut dc);
    for (d, &c) in dc.iter_mut().zip(&trace.context) {
        if c <= 0.0 {
            *d *= LEAKY_SLOPE;
        }
    }

    let mut d_used = vec![0.0; visible];
    for (i, (d, &a)) in d_used.iter_mut().zip(&trace.alpha_used).enumerate() {
        axpy(a, &dc, dv.row_mut(i));
        *d = dot(proj.v.row(i), &dc);
    }
    let d_alpha = match keep {
        Some(keep) if keep[..visible].iter().any(|&k| k) => {
            let total: f64 = trace.alpha.iter().zip(keep).filter(|(_, &k)| k).map(|(a, _)| a).sum();
            let inner: f64 = trace.alpha_used.iter().zip(&d_used).map(|(a, d)| a * d).sum();
            d_used
                .iter()
                .zip(keep)
                .map(|(d, &k)| if k { (d - inner) / total } else { 0.0 })
                .collect()
        }
        _ => d_used,
    };
    let inner: f64 = trace.alpha.iter().zip(&d_alpha).map(|(a, d)| a * d).sum();
    let scale = (d_k as f64).sqrt();
    let mut dq = vec![0.0; d_k];
    for (i, (&a, &da)) in trace.alpha.iter().zip(&d_alpha).enumerate() {
        let ds = a * (da - inner) / scale;
        axpy(ds, proj.k.row(i), &mut dq);
        axpy(ds, &trace.query, dk.row_mut(i));
    }
    let mut w_a = Matrix::from_vec(
        params.w_a.rows,
        d_k,
        std::mem::take(&mut grads.tensors[TensorId::AnchorProjection.index()]),
    );
    w_a.add_outer(query_in, &dq);
    grads.tensors[TensorId::AnchorProjection.index()] = w_a.data;
}

/// Pushes key/value gradients back into the projections and the forecaster
/// embeddings.
pub(crate) fn projection_backward(
    params: &ModelParams,
    proj: &Projected,
    dk: &Matrix,
    dv: &Matrix,
    count: usize,
    grads: &mut Gradients,
) {
    let d_k = params.w_k.cols;
    let d_in = params.w_k.rows;
    let d_e = params.embeddings.dim();
    let mut gk = Matrix::from_vec(
        d_in,
        d_k,
        std::mem::take(&mut grads.tensors[TensorId::KeyProjection.index()]),
    );
    let mut gv = Matrix::from_vec(
        d_in,
        d_k,
        std::mem::take(&mut grads.tensors[TensorId::ValueProjection.index()]),
    );
    let mut ge = Matrix::from_vec(
        params.embeddings.matrix.rows,
        d_e,
        std::mem::take(&mut grads.tensors[TensorId::ForecasterEmbeddings.index()]),
    );
    for i in 0..count {
        let (dki, dvi) = (dk.row(i), dv.row(i));
        if dki.iter().all(|&x| x == 0.0) && dvi.iter().all(|&x| x == 0.0) {
            continue;
        }
        gk.add_outer(proj.x.row(i), dki);
        gv.add_outer(proj.x.row(i), dvi);
        let erow = ge.row_mut(proj.rows[i]);
        for (j, e) in erow.iter_mut().enumerate() {
            let r = MAX_OPTIONS + j;
            *e += dot(params.w_k.row(r), dki) + dot(params.w_v.row(r), dvi);
        }
    }
    grads.tensors[TensorId::KeyProjection.index()] = gk.data;
    grads.tensors[TensorId::ValueProjection.index()] = gv.data;
    grads.tensors[TensorId::ForecasterEmbeddings.index()] = ge.data;
}

/// Aggregates the inputs visible at `cutoff` into a distribution over the
/// question's `n_options` options.
///
/// Fails with [`Error::NoForecasts`] when nothing is visible; callers then
/// use the uniform distribution.
pub fn forward(
    params: &ModelParams,
    inputs: &[ForecastInput],
    query_in: &[f64],
    cutoff: NaiveDateTime,
    n_options: usize,
) -> Result<(Vec<f64>, ForwardTrace)> {
    if !(2..=MAX_OPTIONS).contains(&n_options) {
        return Err(contract(format!("{n_options} options")));
    }
    let mut order: Vec<usize> = (0..inputs.len()).filter(|&i| inputs[i].timestamp <= cutoff).collect();
    if order.is_empty() {
        return Err(Error::NoForecasts("forward".into()));
    }
    order.sort_by(|&a, &b| canonical_cmp(&inputs[a], &inputs[b]));
    let feats: Vec<&ForecastFeatures> = order.iter().map(|&i| &inputs[i].features).collect();
    let proj = project(params, &feats, params.w_k.cols);
    let mut trace = head(params, query_in, &proj, feats.len(), n_options, None);
    trace.order = order;
    Ok((trace.probs[..n_options].to_vec(), trace))
}

/// A question's inputs in canonical order, with per-day visibility.
#[derive(Debug, Clone)]
pub struct PreparedQuestion {
    pub question: Question,
    pub anchor: Vec<f64>,
    pub inputs: Vec<ForecastInput>,
    /// Forecaster id of each input (kept even when ids are hidden from the
    /// model).
    pub forecaster_ids: Vec<String>,
    pub days: Vec<NaiveDate>,
    /// Number of leading inputs visible on each day.
    pub visible: Vec<usize>,
    pub query_inputs: Vec<Vec<f64>>,
}

impl PreparedQuestion {
    pub fn outcome(&self) -> Vec<f64> {
        self.question.outcome()
    }

    /// Brier score of input `i` on its own.
    pub fn input_brier(&self, i: usize) -> f64 {
        let n = self.question.n_options();
        scoring::brier(
            &self.inputs[i].features.probs[..n],
            &self.outcome(),
            self.question.is_ordinal,
        )
        .expect("consistent lengths")
    }
}

/// One day's output.
#[derive(Debug, Clone)]
pub struct DailyOutput {
    pub probs: Vec<f64>,
    /// `None` on days with nothing visible (uniform fallback).
    pub trace: Option<ForwardTrace>,
}

/// A trained (or freshly initialized) aggregator with its input layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorModel {
    pub config: ModelConfig,
    pub dims: ModelDims,
    pub spec: FeatureSpec,
    pub seed: u64,
    pub params: ModelParams,
}

impl AnchorModel {
    pub fn new(config: ModelConfig, spec: FeatureSpec, word_dim: usize, forecaster_ids: &[String], seed: u64) -> Self {
        let dims = ModelDims::new(&config, word_dim, &spec);
        let params = ModelParams::init(&dims, forecaster_ids, seed);
        Self {
            config,
            dims,
            spec,
            seed,
            params,
        }
    }

    /// Builds canonical inputs for `question`. With `use_ids = false` every
    /// forecast maps to the shared unknown-forecaster row.
    pub fn prepare(
        &self,
        tournament: &Tournament,
        question: &Question,
        words: &WordVectorTable,
        use_ids: bool,
    ) -> Result<PreparedQuestion> {
        let sorted = tournament.question_forecasts(&question.id)?;
        let mut feats = build_question_features(question, &sorted, &self.params.embeddings, &self.spec);
        if !use_ids {
            let unknown = self.params.embeddings.unknown_row();
            feats.iter_mut().for_each(|f| f.forecaster_row = unknown);
        }
        let mut rows: Vec<(ForecastInput, String)> = sorted
            .iter()
            .zip(feats)
            .map(|(f, features)| {
                (
                    ForecastInput {
                        timestamp: f.timestamp,
                        features,
                    },
                    f.forecaster_id.clone(),
                )
            })
            .collect();
        rows.sort_by(|a, b| canonical_cmp(&a.0, &b.0).then_with(|| a.1.cmp(&b.1)));
        let (inputs, forecaster_ids): (Vec<_>, Vec<_>) = rows.into_iter().unzip();

        let anchor = question_anchor(&question.text, words).values;
        if anchor.len() != self.dims.d_word {
            return Err(contract(format!(
                "word vectors have dimension {}, model expects {}",
                anchor.len(),
                self.dims.d_word
            )));
        }
        let days = question.active_days();
        let visible = days
            .iter()
            .map(|&d| {
                let cut = end_of_day(d);
                inputs.partition_point(|i: &ForecastInput| i.timestamp <= cut)
            })
            .collect();
        let query_inputs = days
            .iter()
            .map(|&d| anchor_input(&anchor, question, d, self.dims.d_time))
            .collect();
        Ok(PreparedQuestion {
            question: question.clone(),
            anchor,
            inputs,
            forecaster_ids,
            days,
            visible,
            query_inputs,
        })
    }

    /// One output per active day.
    pub fn daily_series(&self, prepared: &PreparedQuestion) -> Vec<DailyOutput> {
        let n = prepared.question.n_options();
        let feats: Vec<&ForecastFeatures> = prepared.inputs.iter().map(|i| &i.features).collect();
        let proj = project(&self.params, &feats, self.dims.d_k);
        prepared
            .visible
            .iter()
            .zip(&prepared.query_inputs)
            .map(|(&visible, q_in)| {
                if visible == 0 {
                    DailyOutput {
                        probs: vec![1.0 / n as f64; n],
                        trace: None,
                    }
                } else {
                    let trace = head(&self.params, q_in, &proj, visible, n, None);
                    DailyOutput {
                        probs: trace.probs[..n].to_vec(),
                        trace: Some(trace),
                    }
                }
            })
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let ck = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            model: self.clone(),
        };
        fs::write(path, serde_json::to_string(&ck)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let ck: Checkpoint = serde_json::from_str(&text)?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(contract(format!(
                "unsupported checkpoint {} v{}",
                ck.format, ck.version
            )));
        }
        ck.model.params.check_shapes(&ck.model.dims)?;
        Ok(ck.model)
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    model: AnchorModel,
}

/// Attention weight paired with the Brier score of the forecast it weighs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttentionPair {
    pub attention: f64,
    pub brier: f64,
}

/// Pairs every visible forecast's weight on every day with its own Brier.
pub fn attention_pairs(prepared: &PreparedQuestion, outputs: &[DailyOutput]) -> Vec<AttentionPair> {
    let mut pairs = Vec::new();
    let briers: Vec<f64> = (0..prepared.inputs.len()).map(|i| prepared.input_brier(i)).collect();
    for out in outputs {
        if let Some(trace) = &out.trace {
            for (pos, &a) in trace.alpha.iter().enumerate() {
                pairs.push(AttentionPair {
                    attention: a,
                    brier: briers[trace.order[pos]],
                });
            }
        }
    }
    pairs
}

/// Pearson correlation between attention weights and forecast Briers.
pub fn attention_report(pairs: &[AttentionPair]) -> Result<Correlation> {
    let xs: Vec<f64> = pairs.iter().map(|p| p.attention).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.brier).collect();
    pearson(&xs, &ys)
}
