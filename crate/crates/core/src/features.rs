//! Model inputs: question-text anchors, forecaster embeddings, time
//! embeddings and per-forecast engineered features.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::domain::{Forecast, ForecasterKind, Question, MAX_OPTIONS};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A small 8-dimensional vocabulary covering the synthetic question templates.
pub const BUILTIN_WORD_VECTORS: &str = include_str!("../data/word_vectors_8d.txt");

/// Default number of sinusoidal components in the aggregation-time embedding.
pub const DEFAULT_TIME_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorTable {
    dim: usize,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
}

impl WordVectorTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    pub fn builtin() -> Self {
        parse_word_vectors(BUILTIN_WORD_VECTORS, "<builtin>").expect("builtin word vectors parse")
    }
}

/// Reads a whitespace-separated word-vector file (`token v1 .. vd` per line,
/// optionally preceded by a `count dim` header).
pub fn load_word_vectors(path: &Path) -> Result<WordVectorTable> {
    let text = fs::read_to_string(path)?;
    parse_word_vectors(&text, &path.display().to_string())
}

pub fn parse_word_vectors(text: &str, source: &str) -> Result<WordVectorTable> {
    let err = |line: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let mut dim = None;
    let mut index = HashMap::new();
    let mut vectors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        let rest: Vec<&str> = fields.collect();
        if i == 0 && rest.len() == 1 && token.parse::<usize>().is_ok() && rest[0].parse::<usize>().is_ok() {
            continue;
        }
        let values = rest
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| err(lineno, format!("bad number: {e}")))?;
        if values.is_empty() {
            return Err(err(lineno, format!("token `{token}` has no vector")));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(err(lineno, format!("expected {d} values, found {}", values.len())));
            }
            Some(_) => {}
        }
        if index.contains_key(token) {
            continue;
        }
        index.insert(token.to_string(), index.len());
        vectors.extend(values);
    }
    Ok(WordVectorTable {
        dim: dim.unwrap_or(0),
        index,
        vectors,
    })
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorVector {
    pub values: Vec<f64>,
    /// Set when no token of the text was in the vocabulary.
    pub out_of_vocabulary: bool,
}

/// Mean of the word vectors of the in-vocabulary tokens of `text`.
pub fn question_anchor(text: &str, table: &WordVectorTable) -> AnchorVector {
    let mut values = vec![0.0; table.dim()];
    let mut hits = 0usize;
    for token in tokenize(text) {
        if let Some(v) = table.get(&token) {
            values.iter_mut().zip(v).for_each(|(a, b)| *a += b);
            hits += 1;
        }
    }
    if hits > 0 {
        values.iter_mut().for_each(|a| *a /= hits as f64);
    }
    AnchorVector {
        values,
        out_of_vocabulary: hits == 0,
    }
}

/// Trainable forecaster vectors, one row per known id plus a shared
/// "unknown" row (the last one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEmbeddingTable")]
pub struct ForecasterEmbeddingTable {
    pub ids: Vec<String>,
    pub matrix: Matrix,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

pub const UNKNOWN_FORECASTER: &str = "<unknown>";

#[derive(Deserialize)]
struct RawEmbeddingTable {
    ids: Vec<String>,
    matrix: Matrix,
}

impl TryFrom<RawEmbeddingTable> for ForecasterEmbeddingTable {
    type Error = Error;

    fn try_from(raw: RawEmbeddingTable) -> Result<Self> {
        Self::from_parts(raw.ids, raw.matrix)
    }
}

impl ForecasterEmbeddingTable {
    pub fn from_parts(ids: Vec<String>, matrix: Matrix) -> Result<Self> {
        if matrix.rows != ids.len() + 1 {
            return Err(crate::error::contract(format!(
                "embedding matrix has {} rows for {} ids",
                matrix.rows,
                ids.len()
            )));
        }
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Ok(Self { ids, matrix, index })
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols
    }

    pub fn unknown_row(&self) -> usize {
        self.ids.len()
    }

    /// Row for `id`, or the unknown row.
    pub fn row_of(&self, id: &str) -> usize {
        self.index.get(id).copied().unwrap_or(self.ids.len())
    }

    pub fn vector(&self, row: usize) -> &[f64] {
        self.matrix.row(row)
    }

    /// CSV with columns `id, kind, v0..v{d-1}`.
    pub fn write_csv(&self, path: &Path, kinds: &HashMap<String, ForecasterKind>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["id".to_string(), "kind".to_string()];
        header.extend((0..self.dim()).map(|i| format!("v{i}")));
        w.write_record(&header)?;
        for row in 0..self.matrix.rows {
            let (id, kind) = match self.ids.get(row) {
                Some(id) => (
                    id.as_str(),
                    match kinds.get(id) {
                        Some(ForecasterKind::Human) => "human",
                        Some(ForecasterKind::Machine) => "machine",
                        None => "unknown",
                    },
                ),
                None => (UNKNOWN_FORECASTER, "unknown"),
            };
            let mut rec = vec![id.to_string(), kind.to_string()];
            rec.extend(self.matrix.row(row).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws every entry i.i.d. from `U(-√3, √3)` (zero mean, unit variance).
/// Duplicate ids are dropped, keeping the first.
pub fn init_forecaster_embeddings<R: Rng + ?Sized>(
    ids: &[String],
    dim: usize,
    rng: &mut R,
) -> ForecasterEmbeddingTable {
    let mut seen = HashSet::new();
    let ids: Vec<String> = ids.iter().filter(|id| seen.insert(id.as_str())).cloned().collect();
    let bound = 3f64.sqrt();
    let dist = Uniform::new(-bound, bound).expect("valid range");
    let rows = ids.len() + 1;
    let data = (0..rows * dim).map(|_| dist.sample(rng)).collect();
    ForecasterEmbeddingTable::from_parts(ids, Matrix::from_vec(rows, dim, data)).expect("consistent shape")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeEmbedding {
    pub sinusoid: Vec<f64>,
    pub progress: f64,
}

impl TimeEmbedding {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.sinusoid.clone();
        v.push(self.progress);
        v
    }
}

/// Sinusoidal components `sin(pos / 10000^(2i/d))`, `cos(..)` interleaved,
/// plus linear progress `pos / max(duration, 1)`.
pub fn time_embedding(position: i64, duration: i64, d_time: usize) -> TimeEmbedding {
    let pos = position as f64;
    let sinusoid = (0..d_time)
        .map(|k| {
            let i = (k / 2) as f64;
            let angle = pos / 10000f64.powf(2.0 * i / d_time as f64);
            if k % 2 == 0 {
                angle.sin()
            } else {
                angle.cos()
            }
        })
        .collect();
    TimeEmbedding {
        sinusoid,
        progress: pos / duration.max(1) as f64,
    }
}

/// Static layout of the engineered feature block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    /// Category vocabulary for the one-hot block; unseen categories are all
    /// zero.
    pub categories: Vec<String>,
    /// Sinusoidal dimensions of the forecast's own time feature.
    pub forecast_time_dim: usize,
}

impl FeatureSpec {
    pub fn from_questions<'a>(questions: impl IntoIterator<Item = &'a Question>, forecast_time_dim: usize) -> Self {
        let mut categories: Vec<String> = questions.into_iter().map(|q| q.category.clone()).collect();
        categories.sort();
        categories.dedup();
        Self {
            categories,
            forecast_time_dim,
        }
    }

    /// Length of the engineered block `F_i`.
    pub fn len(&self) -> usize {
        4 + self.categories.len() + 1 + self.forecast_time_dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Everything the model needs about one forecast except the (trainable)
/// forecaster vector itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastFeatures {
    /// Probabilities zero-padded to five options.
    pub probs: [f64; MAX_OPTIONS],
    pub forecaster_row: usize,
    /// Distinct forecasters on the question up to and including this one.
    pub forecaster_count: usize,
    /// Per-option variance of the forecasts so far, averaged over options.
    pub running_variance: f64,
    /// Assembled engineered block `F_i`.
    pub engineered: Vec<f64>,
}

impl ForecastFeatures {
    /// `[P_i, U_i, F_i]`.
    pub fn assemble(&self, embeddings: &ForecasterEmbeddingTable, out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(&self.probs);
        out.extend_from_slice(embeddings.vector(self.forecaster_row));
        out.extend_from_slice(&self.engineered);
    }
}

fn pad(probs: &[f64]) -> [f64; MAX_OPTIONS] {
    let mut p = [0.0; MAX_OPTIONS];
    for (d, s) in p.iter_mut().zip(probs) {
        *d = *s;
    }
    p
}

#[derive(Default)]
struct Running<'a> {
    n: usize,
    sum: [f64; MAX_OPTIONS],
    sum_sq: [f64; MAX_OPTIONS],
    forecasters: HashSet<&'a str>,
}

impl<'a> Running<'a> {
    fn push(&mut self, f: &'a Forecast) {
        self.n += 1;
        for (k, &p) in f.probs.iter().enumerate().take(MAX_OPTIONS) {
            self.sum[k] += p;
            self.sum_sq[k] += p * p;
        }
        self.forecasters.insert(f.forecaster_id.as_str());
    }

    fn variance(&self, n_options: usize) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let n = self.n as f64;
        let total: f64 = (0..n_options)
            .map(|k| {
                let mean = self.sum[k] / n;
                (self.sum_sq[k] / n - mean * mean).max(0.0)
            })
            .sum();
        total / n_options as f64
    }
}

fn engineered(question: &Question, forecast: &Forecast, running: &Running, spec: &FeatureSpec) -> ForecastFeatures {
    let n_options = question.n_options();
    let count = running.forecasters.len().max(1);
    let variance = running.variance(n_options);
    let mut f = Vec::with_capacity(spec.len());
    f.push((count as f64).ln());
    f.push(variance);
    f.push(n_options as f64 / MAX_OPTIONS as f64);
    f.push(if question.is_ordinal { 1.0 } else { 0.0 });
    f.extend(
        spec.categories
            .iter()
            .map(|c| if *c == question.category { 1.0 } else { 0.0 }),
    );
    let day = question
        .day_index(forecast.timestamp.date())
        .clamp(0, question.duration_days().max(0));
    let t = time_embedding(day, question.duration_days(), spec.forecast_time_dim);
    f.push(t.progress);
    f.extend(t.sinusoid);
    ForecastFeatures {
        probs: pad(&forecast.probs),
        forecaster_row: 0,
        forecaster_count: count,
        running_variance: variance,
        engineered: f,
    }
}

/// Features of one forecast given the question's history.
///
/// Only entries of `history` with a timestamp at or before the forecast's
/// are used, so appending later forecasts never changes the result.
pub fn build_features(
    question: &Question,
    forecast: &Forecast,
    history: &[&Forecast],
    embeddings: &ForecasterEmbeddingTable,
    spec: &FeatureSpec,
) -> ForecastFeatures {
    let mut running = Running::default();
    for h in history.iter().filter(|h| h.timestamp <= forecast.timestamp) {
        running.push(h);
    }
    if !history.iter().any(|h| std::ptr::eq(*h, forecast)) {
        running.push(forecast);
    }
    let mut out = engineered(question, forecast, &running, spec);
    out.forecaster_row = embeddings.row_of(&forecast.forecaster_id);
    out
}

/// Features for every forecast of a question; `sorted` must be ordered by
/// timestamp (as returned by the tournament). Agrees with
/// [`build_features`] called on each forecast with the full list as history.
pub fn build_question_features(
    question: &Question,
    sorted: &[&Forecast],
    embeddings: &ForecasterEmbeddingTable,
    spec: &FeatureSpec,
) -> Vec<ForecastFeatures> {
    let mut out = Vec::with_capacity(sorted.len());
    let mut running = Running::default();
    let mut start = 0;
    while start < sorted.len() {
        let ts = sorted[start].timestamp;
        let end = start + sorted[start..].iter().take_while(|f| f.timestamp == ts).count();
        for f in &sorted[start..end] {
            running.push(f);
        }
        for f in &sorted[start..end] {
            let mut feat = engineered(question, f, &running, spec);
            feat.forecaster_row = embeddings.row_of(&f.forecaster_id);
            out.push(feat);
        }
        start = end;
    }
    out
}

/// Writes `id, kind, v0..` rows for question anchors.
pub fn write_anchor_csv(path: &Path, rows: &[(String, String, AnchorVector)]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    let dim = rows.first().map_or(0, |r| r.2.values.len());
    let mut header = vec!["id".to_string(), "kind".to_string()];
    header.extend((0..dim).map(|i| format!("v{i}")));
    writeln!(file, "{}", header.join(","))?;
    for (id, kind, a) in rows {
        let vals: Vec<String> = a.values.iter().map(|v| v.to_string()).collect();
        writeln!(file, "{id},{kind},{}", vals.join(","))?;
    }
    Ok(())
}
