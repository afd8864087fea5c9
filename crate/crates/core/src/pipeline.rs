//! Sender stages (perceive, imagine, describe) and receiver stages
//! (interpret, identify).
//!
//! Sender and receiver meet in a shared D-dimensional space: each vocabulary
//! token has a fixed unit embedding, and perceiver features reach the same
//! space through a fixed random projection. Only a [`Message`] of tokens
//! crosses from sender to receiver.

use alloc::{boxed::Box, collections::BTreeMap, format, string::String, vec, vec::Vec};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::nn::{cosine, forward, LabelDistribution, ParameterSet};
use crate::raster::RasterView;
use crate::{seed, Error, Result};

pub const DEFAULT_EMBEDDING_DIM: usize = 32;
pub const DEFAULT_MESSAGE_LEN: usize = 3;
pub const DEFAULT_DESCRIBE_K: usize = 3;

const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    labels: Vec<String>,
}

impl Vocabulary {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidVocabulary("need at least two tokens".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.chars().any(char::is_whitespace) {
                return Err(Error::InvalidVocabulary(format!("token {l:?} is empty or contains whitespace")));
            }
            if labels[..i].contains(l) {
                return Err(Error::InvalidVocabulary(format!("duplicate token {l:?}")));
            }
        }
        Ok(Vocabulary { labels })
    }

    /// The archetype class names for the first `k` perceiver labels.
    pub fn archetypes(k: usize) -> Self {
        Vocabulary::new((0..k).map(crate::dataset::class_name).collect()).expect("class names are distinct")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn token(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == token)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = Error;
    fn try_from(labels: Vec<String>) -> Result<Self> {
        Vocabulary::new(labels)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.labels
    }
}

fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if !(norm > 1e-12) || !norm.is_finite() {
        return None;
    }
    if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Some(v.to_vec());
    }
    Some(v.iter().map(|x| x / norm).collect())
}

fn random_unit(dim: usize, rng: &mut seed::Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| seed::normal(rng)).collect();
        if let Some(u) = normalized(&v) {
            return u;
        }
    }
}

/// One unit-norm row per vocabulary token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingTable {
    vocab: Vocabulary,
    rows: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    pub fn random(vocab: Vocabulary, dim: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let rows = (0..vocab.len()).map(|_| random_unit(dim, &mut rng)).collect();
        EmbeddingTable { vocab, rows }
    }

    /// Rows are normalized; a zero row is rejected.
    pub fn from_rows(vocab: Vocabulary, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != vocab.len() {
            return Err(Error::InvalidVocabulary(format!("{} rows for {} tokens", rows.len(), vocab.len())));
        }
        let dim = rows.first().map_or(0, Vec::len);
        let mut out = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim || dim == 0 {
                return Err(Error::InvalidVocabulary(format!("row {i} has length {}", r.len())));
            }
            out.push(normalized(r).ok_or_else(|| Error::InvalidVocabulary(format!("row {i} is zero")))?);
        }
        Ok(EmbeddingTable { vocab, rows: out })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.vocab.index_of(token).map(|i| self.row(i))
    }
}

/// Grayscale picture attached to a representation by image-producing backends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

/// A unit vector in the shared space, optionally with the picture it was
/// derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    vector: Vec<f64>,
    pub imagery: Option<GrayImage>,
}

impl Representation {
    /// Normalizes `v`; fails on a (near) zero vector.
    pub fn from_vector(v: &[f64]) -> Option<Self> {
        normalized(v).map(|vector| Representation { vector, imagery: None })
    }

    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn is_unit(&self) -> bool {
        let n = libm::sqrt(self.vector.iter().map(|x| x * x).sum::<f64>());
        (n - 1.0).abs() <= NORM_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub tokens: Vec<String>,
}

impl Message {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::UninterpretableMessage);
        }
        Ok(Message { tokens })
    }
}

/// Fixed random linear map from perceiver features into the shared space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
}

impl Projection {
    pub fn random(inputs: usize, outputs: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let scale = 1.0 / libm::sqrt(outputs as f64);
        let weights = (0..inputs * outputs).map(|_| seed::normal(&mut rng) * scale).collect();
        Projection { inputs, outputs, weights }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.inputs {
            return Err(Error::ShapeMismatch {
                layer: "projection".into(),
                detail: format!("expected {} features, got {}", self.inputs, x.len()),
            });
        }
        Ok((0..self.outputs)
            .map(|j| self.weights[j * self.inputs..(j + 1) * self.inputs].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Which perceiver layer is compared in the shared space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSource {
    /// Hidden activations feeding the output layer.
    Penultimate,
    /// The output probability vector.
    #[default]
    Probabilities,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    /// Position of the chosen candidate in the presented list.
    pub index: usize,
    /// One score per presented candidate; `-inf` marks a degenerate candidate.
    pub scores: Vec<f64>,
}

pub fn perceive(params: &ParameterSet, view: &RasterView) -> Result<LabelDistribution> {
    Ok(forward(params, view)?.dist)
}

/// Perceiver features of `view` mapped into the shared space and normalized.
/// `None` when the projected vector vanishes.
pub fn project_view(
    params: &ParameterSet,
    projection: &Projection,
    source: FeatureSource,
    view: &RasterView,
) -> Result<Option<Vec<f64>>> {
    let out = forward(params, view)?;
    let feats = match source {
        FeatureSource::Penultimate => out.features.data,
        FeatureSource::Probabilities => out.dist.probs,
    };
    Ok(normalized(&projection.apply(&feats)?))
}

/// Blend the label's embedding with the projected view:
/// `normalize(alpha·E[label] + (1 − alpha)·normalize(P·features))`.
pub fn imagine(
    top_label: &str,
    view: &RasterView,
    params: &ParameterSet,
    emb: &EmbeddingTable,
    projection: &Projection,
    source: FeatureSource,
    alpha: f64,
) -> Result<Representation> {
    let label = emb.lookup(top_label).ok_or_else(|| Error::UnknownToken(top_label.into()))?;
    if alpha >= 1.0 {
        return Representation::from_vector(label).ok_or(Error::DegenerateImagination);
    }
    blend(label, project_view(params, projection, source, view)?.as_deref(), alpha)
}

fn blend(label: &[f64], seen: Option<&[f64]>, alpha: f64) -> Result<Representation> {
    let blended: Vec<f64> = match seen {
        Some(seen) if alpha < 1.0 => label.iter().zip(seen).map(|(e, s)| alpha * e + (1.0 - alpha) * s).collect(),
        _ => label.iter().map(|e| alpha * e).collect(),
    };
    Representation::from_vector(&blended).ok_or(Error::DegenerateImagination)
}

/// The `k` tokens whose embeddings are most similar to `r`, best first;
/// ties go to the lower vocabulary index.
pub fn describe(r: &Representation, emb: &EmbeddingTable, k: usize) -> Result<Message> {
    let n = emb.vocab().len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("describe k={k} outside 1..={n}")));
    }
    let mut ranked: Vec<(usize, f64)> =
        (0..n).map(|i| Ok((i, cosine(r.vector(), emb.row(i))?))).collect::<Result<_>>()?;
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Message::new(ranked.into_iter().take(k).map(|(i, _)| emb.vocab().token(i).into()).collect())
}

/// Normalized mean embedding of the known tokens; unknown tokens are skipped.
pub fn interpret(msg: &Message, emb: &EmbeddingTable) -> Result<Representation> {
    let mut sum = vec![0.0; emb.dim()];
    let mut known = 0usize;
    for row in msg.tokens.iter().filter_map(|t| emb.lookup(t)) {
        known += 1;
        sum.iter_mut().zip(row).for_each(|(s, e)| *s += e);
    }
    if known == 0 {
        return Err(Error::UninterpretableMessage);
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / known as f64).collect();
    Representation::from_vector(&mean).ok_or(Error::UninterpretableMessage)
}

/// Score every candidate by cosine between `r` and its projected features;
/// the best score wins, ties to the lowest position.
pub fn identify(
    r: &Representation,
    candidates: &[RasterView],
    params: &ParameterSet,
    projection: &Projection,
    source: FeatureSource,
) -> Result<Identification> {
    let projected =
        candidates.iter().map(|c| project_view(params, projection, source, c)).collect::<Result<Vec<_>>>()?;
    score_candidates(r, &projected)
}

fn score_candidates(r: &Representation, projected: &[Option<Vec<f64>>]) -> Result<Identification> {
    let scores = projected
        .iter()
        .map(|p| match p {
            Some(v) => cosine(r.vector(), v),
            None => Ok(f64::NEG_INFINITY),
        })
        .collect::<Result<Vec<f64>>>()?;
    choose(scores)
}

fn choose(scores: Vec<f64>) -> Result<Identification> {
    if scores.is_empty() || scores.iter().all(|s| *s == f64::NEG_INFINITY) {
        return Err(Error::NoIdentifiableCandidate);
    }
    let index = crate::nn::argmax(&scores);
    Ok(Identification { index, scores })
}

pub trait PerceiveStage: Send + Sync {
    fn perceive(&self, view: &RasterView, seed: u64) -> Result<LabelDistribution>;
}

pub trait ImagineStage: Send + Sync {
    fn imagine(&self, top_label: &str, view: &RasterView, seed: u64) -> Result<Representation>;
}

pub trait DescribeStage: Send + Sync {
    fn describe(&self, r: &Representation, seed: u64) -> Result<Message>;
}

pub trait InterpretStage: Send + Sync {
    fn interpret(&self, msg: &Message, seed: u64) -> Result<Representation>;
}

pub trait IdentifyStage: Send + Sync {
    fn identify(&self, r: &Representation, candidates: &[RasterView], seed: u64) -> Result<Identification>;
}

/// Knobs shared by the builtin stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSettings {
    pub alpha: f64,
    pub describe_k: usize,
    pub feature_source: FeatureSource,
}

impl Default for StageSettings {
    fn default() -> Self {
        StageSettings { alpha: 0.5, describe_k: DEFAULT_DESCRIBE_K, feature_source: FeatureSource::Probabilities }
    }
}

/// What the perceiver makes of one view.
#[derive(Debug, Clone, PartialEq)]
struct Observation {
    dist: LabelDistribution,
    projected: Option<Vec<f64>>,
}

/// The neural backend for all five stages.
#[derive(Debug, Clone)]
pub struct Builtin {
    pub params: ParameterSet,
    pub emb: EmbeddingTable,
    pub projection: Projection,
    pub settings: StageSettings,
    // keyed by raster content hash; valid only while `params` has `cache_params`
    cache: BTreeMap<String, Observation>,
    cache_params: String,
}

fn feature_len(params: &ParameterSet, source: FeatureSource) -> Result<usize> {
    match source {
        FeatureSource::Penultimate => params.spec().feature_len(),
        FeatureSource::Probabilities => params.spec().labels(),
    }
}

impl Builtin {
    /// Like [`Builtin::new`] with a fresh projection of the right shape.
    pub fn seeded(params: ParameterSet, emb: EmbeddingTable, settings: StageSettings, projection_seed: u64) -> Result<Self> {
        let projection = Projection::random(feature_len(&params, settings.feature_source)?, emb.dim(), projection_seed);
        Builtin::new(params, emb, projection, settings)
    }

    pub fn new(params: ParameterSet, emb: EmbeddingTable, projection: Projection, settings: StageSettings) -> Result<Self> {
        let labels = params.spec().labels()?;
        if labels != emb.vocab().len() {
            return Err(Error::InvalidVocabulary(format!(
                "perceiver has {labels} labels but vocabulary has {} tokens",
                emb.vocab().len()
            )));
        }
        let feats = feature_len(&params, settings.feature_source)?;
        if projection.inputs() != feats || projection.outputs() != emb.dim() {
            return Err(Error::ShapeMismatch {
                layer: "projection".into(),
                detail: format!(
                    "projection is {}->{}, need {feats}->{}",
                    projection.inputs(),
                    projection.outputs(),
                    emb.dim()
                ),
            });
        }
        if !(0.0..=1.0).contains(&settings.alpha) {
            return Err(Error::InvalidArgument(format!("alpha {} outside [0, 1]", settings.alpha)));
        }
        Ok(Builtin { params, emb, projection, settings, cache: BTreeMap::new(), cache_params: String::new() })
    }

    /// Same stages bound to other perceiver parameters.
    pub fn with_params(&self, params: ParameterSet) -> Self {
        Builtin { params, cache: BTreeMap::new(), cache_params: String::new(), ..self.clone() }
    }

    /// Perceive `views` up front so later stage calls on identical rasters
    /// skip the network. Outputs are the same either way.
    pub fn precompute<'a>(&mut self, views: impl IntoIterator<Item = &'a RasterView>) -> Result<()> {
        if self.cache_params != self.params.hash() {
            self.cache.clear();
            self.cache_params = self.params.hash().into();
        }
        for v in views {
            let key = v.content_hash();
            if !self.cache.contains_key(&key) {
                let obs = self.run(v)?;
                self.cache.insert(key, obs);
            }
        }
        Ok(())
    }

    fn run(&self, view: &RasterView) -> Result<Observation> {
        let out = forward(&self.params, view)?;
        let feats = match self.settings.feature_source {
            FeatureSource::Penultimate => &out.features.data,
            FeatureSource::Probabilities => &out.dist.probs,
        };
        let projected = normalized(&self.projection.apply(feats)?);
        Ok(Observation { dist: out.dist, projected })
    }

    fn observe(&self, view: &RasterView) -> Result<Observation> {
        if !self.cache.is_empty() && self.cache_params == self.params.hash() {
            if let Some(obs) = self.cache.get(&view.content_hash()) {
                return Ok(obs.clone());
            }
        }
        self.run(view)
    }
}

impl PerceiveStage for Builtin {
    fn perceive(&self, view: &RasterView, _seed: u64) -> Result<LabelDistribution> {
        Ok(self.observe(view)?.dist)
    }
}

impl ImagineStage for Builtin {
    fn imagine(&self, top_label: &str, view: &RasterView, _seed: u64) -> Result<Representation> {
        let label = self.emb.lookup(top_label).ok_or_else(|| Error::UnknownToken(top_label.into()))?;
        if self.settings.alpha >= 1.0 {
            return Representation::from_vector(label).ok_or(Error::DegenerateImagination);
        }
        blend(label, self.observe(view)?.projected.as_deref(), self.settings.alpha)
    }
}

impl DescribeStage for Builtin {
    fn describe(&self, r: &Representation, _seed: u64) -> Result<Message> {
        describe(r, &self.emb, self.settings.describe_k)
    }
}

impl InterpretStage for Builtin {
    fn interpret(&self, msg: &Message, _seed: u64) -> Result<Representation> {
        interpret(msg, &self.emb)
    }
}

impl IdentifyStage for Builtin {
    fn identify(&self, r: &Representation, candidates: &[RasterView], _seed: u64) -> Result<Identification> {
        let projected = candidates.iter().map(|c| Ok(self.observe(c)?.projected)).collect::<Result<Vec<_>>>()?;
        score_candidates(r, &projected)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockMode {
    /// Every output is drawn from a stable hash of (stage, input, seed).
    #[default]
    Hash,
    /// Rigged so the intended figure always wins: perceive peaks at the
    /// figure id and identify scores candidates by their id's embedding.
    Oracle,
}

/// Deterministic test backend.
#[derive(Debug, Clone)]
pub struct Mock {
    pub emb: EmbeddingTable,
    pub message_len: usize,
    pub mode: MockMode,
}

impl Mock {
    pub fn new(emb: EmbeddingTable, message_len: usize, mode: MockMode) -> Self {
        let message_len = message_len.clamp(1, emb.vocab().len());
        Mock { emb, message_len, mode }
    }

    fn rng(&self, stage: &str, encoding: &[u8], seed: u64) -> seed::Rng {
        seed::rng(mock_hash(stage, encoding, seed))
    }
}

/// Stable 64-bit hash of (stage name, canonical input bytes, seed).
pub fn mock_hash(stage: &str, encoding: &[u8], seed: u64) -> u64 {
    let mut bytes = Vec::with_capacity(stage.len() + encoding.len() + 24);
    bytes.extend_from_slice(&(stage.len() as u64).to_le_bytes());
    bytes.extend_from_slice(stage.as_bytes());
    bytes.extend_from_slice(&(encoding.len() as u64).to_le_bytes());
    bytes.extend_from_slice(encoding);
    bytes.extend_from_slice(&seed.to_le_bytes());
    seed::hash64(&bytes)
}

fn encode_raster(v: &RasterView, out: &mut Vec<u8>) {
    out.extend_from_slice(&(v.width as u64).to_le_bytes());
    out.extend_from_slice(&(v.height as u64).to_le_bytes());
    out.extend_from_slice(&v.pixels);
}

fn encode_vector(v: &[f64], out: &mut Vec<u8>) {
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn encode_tokens(tokens: &[String], out: &mut Vec<u8>) {
    for t in tokens {
        out.extend_from_slice(&(t.len() as u64).to_le_bytes());
        out.extend_from_slice(t.as_bytes());
    }
}

impl PerceiveStage for Mock {
    fn perceive(&self, view: &RasterView, seed: u64) -> Result<LabelDistribution> {
        let k = self.emb.vocab().len();
        let mut probs = match self.mode {
            MockMode::Hash => {
                let mut enc = Vec::new();
                encode_raster(view, &mut enc);
                let mut rng = self.rng("perceive", &enc, seed);
                (0..k).map(|_| rng.gen_range(1e-3..1.0)).collect::<Vec<f64>>()
            }
            MockMode::Oracle => {
                let mut p = vec![0.1 / (k - 1) as f64; k];
                p[view.figure_id as usize % k] = 0.9;
                p
            }
        };
        let sum: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= sum);
        LabelDistribution::from_probs(probs)
    }
}

impl ImagineStage for Mock {
    fn imagine(&self, top_label: &str, view: &RasterView, seed: u64) -> Result<Representation> {
        match self.mode {
            MockMode::Hash => {
                let mut enc = Vec::new();
                encode_tokens(&[top_label.into()], &mut enc);
                encode_raster(view, &mut enc);
                let v = random_unit(self.emb.dim(), &mut self.rng("imagine", &enc, seed));
                Representation::from_vector(&v).ok_or(Error::DegenerateImagination)
            }
            MockMode::Oracle => {
                let row = self.emb.lookup(top_label).ok_or_else(|| Error::UnknownToken(top_label.into()))?;
                Representation::from_vector(row).ok_or(Error::DegenerateImagination)
            }
        }
    }
}

impl DescribeStage for Mock {
    fn describe(&self, r: &Representation, seed: u64) -> Result<Message> {
        match self.mode {
            MockMode::Hash => {
                let mut enc = Vec::new();
                encode_vector(r.vector(), &mut enc);
                let mut rng = self.rng("describe", &enc, seed);
                let vocab = self.emb.vocab();
                let picks = rand::seq::index::sample(&mut rng, vocab.len(), self.message_len);
                Message::new(picks.into_iter().map(|i| vocab.token(i).into()).collect())
            }
            MockMode::Oracle => describe(r, &self.emb, 1),
        }
    }
}

impl InterpretStage for Mock {
    fn interpret(&self, msg: &Message, seed: u64) -> Result<Representation> {
        match self.mode {
            MockMode::Hash => {
                let mut enc = Vec::new();
                encode_tokens(&msg.tokens, &mut enc);
                let v = random_unit(self.emb.dim(), &mut self.rng("interpret", &enc, seed));
                Representation::from_vector(&v).ok_or(Error::UninterpretableMessage)
            }
            MockMode::Oracle => interpret(msg, &self.emb),
        }
    }
}

impl IdentifyStage for Mock {
    fn identify(&self, r: &Representation, candidates: &[RasterView], seed: u64) -> Result<Identification> {
        let scores = match self.mode {
            MockMode::Hash => {
                let mut enc = Vec::new();
                encode_vector(r.vector(), &mut enc);
                for c in candidates {
                    encode_raster(c, &mut enc);
                }
                let mut rng = self.rng("identify", &enc, seed);
                candidates.iter().map(|_| rng.gen_range(-1.0..1.0)).collect()
            }
            MockMode::Oracle => {
                let k = self.emb.vocab().len();
                candidates
                    .iter()
                    .map(|c| cosine(r.vector(), self.emb.row(c.figure_id as usize % k)))
                    .collect::<Result<Vec<f64>>>()?
            }
        };
        choose(scores)
    }
}

/// The sender's three stages.
pub struct Sender {
    pub vocab: Vocabulary,
    pub perceive: Box<dyn PerceiveStage>,
    pub imagine: Box<dyn ImagineStage>,
    pub describe: Box<dyn DescribeStage>,
}

impl Sender {
    /// All three stages served by one backend.
    pub fn from_backend<B>(vocab: Vocabulary, backend: B) -> Self
    where
        B: PerceiveStage + ImagineStage + DescribeStage + Clone + 'static,
    {
        Sender { vocab, perceive: Box::new(backend.clone()), imagine: Box::new(backend.clone()), describe: Box::new(backend) }
    }
}

/// The receiver's two stages. Its only input from the sender is a [`Message`].
pub struct Receiver {
    pub interpret: Box<dyn InterpretStage>,
    pub identify: Box<dyn IdentifyStage>,
}

impl Receiver {
    pub fn from_backend<B>(backend: B) -> Self
    where
        B: InterpretStage + IdentifyStage + Clone + 'static,
    {
        Receiver { interpret: Box::new(backend.clone()), identify: Box::new(backend) }
    }

    pub fn receive(&self, msg: &Message, candidates: &[RasterView], seed: u64) -> Result<Identification> {
        let r = self.interpret.interpret(msg, seed)?;
        self.identify.identify(&r, candidates, seed)
    }
}
