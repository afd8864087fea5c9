//! Experiment configuration, read from TOML or JSON by file extension.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tangram_core::episode::ReceiverAngles;
use tangram_core::learning::CalibrationConfig;
use tangram_core::nn::NetSpec;
use tangram_core::pipeline::{FeatureSource, MockMode, Vocabulary, DEFAULT_DESCRIBE_K, DEFAULT_EMBEDDING_DIM, DEFAULT_MESSAGE_LEN};
use tangram_core::raster::{DEFAULT_SIZE, MIN_SIZE};

use crate::error::{SimError, SimResult};
use crate::fsio;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageBackend {
    #[default]
    Builtin,
    Mock,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub perceive: StageBackend,
    pub imagine: StageBackend,
    pub describe: StageBackend,
    pub interpret: StageBackend,
    pub identify: StageBackend,
    pub mock_mode: MockMode,
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
    /// img2img strength sent with remote imagine requests.
    pub strength: f64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            perceive: StageBackend::Builtin,
            imagine: StageBackend::Builtin,
            describe: StageBackend::Builtin,
            interpret: StageBackend::Builtin,
            identify: StageBackend::Builtin,
            mock_mode: MockMode::Hash,
            endpoint: None,
            timeout_ms: 30_000,
            strength: 0.5,
        }
    }
}

impl BackendConfig {
    /// Bind every stage that supports `backend`. Remote only serves imagine
    /// and describe; the other stages stay builtin.
    pub fn set_all(&mut self, backend: StageBackend) {
        let other = if backend == StageBackend::Remote { StageBackend::Builtin } else { backend };
        self.perceive = other;
        self.imagine = backend;
        self.describe = backend;
        self.interpret = other;
        self.identify = other;
    }

    fn stages(&self) -> [(&'static str, StageBackend); 5] {
        [
            ("perceive", self.perceive),
            ("imagine", self.imagine),
            ("describe", self.describe),
            ("interpret", self.interpret),
            ("identify", self.identify),
        ]
    }

    pub fn uses(&self, backend: StageBackend) -> bool {
        self.stages().iter().any(|(_, b)| *b == backend)
    }
}

/// Inline token list or a path to one (JSON array, or one token per line).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VocabularySource {
    Inline(Vec<String>),
    Path(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetConfig {
    pub hidden: usize,
    /// Full replacement of the default layer list.
    pub spec: Option<NetSpec>,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig { hidden: 64, spec: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PretrainSettings {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub val_fraction: f64,
    pub per_class: usize,
    pub jitter: f64,
}

impl Default for PretrainSettings {
    fn default() -> Self {
        let hp = tangram_core::nn::PretrainConfig::default();
        PretrainSettings { epochs: hp.epochs, lr: hp.lr, batch_size: hp.batch_size, val_fraction: hp.val_fraction, per_class: 200, jitter: 0.04 }
    }
}

/// Which agents use the calibrated perceiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationScope {
    /// Both agents run the one perceiver being calibrated.
    #[default]
    Shared,
    /// Only the sender's copy is calibrated; the receiver keeps the base.
    Sender,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub figures_path: Option<PathBuf>,
    /// Perceiver snapshot; `<out_dir>/perceiver.params` when unset.
    pub params_path: Option<PathBuf>,
    pub raster_size: usize,
    pub vocabulary: Option<VocabularySource>,
    /// Vocabulary size when no explicit vocabulary is given.
    pub labels: usize,
    pub embedding_dim: usize,
    /// One embedding table and projection for both agents, or one each.
    pub shared_embedding: bool,
    pub alpha: f64,
    pub message_len: usize,
    pub describe_k: usize,
    pub feature_source: FeatureSource,
    pub backend: BackendConfig,
    pub net: NetConfig,
    pub pretrain: PretrainSettings,
    pub calibration: CalibrationConfig,
    pub calibrate: CalibrationScope,
    pub trials: usize,
    pub runs: usize,
    pub receiver_angles: ReceiverAngles,
    /// Partner memory key; learning starts from and stores to this partner.
    pub partner: Option<String>,
    /// Partner memory root; `<out_dir>/partners` when unset.
    pub partners_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: None,
            out_dir: PathBuf::from("out"),
            figures_path: None,
            params_path: None,
            raster_size: DEFAULT_SIZE,
            vocabulary: None,
            labels: 16,
            embedding_dim: DEFAULT_EMBEDDING_DIM,
            shared_embedding: true,
            alpha: 0.5,
            message_len: DEFAULT_MESSAGE_LEN,
            describe_k: DEFAULT_DESCRIBE_K,
            feature_source: FeatureSource::default(),
            backend: BackendConfig::default(),
            net: NetConfig::default(),
            pretrain: PretrainSettings::default(),
            calibration: CalibrationConfig::default(),
            calibrate: CalibrationScope::default(),
            trials: 10,
            runs: 10,
            receiver_angles: ReceiverAngles::default(),
            partner: None,
            partners_dir: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> SimError {
    SimError::Config(msg.into())
}

impl ExperimentConfig {
    /// Parse a `.toml` or `.json` file. Relative paths inside it are resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> SimResult<Self> {
        let text = fsio::read_string(path)?;
        let mut cfg: ExperimentConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).map_err(|e| SimError::format(path, e))?,
            Some("json") => serde_json::from_str(&text).map_err(|e| SimError::format(path, e))?,
            _ => return Err(SimError::format(path, "config must end in .toml or .json")),
        };
        let dir = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        cfg.figures_path.as_mut().map(rebase);
        cfg.params_path.as_mut().map(rebase);
        cfg.partners_dir.as_mut().map(rebase);
        if let Some(VocabularySource::Path(p)) = cfg.vocabulary.as_mut() {
            rebase(p);
        }
        rebase(&mut cfg.out_dir);
        Ok(cfg)
    }

    pub fn seed(&self) -> SimResult<u64> {
        self.seed.ok_or_else(|| invalid("no seed: set `seed` in the config or pass --seed"))
    }

    pub fn params_path(&self) -> PathBuf {
        self.params_path.clone().unwrap_or_else(|| self.out_dir.join("perceiver.params"))
    }

    pub fn partners_dir(&self) -> PathBuf {
        self.partners_dir.clone().unwrap_or_else(|| self.out_dir.join("partners"))
    }

    pub fn vocabulary(&self) -> SimResult<Vocabulary> {
        let tokens = match &self.vocabulary {
            None => return Ok(Vocabulary::archetypes(self.labels)),
            Some(VocabularySource::Inline(tokens)) => tokens.clone(),
            Some(VocabularySource::Path(path)) => {
                let text = fsio::read_string(path)?;
                if path.extension().and_then(|e| e.to_str()) == Some("json") {
                    serde_json::from_str(&text).map_err(|e| SimError::format(path, e))?
                } else {
                    text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect()
                }
            }
        };
        Vocabulary::new(tokens).map_err(|e| invalid(e.to_string()))
    }

    pub fn net_spec(&self, labels: usize) -> NetSpec {
        self.net.spec.clone().unwrap_or_else(|| NetSpec::perceiver(labels, self.net.hidden, self.raster_size, self.raster_size))
    }

    /// Check everything that can be checked before running.
    pub fn validate(&self) -> SimResult<()> {
        self.seed()?;
        if let Some(p) = &self.figures_path {
            if !p.is_file() {
                return Err(invalid(format!("figures file {} does not exist", p.display())));
            }
        }
        if let Some(p) = &self.params_path {
            if !p.is_file() {
                return Err(invalid(format!("params file {} does not exist", p.display())));
            }
        }
        let vocab = self.vocabulary()?;
        let k = vocab.len();
        if self.raster_size < MIN_SIZE {
            return Err(invalid(format!("raster_size must be at least {MIN_SIZE}")));
        }
        if self.embedding_dim == 0 {
            return Err(invalid("embedding_dim must be positive"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(invalid(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if self.message_len == 0 || self.message_len > k {
            return Err(invalid(format!("message_len must be in 1..={k}")));
        }
        if self.describe_k == 0 || self.describe_k > self.message_len {
            return Err(invalid(format!("describe_k must be in 1..={}", self.message_len)));
        }
        if self.trials == 0 || self.runs == 0 {
            return Err(invalid("trials and runs must be at least 1"));
        }
        if let ReceiverAngles::Offset(s) = self.receiver_angles {
            if s >= 8 {
                return Err(invalid("receiver angle offset must be below 8"));
            }
        }
        self.calibration.validate().map_err(|e| invalid(e.to_string()))?;
        let p = &self.pretrain;
        if p.epochs == 0 || p.batch_size == 0 || p.per_class == 0 || !(p.lr > 0.0) || !(p.val_fraction > 0.0 && p.val_fraction < 1.0) {
            return Err(invalid("pretrain settings must be positive with val_fraction in (0, 1)"));
        }
        if !(p.jitter >= 0.0) {
            return Err(invalid("pretrain jitter must be non-negative"));
        }
        let spec = self.net_spec(k);
        let labels = spec.labels().map_err(|e| invalid(format!("net: {e}")))?;
        if labels != k || spec.input_height != self.raster_size || spec.input_width != self.raster_size {
            return Err(invalid(format!(
                "net expects {}×{} input and {labels} labels; config has {}×{} rasters and {k} tokens",
                spec.input_height, spec.input_width, self.raster_size, self.raster_size
            )));
        }
        let b = &self.backend;
        for (stage, backend) in b.stages() {
            if backend == StageBackend::Remote && !matches!(stage, "imagine" | "describe") {
                return Err(invalid(format!("stage {stage} has no remote backend")));
            }
        }
        if b.describe == StageBackend::Remote && b.imagine != StageBackend::Remote {
            return Err(invalid("remote describe captions the picture from remote imagine; bind imagine to remote too"));
        }
        if b.uses(StageBackend::Remote) {
            match &b.endpoint {
                Some(e) if e.starts_with("http://") => {}
                Some(e) => return Err(invalid(format!("endpoint {e:?} must be an http:// URL"))),
                None => return Err(invalid("remote backend selected but no endpoint given")),
            }
            if !(0.0..=1.0).contains(&b.strength) {
                return Err(invalid("backend strength must be in [0, 1]"));
            }
        }
        if let Some(id) = &self.partner {
            if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(invalid(format!("partner id {id:?} must be ASCII letters, digits, '-' or '_'")));
            }
        }
        Ok(())
    }

    /// The config as echoed into reports: output locations are dropped so
    /// that identical experiments written to different places compare equal.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("out_dir");
            map.remove("params_path");
            map.remove("partners_dir");
        }
        v
    }
}
