//! Wires a validated config into agents, trials and learning runs.

use std::time::Duration;

use tangram_core::dataset::{silhouette_dataset, SilhouetteConfig};
use tangram_core::episode::{run_trial, TrialResult};
use tangram_core::learning::{initial_seed, run_learning, LearningConfig, LearningOutcome};
use tangram_core::nn::{pretrain, ParameterSet, PretrainConfig, PretrainOutcome};
use tangram_core::pipeline::{
    Builtin, DescribeStage, EmbeddingTable, IdentifyStage, ImagineStage, InterpretStage, Mock, PerceiveStage, Receiver,
    Sender, StageSettings, Vocabulary,
};
use tangram_core::raster::{RasterView, ViewBank};
use tangram_core::seed::derive;
use tangram_core::Result;

use crate::config::{CalibrationScope, ExperimentConfig, StageBackend};
use crate::error::{SimError, SimResult};
use crate::formats::figures::FigureLibrary;
use crate::remote::{Client, Remote};

const SENDER: u64 = 0;
const RECEIVER: u64 = 1;

/// Everything fixed for the lifetime of one command.
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub seed: u64,
    pub figures: FigureLibrary,
    pub bank: ViewBank,
    pub vocab: Vocabulary,
    views: Vec<RasterView>,
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig) -> SimResult<Self> {
        cfg.validate()?;
        let seed = cfg.seed()?;
        let figures = match &cfg.figures_path {
            Some(p) => FigureLibrary::load(p)?,
            None => FigureLibrary::canonical(),
        };
        let bank = ViewBank::new(&figures.figures, cfg.raster_size, cfg.raster_size)?;
        let views = (0..bank.len()).flat_map(|f| (0..8).map(move |a| (f, a))).map(|(f, a)| bank.view(f, a).clone()).collect();
        let vocab = cfg.vocabulary()?;
        Ok(Experiment { cfg, seed, figures, bank, vocab, views })
    }

    /// Embedding and projection seeds of an agent; both agents share the
    /// sender's unless the config asks for separate ones.
    fn agent_seed(&self, purpose: &str, agent: u64) -> u64 {
        derive(self.seed, purpose, if self.cfg.shared_embedding { SENDER } else { agent })
    }

    fn table(&self, agent: u64) -> EmbeddingTable {
        EmbeddingTable::random(self.vocab.clone(), self.cfg.embedding_dim, self.agent_seed("embedding", agent))
    }

    fn settings(&self) -> StageSettings {
        StageSettings { alpha: self.cfg.alpha, describe_k: self.cfg.describe_k, feature_source: self.cfg.feature_source }
    }

    fn builtin(&self, params: &ParameterSet, agent: u64) -> Result<Builtin> {
        let mut b = Builtin::seeded(params.clone(), self.table(agent), self.settings(), self.agent_seed("projection", agent))?;
        b.precompute(&self.views)?;
        Ok(b)
    }

    /// Whether any stage needs perceiver parameters.
    pub fn needs_params(&self) -> bool {
        let b = &self.cfg.backend;
        b.uses(StageBackend::Builtin) || b.uses(StageBackend::Remote)
    }

    /// Bind both agents. `params` drives the sender; the receiver gets them
    /// too when calibration is shared and `base` otherwise.
    pub fn agents(&self, params: &ParameterSet, base: &ParameterSet) -> Result<(Sender, Receiver)> {
        let b = &self.cfg.backend;
        let receiver_params = match self.cfg.calibrate {
            CalibrationScope::Shared => params,
            CalibrationScope::Sender => base,
        };
        let s_builtin = self.builtin(params, SENDER)?;
        let r_builtin = if self.cfg.shared_embedding && receiver_params.hash() == params.hash() {
            s_builtin.clone()
        } else {
            self.builtin(receiver_params, RECEIVER)?
        };
        let s_mock = Mock::new(self.table(SENDER), self.cfg.message_len, b.mock_mode);
        let r_mock = Mock::new(self.table(RECEIVER), self.cfg.message_len, b.mock_mode);
        let remote = b.endpoint.as_ref().map(|e| Remote {
            client: Client::new(e, Duration::from_millis(b.timeout_ms)),
            local: s_builtin.clone(),
            strength: b.strength,
            message_len: self.cfg.message_len,
        });
        let remote = || remote.clone().expect("validated: remote stages have an endpoint");

        let perceive: Box<dyn PerceiveStage> = match b.perceive {
            StageBackend::Mock => Box::new(s_mock.clone()),
            _ => Box::new(s_builtin.clone()),
        };
        let imagine: Box<dyn ImagineStage> = match b.imagine {
            StageBackend::Builtin => Box::new(s_builtin.clone()),
            StageBackend::Mock => Box::new(s_mock.clone()),
            StageBackend::Remote => Box::new(remote()),
        };
        let describe: Box<dyn DescribeStage> = match b.describe {
            StageBackend::Builtin => Box::new(s_builtin),
            StageBackend::Mock => Box::new(s_mock),
            StageBackend::Remote => Box::new(remote()),
        };
        let interpret: Box<dyn InterpretStage> = match b.interpret {
            StageBackend::Mock => Box::new(r_mock.clone()),
            _ => Box::new(r_builtin.clone()),
        };
        let identify: Box<dyn IdentifyStage> = match b.identify {
            StageBackend::Mock => Box::new(r_mock),
            _ => Box::new(r_builtin),
        };
        Ok((Sender { vocab: self.vocab.clone(), perceive, imagine, describe }, Receiver { interpret, identify }))
    }

    /// Stand-in parameters for bindings that never touch the perceiver.
    pub fn placeholder_params(&self) -> SimResult<ParameterSet> {
        Ok(ParameterSet::zeros(self.cfg.net_spec(self.vocab.len()))?)
    }

    pub fn pretrain(&self) -> SimResult<PretrainOutcome> {
        let p = &self.cfg.pretrain;
        let data = silhouette_dataset(&SilhouetteConfig {
            classes: self.vocab.len(),
            per_class: p.per_class,
            width: self.cfg.raster_size,
            height: self.cfg.raster_size,
            jitter: p.jitter,
            seed: derive(self.seed, "silhouettes", 0),
        })?;
        let hp = PretrainConfig {
            epochs: p.epochs,
            lr: p.lr,
            batch_size: p.batch_size,
            val_fraction: p.val_fraction,
            seed: derive(self.seed, "pretrain", 0),
        };
        Ok(pretrain(&self.cfg.net_spec(self.vocab.len()), &data, &hp)?)
    }

    pub fn check_params(&self, params: &ParameterSet) -> SimResult<()> {
        let want = self.cfg.net_spec(self.vocab.len());
        if params.spec() != &want {
            return Err(SimError::Config("perceiver snapshot does not match the configured network".into()));
        }
        Ok(())
    }

    /// The trial that also opens every learning run.
    pub fn run_trial(&self, params: &ParameterSet) -> SimResult<TrialResult> {
        let (s, r) = self.agents(params, params)?;
        Ok(run_trial(&s, &r, &self.bank, self.cfg.receiver_angles, initial_seed(self.seed))?)
    }

    pub fn run_learning(&self, base: &ParameterSet) -> SimResult<LearningOutcome> {
        let cfg = LearningConfig {
            trials: self.cfg.trials,
            runs: self.cfg.runs,
            receiver_angles: self.cfg.receiver_angles,
            calibration: self.cfg.calibration.clone(),
            seed: self.seed,
        };
        let factory = |p: &ParameterSet| self.agents(p, base);
        Ok(run_learning(base, &self.bank, &factory, &cfg)?)
    }
}
