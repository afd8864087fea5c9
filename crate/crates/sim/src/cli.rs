//! Command-line verbs. Exit status: 0 success, 2 configuration error,
//! 3 runtime or backend error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tangram_core::episode::TrialResult;
use tangram_core::learning::{LearningOutcome, PartnerMeta};
use tangram_core::nn::ParameterSet;
use tangram_core::raster::render_view;

use crate::config::{ExperimentConfig, StageBackend};
use crate::error::{SimError, SimResult};
use crate::experiment::Experiment;
use crate::formats::episodes::{self, write_trial};
use crate::formats::figures::FigureLibrary;
use crate::formats::{pgm, snapshot};
use crate::fsio;
use crate::partners::PartnerStore;
use crate::report;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Builtin,
    Mock,
    Remote,
}

impl From<BackendArg> for StageBackend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Builtin => StageBackend::Builtin,
            BackendArg::Mock => StageBackend::Mock,
            BackendArg::Remote => StageBackend::Remote,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tangram", version, about = "Tangram naming game between two neural agents")]
pub struct Cli {
    /// Experiment config (.toml or .json).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (for gen-figures: the library file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Bind every stage to one backend; remote binds imagine and describe.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    /// Remote backend base URL.
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the six canonical figures as a library file.
    GenFigures {
        /// Also dump every view as PGM into this directory.
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Train the perceiver on the silhouette corpus.
    Pretrain,
    /// One 48-episode trial.
    RunTrial,
    /// Repeated trials with calibration, several runs.
    RunLearning,
    /// Rebuild the report bundle from an episode log.
    Report,
}

fn resolve_config(cli: &Cli) -> SimResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(b) = cli.backend {
        cfg.backend.set_all(b.into());
    }
    if let Some(e) = &cli.endpoint {
        cfg.backend.endpoint = Some(e.clone());
    }
    Ok(cfg)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> SimResult<()> {
    let mut json = serde_json::to_vec_pretty(value).expect("serializable");
    json.push(b'\n');
    fsio::write_atomic(path, &json)
}

fn load_params(exp: &Experiment) -> SimResult<ParameterSet> {
    if !exp.needs_params() {
        return exp.placeholder_params();
    }
    let path = exp.cfg.params_path();
    if !path.is_file() {
        return Err(SimError::Config(format!("no perceiver at {}; run `tangram pretrain` first", path.display())));
    }
    let params = snapshot::load(&path)?;
    exp.check_params(&params)?;
    Ok(params)
}

#[derive(Serialize)]
struct PretrainMetrics {
    val_accuracy: f64,
    train_size: usize,
    val_size: usize,
    epoch_losses: Vec<f64>,
    hash: String,
}

fn gen_figures(cli: &Cli, pgm_dir: Option<&Path>) -> SimResult<String> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("figures/default6.json"));
    let lib = FigureLibrary::canonical();
    lib.save(&out)?;
    if let Some(dir) = pgm_dir {
        fsio::create_dir_all(dir)?;
        for f in &lib.figures {
            for angle in 0..8 {
                let view = render_view(f, angle, tangram_core::raster::DEFAULT_SIZE, tangram_core::raster::DEFAULT_SIZE)?;
                fsio::write_atomic(&dir.join(format!("{}_{angle}.pgm", f.name)), &pgm::encode(&view))?;
            }
        }
    }
    Ok(format!("wrote {} figures to {}", lib.figures.len(), out.display()))
}

fn pretrain(exp: &Experiment) -> SimResult<String> {
    let out = exp.pretrain()?;
    let path = exp.cfg.params_path();
    snapshot::save(&out.params, &path)?;
    let metrics = PretrainMetrics {
        val_accuracy: out.val_accuracy,
        train_size: out.train_size,
        val_size: out.val_size,
        epoch_losses: out.epoch_losses,
        hash: out.params.hash().to_string(),
    };
    write_json(&exp.cfg.out_dir.join("pretrain.json"), &metrics)?;
    Ok(format!("val accuracy {:.4}; perceiver saved to {}", metrics.val_accuracy, path.display()))
}

fn finish_report(exp: &Experiment, log: Vec<u8>, params: &ParameterSet) -> SimResult<report::Report> {
    let log_path = exp.cfg.out_dir.join("episodes.jsonl");
    fsio::write_atomic(&log_path, &log)?;
    let lines = episodes::parse(std::str::from_utf8(&log).expect("serde_json writes UTF-8"), &log_path)?;
    let rep = report::build(&exp.figures.names(), &lines, echo(exp, params))?;
    report::write(&rep, &exp.cfg.out_dir.join("report"))?;
    Ok(rep)
}

fn echo(exp: &Experiment, params: &ParameterSet) -> serde_json::Value {
    let mut v = exp.cfg.echo();
    if let Some(map) = v.as_object_mut() {
        map.insert("params_hash".into(), params.hash().into());
    }
    v
}

fn run_trial(exp: &Experiment) -> SimResult<String> {
    let params = load_params(exp)?;
    let trial = exp.run_trial(&params)?;
    let mut log = Vec::new();
    write_trial(&mut log, None, 0, &trial);
    finish_report(exp, log, &params)?;
    let a = trial.accuracy.ok_or_else(|| all_errored(&trial))?;
    Ok(format!("accuracy {a:.4} ({} errored)", trial.errored))
}

/// A trial without a single completed episode is a failed run; the
/// artifacts are still written so the errors can be inspected.
fn all_errored(trial: &TrialResult) -> SimError {
    let first = trial.episodes.iter().find_map(|e| e.error.clone()).unwrap_or_default();
    SimError::Runtime(format!("every episode of the trial errored; first error: {first}"))
}

/// The run whose last trial scored best; the earliest run wins ties.
fn best_run(out: &LearningOutcome) -> usize {
    let last: Vec<f64> = out.series.rows.iter().map(|r| *r.last().expect("nonempty row")).collect();
    tangram_core::nn::argmax(&last)
}

fn run_learning(exp: &Experiment) -> SimResult<String> {
    let pretrained = load_params(exp)?;
    let store = match &exp.cfg.partner {
        Some(_) => Some(PartnerStore::open(&exp.cfg.partners_dir(), pretrained.clone())?),
        None => None,
    };
    let base = match (&store, &exp.cfg.partner) {
        (Some(s), Some(id)) => s.retrieve(id)?,
        _ => pretrained,
    };
    let out = exp.run_learning(&base)?;
    let mut log = Vec::new();
    write_trial(&mut log, None, 0, &out.initial);
    for (r, run) in out.runs.iter().enumerate() {
        for (t, trial) in run.trials.iter().enumerate() {
            write_trial(&mut log, Some(r), t + 1, trial);
        }
    }
    let rep = finish_report(exp, log, &base)?;
    if out.initial.accuracy.is_none() {
        return Err(all_errored(&out.initial));
    }
    let mut summary = format!(
        "initial {:.4}, post-initial mean {:.4}",
        rep.stats.initial_accuracy.unwrap_or(f64::NAN),
        rep.stats.post_initial_mean.unwrap_or(f64::NAN)
    );
    if let Some(t) = rep.stats.pooled.as_ref().and_then(|p| p.result) {
        summary += &format!(", t {:.3} (df {}), p two-sided {:.3e}, p one-sided {:.3e}", t.t, t.df, t.p_two_sided, t.p_greater);
    }
    if let (Some(store), Some(id)) = (&store, &exp.cfg.partner) {
        let best = best_run(&out);
        let prior = store.index()?.get(id.as_str()).map_or(0, |e| e.meta.trials);
        let meta = PartnerMeta {
            trials: prior + exp.cfg.trials as u64,
            last_accuracy: out.series.rows[best].last().copied(),
        };
        let version = store.store(id, &out.runs[best].final_params, meta)?;
        summary += &format!("; stored run {best} as {id} version {version}");
    }
    Ok(summary)
}

fn rebuild_report(exp: &Experiment) -> SimResult<String> {
    let log_path = exp.cfg.out_dir.join("episodes.jsonl");
    let lines = episodes::parse(&fsio::read_string(&log_path)?, &log_path)?;
    let params = load_params(exp)?;
    let rep = report::build(&exp.figures.names(), &lines, echo(exp, &params))?;
    report::write(&rep, &exp.cfg.out_dir.join("report"))?;
    Ok(format!("report written for {} episodes", rep.stats.episodes))
}

/// Run a parsed command line; returns the message for standard output.
pub fn run(cli: &Cli) -> SimResult<String> {
    if let Command::GenFigures { pgm } = &cli.command {
        return gen_figures(cli, pgm.as_deref());
    }
    let exp = Experiment::new(resolve_config(cli)?)?;
    match cli.command {
        Command::GenFigures { .. } => unreachable!("handled above"),
        Command::Pretrain => pretrain(&exp),
        Command::RunTrial => run_trial(&exp),
        Command::RunLearning => run_learning(&exp),
        Command::Report => rebuild_report(&exp),
    }
}

pub fn exit_code(err: &SimError) -> i32 {
    if err.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_RUNTIME
    }
}
