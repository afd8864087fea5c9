//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! nonzero if any fails. Pass criterion names (`A1 A5`) to run a subset.

#[path = "../../core/tests/criteria/geometry.rs"]
mod geometry;
#[path = "../../core/tests/criteria/gradients.rs"]
mod gradients;
#[path = "../../core/tests/criteria/stats.rs"]
mod stats;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;
use tangram_core::nn::ParameterSet;
use tangram_core::pipeline::MockMode;
use tangram_core::stats::{t_one_sample, TTestResult};
use tangram_core::Error;
use tangram_sim::config::{ExperimentConfig, StageBackend};
use tangram_sim::experiment::Experiment;
use tangram_sim::formats::snapshot;
use tangram_sim::partners::PartnerStore;
use tangram_sim::SimError;

/// Master seed of the shared perceiver and of the learning experiment.
const SEED: u64 = 1;
const CHANCE: f64 = 1.0 / 6.0;
const ALPHA: f64 = 0.05;
// two-sided 99% standard normal quantile
const Z99: f64 = 2.575_829_303_548_901;

struct Ctx {
    dir: tempfile::TempDir,
    params: ParameterSet,
    params_path: PathBuf,
}

impl Ctx {
    fn setup() -> Result<Self, String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let exp = Experiment::new(seeded(SEED)).map_err(|e| e.to_string())?;
        let out = exp.pretrain().map_err(|e| e.to_string())?;
        let params_path = dir.path().join("perceiver.params");
        snapshot::save(&out.params, &params_path).map_err(|e| e.to_string())?;
        println!("setup: perceiver pretrained with seed {SEED}, val accuracy {:.4}", out.val_accuracy);
        Ok(Ctx { dir, params: out.params, params_path })
    }

    fn config(&self, seed: u64) -> ExperimentConfig {
        ExperimentConfig { params_path: Some(self.params_path.clone()), ..seeded(seed) }
    }

    /// Config file for the command line, relative paths resolved from `dir`.
    fn config_file(&self, name: &str, extra: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        let body = format!("seed = {SEED}\nparams_path = {:?}\n{extra}", self.params_path.display().to_string());
        fs::write(&path, body).unwrap();
        path
    }
}

fn seeded(seed: u64) -> ExperimentConfig {
    ExperimentConfig { seed: Some(seed), ..ExperimentConfig::default() }
}

fn fmt_t(r: &TTestResult) -> String {
    format!("t {:.3}, df {}, p two-sided {:.2e}", r.t, r.df, r.p_two_sided)
}

fn a1(ctx: &Ctx) -> Result<String, String> {
    let mut accs = Vec::new();
    for seed in 1..=20 {
        let exp = Experiment::new(ctx.config(seed)).map_err(|e| e.to_string())?;
        let trial = exp.run_trial(&ctx.params).map_err(|e| e.to_string())?;
        accs.push(trial.accuracy.ok_or(format!("seed {seed}: every episode errored"))?);
    }
    let r = t_one_sample(&accs, CHANCE).map_err(|e| e.to_string())?;
    let line = format!("mean accuracy {:.4} over 20 seeds vs chance {CHANCE:.4}: {}", r.mean, fmt_t(&r));
    if r.mean > CHANCE && r.p_two_sided < ALPHA {
        Ok(line)
    } else {
        Err(line)
    }
}

fn a2(ctx: &Ctx) -> Result<String, String> {
    let (mut hits, mut n) = (0u64, 0u64);
    for seed in 1..=50 {
        let mut cfg = ctx.config(seed);
        cfg.backend.interpret = StageBackend::Mock;
        cfg.backend.mock_mode = MockMode::Hash;
        let exp = Experiment::new(cfg).map_err(|e| e.to_string())?;
        let trial = exp.run_trial(&ctx.params).map_err(|e| e.to_string())?;
        let done = trial.episodes.iter().filter(|e| e.error.is_none());
        for e in done {
            n += 1;
            hits += u64::from(e.success);
        }
    }
    let half = Z99 * (CHANCE * (1.0 - CHANCE) / n as f64).sqrt();
    let acc = hits as f64 / n as f64;
    let line = format!("{hits}/{n} = {acc:.4} with 99% interval [{:.4}, {:.4}]", CHANCE - half, CHANCE + half);
    if (acc - CHANCE).abs() <= half {
        Ok(line)
    } else {
        Err(line)
    }
}

fn a3(ctx: &Ctx) -> Result<String, String> {
    let exp = Experiment::new(ctx.config(SEED)).map_err(|e| e.to_string())?;
    let out = exp.run_learning(&ctx.params).map_err(|e| e.to_string())?;
    let initial = out.series.rows[0][0];
    let post = out.series.post_initial();
    let r = t_one_sample(&post, initial).map_err(|e| e.to_string())?;
    let means: Vec<String> = out.series.column_means().iter().map(|m| format!("{m:.3}")).collect();
    let line = format!(
        "{}x{}: initial {initial:.4}, post-initial mean {:.4}, {}; column means [{}]",
        out.series.rows.len(),
        post.len() / out.series.rows.len(),
        r.mean,
        fmt_t(&r),
        means.join(" ")
    );
    if r.mean > initial && r.p_two_sided < ALPHA {
        Ok(line)
    } else {
        Err(line)
    }
}

fn tangram(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tangram")).current_dir(dir).args(args).output().unwrap()
}

fn ok(out: Output) -> Result<String, String> {
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr).trim()))
    }
}

const ARTIFACTS: [&str; 6] = [
    "episodes.jsonl",
    "report/confusion.csv",
    "report/confusion.svg",
    "report/series.csv",
    "report/series.svg",
    "report/stats.json",
];

fn a7(ctx: &Ctx) -> Result<String, String> {
    let d = ctx.dir.path();
    let cfg = ctx.config_file("a7.toml", "runs = 3\ntrials = 3\n");
    let cfg = cfg.to_str().unwrap();
    ok(tangram(d, &["run-learning", "--config", cfg, "--out", "a7-first"]))?;
    ok(tangram(d, &["run-learning", "--config", cfg, "--out", "a7-second"]))?;
    let mut bytes = 0;
    for f in ARTIFACTS {
        let a = fs::read(d.join("a7-first").join(f)).map_err(|e| format!("{f}: {e}"))?;
        let b = fs::read(d.join("a7-second").join(f)).map_err(|e| format!("{f}: {e}"))?;
        if a != b {
            return Err(format!("{f} differs between the two executions"));
        }
        bytes += a.len();
    }
    Ok(format!("two run-learning executions (3 runs x 3 trials) agree on {} files, {bytes} bytes", ARTIFACTS.len()))
}

fn params_hash(out: &Path) -> Result<String, String> {
    let stats: Value = serde_json::from_slice(&fs::read(out.join("report/stats.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    stats["config"]["params_hash"].as_str().map(str::to_string).ok_or("stats.json lacks params_hash".into())
}

fn a8(ctx: &Ctx) -> Result<String, String> {
    let d = ctx.dir.path();
    let store_dir = d.join("partners");
    let partner = |id: &str| format!("runs = 1\ntrials = 2\npartner = {id:?}\npartners_dir = {:?}\n", store_dir.display().to_string());
    let ada = ctx.config_file("a8-ada.toml", &partner("ada"));
    let ada = ada.to_str().unwrap();

    // First process stores version 1.
    ok(tangram(d, &["run-learning", "--config", ada, "--out", "a8-1"]))?;
    let store = PartnerStore::open(&store_dir, ctx.params.clone()).map_err(|e| e.to_string())?;
    let index = store.index().map_err(|e| e.to_string())?;
    let stored = index.get("ada").ok_or("index has no entry for ada")?.hash.clone();
    let retrieved = store.retrieve("ada").map_err(|e| e.to_string())?;
    if retrieved.hash() != stored {
        return Err(format!("retrieved hash {} differs from stored {stored}", retrieved.hash()));
    }
    if stored == ctx.params.hash() {
        return Err("calibration left the stored partner identical to the base".into());
    }

    // A fresh process starts from the stored partner.
    ok(tangram(d, &["run-learning", "--config", ada, "--out", "a8-2"]))?;
    let started = params_hash(&d.join("a8-2"))?;
    if started != stored {
        return Err(format!("second process started from {started}, not the stored {stored}"));
    }

    // Unknown partners fall back to the base perceiver.
    if store.retrieve("nobody").map_err(|e| e.to_string())?.hash() != ctx.params.hash() {
        return Err("unknown partner did not fall back to the base".into());
    }
    let newcomer = ctx.config_file("a8-new.toml", &partner("newcomer"));
    ok(tangram(d, &["run-learning", "--config", newcomer.to_str().unwrap(), "--out", "a8-3"]))?;
    if params_hash(&d.join("a8-3"))? != ctx.params.hash() {
        return Err("first run of a new partner did not start from the base".into());
    }

    // Flip one bit of the last stored parameter value.
    let latest = store.index().map_err(|e| e.to_string())?["ada"].latest;
    let path = store.snapshot_path("ada", latest);
    let mut bytes = fs::read(&path).map_err(|e| e.to_string())?;
    let last = bytes.len() - 1;
    bytes[last] ^= 0x01;
    fs::write(&path, bytes).map_err(|e| e.to_string())?;
    match store.retrieve("ada") {
        Err(SimError::Core(Error::SnapshotIntegrity { .. })) => {}
        other => return Err(format!("corrupted snapshot gave {other:?}")),
    }
    let out = tangram(d, &["run-learning", "--config", ada, "--out", "a8-4"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    if out.status.code() != Some(3) || !stderr.contains("integrity") {
        return Err(format!("corrupted snapshot: exit {:?}, stderr {stderr}", out.status.code()));
    }
    Ok(format!(
        "hash {}.. survives a restart, unknown ids get the base, a flipped bit in version {latest} is rejected",
        &stored[..12]
    ))
}

type Check = fn(&Ctx) -> Result<String, String>;

fn main() {
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, &str, Check); 8] = [
        ("A1", "above-chance one-shot communication", a1),
        ("A2", "chance baseline with a message-blind receiver", a2),
        ("A3", "learning improves accuracy", a3),
        ("A4", "gradient correctness", |_| gradients::check()),
        ("A5", "geometry suite", |_| geometry::check()),
        ("A6", "statistics oracle", |_| stats::check()),
        ("A7", "end-to-end determinism", a7),
        ("A8", "partner memory round trip", a8),
    ];
    let selected: Vec<_> = criteria.iter().filter(|(id, ..)| wanted.is_empty() || wanted.iter().any(|w| w == id)).collect();
    let ctx = match Ctx::setup() {
        Ok(c) => c,
        Err(e) => {
            for (id, name, _) in &selected {
                println!("{id} FAIL {name}: setup failed: {e}");
            }
            std::process::exit(1);
        }
    };
    let mut failed = 0;
    for (id, name, check) in selected {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&ctx))).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{id} PASS {name}: {detail} ({secs:.1} s)"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL {name}: {detail} ({secs:.1} s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
