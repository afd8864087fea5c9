//! Report bundle: confusion and series tables, their plots and `stats.json`.
//!
//! Everything here is recomputed from episode log lines, so `report` can
//! rebuild a bundle from a log alone.

pub mod svg;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tangram_core::episode::{accuracy, ConfusionMatrix};
use tangram_core::learning::AccuracySeries;
use tangram_core::stats::{t_one_sample, TTestResult};

use crate::error::{SimError, SimResult};
use crate::formats::episodes::EpisodeLine;
use crate::fsio;

pub const STATS_SCHEMA_VERSION: u32 = 1;

/// A t-test, or the reason it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub result: Option<TTestResult>,
    pub unavailable: Option<String>,
}

impl TestOutcome {
    fn of(xs: &[f64], mu0: f64) -> Self {
        match t_one_sample(xs, mu0) {
            Ok(r) => TestOutcome { result: Some(r), unavailable: None },
            Err(e) => TestOutcome { result: None, unavailable: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub schema_version: u32,
    pub episodes: usize,
    pub errored: usize,
    pub chance: f64,
    /// Accuracy of the initial (or only) trial.
    pub initial_accuracy: Option<f64>,
    pub runs: usize,
    pub trials: usize,
    pub column_means: Vec<f64>,
    pub post_initial_mean: Option<f64>,
    /// Every post-initial trial accuracy tested against the initial accuracy.
    pub pooled: Option<TestOutcome>,
    /// Per-run means of the post-initial trials against the initial accuracy.
    pub per_run: Option<TestOutcome>,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub names: Vec<String>,
    pub confusion: ConfusionMatrix,
    pub series: Option<AccuracySeries>,
    pub stats: Stats,
}

fn trial_confusion(lines: &[&EpisodeLine], n: usize) -> SimResult<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::new(n);
    for l in lines.iter().filter(|l| l.error.is_none()) {
        let chosen = l.chosen_id.ok_or_else(|| SimError::Config("error-free episode without a choice".into()))?;
        if l.figure_id as usize >= n || chosen as usize >= n {
            return Err(SimError::Config(format!("figure id out of range for {n} figures")));
        }
        cm.record(l.figure_id as usize, chosen as usize);
    }
    Ok(cm)
}

/// Rebuild confusion, series and statistics from logged episodes.
pub fn build(names: &[String], lines: &[EpisodeLine], config: serde_json::Value) -> SimResult<Report> {
    let n = names.len();
    let mut groups: BTreeMap<(Option<usize>, usize), Vec<&EpisodeLine>> = BTreeMap::new();
    for l in lines {
        groups.entry((l.run, l.trial)).or_default().push(l);
    }
    let initial = groups
        .get(&(None, 0))
        .ok_or_else(|| SimError::Config("episode log has no initial trial".into()))?;
    let confusion = trial_confusion(initial, n)?;
    let initial_accuracy = accuracy(&confusion).ok();

    let runs = groups.keys().filter_map(|(r, _)| *r).max().map_or(0, |r| r + 1);
    let mut series = None;
    let mut trials = 0;
    if runs > 0 {
        let initial_accuracy = initial_accuracy.ok_or(tangram_core::Error::EmptyConfusion)?;
        trials = groups.keys().filter(|(r, _)| r.is_some()).map(|(_, t)| *t).max().unwrap_or(0);
        let mut rows = Vec::with_capacity(runs);
        for r in 0..runs {
            let mut row = vec![initial_accuracy];
            for t in 1..=trials {
                let group = groups
                    .get(&(Some(r), t))
                    .ok_or_else(|| SimError::Config(format!("episode log is missing run {r} trial {t}")))?;
                row.push(accuracy(&trial_confusion(group, n)?)?);
            }
            rows.push(row);
        }
        series = Some(AccuracySeries { rows });
    }

    let (column_means, post_initial_mean, pooled, per_run) = match (&series, initial_accuracy) {
        (Some(s), Some(init)) => {
            let post = s.post_initial();
            let run_means: Vec<f64> =
                s.rows.iter().map(|r| r[1..].iter().sum::<f64>() / (r.len() - 1) as f64).collect();
            let mean = (!post.is_empty()).then(|| post.iter().sum::<f64>() / post.len() as f64);
            (s.column_means(), mean, Some(TestOutcome::of(&post, init)), Some(TestOutcome::of(&run_means, init)))
        }
        _ => (initial_accuracy.into_iter().collect(), None, None, None),
    };
    let stats = Stats {
        schema_version: STATS_SCHEMA_VERSION,
        episodes: lines.len(),
        errored: lines.iter().filter(|l| l.error.is_some()).count(),
        chance: 1.0 / n as f64,
        initial_accuracy,
        runs,
        trials,
        column_means,
        post_initial_mean,
        pooled,
        per_run,
        config,
    };
    Ok(Report { names: names.to_vec(), confusion, series, stats })
}

pub fn confusion_csv(cm: &ConfusionMatrix, names: &[String]) -> SimResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = std::iter::once("intended\\chosen").chain(names.iter().map(String::as_str)).collect();
    let csv_err = |e: csv::Error| SimError::Config(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for (name, row) in names.iter().zip(cm.rows()) {
        let cells: Vec<String> = std::iter::once(name.clone()).chain(row.iter().map(u64::to_string)).collect();
        w.write_record(&cells).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| SimError::Config(e.to_string()))
}

pub fn series_csv(series: &AccuracySeries) -> SimResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| SimError::Config(e.to_string());
    w.write_record(["run", "trial", "accuracy"]).map_err(csv_err)?;
    for (r, row) in series.rows.iter().enumerate() {
        for (t, a) in row.iter().enumerate() {
            w.write_record([r.to_string(), t.to_string(), a.to_string()]).map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(|e| SimError::Config(e.to_string()))
}

/// Write the bundle into `dir`, replacing files atomically.
pub fn write(report: &Report, dir: &Path) -> SimResult<()> {
    fsio::create_dir_all(dir)?;
    fsio::write_atomic(&dir.join("confusion.csv"), &confusion_csv(&report.confusion, &report.names)?)?;
    fsio::write_atomic(&dir.join("confusion.svg"), svg::confusion_svg(&report.confusion, &report.names)?.as_bytes())?;
    if let Some(series) = &report.series {
        fsio::write_atomic(&dir.join("series.csv"), &series_csv(series)?)?;
        let initial = report.stats.initial_accuracy.unwrap_or(0.0);
        fsio::write_atomic(&dir.join("series.svg"), svg::series_svg(series, report.stats.chance, initial)?.as_bytes())?;
    }
    let mut json = serde_json::to_vec_pretty(&report.stats).expect("stats serialize");
    json.push(b'\n');
    fsio::write_atomic(&dir.join("stats.json"), &json)
}
