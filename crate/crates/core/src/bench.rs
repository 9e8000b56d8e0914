//! Benchmark matrix: cumulative explanation time per step, as CSV.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::explain::{explain_full_with, ExplainOptions, SequenceConfig};
use crate::problem::ExplanationProblem;
use crate::puzzle::read_problem;

/// One CSV row. A run that hits the time limit ends with a row whose `step`
/// follows the last completed one, with no cost, `cum_ms` equal to the limit
/// and `explained` equal to the whole target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub instance: String,
    pub config: String,
    pub step: usize,
    pub cost: Option<u64>,
    pub cum_ms: f64,
    pub explained: usize,
}

/// Labels accepted in a matrix, for error messages.
pub fn valid_labels() -> Vec<String> {
    use crate::ocus::{GrowDomain, GrowStrategy, GrowWeights};
    let mut grows = vec![GrowStrategy::NoGrow, GrowStrategy::ModelExtension, GrowStrategy::SatLoopGreedy];
    for domain in [GrowDomain::Full, GrowDomain::Actual] {
        for weights in [GrowWeights::Unif, GrowWeights::Pos, GrowWeights::Inv] {
            grows.push(GrowStrategy::MaxSat { domain, weights });
        }
    }
    let mut out = vec!["mus".to_string()];
    for g in grows {
        out.extend(SequenceConfig::all_incremental(g).iter().map(|c| c.label()));
    }
    out
}

/// Parses a comma-separated list of configuration labels.
pub fn parse_matrix(spec: &str) -> Result<Vec<SequenceConfig>> {
    let labels: Vec<&str> = spec.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if labels.is_empty() {
        return Err(Error::Schema("empty configuration matrix".into()));
    }
    labels
        .iter()
        .map(|l| {
            l.parse::<SequenceConfig>().map_err(|e| {
                Error::Schema(format!("configuration '{l}': {e}; valid labels: {}", valid_labels().join(", ")))
            })
        })
        .collect()
}

/// The `*.json` files of `dir`, sorted by name.
pub fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir)?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs one configuration to completion or `timeout`.
pub fn run_cell(
    instance: &str,
    problem: &ExplanationProblem,
    config: SequenceConfig,
    timeout: Duration,
) -> Result<Vec<RunRecord>> {
    let options = ExplainOptions { deadline: Some(Instant::now() + timeout) };
    let (seq, timed_out) = match explain_full_with(problem, config, options) {
        Ok(seq) => (seq, false),
        Err(e) if matches!(e.error, Error::Timeout) => (e.partial, true),
        Err(e) => return Err(e.error),
    };
    let base = problem.initial().len();
    let mut cum = 0.0;
    let mut explained = 0;
    let mut rows = Vec::with_capacity(seq.steps.len() + 1);
    for (k, (step, stats)) in seq.steps.iter().zip(&seq.stats).enumerate() {
        cum += stats.millis;
        explained += step.derived.len();
        rows.push(RunRecord {
            instance: instance.to_string(),
            config: config.label(),
            step: k + 1,
            cost: Some(step.cost),
            cum_ms: cum,
            explained,
        });
    }
    if timed_out {
        rows.push(RunRecord {
            instance: instance.to_string(),
            config: config.label(),
            step: seq.steps.len() + 1,
            cost: None,
            cum_ms: timeout.as_secs_f64() * 1000.0,
            explained: problem.target().len() - base,
        });
    }
    Ok(rows)
}

/// What a benchmark run produced.
#[derive(Debug, Default)]
pub struct BenchReport {
    pub records: Vec<RunRecord>,
    /// `(file, reason)` for every instance that could not be read.
    pub skipped: Vec<(PathBuf, String)>,
    /// `(instance, config, reason)` for every cell that failed other than by timing out.
    pub failed: Vec<(String, String, String)>,
}

/// Runs every configuration on every instance, `jobs` cells at a time.
/// Records come back sorted by instance, configuration order, then step.
pub fn run_matrix(files: &[PathBuf], configs: &[SequenceConfig], timeout: Duration, jobs: usize) -> BenchReport {
    let mut report = BenchReport::default();
    let mut instances = Vec::new();
    for path in files {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match std::fs::read(path).map_err(Error::from).and_then(|t| read_problem(&t)) {
            Ok(p) => instances.push((name, p)),
            Err(e) => report.skipped.push((path.clone(), e.to_string())),
        }
    }
    let cells: Vec<(usize, usize)> =
        (0..instances.len()).flat_map(|i| (0..configs.len()).map(move |c| (i, c))).collect();
    let next = Mutex::new(0usize);
    let results: Mutex<Vec<((usize, usize), Result<Vec<RunRecord>>)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(cells.len().max(1)) {
            scope.spawn(|| loop {
                let k = {
                    let mut n = next.lock().expect("no worker panics holding the lock");
                    let k = *n;
                    *n += 1;
                    k
                };
                let Some(&(i, c)) = cells.get(k) else { break };
                let (name, problem) = &instances[i];
                let rows = run_cell(name, problem, configs[c], timeout);
                results.lock().expect("no worker panics holding the lock").push(((i, c), rows));
            });
        }
    });
    let mut results = results.into_inner().expect("workers joined");
    results.sort_by_key(|(cell, _)| *cell);
    for ((i, c), rows) in results {
        match rows {
            Ok(rows) => report.records.extend(rows),
            Err(e) => report.failed.push((instances[i].0.clone(), configs[c].label(), e.to_string())),
        }
    }
    report
}

/// Writes records as CSV with a header row.
pub fn write_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::Io(e.into()))?;
    }
    if records.is_empty() {
        w.write_record(["instance", "config", "step", "cost", "cum_ms", "explained"])
            .map_err(|e| Error::Io(e.into()))?;
    }
    Ok(w.flush()?)
}
