use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use super::config::{rate_label, ExperimentConfig};
use crate::fault::ProtectionMode;
use crate::traffic::{run_benchmark_with, Pattern, RunMetrics, RunOptions, TrafficError, TrafficSpec, CSV_HEADER};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("{benchmark} {mode} {rate} seed {seed}: {source}")]
    Run { benchmark: Pattern, mode: ProtectionMode, rate: String, seed: u64, source: TrafficError },
    #[error("cannot start worker threads: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
}

/// One sweep cell and seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub benchmark: Pattern,
    pub mode: ProtectionMode,
    pub rate: (f64, f64),
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub job: Job,
    pub metrics: RunMetrics,
}

impl SweepRow {
    pub fn csv_record(&self) -> Vec<String> {
        let j = &self.job;
        let mut r = vec![
            j.benchmark.to_string(),
            j.mode.to_string(),
            j.rate.0.to_string(),
            j.rate.1.to_string(),
            j.seed.to_string(),
        ];
        r.extend(self.metrics.csv_fields());
        r
    }
}

/// Jobs in report order: benchmark, then mode, then rate, then seed.
pub fn jobs(config: &ExperimentConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for &benchmark in &config.benchmarks {
        for &mode in &config.modes {
            for &rate in &config.rates {
                for &seed in &config.seeds {
                    out.push(Job { benchmark, mode, rate, seed });
                }
            }
        }
    }
    out
}

/// Runs one job. The seed drives both the traffic and the fault plan.
pub fn run_job(config: &ExperimentConfig, job: Job) -> Result<SweepRow, SweepError> {
    let mesh = config.job_mesh(job.mode, job.rate, job.seed);
    let traffic = TrafficSpec { pattern: job.benchmark, ..config.traffic };
    let opts = RunOptions { watchdog: config.watchdog, stall_limit: config.stall_limit, ..RunOptions::new(job.seed) };
    let out = run_benchmark_with(&mesh, &traffic, opts).map_err(|source| SweepError::Run {
        benchmark: job.benchmark,
        mode: job.mode,
        rate: rate_label(job.rate),
        seed: job.seed,
        source,
    })?;
    Ok(SweepRow { job, metrics: out.metrics })
}

/// Runs every job, at most `threads` at a time (all cores when `None`).
/// Rows come back in [`jobs`] order whatever order they finish in.
pub fn run_sweep(config: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<SweepRow>, SweepError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build()?;
    let all = jobs(config);
    pool.install(|| all.par_iter().map(|&j| run_job(config, j)).collect())
}

/// Appends `rows` to the CSV at `path`, writing the header first when the
/// file is new or empty.
pub fn append_csv(path: &Path, rows: &[SweepRow]) -> Result<(), SweepError> {
    let name = path.display().to_string();
    let io = |source| SweepError::Io { path: name.clone(), source };
    let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    let fresh = file.metadata().map_err(io)?.len() == 0;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    let csv = |source| SweepError::Csv { path: name.clone(), source };
    if fresh {
        w.write_record(CSV_HEADER.split(',')).map_err(csv)?;
    }
    for row in rows {
        w.write_record(row.csv_record()).map_err(csv)?;
    }
    w.flush().map_err(io)
}

/// Seed means of one (benchmark, mode, rate) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub benchmark: Pattern,
    pub mode: ProtectionMode,
    pub rate: (f64, f64),
    pub runs: usize,
    /// Mean over the runs that delivered anything.
    pub mean_delay: Option<f64>,
    pub mean_throughput: f64,
    pub failed_packets: u64,
    pub incomplete_runs: usize,
}

/// Groups consecutive rows of the same cell, so `rows` should be in
/// [`jobs`] order.
pub fn summarize(rows: &[SweepRow]) -> Vec<CellSummary> {
    let same = |a: &Job, b: &Job| a.benchmark == b.benchmark && a.mode == b.mode && a.rate == b.rate;
    rows.chunk_by(|a, b| same(&a.job, &b.job))
        .map(|cell| {
            let j = cell[0].job;
            let delays: Vec<f64> = cell.iter().filter_map(|r| r.metrics.avg_delay).collect();
            CellSummary {
                benchmark: j.benchmark,
                mode: j.mode,
                rate: j.rate,
                runs: cell.len(),
                mean_delay: (!delays.is_empty()).then(|| delays.iter().sum::<f64>() / delays.len() as f64),
                mean_throughput: cell.iter().map(|r| r.metrics.throughput).sum::<f64>() / cell.len() as f64,
                failed_packets: cell.iter().map(|r| r.metrics.failed_packets()).sum(),
                incomplete_runs: cell.iter().filter(|r| r.metrics.incomplete).count(),
            }
        })
        .collect()
}

/// Delay and throughput against rate, one block per benchmark and one
/// column pair per mode.
pub fn summary_table(cells: &[CellSummary]) -> String {
    let mut benchmarks: Vec<Pattern> = Vec::new();
    let mut modes: Vec<ProtectionMode> = Vec::new();
    let mut rates: Vec<(f64, f64)> = Vec::new();
    for c in cells {
        if !benchmarks.contains(&c.benchmark) {
            benchmarks.push(c.benchmark);
        }
        if !modes.contains(&c.mode) {
            modes.push(c.mode);
        }
        if !rates.contains(&c.rate) {
            rates.push(c.rate);
        }
    }
    let mut out = String::new();
    for b in benchmarks {
        let _ = writeln!(out, "{b}");
        let _ = write!(out, "{:>14}", "rate");
        for m in &modes {
            let _ = write!(out, " {:>12} {:>10}", format!("{m} delay"), "thru");
        }
        out.push('\n');
        for &r in &rates {
            let _ = write!(out, "{:>14}", rate_label(r));
            for &m in &modes {
                match cells.iter().find(|c| c.benchmark == b && c.mode == m && c.rate == r) {
                    Some(c) => {
                        let delay = c.mean_delay.map_or("-".to_string(), |d| format!("{d:.3}"));
                        let mark = if c.incomplete_runs > 0 || c.failed_packets > 0 { "*" } else { "" };
                        let _ = write!(out, " {:>12} {:>10.5}", format!("{delay}{mark}"), c.mean_throughput);
                    }
                    None => {
                        let _ = write!(out, " {:>12} {:>10}", "", "");
                    }
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out.push_str("* some packets failed or some runs did not drain\n");
    out
}
