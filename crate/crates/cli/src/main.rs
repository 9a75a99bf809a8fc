use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use noc_resilience::fault::FaultEvent;
use noc_resilience::harness::{
    append_csv, mtbf_report, raf_report, rate_label, render_raf_table, run_sweep, summarize, summary_table,
    ConfigError, ExperimentConfig, Job, ReportError, SweepError, SweepRow,
};
use noc_resilience::traffic::{run_benchmark_with, RunOptions, TrafficError, CSV_HEADER};

/// Caps the number of sweep worker threads.
const THREADS_ENV: &str = "NOC_RESILIENCE_THREADS";

#[derive(Parser)]
#[command(name = "noc-resilience", version, about = "3D NoC soft-error simulator and reliability calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark with one protection mode and fault plan.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Print every pipeline event to stderr.
        #[arg(long)]
        trace: bool,
        /// Write injected faults as CSV.
        #[arg(long, value_name = "PATH")]
        fault_log: Option<PathBuf>,
    },
    /// Run every benchmark x mode x rate x seed and append the rows to a CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// MTBF of a Markov model file.
    Mtbf {
        model: PathBuf,
        /// Also estimate by Monte Carlo with this many trials.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// RAF comparison table from a profiles file.
    Raf { profiles: PathBuf },
}

#[derive(Args)]
struct Common {
    /// TOML experiment config.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set fault.p_npc=8.33%`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// CSV output path.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed of a single run, or the only seed of a sweep.
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Config(String),
    Runtime(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) | Failure::Io(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<TrafficError> for Failure {
    fn from(e: TrafficError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Io { .. } | SweepError::Csv { .. } => Failure::Io(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<ReportError> for Failure {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Parse(_) | ReportError::Model(_) | ReportError::Raf { .. } => Failure::Config(e.to_string()),
            ReportError::Markov(_) => Failure::Runtime(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load(common: &Common, sweep: bool) -> Result<ExperimentConfig, Failure> {
    let text = match &common.config {
        Some(p) => read(p)?,
        None => String::new(),
    };
    let mut sets = common.set.clone();
    if let Some(s) = common.seed {
        sets.push(if sweep { format!("experiment.seeds=[{s}]") } else { format!("experiment.seed={s}") });
    }
    Ok(ExperimentConfig::load(&text, &sets)?)
}

fn threads() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

fn write_fault_log(path: &Path, faults: &[FaultEvent]) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "cycle,router,site,exec_index,injected_value")?;
    for f in faults {
        writeln!(w, "{},{},{},{},{}", f.cycle, f.router, f.site, f.execution_index, f.corrupted_value)?;
    }
    w.flush()
}

fn simulate(common: Common, trace: bool, fault_log: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = load(&common, false)?;
    let mut opts = RunOptions { watchdog: cfg.watchdog, stall_limit: cfg.stall_limit, ..RunOptions::new(cfg.seed) };
    if trace {
        eprintln!("cycle,router,event,port,packet_id,seq");
        opts.trace = Some(Box::new(|e| eprintln!("{e}")));
    }
    let traffic = cfg.traffic;
    let out = run_benchmark_with(&cfg.mesh, &traffic, opts)?;
    let m = out.metrics;
    let fault = &cfg.mesh.fault;

    println!(
        "{} {} on {} at {} ({}), seed {}",
        traffic.pattern,
        cfg.mesh.protection,
        cfg.mesh.dims,
        rate_label((fault.p_npc, fault.p_sa)),
        fault.mode.name(),
        cfg.seed
    );
    println!(
        "  packets     sent {} delivered {} misrouted {} undelivered {}",
        m.sent, m.delivered, m.misrouted, m.undelivered
    );
    println!("  delay       {}", m.avg_delay.map_or("-".to_string(), |d| format!("{d:.3} cycles")));
    println!("  throughput  {:.5} flits/cycle/node over {} cycles", m.throughput, m.finish_time);
    let c = m.counters;
    println!(
        "  faults      injected {} detected {} recovered {} silent {} unresolved {}",
        c.faults_injected, c.faults_detected, c.faults_recovered, c.silent_corruptions, c.unresolved_votes
    );
    if let Some(f) = m.first_failure_cycle {
        println!("  first failure at cycle {f}");
    }

    if let Some(path) = fault_log {
        write_fault_log(&path, &out.faults).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = common.out.as_ref().or(cfg.output.as_ref()) {
        let job = Job {
            benchmark: traffic.pattern,
            mode: cfg.mesh.protection,
            rate: (fault.p_npc, fault.p_sa),
            seed: cfg.seed,
        };
        append_csv(path, &[SweepRow { job, metrics: m }])?;
    }
    if m.incomplete {
        return Err(Failure::Runtime(format!("run did not drain; stopped at cycle {}", m.cycles)));
    }
    Ok(())
}

fn sweep(common: Common) -> Result<(), Failure> {
    let cfg = load(&common, true)?;
    let threads = threads()?;
    let rows = run_sweep(&cfg, threads)?;
    let table = summary_table(&summarize(&rows));
    match common.out.as_ref().or(cfg.output.as_ref()) {
        Some(path) => {
            append_csv(path, &rows)?;
            print!("{table}");
        }
        None => {
            println!("{CSV_HEADER}");
            for r in &rows {
                println!("{}", r.csv_record().join(","));
            }
            eprint!("{table}");
        }
    }
    let incomplete = rows.iter().filter(|r| r.metrics.incomplete).count();
    if incomplete > 0 {
        return Err(Failure::Runtime(format!("{incomplete} of {} runs did not drain", rows.len())));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { common, trace, fault_log } => simulate(common, trace, fault_log),
        Command::Sweep { common } => sweep(common),
        Command::Mtbf { model, trials, seed } => {
            print!("{}", mtbf_report(&read(&model)?, trials.map(|t| (t, seed)))?);
            Ok(())
        }
        Command::Raf { profiles } => {
            print!("{}", render_raf_table(&raf_report(&read(&profiles)?)?));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors; help and version are not.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests;
