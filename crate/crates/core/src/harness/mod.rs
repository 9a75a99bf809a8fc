//! Experiment plumbing: configuration, sweeps over benchmark, protection
//! mode, fault rate and seed, CSV output, and the reliability reports.

mod config;
mod report;
mod sweep;

pub use config::{
    parse_probability, parse_rates, parse_seeds, rate_label, ConfigError, ExperimentConfig, DEFAULT_RATES,
};
pub use report::{
    mtbf_report, parse_profiles, raf_report, render_raf_table, CorrectorSpec, Mechanism, MechanismKind, ProtectedSpec,
    RafRow, ReportError, REPORT_REPAIR_RATE,
};
pub use sweep::{
    append_csv, jobs, run_job, run_sweep, summarize, summary_table, CellSummary, Job, SweepError, SweepRow,
};
