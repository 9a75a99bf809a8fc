//! RAF comparison and MTBF reports.
//!
//! A profiles file lists mechanisms in order:
//!
//! ```toml
//! [[mechanism]]
//! label = "Yu et al."
//! protected = { coverage = 0.0, operating_ratio = 1.0, area_ratio = 1.0 }
//! corrector = { operating_ratio = 1.0, area_ratio = 0.09 }
//! area_overhead = 0.09   # optional, as published
//! reported = "11.11"     # optional, published RAF
//! note = "..."           # optional
//!
//! [[mechanism]]
//! label = "TMR"
//! kind = "tmr"
//! ```
//!
//! A `tmr` mechanism is scored with the triplicated-module chain; its
//! `corrector` is optional and, if present, is also scored in closed form,
//! once with `corrector.area_ratio` and once with `area_overhead` as the
//! corrector area when the two disagree.

use std::fmt::Write as _;

use serde::Deserialize;
use thiserror::Error;

use crate::markov::{models, parse_model, simulate_mtbf, solve_mtbf, MarkovError, ParseError};
use crate::raf::{raf_closed_form, raf_from_markov, raf_from_profiles_markov, ComponentProfile, RafError, RafOutcome};

/// Repair rate of the protected chain, relative to the unit fault rate.
pub const REPORT_REPAIR_RATE: f64 = 1e6;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("profiles parse error: {0}")]
    Parse(String),
    #[error("model parse error: {0}")]
    Model(#[from] ParseError),
    #[error("{label}: {source}")]
    Raf { label: String, source: RafError },
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    /// A protected module plus a corrector.
    #[default]
    ClosedForm,
    /// Three replicas behind a voter.
    Tmr,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtectedSpec {
    /// Fraction of faults the corrector cannot handle.
    pub coverage: f64,
    #[serde(default = "one")]
    pub operating_ratio: f64,
    #[serde(default = "one")]
    pub area_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrectorSpec {
    #[serde(default = "one")]
    pub operating_ratio: f64,
    pub area_ratio: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mechanism {
    pub label: String,
    #[serde(default)]
    pub kind: MechanismKind,
    pub protected: Option<ProtectedSpec>,
    pub corrector: Option<CorrectorSpec>,
    pub area_overhead: Option<f64>,
    pub reported: Option<String>,
    pub note: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfilesFile {
    #[serde(default)]
    mechanism: Vec<Mechanism>,
}

pub fn parse_profiles(text: &str) -> Result<Vec<Mechanism>, ReportError> {
    let file: ProfilesFile = toml::from_str(text).map_err(|e| ReportError::Parse(e.to_string()))?;
    if file.mechanism.is_empty() {
        return Err(ReportError::Parse("no [[mechanism]] entries".into()));
    }
    Ok(file.mechanism)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RafRow {
    pub label: String,
    /// Corrector area used for the closed form, when there is one.
    pub corrector_area: Option<f64>,
    pub closed_form: Option<RafOutcome<f64>>,
    pub markov: RafOutcome<f64>,
    pub reported: Option<String>,
    pub notes: Vec<String>,
}

fn profiles(m: &Mechanism, corrector_area: f64) -> Result<(ComponentProfile<f64>, ComponentProfile<f64>), RafError> {
    let p = m.protected.unwrap_or(ProtectedSpec { coverage: 0.0, operating_ratio: 1.0, area_ratio: 1.0 });
    let c = m.corrector.map_or(1.0, |c| c.operating_ratio);
    Ok((
        ComponentProfile::new("protected", p.coverage, p.operating_ratio, p.area_ratio)?,
        ComponentProfile::new("corrector", 0.0, c, corrector_area)?,
    ))
}

fn closed_form_row(m: &Mechanism) -> Result<RafRow, RafError> {
    let area = m.corrector.map(|c| c.area_ratio).ok_or_else(|| RafError::InvalidProfile {
        name: m.label.clone(),
        field: "corrector",
        value: "missing".into(),
    })?;
    let (p, c) = profiles(m, area)?;
    let mut notes: Vec<String> = m.note.iter().cloned().collect();
    if p.coverage == 1.0 {
        notes.push("detection only: every fault still fails the module".into());
    }
    Ok(RafRow {
        label: m.label.clone(),
        corrector_area: Some(area),
        closed_form: Some(raf_closed_form(&p, &c)?),
        markov: raf_from_profiles_markov(&p, &c, REPORT_REPAIR_RATE)?,
        reported: m.reported.clone(),
        notes,
    })
}

fn tmr_rows(m: &Mechanism) -> Result<Vec<RafRow>, RafError> {
    let markov = raf_from_markov(&models::original_system(1.0), &models::tmr_system(1.0))?;
    let mut notes: Vec<String> = m.note.iter().cloned().collect();
    if let Some(r) = &m.reported {
        notes.push(format!(
            "published value {r} is unverified: the triplicated-module chain gives 5/6 against a single module"
        ));
    }
    let mut readings: Vec<(String, f64)> = Vec::new();
    if let Some(c) = m.corrector {
        readings.push(("corrector area".into(), c.area_ratio));
    }
    if let Some(o) = m.area_overhead {
        if readings.iter().all(|(_, a)| *a != o) {
            readings.push(("area overhead as corrector area".into(), o));
        }
    }
    if readings.len() == 2 {
        notes.push(format!(
            "published corrector area {} and area overhead {} disagree; both are scored below",
            readings[0].1, readings[1].1
        ));
    }
    let mut rows = vec![RafRow {
        label: m.label.clone(),
        corrector_area: None,
        closed_form: None,
        markov,
        reported: m.reported.clone(),
        notes,
    }];
    for (what, area) in readings {
        let (p, c) = profiles(m, area)?;
        rows.push(RafRow {
            label: format!("{} ({what} {area})", m.label),
            corrector_area: Some(area),
            closed_form: Some(raf_closed_form(&p, &c)?),
            markov: raf_from_profiles_markov(&p, &c, REPORT_REPAIR_RATE)?,
            reported: None,
            notes: vec!["scenario: voter treated as a corrector".into()],
        });
    }
    Ok(rows)
}

/// Scores every mechanism of a profiles file.
pub fn raf_report(text: &str) -> Result<Vec<RafRow>, ReportError> {
    let mut rows = Vec::new();
    for m in parse_profiles(text)? {
        let raf = |source| ReportError::Raf { label: m.label.clone(), source };
        match m.kind {
            MechanismKind::ClosedForm => rows.push(closed_form_row(&m).map_err(raf)?),
            MechanismKind::Tmr => rows.extend(tmr_rows(&m).map_err(raf)?),
        }
    }
    Ok(rows)
}

fn outcome(o: Option<&RafOutcome<f64>>) -> String {
    match o {
        None => "-".into(),
        Some(RafOutcome::Unbounded) => "unbounded".into(),
        Some(RafOutcome::Bounded(r)) => format!("{:.4}", r.raf),
    }
}

pub fn render_raf_table(rows: &[RafRow]) -> String {
    let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(9);
    let mut out = format!(
        "{:<width$}  {:>8}  {:>11}  {:>11}  {:>9}\n",
        "mechanism", "AR_C", "closed form", "markov", "published"
    );
    for r in rows {
        let area = r.corrector_area.map_or("-".into(), |a| a.to_string());
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>11}  {:>11}  {:>9}",
            r.label,
            area,
            outcome(r.closed_form.as_ref()),
            outcome(Some(&r.markov)),
            r.reported.as_deref().unwrap_or("-"),
        );
        for n in &r.notes {
            let _ = writeln!(out, "{:<width$}    note: {n}", "");
        }
    }
    let _ = writeln!(out, "markov column uses repair rate {REPORT_REPAIR_RATE:e} times the unit fault rate");
    out
}

/// Analytic MTBF of a model file, with an optional Monte Carlo check
/// `(trials, seed)`.
pub fn mtbf_report(text: &str, monte_carlo: Option<(u64, u64)>) -> Result<String, ReportError> {
    let file = parse_model::<f64>(text)?;
    let r = solve_mtbf(&file.model)?;
    let mut out = format!("MTBF = {} {}\n", r.mtbf, file.unit);
    for (state, t) in &r.per_state_sojourn {
        let _ = writeln!(out, "  sojourn {:<12} {t}", state.label);
    }
    if let Some((trials, seed)) = monte_carlo {
        let mc = simulate_mtbf(&file.model, trials, seed)?;
        let _ = writeln!(out, "Monte Carlo ({} trials): {} +/- {} (1 s.e.)", mc.trials, mc.mean, mc.stderr);
    }
    Ok(out)
}
