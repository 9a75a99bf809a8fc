//! Text format for Markov reliability models.
//!
//! ```text
//! # original system
//! [unit]
//! hours
//! [states]
//! S0 S1
//! [healthy]
//! S0
//! [transitions]
//! S0 S1 0.5
//! [initial]
//! S0
//! ```
//!
//! An optional `[faulty]` section makes the partition explicit; otherwise the
//! faulty set is the complement of `[healthy]`. Rates are per unit of time
//! named in `[unit]` (default `hours`, i.e. failures per hour).

use thiserror::Error;

use super::{MarkovError, MarkovModel};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing section [{0}]")]
    MissingSection(&'static str),
    #[error(transparent)]
    Model(#[from] MarkovError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile<T> {
    pub model: MarkovModel<T>,
    pub unit: String,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Unit,
    States,
    Healthy,
    Faulty,
    Transitions,
    Initial,
}

pub fn parse_model<T: Real>(text: &str) -> Result<ModelFile<T>, ParseError> {
    let mut section = Section::None;
    let mut unit: Option<String> = None;
    let mut states = Vec::new();
    let mut healthy = Vec::new();
    let mut faulty: Option<Vec<String>> = None;
    let mut transitions = Vec::new();
    let mut initial: Option<String> = None;
    let mut seen_states = false;
    let mut seen_healthy = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let syntax = |message: String| ParseError::Syntax { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = match name.trim() {
                "unit" => Section::Unit,
                "states" => {
                    seen_states = true;
                    Section::States
                }
                "healthy" => {
                    seen_healthy = true;
                    Section::Healthy
                }
                "faulty" => {
                    faulty.get_or_insert_with(Vec::new);
                    Section::Faulty
                }
                "transitions" => Section::Transitions,
                "initial" => Section::Initial,
                other => return Err(syntax(format!("unknown section [{other}]"))),
            };
            continue;
        }
        let tokens = line.split_whitespace().map(str::to_owned);
        match section {
            Section::None => return Err(syntax("content before the first section".into())),
            Section::Unit => {
                if unit.replace(line.to_owned()).is_some() {
                    return Err(syntax("unit given twice".into()));
                }
            }
            Section::States => states.extend(tokens),
            Section::Healthy => healthy.extend(tokens),
            Section::Faulty => faulty.get_or_insert_with(Vec::new).extend(tokens),
            Section::Transitions => {
                let fields: Vec<&str> = line.split_whitespace().collect();
                let [from, to, rate] = fields[..] else {
                    return Err(syntax(format!("expected `from to rate`, got `{line}`")));
                };
                let rate: f64 = rate.parse().map_err(|_| syntax(format!("invalid rate `{rate}`")))?;
                transitions.push((from.to_owned(), to.to_owned(), T::lit(rate)));
            }
            Section::Initial => {
                let mut it = line.split_whitespace();
                let label = it.next().unwrap_or_default();
                if it.next().is_some() || initial.replace(label.to_owned()).is_some() {
                    return Err(syntax("exactly one initial state expected".into()));
                }
            }
        }
    }

    if !seen_states {
        return Err(ParseError::MissingSection("states"));
    }
    if !seen_healthy {
        return Err(ParseError::MissingSection("healthy"));
    }
    let initial = initial.ok_or(ParseError::MissingSection("initial"))?;

    let mut builder = MarkovModel::builder().states(states.iter().map(String::as_str)).initial(&initial);
    // healthy/faulty must only reference declared states
    for label in healthy.iter().chain(faulty.iter().flatten()) {
        if !states.contains(label) {
            return Err(MarkovError::UnknownState(label.clone()).into());
        }
    }
    builder = builder.healthy(healthy.iter().map(String::as_str));
    if let Some(faulty) = &faulty {
        builder = builder.faulty(faulty.iter().map(String::as_str));
    }
    for (from, to, rate) in &transitions {
        builder = builder.transition(from, to, *rate);
    }
    Ok(ModelFile { model: builder.build()?, unit: unit.unwrap_or_else(|| "hours".into()) })
}
