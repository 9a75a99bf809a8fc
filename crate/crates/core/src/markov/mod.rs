//! Markov state reliability models.
//!
//! A model is a continuous-time Markov chain whose states are split into a
//! healthy (operational) set and a faulty set. MTBF is the expected time from
//! the initial state to the first entry into any faulty state, computed either
//! by an absorbing-chain linear solve ([`solve_mtbf`]) or by sampling
//! exponential holding times ([`simulate_mtbf`]).

mod file;
mod model;
pub mod models;
mod monte_carlo;
mod solve;

pub use file::{parse_model, ModelFile, ParseError};
pub use model::{MarkovModel, ModelBuilder, StateId, Transition};
pub use monte_carlo::{simulate_mtbf, McEstimate};
pub use solve::{solve_mtbf, solve_mtbf_with, MtbfResult, SolverOptions};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("model has no states")]
    Empty,
    #[error("duplicate state label `{0}`")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` is declared both healthy and faulty")]
    PartitionOverlap(String),
    #[error("state `{0}` is neither healthy nor faulty")]
    IncompletePartition(String),
    #[error("transition {from} -> {to} has non-positive or non-finite rate {rate}")]
    NonPositiveRate { from: String, to: String, rate: String },
    #[error("self-transition on state `{0}`")]
    SelfTransition(String),
    #[error("duplicate transition {from} -> {to}")]
    DuplicateTransition { from: String, to: String },
    #[error("no initial state given")]
    MissingInitial,
    #[error("initial state `{0}` is not healthy")]
    InitialNotHealthy(String),
    #[error("linear system is numerically singular at pivot {pivot} (|pivot| = {magnitude:e})")]
    Singular { pivot: usize, magnitude: f64 },
    #[error("trials must be at least 1")]
    NoTrials,
}
