//! Soft-error resilience toolkit for 3D networks-on-chip: a cycle-level mesh
//! simulator with fault injection and protected routing, plus Markov
//! reliability analysis (MTBF) and reliability acceleration factors.

// Negated comparisons are deliberate: NaN has to fail the range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod fault;
pub mod harness;
pub mod markov;
pub mod noc;
pub mod raf;
pub mod scalar;
pub mod traffic;

pub use scalar::Real;

pub type MarkovModel64 = markov::MarkovModel<f64>;
pub type MarkovModel32 = markov::MarkovModel<f32>;
pub type MtbfResult64 = markov::MtbfResult<f64>;
pub type ComponentProfile64 = raf::ComponentProfile<f64>;
pub type FtSystemRates64 = raf::FtSystemRates<f64>;
pub type RafResult64 = raf::RafResult<f64>;
