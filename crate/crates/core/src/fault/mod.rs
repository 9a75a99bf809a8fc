//! Transient-fault injection into next-port computation (NPC) and switch
//! allocation (SA), and the three ways a router can guard them.

mod inject;
mod stage;
mod vote;

pub use inject::{execution_seed, inject, Injector, NoFaults, PlanInjector, SiteValue};
pub use stage::{baseline_stage, protected_stage, sera_stage, tmr_stage, Requester, StageOutcome};
pub use vote::{majority_vote, Vote};

use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use crate::noc::{Coord, Grant, Port};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtectionMode {
    /// Unprotected: one NPC/SA execution, corruptions propagate.
    Baseline,
    /// Three parallel replicas per site and a voter; no extra cycles.
    Tmr,
    /// Execute twice, compare, recompute and vote on mismatch.
    Sera,
}

impl ProtectionMode {
    pub const ALL: [ProtectionMode; 3] = [Self::Baseline, Self::Tmr, Self::Sera];

    pub fn name(self) -> &'static str {
        match self {
            Self::Baseline => "BASELINE",
            Self::Tmr => "TMR",
            Self::Sera => "SERA",
        }
    }
}

impl fmt::Display for ProtectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtectionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown protection mode `{s}` (BASELINE, TMR, SERA)"))
    }
}

/// How corruptions are drawn across the executions of one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FaultMode {
    /// At most one of the (up to three) executions of a site is corrupted
    /// per stage invocation. Later executions are forced clean once one is hit.
    #[default]
    SinglePerTriple,
    /// Every execution rolls independently.
    Independent,
}

impl FaultMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::SinglePerTriple => "SINGLE_PER_TRIPLE",
            Self::Independent => "INDEPENDENT",
        }
    }
}

impl FromStr for FaultMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SINGLE_PER_TRIPLE" | "SINGLE" => Ok(Self::SinglePerTriple),
            "INDEPENDENT" => Ok(Self::Independent),
            _ => Err(format!("unknown fault mode `{s}` (SINGLE_PER_TRIPLE, INDEPENDENT)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    Npc,
    Sa,
}

impl Site {
    pub fn name(self) -> &'static str {
        match self {
            Site::Npc => "NPC",
            Site::Sa => "SA",
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-execution corruption probabilities for each site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultPlan {
    pub p_npc: f64,
    pub p_sa: f64,
    pub mode: FaultMode,
    pub seed: u64,
}

impl Default for FaultPlan {
    fn default() -> Self {
        Self::none()
    }
}

impl FaultPlan {
    pub fn none() -> Self {
        Self { p_npc: 0.0, p_sa: 0.0, mode: FaultMode::SinglePerTriple, seed: 0 }
    }

    pub fn new(p_npc: f64, p_sa: f64, mode: FaultMode, seed: u64) -> Result<Self, String> {
        let plan = Self { p_npc, p_sa, mode, seed };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, p) in [("p_npc", self.p_npc), ("p_sa", self.p_sa)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} = {p} outside [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn probability(&self, site: Site) -> f64 {
        match site {
            Site::Npc => self.p_npc,
            Site::Sa => self.p_sa,
        }
    }

    pub fn is_fault_free(&self) -> bool {
        self.p_npc == 0.0 && self.p_sa == 0.0
    }
}

/// A corrupted value as captured by a fault event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultValue {
    Port(Port),
    Grant(Grant),
}

impl fmt::Display for FaultValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultValue::Port(p) => write!(f, "{p}"),
            FaultValue::Grant(g) => write!(f, "{g}"),
        }
    }
}

/// One corrupted execution. Never recorded when the value came out right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaultEvent {
    pub cycle: u64,
    pub router: Coord,
    pub site: Site,
    /// 1, 2 or 3.
    pub execution_index: u8,
    pub corrupted_value: FaultValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProtectionCounters {
    pub faults_injected: u64,
    /// Site invocations where the replicas disagreed.
    pub faults_detected: u64,
    /// Detected invocations whose final value was correct.
    pub faults_recovered: u64,
    /// Site invocations whose final value was wrong.
    pub silent_corruptions: u64,
    /// Votes where all three values differed.
    pub unresolved_votes: u64,
}

impl AddAssign for ProtectionCounters {
    fn add_assign(&mut self, o: Self) {
        self.faults_injected += o.faults_injected;
        self.faults_detected += o.faults_detected;
        self.faults_recovered += o.faults_recovered;
        self.silent_corruptions += o.silent_corruptions;
        self.unresolved_votes += o.unresolved_votes;
    }
}
