//! The NPC/SA pipeline stage under each protection mode.

use super::{majority_vote, Injector, ProtectionCounters, ProtectionMode, Site, SiteValue};
use crate::noc::{Grant, Port};

/// An input competing for the output port being allocated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Requester {
    pub input: Port,
    /// Correct look-ahead port for this requester's head if it wins.
    /// `None` when the output leads off the mesh and there is nothing to compute.
    pub npc: Option<Port>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageOutcome {
    pub grant: Grant,
    /// Next-port value stamped into the winning head, when the final grant
    /// went to a requester.
    pub next_port: Option<Port>,
    /// Cycles the stage occupies: 1 for BASELINE and TMR, 2 or 3 for SERA.
    pub cycles_used: u32,
    pub counters: ProtectionCounters,
    pub unresolved: bool,
}

struct SiteRun<V> {
    value: V,
    mismatch: bool,
}

fn execute<V: SiteValue, I: Injector>(inj: &mut I, site: Site, exec: u8, correct: V, c: &mut ProtectionCounters) -> V {
    let v = inj.execute(site, exec, correct);
    if v != correct {
        c.faults_injected += 1;
    }
    v
}

fn settle<V: SiteValue>(value: V, correct: V, detected: bool, c: &mut ProtectionCounters) {
    if detected {
        c.faults_detected += 1;
        if value == correct {
            c.faults_recovered += 1;
        }
    }
    if value != correct {
        c.silent_corruptions += 1;
    }
}

fn run_site<V: SiteValue, I: Injector>(
    mode: ProtectionMode,
    inj: &mut I,
    site: Site,
    correct: V,
    c: &mut ProtectionCounters,
    unresolved: &mut bool,
) -> SiteRun<V> {
    match mode {
        ProtectionMode::Baseline => {
            let value = execute(inj, site, 1, correct, c);
            settle(value, correct, false, c);
            SiteRun { value, mismatch: false }
        }
        ProtectionMode::Tmr => {
            let [a, b, d] = [1, 2, 3].map(|e| execute(inj, site, e, correct, c));
            let vote = majority_vote(a, b, d);
            let disagree = a != b || b != d;
            if vote.unresolved {
                c.unresolved_votes += 1;
                *unresolved = true;
            }
            settle(vote.value, correct, disagree, c);
            SiteRun { value: vote.value, mismatch: false }
        }
        ProtectionMode::Sera => {
            let a = execute(inj, site, 1, correct, c);
            let b = execute(inj, site, 2, correct, c);
            if a == b {
                settle(a, correct, false, c);
                return SiteRun { value: a, mismatch: false };
            }
            let third = execute(inj, site, 3, correct, c);
            let vote = majority_vote(a, b, third);
            if vote.unresolved {
                c.unresolved_votes += 1;
                *unresolved = true;
            }
            settle(vote.value, correct, true, c);
            SiteRun { value: vote.value, mismatch: true }
        }
    }
}

fn stage<I: Injector>(mode: ProtectionMode, requesters: &[Requester], correct: Grant, inj: &mut I) -> StageOutcome {
    let mut counters = ProtectionCounters::default();
    let mut unresolved = false;
    let sa = run_site(mode, inj, Site::Sa, correct, &mut counters, &mut unresolved);
    let winner = sa.value.0.and_then(|input| requesters.iter().find(|r| r.input == input));
    let mut mismatch = sa.mismatch;
    let next_port = match winner {
        Some(Requester { npc: Some(target), .. }) => {
            let npc = run_site(mode, inj, Site::Npc, *target, &mut counters, &mut unresolved);
            mismatch |= npc.mismatch;
            Some(npc.value)
        }
        _ => None,
    };
    let cycles_used = match mode {
        ProtectionMode::Sera if mismatch => 3,
        ProtectionMode::Sera => 2,
        _ => 1,
    };
    StageOutcome { grant: sa.value, next_port, cycles_used, counters, unresolved }
}

/// Single execution of each site; corruptions propagate.
pub fn baseline_stage<I: Injector>(requesters: &[Requester], correct: Grant, inj: &mut I) -> StageOutcome {
    stage(ProtectionMode::Baseline, requesters, correct, inj)
}

/// Three replicas per site and a two-of-three voter, no extra cycle.
pub fn tmr_stage<I: Injector>(requesters: &[Requester], correct: Grant, inj: &mut I) -> StageOutcome {
    stage(ProtectionMode::Tmr, requesters, correct, inj)
}

/// Execute each site twice and compare. A site that disagrees is rolled back,
/// run a third time and voted on, costing one more cycle.
pub fn sera_stage<I: Injector>(requesters: &[Requester], correct: Grant, inj: &mut I) -> StageOutcome {
    stage(ProtectionMode::Sera, requesters, correct, inj)
}

pub fn protected_stage<I: Injector>(
    mode: ProtectionMode,
    requesters: &[Requester],
    correct: Grant,
    inj: &mut I,
) -> StageOutcome {
    stage(mode, requesters, correct, inj)
}
