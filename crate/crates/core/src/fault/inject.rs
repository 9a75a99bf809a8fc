use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FaultEvent, FaultMode, FaultPlan, FaultValue, Site};
use crate::noc::{Coord, Grant, Port};

/// A value produced by a fault site, with the full set of values the
/// hardware could encode for it.
pub trait SiteValue: Copy + Eq + std::fmt::Debug + 'static {
    const LEGAL: &'static [Self];
    fn fault_value(self) -> FaultValue;
}

impl SiteValue for Port {
    const LEGAL: &'static [Self] = &Port::ALL;
    fn fault_value(self) -> FaultValue {
        FaultValue::Port(self)
    }
}

impl SiteValue for Grant {
    const LEGAL: &'static [Self] = &Grant::ALL;
    fn fault_value(self) -> FaultValue {
        FaultValue::Grant(self)
    }
}

/// With probability `p`, a uniformly chosen legal value different from
/// `correct`; otherwise `None`.
pub fn inject<V: SiteValue, R: Rng + ?Sized>(correct: V, p: f64, rng: &mut R) -> Option<V> {
    if p <= 0.0 || !rng.random_bool(p.min(1.0)) {
        return None;
    }
    let others = V::LEGAL.iter().copied().filter(|&v| v != correct);
    let k = rng.random_range(0..V::LEGAL.len() - 1);
    others.into_iter().nth(k)
}

/// Produces the value of one execution of a site.
pub trait Injector {
    fn execute<V: SiteValue>(&mut self, site: Site, exec: u8, correct: V) -> V;
}

/// Never corrupts anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoFaults;

impl Injector for NoFaults {
    fn execute<V: SiteValue>(&mut self, _: Site, _: u8, correct: V) -> V {
        correct
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the random stream for one execution. Depends only on its
/// coordinates, so a replay with the same plan seed reproduces every fault
/// regardless of what else happened in the run.
pub fn execution_seed(seed: u64, cycle: u64, router: usize, output: Port, site: Site, exec: u8) -> u64 {
    let tag = (router as u64) << 16 | (output.index() as u64) << 8 | (site as u64) << 4 | u64::from(exec);
    mix(mix(mix(seed) ^ cycle) ^ tag)
}

/// Draws faults from a [`FaultPlan`] for one stage invocation (one router,
/// one output port, one cycle) and logs every corruption.
pub struct PlanInjector<'a> {
    plan: &'a FaultPlan,
    cycle: u64,
    router_index: usize,
    router: Coord,
    output: Port,
    hit: [bool; 2],
    events: &'a mut Vec<FaultEvent>,
}

impl<'a> PlanInjector<'a> {
    pub fn new(
        plan: &'a FaultPlan,
        cycle: u64,
        router_index: usize,
        router: Coord,
        output: Port,
        events: &'a mut Vec<FaultEvent>,
    ) -> Self {
        Self { plan, cycle, router_index, router, output, hit: [false; 2], events }
    }
}

impl Injector for PlanInjector<'_> {
    fn execute<V: SiteValue>(&mut self, site: Site, exec: u8, correct: V) -> V {
        let p = self.plan.probability(site);
        if p <= 0.0 || (self.plan.mode == FaultMode::SinglePerTriple && self.hit[site as usize]) {
            return correct;
        }
        let seed = execution_seed(self.plan.seed, self.cycle, self.router_index, self.output, site, exec);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match inject(correct, p, &mut rng) {
            Some(bad) => {
                self.hit[site as usize] = true;
                self.events.push(FaultEvent {
                    cycle: self.cycle,
                    router: self.router,
                    site,
                    execution_index: exec,
                    corrupted_value: bad.fault_value(),
                });
                bad
            }
            None => correct,
        }
    }
}
