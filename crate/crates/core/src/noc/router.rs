//! One router and its per-cycle behaviour.
//!
//! Timing, for a head flit written into an input buffer at cycle `n`:
//! NPC/SA runs at `n + 1` and the granted flit is latched into the crossbar
//! register of its output; at `n + 2` it traverses the crossbar onto the
//! link and the downstream router writes it into its buffer at `n + 3`.
//! When the protected stage takes more than one cycle the flit waits in its
//! buffer for the extra cycles before being latched.

use std::collections::VecDeque;

use super::{
    compute_next_port, lookahead_npc, round_robin, Coord, Dims, Flit, MeshStats, Port, SimError, TraceEvent, TraceKind,
};
use crate::fault::{
    protected_stage, FaultEvent, FaultPlan, PlanInjector, ProtectionCounters, ProtectionMode, Requester,
};

/// Stall is asserted upstream while fewer than this many slots are free.
/// Two flits can still be on their way when the upstream router sees the
/// signal (one on the link, one in its crossbar register), plus one slot of
/// margin.
pub const STALL_THRESHOLD: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputState {
    /// The front flit, if any, is a head waiting for allocation.
    #[default]
    Idle,
    /// Head granted `output`; it may leave once the cycle reaches `ready_at`.
    Held { output: Port, ready_at: u64 },
    /// Head has left; body flits follow it to `output` up to the tail.
    Streaming { output: Port },
}

/// Everything a router needs from the surrounding network for one cycle.
pub struct CycleContext<'a> {
    pub cycle: u64,
    pub mode: ProtectionMode,
    pub plan: &'a FaultPlan,
    pub faults: &'a mut Vec<FaultEvent>,
    pub counters: &'a mut ProtectionCounters,
    pub stats: &'a mut MeshStats,
    pub trace: Option<&'a mut Vec<TraceEvent>>,
}

impl CycleContext<'_> {
    fn trace(&mut self, router: Coord, kind: TraceKind, port: Port, flit: Option<&Flit>) {
        if let Some(t) = self.trace.as_deref_mut() {
            t.push(TraceEvent::new(self.cycle, router, kind, port, flit));
        }
    }
}

#[derive(Debug, Clone)]
pub struct RouterState {
    coord: Coord,
    index: usize,
    dims: Dims,
    capacity: usize,
    buffers: [VecDeque<Flit>; Port::COUNT],
    inputs: [InputState; Port::COUNT],
    /// Per output: the input holding the wormhole lock.
    owner: [Option<Port>; Port::COUNT],
    /// Per output: round-robin pointer.
    pointer: [usize; Port::COUNT],
    /// Per output: crossbar traversal register.
    crossbar: [Option<Flit>; Port::COUNT],
    stall_out: [bool; Port::COUNT],
}

impl RouterState {
    pub fn new(coord: Coord, dims: Dims, capacity: usize) -> Self {
        Self {
            coord,
            index: dims.index(coord),
            dims,
            capacity,
            buffers: Default::default(),
            inputs: Default::default(),
            owner: [None; Port::COUNT],
            pointer: [0; Port::COUNT],
            crossbar: [None; Port::COUNT],
            stall_out: [false; Port::COUNT],
        }
    }

    pub fn coord(&self) -> Coord {
        self.coord
    }

    /// Stall signals this router drives towards each input's sender.
    pub fn stall_out(&self) -> [bool; Port::COUNT] {
        self.stall_out
    }

    pub fn occupancy(&self, input: Port) -> usize {
        self.buffers[input.index()].len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn input_state(&self, input: Port) -> InputState {
        self.inputs[input.index()]
    }

    pub fn lock_owner(&self, output: Port) -> Option<Port> {
        self.owner[output.index()]
    }

    /// Flits held in buffers and crossbar registers.
    pub fn in_flight(&self) -> usize {
        self.buffers.iter().map(VecDeque::len).sum::<usize>() + self.crossbar.iter().flatten().count()
    }

    /// Advances one clock edge. `arriving` are the flits on the input links
    /// this cycle; `blocked[o]` is the stall signal seen on output `o`.
    /// Returns the flits placed on the output links.
    pub fn cycle(
        &mut self,
        arriving: [Option<Flit>; Port::COUNT],
        blocked: [bool; Port::COUNT],
        ctx: &mut CycleContext<'_>,
    ) -> Result<[Option<Flit>; Port::COUNT], SimError> {
        // CT: registers latched last cycle leave on the links.
        let mut out = [None; Port::COUNT];
        for o in Port::ALL {
            if let Some(f) = self.crossbar[o.index()].take() {
                ctx.trace(self.coord, TraceKind::Traverse, o, Some(&f));
                out[o.index()] = Some(f);
            }
        }

        // Flits already granted move into the crossbar registers. Each buffer
        // gives up at most one flit per cycle.
        let mut moved = [false; Port::COUNT];
        for i in Port::ALL {
            match self.inputs[i.index()] {
                InputState::Held { output, ready_at } if ready_at <= ctx.cycle && !blocked[output.index()] => {
                    self.latch(i, output);
                    moved[i.index()] = true;
                }
                InputState::Streaming { output } if !blocked[output.index()] && !self.buffers[i.index()].is_empty() => {
                    self.latch(i, output);
                    moved[i.index()] = true;
                }
                _ => {}
            }
        }

        // NPC/SA for free outputs.
        for o in Port::ALL {
            if self.owner[o.index()].is_none() && !blocked[o.index()] {
                self.allocate(o, &moved, ctx)?;
            }
        }

        // BW.
        for i in Port::ALL {
            if let Some(f) = arriving[i.index()] {
                let buf = &mut self.buffers[i.index()];
                if buf.len() >= self.capacity {
                    return Err(SimError::BufferOverflow { at: self.coord, port: i, capacity: self.capacity });
                }
                ctx.trace(self.coord, TraceKind::BufferWrite, i, Some(&f));
                buf.push_back(f);
            }
        }

        for i in Port::ALL {
            self.stall_out[i.index()] = self.capacity - self.buffers[i.index()].len() < STALL_THRESHOLD;
        }
        Ok(out)
    }

    /// Moves the front flit of `input` into the crossbar register of
    /// `output`, releasing the lock on a tail.
    fn latch(&mut self, input: Port, output: Port) {
        let flit = self.buffers[input.index()].pop_front().expect("latched input has a flit");
        debug_assert!(self.crossbar[output.index()].is_none());
        self.crossbar[output.index()] = Some(flit);
        if flit.kind.is_tail() {
            self.inputs[input.index()] = InputState::Idle;
            self.owner[output.index()] = None;
        } else {
            self.inputs[input.index()] = InputState::Streaming { output };
        }
    }

    fn allocate(
        &mut self,
        output: Port,
        moved: &[bool; Port::COUNT],
        ctx: &mut CycleContext<'_>,
    ) -> Result<(), SimError> {
        let mut requesting = [false; Port::COUNT];
        let mut requesters = Vec::new();
        for i in Port::ALL {
            if self.inputs[i.index()] != InputState::Idle {
                continue;
            }
            let Some(head) = self.buffers[i.index()].front() else { continue };
            debug_assert!(head.kind.is_head(), "idle input must present a head flit");
            if head.next_port != output {
                continue;
            }
            requesting[i.index()] = true;
            let npc = match lookahead_npc(self.dims, self.coord, output, head.dest) {
                Ok(p) => Some(p),
                Err(SimError::OffMesh { .. }) => None,
                Err(e) => return Err(e),
            };
            requesters.push(Requester { input: i, npc });
        }
        if requesters.is_empty() {
            return Ok(());
        }

        let correct = round_robin(requesting, self.pointer[output.index()]);
        let mut inj = PlanInjector::new(ctx.plan, ctx.cycle, self.index, self.coord, output, ctx.faults);
        let outcome = protected_stage(ctx.mode, &requesters, correct, &mut inj);
        *ctx.counters += outcome.counters;

        let winner = match outcome.grant.0 {
            Some(i) if requesting[i.index()] => i,
            Some(i) => {
                ctx.stats.misforwards += 1;
                ctx.trace(self.coord, TraceKind::Misforward, i, None);
                return Ok(());
            }
            None => return Ok(()),
        };

        let head = self.buffers[winner.index()].front_mut().expect("requester has a head");
        if compute_next_port(self.coord, head.dest) != output {
            ctx.stats.misroutes += 1;
            ctx.trace(self.coord, TraceKind::Misroute, output, Some(head));
        }
        if let Some(p) = outcome.next_port {
            head.next_port = p;
        }
        ctx.trace(self.coord, TraceKind::Grant, output, Some(head));

        self.owner[output.index()] = Some(winner);
        self.pointer[output.index()] = (winner.index() + 1) % Port::COUNT;
        let ready_at = ctx.cycle + u64::from(outcome.cycles_used) - 1;
        self.inputs[winner.index()] = InputState::Held { output, ready_at };
        // A single-cycle stage latches at once unless the crossbar register
        // or the buffer read port is already taken this cycle; then the head
        // goes out next cycle.
        if ready_at <= ctx.cycle && self.crossbar[output.index()].is_none() && !moved[winner.index()] {
            self.latch(winner, output);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noc::FlitKind;

    struct Harness {
        plan: FaultPlan,
        faults: Vec<FaultEvent>,
        counters: ProtectionCounters,
        stats: MeshStats,
        trace: Vec<TraceEvent>,
    }

    impl Harness {
        fn new() -> Self {
            Self {
                plan: FaultPlan::none(),
                faults: Vec::new(),
                counters: Default::default(),
                stats: Default::default(),
                trace: Vec::new(),
            }
        }

        fn step(
            &mut self,
            r: &mut RouterState,
            cycle: u64,
            mode: ProtectionMode,
            arriving: [Option<Flit>; 7],
        ) -> [Option<Flit>; 7] {
            let mut ctx = CycleContext {
                cycle,
                mode,
                plan: &self.plan,
                faults: &mut self.faults,
                counters: &mut self.counters,
                stats: &mut self.stats,
                trace: Some(&mut self.trace),
            };
            r.cycle(arriving, [false; 7], &mut ctx).unwrap()
        }
    }

    fn single(id: u64, dest: Coord, port: Port) -> Flit {
        Flit::packet(id, dest, port, 1, 0, |_| 0)[0]
    }

    fn arrive(port: Port, f: Flit) -> [Option<Flit>; 7] {
        let mut a = [None; 7];
        a[port.index()] = Some(f);
        a
    }

    #[test]
    fn quiescent_router_stays_put() {
        let dims = Dims::new(2, 2, 1);
        let mut r = RouterState::new(Coord::new(0, 0, 0), dims, 4);
        let mut h = Harness::new();
        for c in 0..10 {
            assert_eq!(h.step(&mut r, c, ProtectionMode::Baseline, [None; 7]), [None; 7]);
        }
        assert_eq!(r.in_flight(), 0);
        assert!(h.trace.is_empty());
    }

    /// Cycle the flit leaves on its output link, counting from its buffer write.
    fn departure(mode: ProtectionMode) -> u64 {
        let dims = Dims::new(2, 2, 1);
        let mut r = RouterState::new(Coord::new(0, 0, 0), dims, 4);
        let mut h = Harness::new();
        let f = single(1, Coord::new(1, 0, 0), Port::East);
        h.step(&mut r, 0, mode, arrive(Port::Local, f));
        for c in 1..10 {
            let out = h.step(&mut r, c, mode, [None; 7]);
            if let Some(g) = out[Port::East.index()] {
                assert_eq!(g.next_port, Port::Local);
                return c;
            }
        }
        panic!("flit never left");
    }

    #[test]
    fn head_leaves_after_pipeline_stages() {
        // Written at 0, allocated at 1, on the link at 2: the third stage.
        assert_eq!(departure(ProtectionMode::Baseline), 2);
        assert_eq!(departure(ProtectionMode::Tmr), 2);
        assert_eq!(departure(ProtectionMode::Sera), 3);
    }

    #[test]
    fn contending_heads_are_served_in_turn() {
        let dims = Dims::new(2, 2, 1);
        let dest = Coord::new(1, 0, 0);
        let mut r = RouterState::new(Coord::new(0, 0, 0), dims, 4);
        let mut h = Harness::new();
        let mut a = [None; 7];
        a[Port::Local.index()] = Some(single(1, dest, Port::East));
        a[Port::North.index()] = Some(single(2, dest, Port::East));
        h.step(&mut r, 0, ProtectionMode::Baseline, a);
        let mut order = Vec::new();
        for c in 1..10 {
            if let Some(f) = h.step(&mut r, c, ProtectionMode::Baseline, [None; 7])[Port::East.index()] {
                order.push((c, f.packet_id));
            }
        }
        assert_eq!(order.len(), 2);
        assert!(order[0].0 < order[1].0);
        assert_ne!(order[0].1, order[1].1);
    }

    #[test]
    fn body_flits_follow_head_without_gaps() {
        let dims = Dims::new(2, 1, 1);
        let mut r = RouterState::new(Coord::new(0, 0, 0), dims, 8);
        let mut h = Harness::new();
        let flits = Flit::packet(7, Coord::new(1, 0, 0), Port::East, 4, 0, |s| s.into());
        let mut departures = Vec::new();
        for c in 0..12u64 {
            let a = flits.get(c as usize).map_or([None; 7], |&f| arrive(Port::Local, f));
            if let Some(f) = h.step(&mut r, c, ProtectionMode::Baseline, a)[Port::East.index()] {
                departures.push((c, f.seq, f.kind));
            }
        }
        assert_eq!(
            departures,
            [(2, 0, FlitKind::Head), (3, 1, FlitKind::Body), (4, 2, FlitKind::Body), (5, 3, FlitKind::Tail)]
        );
        assert_eq!(r.lock_owner(Port::East), None);
    }

    #[test]
    fn stall_asserted_below_threshold() {
        let dims = Dims::new(2, 1, 1);
        let mut r = RouterState::new(Coord::new(1, 0, 0), dims, 4);
        let mut h = Harness::new();
        let flits = Flit::packet(1, Coord::new(0, 0, 0), Port::West, 4, 0, |_| 0);
        let mut ctx_block = |r: &mut RouterState, c: u64, a| {
            let mut ctx = CycleContext {
                cycle: c,
                mode: ProtectionMode::Baseline,
                plan: &h.plan,
                faults: &mut h.faults,
                counters: &mut h.counters,
                stats: &mut h.stats,
                trace: None,
            };
            r.cycle(a, [true; 7], &mut ctx).unwrap();
        };
        ctx_block(&mut r, 0, arrive(Port::Local, flits[0]));
        assert!(!r.stall_out()[Port::Local.index()]);
        ctx_block(&mut r, 1, arrive(Port::Local, flits[1]));
        assert!(r.stall_out()[Port::Local.index()]);
    }

    #[test]
    fn misroute_is_flagged_and_followed() {
        let dims = Dims::new(2, 1, 1);
        let mut r = RouterState::new(Coord::new(1, 0, 0), dims, 4);
        let mut h = Harness::new();
        // Destined for this router but told to go WEST by a corrupted upstream NPC.
        let f = single(3, Coord::new(1, 0, 0), Port::West);
        h.step(&mut r, 0, ProtectionMode::Baseline, arrive(Port::West, f));
        let out = h.step(&mut r, 1, ProtectionMode::Baseline, [None; 7]);
        assert_eq!(out, [None; 7]);
        let out = h.step(&mut r, 2, ProtectionMode::Baseline, [None; 7]);
        let g = out[Port::West.index()].expect("corrupted port is followed");
        assert_eq!(g.next_port, Port::East);
        assert_eq!(h.stats.misroutes, 1);
        let lines: Vec<String> = h.trace.iter().map(|e| e.to_string()).collect();
        assert!(lines.contains(&"1,1:0:0,MISROUTE,WEST,3,0".to_string()), "{lines:?}");
    }
}
