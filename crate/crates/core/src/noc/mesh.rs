use super::{Coord, CycleContext, Dims, Flit, Port, RouterState, SimError, TraceEvent, TraceKind, STALL_THRESHOLD};
use crate::fault::{FaultEvent, FaultPlan, ProtectionCounters, ProtectionMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshConfig {
    pub dims: Dims,
    /// Input buffer depth in flits.
    pub buffer_depth: usize,
    pub protection: ProtectionMode,
    pub fault: FaultPlan,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            dims: Dims::new(4, 4, 4),
            buffer_depth: 4,
            protection: ProtectionMode::Baseline,
            fault: FaultPlan::none(),
        }
    }
}

impl MeshConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let d = self.dims;
        if d.x == 0 || d.y == 0 || d.z == 0 {
            return Err(SimError::InvalidConfig(format!("mesh dimensions must be at least 1, got {d}")));
        }
        if self.buffer_depth < STALL_THRESHOLD {
            return Err(SimError::InvalidConfig(format!(
                "buffer depth {} is below the stall threshold {STALL_THRESHOLD}; the link would never go",
                self.buffer_depth
            )));
        }
        self.fault.validate().map_err(SimError::InvalidConfig)
    }
}

/// Network-level event counts, beyond the protection counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MeshStats {
    pub injected_flits: u64,
    pub ejected_flits: u64,
    pub dropped_flits: u64,
    /// Heads granted an output that disagrees with the route to their
    /// destination.
    pub misroutes: u64,
    /// Switch grants issued to inputs that were not requesting.
    pub misforwards: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepOutput {
    /// Flits handed to the local core at each router this cycle.
    pub ejected: Vec<(Coord, Flit)>,
    /// Flits that were sent off the mesh edge by the given router.
    pub dropped: Vec<(Coord, Flit)>,
}

type Sink = Box<dyn FnMut(&TraceEvent) + Send>;

pub struct Mesh {
    config: MeshConfig,
    routers: Vec<RouterState>,
    /// Flits on the input links, to be written next cycle.
    links: Vec<[Option<Flit>; Port::COUNT]>,
    /// Stall signals driven last cycle, per router input.
    stalls: Vec<[bool; Port::COUNT]>,
    ejecting: Vec<(Coord, Flit)>,
    cycle: u64,
    counters: ProtectionCounters,
    stats: MeshStats,
    faults: Vec<FaultEvent>,
    trace_buf: Vec<TraceEvent>,
    sink: Option<Sink>,
}

impl std::fmt::Debug for Mesh {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mesh")
            .field("config", &self.config)
            .field("cycle", &self.cycle)
            .field("stats", &self.stats)
            .finish_non_exhaustive()
    }
}

impl Mesh {
    pub fn new(config: MeshConfig) -> Result<Self, SimError> {
        config.validate()?;
        let dims = config.dims;
        let n = dims.nodes();
        Ok(Self {
            config,
            routers: dims.coords().map(|c| RouterState::new(c, dims, config.buffer_depth)).collect(),
            links: vec![[None; Port::COUNT]; n],
            stalls: vec![[false; Port::COUNT]; n],
            ejecting: Vec::new(),
            cycle: 0,
            counters: ProtectionCounters::default(),
            stats: MeshStats::default(),
            faults: Vec::new(),
            trace_buf: Vec::new(),
            sink: None,
        })
    }

    /// Sends every trace event to `sink` as it happens.
    pub fn set_trace(&mut self, sink: impl FnMut(&TraceEvent) + Send + 'static) {
        self.sink = Some(Box::new(sink));
    }

    pub fn config(&self) -> &MeshConfig {
        &self.config
    }

    pub fn dims(&self) -> Dims {
        self.config.dims
    }

    /// The cycle the next call to [`Mesh::step_network`] will simulate.
    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn counters(&self) -> ProtectionCounters {
        self.counters
    }

    pub fn stats(&self) -> MeshStats {
        self.stats
    }

    pub fn fault_events(&self) -> &[FaultEvent] {
        &self.faults
    }

    pub fn take_fault_events(&mut self) -> Vec<FaultEvent> {
        std::mem::take(&mut self.faults)
    }

    pub fn router(&self, at: Coord) -> &RouterState {
        &self.routers[self.config.dims.index(at)]
    }

    /// Whether the local port at `at` refuses injections this cycle.
    pub fn local_stalled(&self, at: Coord) -> bool {
        self.stalls[self.config.dims.index(at)][Port::Local.index()]
    }

    /// Flits inside the network: buffers, crossbar registers, links and the
    /// ejection stage.
    pub fn in_flight(&self) -> usize {
        self.routers.iter().map(RouterState::in_flight).sum::<usize>()
            + self.links.iter().flatten().flatten().count()
            + self.ejecting.len()
    }

    /// Advances every router by one cycle. All routers read the link values
    /// and stall signals produced in the previous cycle, so evaluation order
    /// does not matter. `injections` enter the local input ports; each must
    /// target an unstalled port and at most one flit per router.
    pub fn step_network(&mut self, injections: &[(Coord, Flit)]) -> Result<StepOutput, SimError> {
        let dims = self.config.dims;
        let mut arriving = std::mem::replace(&mut self.links, vec![[None; Port::COUNT]; dims.nodes()]);
        for &(at, flit) in injections {
            if !dims.contains(at) {
                return Err(SimError::OutOfBounds { at, dims });
            }
            let r = dims.index(at);
            if self.stalls[r][Port::Local.index()] {
                return Err(SimError::StallViolation { at });
            }
            let slot = &mut arriving[r][Port::Local.index()];
            if slot.is_some() {
                return Err(SimError::DuplicateInjection { at });
            }
            *slot = Some(flit);
            self.stats.injected_flits += 1;
        }

        let mut output = StepOutput { ejected: std::mem::take(&mut self.ejecting), dropped: Vec::new() };
        self.stats.ejected_flits += output.ejected.len() as u64;
        let tracing = self.sink.is_some();
        if tracing {
            for (at, f) in &output.ejected {
                self.trace_buf.push(TraceEvent::new(self.cycle, *at, TraceKind::Eject, Port::Local, Some(f)));
            }
        }

        let mut next_stalls = vec![[false; Port::COUNT]; dims.nodes()];
        for r in 0..self.routers.len() {
            let at = self.routers[r].coord();
            let mut blocked = [false; Port::COUNT];
            // The core always accepts ejected flits; only links can stall.
            for o in Port::ALL.into_iter().filter(|&o| o != Port::Local) {
                if let Some(n) = dims.neighbor(at, o) {
                    blocked[o.index()] = self.stalls[dims.index(n)][o.opposite().index()];
                }
            }
            let mut ctx = CycleContext {
                cycle: self.cycle,
                mode: self.config.protection,
                plan: &self.config.fault,
                faults: &mut self.faults,
                counters: &mut self.counters,
                stats: &mut self.stats,
                trace: tracing.then_some(&mut self.trace_buf),
            };
            let out = self.routers[r].cycle(arriving[r], blocked, &mut ctx)?;
            next_stalls[r] = self.routers[r].stall_out();
            for o in Port::ALL {
                let Some(f) = out[o.index()] else { continue };
                if o == Port::Local {
                    self.ejecting.push((at, f));
                } else if let Some(n) = dims.neighbor(at, o) {
                    self.links[dims.index(n)][o.opposite().index()] = Some(f);
                } else {
                    self.stats.dropped_flits += 1;
                    if tracing {
                        self.trace_buf.push(TraceEvent::new(self.cycle, at, TraceKind::Drop, o, Some(&f)));
                    }
                    output.dropped.push((at, f));
                }
            }
        }
        self.stalls = next_stalls;

        if let Some(sink) = self.sink.as_mut() {
            for e in self.trace_buf.drain(..) {
                sink(&e);
            }
        }
        self.cycle += 1;
        Ok(output)
    }
}
