use std::collections::VecDeque;

use super::{DestinationStream, RunMetrics, TrafficError, TrafficSpec};
use crate::fault::FaultEvent;
use crate::noc::{compute_next_port, Coord, Flit, Mesh, MeshConfig, TraceEvent};

pub type TraceSink = Box<dyn FnMut(&TraceEvent) + Send>;

/// Knobs of a single run beyond the network and traffic description.
pub struct RunOptions {
    /// Seeds the destination streams.
    pub seed: u64,
    /// Hard cycle limit.
    pub watchdog: u64,
    /// Give up when no flit has entered or left the network for this many
    /// cycles while flits remain inside.
    pub stall_limit: u64,
    pub trace: Option<TraceSink>,
}

impl RunOptions {
    pub fn new(seed: u64) -> Self {
        Self { seed, watchdog: 1_000_000, stall_limit: 10_000, trace: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketStatus {
    InFlight,
    Delivered { cycle: u64 },
    Misrouted { cycle: u64, at: Coord },
    Dropped { cycle: u64, at: Coord },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketOutcome {
    pub id: u64,
    pub src: Coord,
    pub dest: Coord,
    pub created: u64,
    pub status: PacketStatus,
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: RunMetrics,
    pub packets: Vec<PacketOutcome>,
    pub faults: Vec<FaultEvent>,
}

/// Runs `traffic` on a fresh mesh until it drains or the watchdog fires.
pub fn run_benchmark(mesh: &MeshConfig, traffic: &TrafficSpec, seed: u64) -> Result<RunMetrics, TrafficError> {
    run_benchmark_with(mesh, traffic, RunOptions::new(seed)).map(|o| o.metrics)
}

/// Every node creates a packet at cycles 0, interval, 2*interval, ... and
/// queues its flits in an unbounded source queue. One flit per cycle enters
/// the local port whenever it is not stalled.
pub fn run_benchmark_with(
    config: &MeshConfig,
    traffic: &TrafficSpec,
    opts: RunOptions,
) -> Result<RunOutput, TrafficError> {
    traffic.validate()?;
    let mut mesh = Mesh::new(*config)?;
    let dims = config.dims;
    if let Some(sink) = opts.trace {
        mesh.set_trace(sink);
    }
    let nodes: Vec<Coord> = dims.coords().collect();
    let mut streams: Vec<_> =
        nodes.iter().map(|&c| DestinationStream::new(traffic.pattern, c, dims, opts.seed)).collect();
    let mut queues: Vec<VecDeque<Flit>> = vec![VecDeque::new(); nodes.len()];
    let mut packets: Vec<PacketOutcome> = Vec::new();
    let mut rounds = 0u32;

    let mut delivered_flits = 0u64;
    let mut delay_sum = 0u64;
    let mut finish_time = 0u64;
    let mut first_failure: Option<u64> = None;
    let mut last_progress = 0u64;
    let mut incomplete = false;

    loop {
        let t = mesh.cycle();
        let queued = queues.iter().any(|q| !q.is_empty());
        if rounds == traffic.packets_per_node && !queued && mesh.in_flight() == 0 {
            break;
        }
        if t >= opts.watchdog || t.saturating_sub(last_progress) > opts.stall_limit {
            incomplete = true;
            break;
        }

        if rounds < traffic.packets_per_node && t == u64::from(rounds) * traffic.injection_interval {
            for (i, &src) in nodes.iter().enumerate() {
                let dest = streams[i].next_destination()?;
                let id = packets.len() as u64;
                packets.push(PacketOutcome { id, src, dest, created: t, status: PacketStatus::InFlight });
                let payload = |seq: u16| (id as u32) ^ (u32::from(seq) << 24);
                queues[i].extend(Flit::packet(
                    id,
                    dest,
                    compute_next_port(src, dest),
                    traffic.packet_length,
                    t,
                    payload,
                ));
            }
            rounds += 1;
        }

        let injections: Vec<(Coord, Flit)> = nodes
            .iter()
            .enumerate()
            .filter(|&(_, &c)| !mesh.local_stalled(c))
            .filter_map(|(i, &c)| queues[i].pop_front().map(|f| (c, f)))
            .collect();
        let out = mesh.step_network(&injections)?;
        if !injections.is_empty() || !out.ejected.is_empty() || !out.dropped.is_empty() {
            last_progress = t;
        }

        for &(at, f) in &out.ejected {
            finish_time = t;
            let p = &mut packets[f.packet_id as usize];
            if at == p.dest {
                delivered_flits += 1;
            }
            if f.kind.is_tail() && p.status == PacketStatus::InFlight {
                p.status = if at == p.dest {
                    delay_sum += t - p.created;
                    PacketStatus::Delivered { cycle: t }
                } else {
                    first_failure.get_or_insert(t);
                    PacketStatus::Misrouted { cycle: t, at }
                };
            }
        }
        for &(at, f) in &out.dropped {
            let p = &mut packets[f.packet_id as usize];
            if p.status == PacketStatus::InFlight {
                first_failure.get_or_insert(t);
                p.status = PacketStatus::Dropped { cycle: t, at };
            }
        }
    }

    let cycles = mesh.cycle();
    if incomplete {
        first_failure.get_or_insert(cycles);
    }
    let count = |pred: fn(&PacketStatus) -> bool| packets.iter().filter(|p| pred(&p.status)).count() as u64;
    let delivered = count(|s| matches!(s, PacketStatus::Delivered { .. }));
    let misrouted = count(|s| matches!(s, PacketStatus::Misrouted { .. }));
    let sent = packets.len() as u64;
    let metrics = RunMetrics {
        sent,
        delivered,
        misrouted,
        undelivered: sent - delivered - misrouted,
        avg_delay: (delivered > 0).then(|| delay_sum as f64 / delivered as f64),
        throughput: if finish_time > 0 {
            delivered_flits as f64 / (finish_time as f64 * nodes.len() as f64)
        } else {
            0.0
        },
        finish_time,
        first_failure_cycle: first_failure,
        counters: mesh.counters(),
        mesh: mesh.stats(),
        incomplete,
        cycles,
    };
    Ok(RunOutput { metrics, packets, faults: mesh.take_fault_events() })
}
