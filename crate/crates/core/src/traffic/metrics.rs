use crate::fault::ProtectionCounters;
use crate::noc::MeshStats;

/// Column order of the per-run CSV report. Fixed; rows are appended under it.
pub const CSV_HEADER: &str = "benchmark,mode,p_npc,p_sa,seed,sent,delivered,misrouted,undelivered,avg_delay,throughput,finish_time,first_failure_cycle,faults_injected,faults_detected,faults_recovered,silent_corruptions,incomplete";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunMetrics {
    /// Packets created by the sources.
    pub sent: u64,
    /// Packets whose tail was ejected at their destination.
    pub delivered: u64,
    /// Packets ejected at some other node.
    pub misrouted: u64,
    /// Packets dropped off the mesh edge or still in the network when the
    /// run stopped.
    pub undelivered: u64,
    /// Mean cycles from packet creation to tail ejection over delivered
    /// packets; `None` when nothing was delivered.
    pub avg_delay: Option<f64>,
    /// Delivered flits per cycle per node, over `finish_time` cycles.
    pub throughput: f64,
    /// Cycle of the last ejection (0 if none).
    pub finish_time: u64,
    /// First cycle a packet was misdelivered or dropped. A run stopped by
    /// the watchdog without such an event reports the stop cycle.
    pub first_failure_cycle: Option<u64>,
    pub counters: ProtectionCounters,
    pub mesh: MeshStats,
    /// Stopped by the watchdog before draining.
    pub incomplete: bool,
    /// Cycles simulated.
    pub cycles: u64,
}

impl RunMetrics {
    /// Packets that did not reach their destination.
    pub fn failed_packets(&self) -> u64 {
        self.misrouted + self.undelivered
    }

    /// Metric columns of a CSV row, from `sent` through `incomplete`.
    /// Absent values are empty fields.
    pub fn csv_fields(&self) -> Vec<String> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        vec![
            self.sent.to_string(),
            self.delivered.to_string(),
            self.misrouted.to_string(),
            self.undelivered.to_string(),
            opt(self.avg_delay.map(|d| d.to_string())),
            self.throughput.to_string(),
            self.finish_time.to_string(),
            opt(self.first_failure_cycle.map(|c| c.to_string())),
            self.counters.faults_injected.to_string(),
            self.counters.faults_detected.to_string(),
            self.counters.faults_recovered.to_string(),
            self.counters.silent_corruptions.to_string(),
            self.incomplete.to_string(),
        ]
    }
}
