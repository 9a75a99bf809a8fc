use noc_resilience::fault::{FaultMode, FaultPlan, ProtectionMode};
use noc_resilience::noc::{Dims, MeshConfig};
use noc_resilience::traffic::{run_benchmark, Pattern, TrafficSpec};

fn config(dims: Dims, mode: ProtectionMode, p: (f64, f64), seed: u64) -> MeshConfig {
    MeshConfig {
        dims,
        protection: mode,
        fault: FaultPlan::new(p.0, p.1, FaultMode::SinglePerTriple, seed).unwrap(),
        ..Default::default()
    }
}

#[test]
fn zero_traffic_is_an_empty_run() {
    let t = TrafficSpec { packets_per_node: 0, ..Default::default() };
    let m = run_benchmark(&MeshConfig::default(), &t, 1).unwrap();
    assert_eq!(m.sent, 0);
    assert_eq!(m.finish_time, 0);
    assert_eq!(m.avg_delay, None);
    assert!(!m.incomplete);
}

/// Two nodes exchanging one packet each use opposite links, so nothing
/// contends and the delay is the bare pipeline: three stages in each of the
/// two routers, then one cycle per trailing flit.
#[test]
fn lone_exchange_matches_pipeline_trace() {
    let dims = Dims::new(2, 1, 1);
    for (len, expected) in [(1u16, 6.0), (5, 10.0)] {
        let t =
            TrafficSpec { pattern: Pattern::Uniform, packets_per_node: 1, packet_length: len, injection_interval: 20 };
        let m = run_benchmark(&config(dims, ProtectionMode::Baseline, (0.0, 0.0), 1), &t, 1).unwrap();
        assert_eq!(m.delivered, 2);
        assert_eq!(m.avg_delay, Some(expected));

        let tmr = run_benchmark(&config(dims, ProtectionMode::Tmr, (0.0, 0.0), 1), &t, 1).unwrap();
        assert_eq!(tmr.avg_delay, Some(expected));

        let sera = run_benchmark(&config(dims, ProtectionMode::Sera, (0.0, 0.0), 1), &t, 1).unwrap();
        assert_eq!(sera.delivered, sera.sent);
        assert!(sera.avg_delay.unwrap() > expected);
    }
}

#[test]
fn packets_are_accounted_for_and_runs_replay() {
    let dims = Dims::new(3, 3, 2);
    for pattern in Pattern::ALL {
        for mode in ProtectionMode::ALL {
            for p in [(0.0, 0.0), (0.2, 0.2)] {
                let t = TrafficSpec { pattern, packets_per_node: 20, ..Default::default() };
                let cfg = config(dims, mode, p, 3);
                let a = run_benchmark(&cfg, &t, 3).unwrap();
                assert_eq!(a.sent, 18 * 20);
                assert_eq!(a.delivered + a.misrouted + a.undelivered, a.sent);
                assert!(a.throughput <= 1.0);
                let b = run_benchmark(&cfg, &t, 3).unwrap();
                assert_eq!(a, b);
                if mode != ProtectionMode::Baseline {
                    assert_eq!(a.delivered, a.sent, "{pattern} {mode} {p:?}");
                    assert_eq!(a.counters.silent_corruptions, 0);
                }
            }
        }
    }
}

#[test]
fn fault_free_runs_have_no_failures() {
    for mode in ProtectionMode::ALL {
        let t = TrafficSpec { pattern: Pattern::Matmul, packets_per_node: 20, ..Default::default() };
        let m = run_benchmark(&config(Dims::new(4, 4, 4), mode, (0.0, 0.0), 9), &t, 9).unwrap();
        assert_eq!(m.delivered, m.sent);
        assert_eq!(m.first_failure_cycle, None);
        assert_eq!(m.counters.faults_injected, 0);
        // Each packet spends at least three cycles per router and one per
        // trailing flit.
        assert!(m.avg_delay.unwrap() >= 3.0 * 2.0 + 4.0);
    }
}

#[test]
fn baseline_under_faults_reports_failures() {
    let t = TrafficSpec { pattern: Pattern::Uniform, packets_per_node: 20, ..Default::default() };
    let m = run_benchmark(&config(Dims::new(4, 4, 4), ProtectionMode::Baseline, (0.33, 0.33), 5), &t, 5).unwrap();
    assert!(m.failed_packets() > 0);
    assert!(m.first_failure_cycle.is_some());
    assert!(m.counters.silent_corruptions > 0);
}

#[test]
fn sera_recovers_everything_it_detects() {
    let t = TrafficSpec { pattern: Pattern::Transpose, packets_per_node: 20, ..Default::default() };
    let m = run_benchmark(&config(Dims::new(4, 4, 4), ProtectionMode::Sera, (0.33, 0.33), 2), &t, 2).unwrap();
    let c = m.counters;
    assert!(c.faults_detected > 0);
    assert_eq!(c.faults_recovered, c.faults_detected);
    assert!(c.faults_detected <= c.faults_injected);
}
