//! Hand-checkable traces of single faults propagating through an
//! unprotected two-router mesh. The fault seed is searched for so that
//! exactly the wanted corruption happens.

use std::sync::{Arc, Mutex};

use noc_resilience::fault::{FaultEvent, FaultMode, FaultPlan, FaultValue, ProtectionMode, Site};
use noc_resilience::noc::{Coord, Dims, Flit, Grant, Mesh, MeshConfig, Port, StepOutput};

struct Trial {
    faults: Vec<FaultEvent>,
    lines: Vec<String>,
    ejected: Vec<(u64, Coord)>,
    misforwards: u64,
}

fn send_one(p_npc: f64, p_sa: f64, seed: u64) -> Trial {
    let dims = Dims::new(2, 1, 1);
    let plan = FaultPlan::new(p_npc, p_sa, FaultMode::Independent, seed).unwrap();
    let mut mesh =
        Mesh::new(MeshConfig { dims, protection: ProtectionMode::Baseline, fault: plan, ..Default::default() })
            .unwrap();
    let lines = Arc::new(Mutex::new(Vec::new()));
    let sink = Arc::clone(&lines);
    mesh.set_trace(move |e| sink.lock().unwrap().push(e.to_string()));
    let src = Coord::new(0, 0, 0);
    let dest = Coord::new(1, 0, 0);
    let f = Flit::packet(1, dest, Port::East, 1, 0, |_| 0)[0];
    let mut ejected = Vec::new();
    let mut out: StepOutput = mesh.step_network(&[(src, f)]).unwrap();
    for t in 1..60 {
        ejected.extend(out.ejected.iter().map(|&(c, _)| (t - 1, c)));
        out = mesh.step_network(&[]).unwrap();
    }
    let misforwards = mesh.stats().misforwards;
    let lines = lines.lock().unwrap().clone();
    Trial { faults: mesh.take_fault_events(), lines, ejected, misforwards }
}

#[test]
fn corrupted_lookahead_detours_and_is_flagged_downstream() {
    // The source router's NPC computes LOCAL for the far router; corrupt it
    // to WEST and nothing else.
    let want = |t: &Trial| {
        t.faults.len() == 1
            && t.faults[0].router == Coord::new(0, 0, 0)
            && t.faults[0].site == Site::Npc
            && t.faults[0].corrupted_value == FaultValue::Port(Port::West)
    };
    let trial = (0..20_000).map(|s| send_one(0.3, 0.0, s)).find(want).expect("some seed corrupts exactly once");

    // 1:0:0 gets the head at cycle 3 asking for WEST: flagged, followed.
    assert!(trial.lines.contains(&"4,1:0:0,MISROUTE,WEST,1,0".to_string()), "{:#?}", trial.lines);
    // Back at 0:0:0 the head carries the corrected route EAST, then LOCAL.
    assert!(trial.lines.iter().any(|l| l.starts_with("6,0:0:0,BW,EAST,1,0")), "{:#?}", trial.lines);
    // Four router traversals of three cycles each.
    assert_eq!(trial.ejected, vec![(12, Coord::new(1, 0, 0))]);
}

#[test]
fn grant_to_idle_input_is_a_misforward() {
    let want = |t: &Trial| {
        t.faults.first().is_some_and(|e| {
            e.site == Site::Sa && matches!(e.corrupted_value, FaultValue::Grant(Grant(Some(p))) if p != Port::Local)
        })
    };
    let trial = (0..20_000).map(|s| send_one(0.0, 0.3, s)).find(want).expect("some seed misgrants");
    assert!(trial.misforwards >= 1);
    assert!(trial.lines.iter().any(|l| l.contains(",MISFORWARD,")));
    // The slot is lost, not the flit: it still arrives, just later.
    assert_eq!(trial.ejected.len(), 1);
    assert!(trial.ejected[0].0 > 6);
}
