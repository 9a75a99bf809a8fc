//! End-to-end runs of the built binary: output files, reports and exit
//! codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use noc_resilience::traffic::CSV_HEADER;

/// The built binary. Unit tests run from `target/<profile>/deps`; cargo
/// puts the binary one directory up.
fn bin() -> Command {
    let exe = std::env::current_exe().expect("test executable path");
    let dir = exe.parent().and_then(Path::parent).expect("target directory");
    Command::new(dir.join(format!("noc-resilience{}", std::env::consts::EXE_SUFFIX)))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

const SMALL: &str = "[mesh]\ndims = \"2x2x1\"\n[traffic]\npackets_per_node = 2\n[experiment]\nseeds = \"1..=2\"\n";

#[test]
fn sweep_writes_one_row_per_job_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let csv = dir.path().join("out.csv");
    let args = ["sweep", "--config", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap()];

    let first = run(&args);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + 45 * 2);
    assert!(stdout(&first).contains("SERA delay"));
    // Unprotected runs under faults may wedge; the exit code says so.
    let wedged = lines.iter().any(|l| l.ends_with(",true"));
    assert_eq!(first.status.code(), Some(if wedged { 2 } else { 0 }), "{}", stderr(&first));

    // The asymmetric rate keeps both probabilities.
    let asym: Vec<&&str> = lines.iter().filter(|l| l.contains(",0.1111,0.0667,")).collect();
    assert_eq!(asym.len(), 3 * 3 * 2);

    // Appending adds rows only, and the data rows repeat byte for byte.
    let second = run(&args);
    assert_eq!(second.status.code(), first.status.code());
    let text2 = fs::read_to_string(&csv).unwrap();
    let lines2: Vec<&str> = text2.lines().collect();
    assert_eq!(lines2.len(), 1 + 2 * 45 * 2);
    assert_eq!(lines2.iter().filter(|l| **l == CSV_HEADER).count(), 1);
    assert_eq!(lines2[1..91], lines2[91..]);
}

#[test]
fn thread_cap_does_not_change_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let rows = |threads: &str| {
        let o = bin()
            .args(["sweep", "--config", cfg.to_str().unwrap(), "--set", "experiment.modes=SERA"])
            .env("NOC_RESILIENCE_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        stdout(&o)
    };
    assert_eq!(rows("1"), rows("3"));

    let bad =
        bin().args(["sweep", "--config", cfg.to_str().unwrap()]).env("NOC_RESILIENCE_THREADS", "0").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn config_errors_exit_with_one_and_name_the_field() {
    let o = run(&["sweep", "--set", "experiment.seeds=[]"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("experiment.seeds"), "{}", stderr(&o));

    let o = run(&["simulate", "--set", "mesh.colour=red"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mesh.colour"));

    let o = run(&["simulate", "--set", "fault.p_npc=150%"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("fault.p_npc"));

    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn io_errors_exit_with_three() {
    assert_eq!(run(&["simulate", "--config", "/nonexistent/cfg.toml"]).status.code(), Some(3));
    assert_eq!(run(&["raf", "/nonexistent/x.profiles"]).status.code(), Some(3));
    let o = run(&["simulate", "--set", "traffic.packets_per_node=1", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn undrained_run_exits_with_two() {
    // An unprotected 3x3 layer at a 33% fault rate; this seed wedges.
    let o = run(&[
        "simulate",
        "--seed",
        "2",
        "--set",
        "mesh.dims=3x3x1",
        "--set",
        "traffic.packets_per_node=10",
        "--set",
        "fault.p_npc=0.33",
        "--set",
        "fault.p_sa=0.33",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stderr(&o).contains("did not drain"));
}

#[test]
fn simulate_traces_events_and_logs_faults() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("faults.csv");
    let o = run(&[
        "simulate",
        "--trace",
        "--fault-log",
        log.to_str().unwrap(),
        "--set",
        "mesh.dims=2x1x1",
        "--set",
        "traffic.packets_per_node=1",
        "--set",
        "traffic.packet_length=1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let trace = stderr(&o);
    assert!(trace.starts_with("cycle,router,event,port,packet_id,seq\n"));
    assert!(trace.contains("\n6,1:0:0,EJECT,LOCAL,0,0\n"), "{trace}");
    assert!(stdout(&o).contains("delay       6.000 cycles"));
    assert_eq!(fs::read_to_string(&log).unwrap(), "cycle,router,site,exec_index,injected_value\n");

    let o = run(&[
        "simulate",
        "--fault-log",
        log.to_str().unwrap(),
        "--set",
        "mesh.protection=SERA",
        "--set",
        "fault.p_npc=0.2",
        "--set",
        "traffic.packets_per_node=5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let log = fs::read_to_string(&log).unwrap();
    assert!(log.lines().count() > 1);
    assert!(log.lines().skip(1).all(|l| l.split(',').nth(2) == Some("NPC")));
}

#[test]
fn raf_report_handles_shipped_and_edge_profiles() {
    let o = run(&["raf", &data("table2.profiles")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("1.8362"));
    assert!(out.contains("11.1111"));
    assert!(out.contains("0.9709"));
    assert!(out.contains("0.8333"));
    assert!(out.contains("unverified"));

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("edge.profiles");
    fs::write(
        &p,
        "[[mechanism]]\nlabel = \"free\"\nprotected = { coverage = 0.0 }\ncorrector = { area_ratio = 0.0 }\n\
         [[mechanism]]\nlabel = \"bare\"\nprotected = { coverage = 1.0 }\ncorrector = { area_ratio = 0.0 }\n",
    )
    .unwrap();
    let o = run(&["raf", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let free = out.lines().find(|l| l.starts_with("free")).unwrap();
    assert!(free.contains("unbounded"));
    let bare = out.lines().find(|l| l.starts_with("bare")).unwrap();
    assert!(bare.contains("1.0000"));

    fs::write(&p, "[[mechanism]]\nlabel = 3\n").unwrap();
    let o = run(&["raf", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn mtbf_reads_model_files() {
    let o = run(&["mtbf", &data("tmr.model")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("MTBF = 83333.333"), "{}", stdout(&o));

    let o = run(&["mtbf", &data("simplex.model"), "--trials", "20000"]);
    let mtbf: f64 = stdout(&o).split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((mtbf - 1e5).abs() < 1e-6, "{}", stdout(&o));
    assert!(stdout(&o).contains("Monte Carlo (20000 trials)"));

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.model");
    fs::write(&p, "[states]\nA B\n[transitions]\nA B -1\n").unwrap();
    assert_eq!(run(&["mtbf", p.to_str().unwrap()]).status.code(), Some(1));
}
