use std::process::{Command, Output};

use gsdist::graph_state::LabeledGraph;
use gsdist::sc_solver::ScSystem;

fn gsdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsdist")).args(args).output().unwrap()
}

#[test]
fn solve_reads_an_edge_list_and_writes_a_system() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("c5.txt");
    let g = LabeledGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
    std::fs::write(&graph, g.to_text()).unwrap();
    let out = dir.path().join("c5.sys");
    let res = gsdist(&["solve", "--graph", graph.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let sys = ScSystem::parse_text(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(sys.len(), 3);
    assert!(sys.reproduces(&g));
    assert!(String::from_utf8_lossy(&res.stdout).contains("c2 lower 3"));
}

#[test]
fn distribute_writes_schedule_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w5.csv");
    let res = gsdist(&["distribute", "wheel:5", "--protocol", "sc", "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("bell_pairs 4\n"), "{stdout}");
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "round,op_kind,qubit1,qubit2,phase_annotation");
    assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 5));
}

#[test]
fn exit_codes() {
    assert_eq!(gsdist(&["solve", "nosuch:3"]).status.code(), Some(1));
    assert_eq!(gsdist(&["solve", "/no/such/file"]).status.code(), Some(1));
    assert_eq!(gsdist(&["sweep", "--graph", "complete:3", "--p", "1.5"]).status.code(), Some(1));
    assert_eq!(gsdist(&["verify", "--samples", "5"]).status.code(), Some(0));
}

#[test]
fn sweep_writes_svg_beside_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, svg) = (dir.path().join("r.csv"), dir.path().join("r.svg"));
    let res = gsdist(&[
        "sweep", "--graph", "path", "--protocol", "sc,factory", "--vary", "n:4:8:2", "--trials", "300",
        "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 1 + 3 * 2);
    let svg = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}
