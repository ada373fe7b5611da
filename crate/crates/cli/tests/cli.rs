use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lattice-sched"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_line(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("one JSON object")
}

#[test]
fn stair_pipeline_reaches_two_beats() {
    let dir = tempfile::tempdir().unwrap();
    let instrs = path(dir.path(), "stair.jsonl");
    let sched = path(dir.path(), "stair.json");
    assert!(run(&["gen", "--kind", "stair", "--m", "100", "-o", s(&instrs)]).status.success());
    let out = run(&["schedule", "--algo", "proj", "--kink", "on", "-i", s(&instrs), "-o", s(&sched)]);
    assert!(out.status.success());
    let stats = run(&["stats", "-s", s(&sched)]);
    assert!(stats.status.success());
    let v = json_line(&stats.stdout);
    assert_eq!(v["total_beats"], 2);
    assert_eq!(v["throughput"], 50.0);
    assert_eq!(v["instructions"], 100);
}

#[test]
fn verify_with_oracle_passes_on_projection_output() {
    let dir = tempfile::tempdir().unwrap();
    let instrs = path(dir.path(), "r.jsonl");
    let sched = path(dir.path(), "r.json");
    let gen = ["gen", "--kind", "random", "--m", "20", "--plane-size", "3", "--seed", "5", "-o", s(&instrs)];
    assert!(run(&gen).status.success());
    assert!(run(&["schedule", "--algo", "la-proj", "-i", s(&instrs), "-o", s(&sched)]).status.success());
    let out = run(&["verify", "-i", s(&instrs), "-s", s(&sched), "--oracle", "--seeds", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_line(&out.stdout);
    assert_eq!(v["valid"], true);
    assert_eq!(v["oracle"]["checked"], 20);
}

#[test]
fn tampered_schedule_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let instrs = path(dir.path(), "h.jsonl");
    let sched = path(dir.path(), "h.json");
    assert!(run(&["gen", "--kind", "hub", "--m", "3", "-o", s(&instrs)]).status.success());
    assert!(run(&["schedule", "--algo", "bfs", "-i", s(&instrs), "-o", s(&sched)]).status.success());
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&sched).unwrap()).unwrap();
    v["paths"][1]["voxels"] = v["paths"][0]["voxels"].clone();
    std::fs::write(&sched, v.to_string()).unwrap();
    let out = run(&["verify", "-i", s(&instrs), "-s", s(&sched)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_line(&out.stderr)["error"], "verification");
}

#[test]
fn schedule_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let instrs = path(dir.path(), "r.jsonl");
    let a = path(dir.path(), "a.json");
    let b = path(dir.path(), "b.json");
    assert!(run(&["gen", "--kind", "random", "--m", "40", "--seed", "9", "-o", s(&instrs)]).status.success());
    for out in [&a, &b] {
        assert!(run(&["schedule", "--algo", "dijkstra3d", "-i", s(&instrs), "-o", s(out)]).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn unknown_algorithm_is_a_usage_error() {
    let out = run(&["schedule", "--algo", "nope", "-i", "x.jsonl"]);
    assert_eq!(out.status.code(), Some(64));
    assert_eq!(json_line(&out.stderr)["error"], "usage");
}

#[test]
fn missing_input_exit_code() {
    let out = run(&["schedule", "--algo", "bfs", "-i", "/nonexistent/in.jsonl"]);
    assert_eq!(out.status.code(), Some(66));
}

#[test]
fn malformed_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let instrs = path(dir.path(), "bad.jsonl");
    std::fs::write(&instrs, "{\"op\":\"MZX\",\"q\":[\"a\",\"b\"]}\n").unwrap();
    let out = run(&["schedule", "--algo", "bfs", "-i", s(&instrs)]);
    assert_eq!(out.status.code(), Some(65));
    assert_eq!(json_line(&out.stderr)["error"], "parse");
}

#[test]
fn many_body_needs_projection() {
    let dir = tempfile::tempdir().unwrap();
    let instrs = path(dir.path(), "mb.jsonl");
    std::fs::write(&instrs, "{\"op\":\"MZZZ\",\"q\":[\"a\",\"b\",\"c\"]}\n").unwrap();
    let out = run(&["schedule", "--algo", "bfs", "-i", s(&instrs)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_line(&out.stderr)["error"], "routing");
    let out = run(&["schedule", "--algo", "proj", "-i", s(&instrs)]);
    assert!(out.status.success());
}

#[test]
fn lower_then_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = path(dir.path(), "c.jsonl");
    let instrs = path(dir.path(), "l.jsonl");
    std::fs::write(
        &circuit,
        "{\"g\":\"CX\",\"q\":[\"a\",\"b\"]}\n{\"g\":\"T\",\"q\":[\"b\"]}\n{\"g\":\"S\",\"q\":[\"a\"]}\n",
    )
    .unwrap();
    let out = run(&["lower", "-i", s(&circuit), "-o", s(&instrs), "--mode", "cnot", "--factories", "1"]);
    assert!(out.status.success());
    let log = json_line(&out.stderr);
    assert_eq!(log["instructions"], 2);
    assert_eq!(log["dropped"][0], "S(a)");
    let text = std::fs::read_to_string(&instrs).unwrap();
    assert!(text.contains("{\"op\":\"CX\",\"q\":[\"a\",\"b\"]}"));
    let out = run(&["schedule", "--algo", "proj", "-i", s(&instrs)]);
    assert!(out.status.success());
    let sched: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(sched["paths"][0]["kinks"].as_u64().unwrap() % 2, 1);
}

#[test]
fn unsupported_gate_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = path(dir.path(), "c.jsonl");
    std::fs::write(&circuit, "{\"g\":\"RZ\",\"q\":[\"a\"],\"angle\":0.1}\n").unwrap();
    let out = run(&["lower", "-i", s(&circuit)]);
    assert_eq!(out.status.code(), Some(65));
    assert_eq!(json_line(&out.stderr)["error"], "unsupported_gate");
}

#[test]
fn stats_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let instrs = path(dir.path(), "h.jsonl");
    let sched = path(dir.path(), "h.json");
    assert!(run(&["gen", "--kind", "hub", "--m", "4", "-o", s(&instrs)]).status.success());
    assert!(run(&["schedule", "--algo", "proj", "-i", s(&instrs), "-o", s(&sched)]).status.success());
    let out = run(&["stats", "-s", s(&sched), "--distance", "4", "--perr", "0.001"]);
    assert_eq!(out.status.code(), Some(65));
    assert_eq!(json_line(&out.stderr)["error"], "domain");
    let out = run(&["stats", "-s", s(&sched), "--distance", "3", "--perr", "0.001"]);
    let v = json_line(&out.stdout);
    assert_eq!(v["resources"]["qubits_per_cell"], 17);
    assert_eq!(v["total_beats"], 4);
}

#[test]
fn export_lists_every_voxel() {
    let dir = tempfile::tempdir().unwrap();
    let instrs = path(dir.path(), "s.jsonl");
    let sched = path(dir.path(), "s.json");
    let voxels = path(dir.path(), "v.txt");
    assert!(run(&["gen", "--kind", "stair", "--m", "3", "-o", s(&instrs)]).status.success());
    assert!(run(&["schedule", "--algo", "bfs", "-i", s(&instrs), "-o", s(&sched)]).status.success());
    assert!(run(&["export", "-s", s(&sched), "--voxels", s(&voxels)]).status.success());
    let text = std::fs::read_to_string(&voxels).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[0], "0 0 0 0");
    assert_eq!(lines[8], "6 0 2 2");
}
