mod common;

use lattice_sched::bench::{compute_metrics, gen_hub, gen_random, gen_stair, p_voxel, resource_estimate};
use lattice_sched::frontend::place;
use lattice_sched::schedulers::{run, Algorithm};

const REL_TOL: f64 = 1e-12;

fn schedule(algo: Algorithm, instrs: &lattice_sched::InstructionList) -> lattice_sched::Schedule {
    let plane = place(instrs, None, false).unwrap();
    run(algo, instrs, &plane, true).unwrap()
}

#[test]
fn stair_projection_volume_closed_form() {
    // First route is flat with one ancilla; every later one climbs over the
    // shared qubit and uses two ancilla voxels.
    for m in 2..=40u64 {
        let met = compute_metrics(&schedule(Algorithm::Projection, &gen_stair(m as usize).unwrap())).unwrap();
        assert_eq!(met.total_beats, 2);
        assert_eq!(met.routing_voxels, 2 * m - 1);
        assert_eq!(met.active_volume, (m + 1) * 2 + 2 * m - 1);
    }
    let met = compute_metrics(&schedule(Algorithm::Projection, &gen_stair(100).unwrap())).unwrap();
    assert_eq!(met.active_volume, 401);
    assert_eq!(met.throughput, 50.0);
}

#[test]
fn stair_bfs_volume_closed_form() {
    for m in 1..=30u64 {
        let met = compute_metrics(&schedule(Algorithm::Bfs, &gen_stair(m as usize).unwrap())).unwrap();
        assert_eq!(met.total_beats as u64, m);
        assert_eq!(met.routing_voxels, m);
        assert_eq!(met.active_volume, (m + 1) * m + m);
        assert_eq!(met.throughput, 1.0);
    }
}

#[test]
fn hub_is_serial_everywhere() {
    for m in 1..=12 {
        let l = gen_hub(m).unwrap();
        for algo in Algorithm::ALL {
            assert_eq!(schedule(algo, &l).total_beats as usize, m, "{algo} m={m}");
        }
    }
}

#[test]
fn golden_hub_schedule() {
    let s = schedule(Algorithm::Bfs, &gen_hub(2).unwrap());
    assert_eq!(
        s.to_json(),
        concat!(
            r#"{"algorithm":"bfs","kink_condition":false,"plane":{"plane_size":2,"factories":0,"layout":"even-even","qubits":3},"#,
            r#""total_beats":2,"paths":[{"i":0,"voxels":[[0,0,0],[1,0,0],[2,0,0]],"kinks":0,"adjusted":false},"#,
            r#"{"i":1,"voxels":[[0,0,1],[1,0,1],[1,1,1],[1,2,1],[0,2,1]],"kinks":0,"adjusted":false}]}"#
        )
    );
}

#[test]
fn golden_random_instance() {
    let l = gen_random(6, 3, 11).unwrap();
    let text = {
        let mut buf = Vec::new();
        l.write_to(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(GOLDEN_RANDOM, &lines[1..]);
}

const GOLDEN_RANDOM: &[&str] = &[
    r#"{"op":"MZZ","q":["q3","q4"]}"#,
    r#"{"op":"MXX","q":["q3","q1"]}"#,
    r#"{"op":"MXX","q":["q3","q8"]}"#,
    r#"{"op":"MXX","q":["q1","q0"]}"#,
    r#"{"op":"MZZ","q":["q5","q3"]}"#,
    r#"{"op":"MXX","q":["q2","q4"]}"#,
];

#[test]
fn voxel_error_rate_by_hand() {
    // 0.1 * d * (100 p)^((d+1)/2)
    let cases = [(3, 1e-3, 0.3 * 0.1f64.powi(2)), (11, 1e-3, 1.1 * 0.1f64.powi(6)), (5, 5e-3, 0.5 * 0.125)];
    for (d, p, expect) in cases {
        assert!((p_voxel(d, p) - expect).abs() <= REL_TOL * expect, "d={d}");
    }
    let r = resource_estimate(401, 16, 5, 5e-3).unwrap();
    assert_eq!(r.qubits_per_cell, 49);
    assert_eq!(r.physical_qubits, 16 * 49);
    assert_eq!(r.program_failure, 1.0);
    let r = resource_estimate(10, 9, 11, 1e-3).unwrap();
    assert!((r.program_failure - 1.1e-5).abs() <= REL_TOL * 1.1e-5);
}
