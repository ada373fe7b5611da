//! Instance generators, schedule metrics and resource estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frontend::min_plane_size;
use crate::program::{Basis, InstructionList};
use crate::schedulers::Schedule;

fn named_qubits(n: usize, offset: usize) -> Vec<String> {
    (0..n).map(|i| format!("q{}", i + offset)).collect()
}

/// `m` two-body instructions over all `plane_size^2` qubits, each on a
/// uniformly drawn distinct pair with XX or ZZ equally likely.
pub fn gen_random(m: usize, plane_size: u32, seed: u64) -> Result<InstructionList> {
    if plane_size < 2 {
        return Err(Error::InvalidArgument("random instances need plane_size >= 2".into()));
    }
    let n = (plane_size * plane_size) as usize;
    let names = named_qubits(n, 0);
    let mut list = InstructionList::new();
    for s in &names {
        list.intern(s);
    }
    list.header.plane_size = Some(plane_size);
    list.header.qubits = names.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..m {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let basis = if rng.gen_bool(0.5) { Basis::XX } else { Basis::ZZ };
        list.push(basis, &[&names[a], &names[b]])?;
    }
    Ok(list)
}

/// Instruction `i` joins qubits `i` and `i+1`, all in one row.
pub fn gen_stair(m: usize) -> Result<InstructionList> {
    if m == 0 {
        return Err(Error::InvalidArgument("stair needs m >= 1".into()));
    }
    let names = named_qubits(m + 1, 1);
    let mut list = InstructionList::new();
    list.header.plane_size = Some((m + 1) as u32);
    list.header.qubits = names.clone();
    for w in names.windows(2) {
        list.push(Basis::ZZ, &[&w[0], &w[1]])?;
    }
    Ok(list)
}

/// Instruction `i` joins qubit 1 and qubit `i+1`.
pub fn gen_hub(m: usize) -> Result<InstructionList> {
    if m == 0 {
        return Err(Error::InvalidArgument("hub needs m >= 1".into()));
    }
    let names = named_qubits(m + 1, 1);
    let mut list = InstructionList::new();
    list.header.plane_size = Some(min_plane_size(m + 1));
    list.header.qubits = names.clone();
    for other in &names[1..] {
        list.push(Basis::ZZ, &[&names[0], other])?;
    }
    Ok(list)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metrics {
    pub algorithm: String,
    pub instructions: usize,
    pub total_beats: u32,
    pub throughput: f64,
    pub routing_voxels: u64,
    pub active_volume: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

/// Metrics over the schedule alone. Cells with two even coordinates are
/// data or factory positions; every placed qubit and factory contributes a
/// pillar for the whole schedule, and routing voxels off those positions
/// are added on top.
pub fn compute_metrics(sched: &Schedule) -> Result<Metrics> {
    let m = sched.routed.len();
    if sched.total_beats == 0 && m > 0 {
        return Err(Error::Internal("schedule has instructions but zero beats".into()));
    }
    let routing_voxels = sched
        .routed
        .iter()
        .flat_map(|r| r.path.voxels.iter())
        .filter(|v| v.cell.x % 2 == 1 || v.cell.y % 2 == 1)
        .count() as u64;
    let pillars = (sched.plane.qubits + sched.plane.factories) as u64;
    Ok(Metrics {
        algorithm: sched.algorithm.tag().into(),
        instructions: m,
        total_beats: sched.total_beats,
        throughput: if m == 0 { 0.0 } else { m as f64 / sched.total_beats as f64 },
        routing_voxels,
        active_volume: pillars * sched.total_beats as u64 + routing_voxels,
        wall_time_secs: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResourceEstimate {
    pub distance: u32,
    pub physical_error_rate: f64,
    pub p_voxel: f64,
    pub program_failure: f64,
    pub qubits_per_cell: u64,
    pub physical_qubits: u64,
}

pub fn p_voxel(d: u32, p: f64) -> f64 {
    0.1 * d as f64 * (100.0 * p).powf((d as f64 + 1.0) / 2.0)
}

pub fn qubits_per_cell(d: u32) -> u64 {
    2 * (d as u64) * (d as u64) - 1
}

pub fn resource_estimate(active_volume: u64, cells: u64, d: u32, p: f64) -> Result<ResourceEstimate> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::Domain(format!("code distance must be odd and at least 3, got {d}")));
    }
    if !(p > 0.0 && p < 0.01) {
        return Err(Error::Domain(format!("physical error rate must lie in (0, 0.01), got {p}")));
    }
    let pv = p_voxel(d, p);
    Ok(ResourceEstimate {
        distance: d,
        physical_error_rate: p,
        p_voxel: pv,
        program_failure: (pv * active_volume as f64).min(1.0),
        qubits_per_cell: qubits_per_cell(d),
        physical_qubits: cells * qubits_per_cell(d),
    })
}
