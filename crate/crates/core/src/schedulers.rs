//! The six scheduling algorithms, the schedule validator and the schedule
//! file format.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinkmod::{count_kinks, required_parity};
use crate::lattice::{boundary_of_side, CellKind, HeightMap, Occupancy3D, QubitPlane, VoxelCoord};
use crate::manybody::{
    boundary_of_basis, check_tree_conditions, classify_segments, flip_parity_lowest,
    route_manybody_projection, RoutingTree,
};
use crate::program::{DependencyGraph, Instruction, InstructionList, QubitId};
use crate::routing::{
    find_shortest_path_2d, find_shortest_path_3d, find_weighted_path_2d, find_weighted_path_3d,
    lift_path, validate_path3d, Path3D, RouteSpec, Step,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Bfs,
    LaBfs,
    Bfs3d,
    Dijkstra3d,
    Projection,
    LaProjection,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Bfs,
        Algorithm::LaBfs,
        Algorithm::Bfs3d,
        Algorithm::Dijkstra3d,
        Algorithm::Projection,
        Algorithm::LaProjection,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Bfs => "bfs",
            Algorithm::LaBfs => "la-bfs",
            Algorithm::Bfs3d => "bfs3d",
            Algorithm::Dijkstra3d => "dijkstra3d",
            Algorithm::Projection => "proj",
            Algorithm::LaProjection => "la-proj",
        }
    }

    pub fn is_projection(self) -> bool {
        matches!(self, Algorithm::Projection | Algorithm::LaProjection)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProjectionOptions {
    pub kink_condition: bool,
    pub look_ahead: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoutedInstruction {
    pub instr_index: usize,
    pub path: Path3D,
    pub kinks: usize,
    pub adjusted: bool,
    /// Tree edges for many-body instructions; consecutive voxels otherwise.
    pub edges: Option<Vec<(usize, usize)>>,
}

impl RoutedInstruction {
    fn tree(&self, plane: &QubitPlane, instr: &Instruction) -> Option<RoutingTree> {
        self.edges.as_ref().map(|e| RoutingTree {
            voxels: self.path.voxels.clone(),
            edges: e.clone(),
            targets: instr.qubits.iter().map(|q| plane.cell_of(*q)).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaneDescriptor {
    pub plane_size: u32,
    /// Factory cells.
    pub factories: usize,
    pub layout: String,
    /// Data cells holding a placed qubit.
    pub qubits: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub factories_first: bool,
}

impl PlaneDescriptor {
    pub fn of(plane: &QubitPlane) -> Self {
        let factories = (0..plane.num_cells())
            .filter(|&i| plane.kind_at(i) == CellKind::Factory)
            .count();
        Self {
            plane_size: plane.plane_size(),
            factories,
            layout: "even-even".into(),
            qubits: (0..plane.num_qubits())
                .filter(|&q| plane.kind(plane.cell_of(QubitId(q as u32))) == CellKind::Data)
                .count(),
            factories_first: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub algorithm: Algorithm,
    pub kink_condition: bool,
    pub plane: PlaneDescriptor,
    pub total_beats: u32,
    /// Indexed by instruction.
    pub routed: Vec<RoutedInstruction>,
}

impl Schedule {
    fn finish(
        algorithm: Algorithm,
        kink_condition: bool,
        plane: &QubitPlane,
        mut routed: Vec<RoutedInstruction>,
    ) -> Self {
        routed.sort_by_key(|r| r.instr_index);
        let total_beats = routed
            .iter()
            .flat_map(|r| r.path.voxels.iter())
            .map(|v| v.t + 1)
            .max()
            .unwrap_or(0);
        Schedule {
            algorithm,
            kink_condition,
            plane: PlaneDescriptor::of(plane),
            total_beats,
            routed,
        }
    }

    pub fn voxel_count(&self) -> usize {
        self.routed.iter().map(|r| r.path.len()).sum()
    }
}

fn two_body_spec(plane: &QubitPlane, instr: &Instruction) -> Result<RouteSpec> {
    if instr.is_many_body() {
        return Err(Error::Routing {
            index: instr.index,
            reason: "many-body instructions need a projection scheduler".into(),
        });
    }
    RouteSpec::for_instruction(plane, instr)
}

fn flat_routed(index: usize, path: Path3D) -> RoutedInstruction {
    RoutedInstruction {
        instr_index: index,
        kinks: 0,
        path,
        adjusted: false,
        edges: None,
    }
}

struct Beat {
    avail: Vec<bool>,
    used: bool,
}

impl Beat {
    fn new(plane: &QubitPlane) -> Self {
        Beat {
            avail: vec![true; plane.num_cells()],
            used: false,
        }
    }

    fn try_route(&mut self, plane: &QubitPlane, spec: &RouteSpec) -> Option<crate::routing::Path2D> {
        let p = find_shortest_path_2d(plane, &self.avail, spec)?;
        for c in &p.cells {
            self.avail[plane.index(*c)] = false;
        }
        self.used = true;
        Some(p)
    }
}

/// In-order 2D routing: each instruction is routed in the current beat if
/// possible, otherwise the beat advances and every cell becomes free again.
pub fn schedule_bfs(instrs: &InstructionList, plane: &QubitPlane) -> Result<Schedule> {
    let mut routed = Vec::with_capacity(instrs.len());
    let mut t = 0u32;
    let mut beat = Beat::new(plane);
    let mut i = 0;
    while i < instrs.len() {
        let instr = instrs.get(i);
        let spec = two_body_spec(plane, instr)?;
        match beat.try_route(plane, &spec) {
            Some(p) => {
                routed.push(flat_routed(i, p.at_layer(t)));
                i += 1;
            }
            None if !beat.used => {
                return Err(Error::Routing {
                    index: i,
                    reason: "not routable on an empty plane".into(),
                })
            }
            None => {
                t += 1;
                beat = Beat::new(plane);
            }
        }
    }
    Ok(Schedule::finish(Algorithm::Bfs, false, plane, routed))
}

/// 2D routing with instruction look-ahead: every beat tries all
/// instructions whose dependencies were met before the beat began.
pub fn schedule_la_bfs(instrs: &InstructionList, plane: &QubitPlane) -> Result<Schedule> {
    let mut dg = DependencyGraph::build(instrs);
    let mut routed = Vec::with_capacity(instrs.len());
    let mut t = 0u32;
    while !dg.is_empty() {
        let mut beat = Beat::new(plane);
        let ready = dg.executable_indices();
        for &i in &ready {
            let spec = two_body_spec(plane, instrs.get(i))?;
            if let Some(p) = beat.try_route(plane, &spec) {
                routed.push(flat_routed(i, p.at_layer(t)));
                dg.mark_executed(i)?;
            }
        }
        if !beat.used {
            return Err(Error::Routing {
                index: ready[0],
                reason: "not routable on an empty plane".into(),
            });
        }
        t += 1;
    }
    Ok(Schedule::finish(Algorithm::LaBfs, false, plane, routed))
}

fn schedule_3d(
    instrs: &InstructionList,
    plane: &QubitPlane,
    algorithm: Algorithm,
) -> Result<Schedule> {
    let mut occ = Occupancy3D::new(plane);
    let mut routed = Vec::with_capacity(instrs.len());
    for instr in instrs.iter() {
        two_body_spec(plane, instr)?;
        let path = if algorithm == Algorithm::Bfs3d {
            find_shortest_path_3d(plane, &occ, instr)?
        } else {
            find_weighted_path_3d(plane, &occ, instr)?
        };
        occ.occupy(plane, &path.voxels)?;
        routed.push(RoutedInstruction {
            instr_index: instr.index,
            kinks: count_kinks(&path).count,
            path,
            adjusted: false,
            edges: None,
        });
    }
    Ok(Schedule::finish(algorithm, false, plane, routed))
}

pub fn schedule_bfs3d(instrs: &InstructionList, plane: &QubitPlane) -> Result<Schedule> {
    schedule_3d(instrs, plane, Algorithm::Bfs3d)
}

pub fn schedule_dijkstra3d(instrs: &InstructionList, plane: &QubitPlane) -> Result<Schedule> {
    schedule_3d(instrs, plane, Algorithm::Dijkstra3d)
}

fn operand_height(plane: &QubitPlane, h: &HeightMap, instr: &Instruction) -> u64 {
    instr
        .qubits
        .iter()
        .map(|q| h.get(plane.cell_of(*q)) as u64)
        .max()
        .unwrap_or(0)
}

fn route_projected(
    plane: &QubitPlane,
    h: &mut HeightMap,
    instr: &Instruction,
    kink_condition: bool,
) -> Result<RoutedInstruction> {
    if instr.is_many_body() {
        let cells: Vec<_> = instr.qubits.iter().map(|q| plane.cell_of(*q)).collect();
        let boundary = boundary_of_basis(instr.basis)?;
        let tree = route_manybody_projection(plane, &cells, boundary, h).map_err(|e| match e {
            Error::Routing { reason, .. } => Error::Routing {
                index: instr.index,
                reason,
            },
            other => other,
        })?;
        let kinks = classify_segments(&tree, 0)
            .map(|(d, _)| d.connectors.iter().filter(|c| c.kink).count())
            .unwrap_or(0);
        return Ok(RoutedInstruction {
            instr_index: instr.index,
            path: Path3D::new(tree.voxels),
            kinks,
            adjusted: false,
            edges: Some(tree.edges),
        });
    }
    let spec = RouteSpec::for_instruction(plane, instr)?;
    let (p2, _) = find_weighted_path_2d(plane, h, &spec).map_err(|_| Error::Routing {
        index: instr.index,
        reason: "no planar route".into(),
    })?;
    let mut path = lift_path(&p2, h);
    let mut adjusted = false;
    if kink_condition && count_kinks(&path).parity != required_parity(instr.basis) {
        path = flip_parity_lowest(plane, h, &path).ok_or_else(|| Error::Routing {
            index: instr.index,
            reason: "kink parity cannot be fixed and no twist fits".into(),
        })?;
        adjusted = true;
    }
    for v in &path.voxels {
        h.raise_to_cover(*v);
    }
    Ok(RoutedInstruction {
        instr_index: instr.index,
        kinks: count_kinks(&path).count,
        path,
        adjusted,
        edges: None,
    })
}

/// Height-map scheduling: each instruction is routed in 2D with weights
/// `2^H`, lifted onto the terrain, optionally fixed to the kink parity its
/// basis needs, and the terrain raised over it. With look-ahead the
/// instruction taken next is the ready one with the lowest operand
/// height at the time it became ready.
pub fn schedule_projection(
    instrs: &InstructionList,
    plane: &QubitPlane,
    opts: ProjectionOptions,
) -> Result<Schedule> {
    let mut h = HeightMap::new(plane);
    let mut routed = Vec::with_capacity(instrs.len());
    if opts.look_ahead {
        let mut dg = DependencyGraph::build_keyed(instrs, |i| operand_height(plane, &h, instrs.get(i)));
        while let Some(i) = dg.pop_min_height() {
            routed.push(route_projected(plane, &mut h, instrs.get(i), opts.kink_condition)?);
            dg.mark_executed_keyed(i, |c| operand_height(plane, &h, instrs.get(c)))?;
        }
    } else {
        for instr in instrs.iter() {
            routed.push(route_projected(plane, &mut h, instr, opts.kink_condition)?);
        }
    }
    let algorithm = if opts.look_ahead {
        Algorithm::LaProjection
    } else {
        Algorithm::Projection
    };
    Ok(Schedule::finish(algorithm, opts.kink_condition, plane, routed))
}

pub fn run(
    algorithm: Algorithm,
    instrs: &InstructionList,
    plane: &QubitPlane,
    kink_condition: bool,
) -> Result<Schedule> {
    match algorithm {
        Algorithm::Bfs => schedule_bfs(instrs, plane),
        Algorithm::LaBfs => schedule_la_bfs(instrs, plane),
        Algorithm::Bfs3d => schedule_bfs3d(instrs, plane),
        Algorithm::Dijkstra3d => schedule_dijkstra3d(instrs, plane),
        Algorithm::Projection | Algorithm::LaProjection => schedule_projection(
            instrs,
            plane,
            ProjectionOptions {
                kink_condition,
                look_ahead: algorithm == Algorithm::LaProjection,
            },
        ),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Coverage,
    Collision,
    Structure,
    Causality,
    KinkParity,
    Beats,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScheduleViolation {
    pub kind: ViolationKind,
    pub instr: Option<usize>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<ScheduleViolation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&ScheduleViolation> {
        self.violations.first()
    }

    fn push(&mut self, kind: ViolationKind, instr: Option<usize>, message: impl Into<String>) {
        self.violations.push(ScheduleViolation {
            kind,
            instr,
            message: message.into(),
        });
    }
}

/// Checks coverage, voxel disjointness, route structure, per-qubit time
/// order and, optionally, kink parity.
pub fn validate_schedule(
    instrs: &InstructionList,
    plane: &QubitPlane,
    sched: &Schedule,
    check_kinks: bool,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    if sched.routed.len() != instrs.len()
        || sched.routed.iter().enumerate().any(|(i, r)| r.instr_index != i)
    {
        report.push(
            ViolationKind::Coverage,
            None,
            "schedule must route every instruction exactly once, in index order",
        );
        return report;
    }
    let mut owner: HashMap<VoxelCoord, usize> = HashMap::new();
    for r in &sched.routed {
        for v in &r.path.voxels {
            if let Some(prev) = owner.insert(*v, r.instr_index) {
                if prev != r.instr_index {
                    report.push(
                        ViolationKind::Collision,
                        Some(r.instr_index),
                        format!("voxel {v} is used by instructions {prev} and {}", r.instr_index),
                    );
                }
            }
        }
    }
    let expected_beats = sched
        .routed
        .iter()
        .flat_map(|r| r.path.voxels.iter())
        .map(|v| v.t + 1)
        .max()
        .unwrap_or(0);
    if expected_beats != sched.total_beats {
        report.push(
            ViolationKind::Beats,
            None,
            format!("total_beats is {} but paths span {expected_beats}", sched.total_beats),
        );
    }
    let mut touch: Vec<Option<u32>> = vec![None; plane.num_qubits()];
    let mut last_instr: Vec<Option<usize>> = vec![None; plane.num_qubits()];
    for (instr, r) in instrs.iter().zip(&sched.routed) {
        if let Err(msg) = check_structure(plane, instr, r) {
            report.push(ViolationKind::Structure, Some(instr.index), msg);
            continue;
        }
        for q in &instr.qubits {
            let cell = plane.cell_of(*q);
            let t = r
                .path
                .voxels
                .iter()
                .find(|v| v.cell == cell)
                .map(|v| v.t)
                .expect("structure check places every operand");
            if let (Some(prev), Some(pi)) = (touch[q.index()], last_instr[q.index()]) {
                if t <= prev {
                    report.push(
                        ViolationKind::Causality,
                        Some(instr.index),
                        format!(
                            "instruction {} touches qubit {} at t={t}, not after instruction {pi} at t={prev}",
                            instr.index,
                            q.index()
                        ),
                    );
                }
            }
            touch[q.index()] = Some(t);
            last_instr[q.index()] = Some(instr.index);
        }
        if check_kinks && r.edges.is_none() {
            let k = count_kinks(&r.path);
            if k.parity != required_parity(instr.basis) {
                report.push(
                    ViolationKind::KinkParity,
                    Some(instr.index),
                    format!("{} kinks do not suit {:?}", k.count, instr.basis),
                );
            }
        }
    }
    report
}

fn check_structure(
    plane: &QubitPlane,
    instr: &Instruction,
    r: &RoutedInstruction,
) -> std::result::Result<(), String> {
    for q in &instr.qubits {
        if plane.try_cell_of(*q).is_none() {
            return Err(format!("qubit {} is not placed", q.index()));
        }
    }
    match r.tree(plane, instr) {
        None => {
            if instr.is_many_body() {
                return Err("many-body instruction stored without tree edges".into());
            }
            let spec = RouteSpec::for_instruction(plane, instr).map_err(|e| e.to_string())?;
            validate_path3d(plane, &spec, &r.path)
        }
        Some(tree) => {
            let report = check_tree_conditions(&tree);
            if let Some(v) = report.violations.first() {
                return Err(format!("condition {}: {}", v.condition, v.detail));
            }
            for v in &tree.voxels {
                if !plane.contains(v.cell) {
                    return Err(format!("voxel {v} lies outside the plane"));
                }
                if !tree.targets.contains(&v.cell) && plane.kind(v.cell) != CellKind::Ancilla {
                    return Err(format!("interior voxel {v} is not on an ancilla cell"));
                }
            }
            let boundary = boundary_of_basis(instr.basis).map_err(|e| e.to_string())?;
            let adj = tree.adjacency();
            for (i, v) in tree.voxels.iter().enumerate() {
                if !tree.targets.contains(&v.cell) {
                    continue;
                }
                let ok = matches!(
                    Step::between(*v, tree.voxels[adj[i][0]]),
                    Some(Step::Horizontal(d)) if boundary_of_side(d) == boundary
                );
                if !ok {
                    return Err(format!("leaf {v} is attached through the wrong boundary"));
                }
            }
            Ok(())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PathRecord {
    i: usize,
    voxels: Vec<[u32; 3]>,
    kinks: usize,
    adjusted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<[usize; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleRecord {
    algorithm: String,
    #[serde(default)]
    kink_condition: bool,
    plane: PlaneDescriptor,
    total_beats: u32,
    paths: Vec<PathRecord>,
}

impl Schedule {
    pub fn to_json(&self) -> String {
        let rec = ScheduleRecord {
            algorithm: self.algorithm.tag().into(),
            kink_condition: self.kink_condition,
            plane: self.plane.clone(),
            total_beats: self.total_beats,
            paths: self
                .routed
                .iter()
                .map(|r| PathRecord {
                    i: r.instr_index,
                    voxels: r.path.voxels.iter().map(|v| [v.cell.x, v.cell.y, v.t]).collect(),
                    kinks: r.kinks,
                    adjusted: r.adjusted,
                    edges: r
                        .edges
                        .as_ref()
                        .map(|e| e.iter().map(|&(a, b)| [a, b]).collect()),
                })
                .collect(),
        };
        serde_json::to_string(&rec).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> Result<Schedule> {
        let rec: ScheduleRecord = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        Ok(Schedule {
            algorithm: rec.algorithm.parse()?,
            kink_condition: rec.kink_condition,
            plane: rec.plane,
            total_beats: rec.total_beats,
            routed: rec
                .paths
                .into_iter()
                .map(|p| RoutedInstruction {
                    instr_index: p.i,
                    path: Path3D::new(p.voxels.iter().map(|v| VoxelCoord::new(v[0], v[1], v[2])).collect()),
                    kinks: p.kinks,
                    adjusted: p.adjusted,
                    edges: p.edges.map(|e| e.iter().map(|x| (x[0], x[1])).collect()),
                })
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_plane, CellCoord};
    use crate::program::Basis;

    fn bound(size: u32, n: usize) -> QubitPlane {
        let mut p = build_plane(size, 0).unwrap();
        for (i, c) in p.data_positions().into_iter().take(n).enumerate() {
            p.bind(QubitId(i as u32), c, CellKind::Data).unwrap();
        }
        p
    }

    fn program(pairs: &[(u32, u32)], basis: Basis) -> InstructionList {
        let mut l = InstructionList::new();
        for (a, b) in pairs {
            l.push(basis, &[&format!("q{a}"), &format!("q{b}")]).unwrap();
        }
        l
    }

    /// Symbols are interned in first-appearance order, so bind them that way.
    fn bind_in_order(size: u32, l: &InstructionList) -> QubitPlane {
        bound(size, l.symbols().len())
    }

    #[test]
    fn empty_program() {
        let l = InstructionList::new();
        let p = bound(2, 0);
        for a in Algorithm::ALL {
            let s = run(a, &l, &p, true).unwrap();
            assert_eq!(s.total_beats, 0);
            assert!(s.routed.is_empty());
        }
    }

    #[test]
    fn single_adjacent_zz() {
        let l = program(&[(0, 1)], Basis::ZZ);
        let p = bind_in_order(2, &l);
        for a in Algorithm::ALL {
            let s = run(a, &l, &p, true).unwrap();
            assert_eq!(s.total_beats, 1, "{a}");
            assert_eq!(s.routed[0].path.len(), 3);
            assert_eq!(s.routed[0].kinks, 0);
            assert!(validate_schedule(&l, &p, &s, a.is_projection()).passed());
        }
    }

    #[test]
    fn independent_pairs_share_a_beat() {
        let l = program(&[(0, 1), (2, 3)], Basis::ZZ);
        let p = bind_in_order(4, &l);
        let s = schedule_la_bfs(&l, &p).unwrap();
        assert_eq!(s.total_beats, 1);
    }

    #[test]
    fn look_ahead_runs_later_instruction_first() {
        // Instruction 1 waits on 0 via q1; instruction 2 is independent.
        let l = program(&[(0, 1), (1, 2), (4, 5)], Basis::ZZ);
        let p = bind_in_order(3, &l);
        let s = schedule_la_bfs(&l, &p).unwrap();
        assert_eq!(s.routed[2].path.first().t, 0);
        assert_eq!(s.routed[1].path.first().t, 1);
    }

    #[test]
    fn collision_and_causality_are_reported() {
        let l = program(&[(0, 1), (1, 2)], Basis::ZZ);
        let p = bind_in_order(3, &l);
        let good = schedule_bfs(&l, &p).unwrap();
        assert!(validate_schedule(&l, &p, &good, false).passed());

        let mut clash = good.clone();
        clash.routed[1].path = clash.routed[0].path.clone();
        let r = validate_schedule(&l, &p, &clash, false);
        assert!(r.violations.iter().any(|v| v.kind == ViolationKind::Collision));

        let mut inverted = good.clone();
        for v in &mut inverted.routed[0].path.voxels {
            v.t = 1;
        }
        for v in &mut inverted.routed[1].path.voxels {
            v.t = 0;
        }
        let r = validate_schedule(&l, &p, &inverted, false);
        assert!(r.violations.iter().any(|v| v.kind == ViolationKind::Causality));
    }

    #[test]
    fn json_round_trip() {
        let l = program(&[(0, 1), (1, 2), (0, 2)], Basis::XX);
        let p = bind_in_order(3, &l);
        let s = schedule_projection(&l, &p, ProjectionOptions { kink_condition: true, look_ahead: false }).unwrap();
        let text = s.to_json();
        assert!(text.starts_with("{\"algorithm\":\"proj\",\"kink_condition\":true,\"plane\":{"));
        assert_eq!(Schedule::from_json(&text).unwrap(), s);
    }

    #[test]
    fn cnot_projection_gets_odd_kinks() {
        let mut l = InstructionList::new();
        l.push(Basis::Cnot, &["c", "t"]).unwrap();
        let p = bind_in_order(2, &l);
        let s = schedule_projection(&l, &p, ProjectionOptions { kink_condition: true, look_ahead: false }).unwrap();
        assert_eq!(s.routed[0].kinks % 2, 1);
        assert!(validate_schedule(&l, &p, &s, true).passed());
        assert_eq!(s.routed[0].path.first().cell, CellCoord::new(0, 0));
    }
}
