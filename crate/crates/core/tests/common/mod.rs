#![allow(dead_code)]

use std::collections::HashMap;

use lattice_sched::lattice::{boundary_of_side, build_plane, BoundaryType, CellCoord, CellKind, Dir, HeightMap, QubitPlane};
use lattice_sched::program::{Basis, InstructionList, QubitId};
use lattice_sched::routing::{lift_path, Path2D, Path3D};
use rand::seq::SliceRandom;
use rand::Rng;

pub const DIRS: [Dir; 4] = [Dir::N, Dir::E, Dir::S, Dir::W];

pub fn bound_plane(size: u32, n: usize) -> QubitPlane {
    let mut p = build_plane(size, 0).unwrap();
    for (i, c) in p.data_positions().into_iter().take(n).enumerate() {
        p.bind(QubitId(i as u32), c, CellKind::Data).unwrap();
    }
    p
}

/// Program over qubits `q0..q{n-1}` interned in index order, so that
/// `bound_plane(size, n)` places them.
pub fn program(n: usize, ops: &[(usize, usize, Basis)]) -> InstructionList {
    let mut l = InstructionList::new();
    for i in 0..n {
        l.intern(&format!("q{i}"));
    }
    for &(a, b, basis) in ops {
        l.push(basis, &[&format!("q{a}"), &format!("q{b}")]).unwrap();
    }
    l
}

pub fn is_ancilla(c: CellCoord) -> bool {
    c.x % 2 == 1 || c.y % 2 == 1
}

/// Random self-avoiding 2D route from a data cell through ancilla cells to
/// another data cell, with at most `max_cells` cells. `None` if the walk
/// got stuck.
pub fn random_route(rng: &mut impl Rng, plane: &QubitPlane, max_cells: usize) -> Option<Path2D> {
    let data = plane.data_positions();
    let start = *data.choose(rng)?;
    let mut cells = vec![start];
    loop {
        let cur = *cells.last().unwrap();
        if cells.len() >= 2 {
            let ends: Vec<CellCoord> = DIRS
                .iter()
                .filter_map(|d| plane.neighbor(cur, *d))
                .filter(|c| !is_ancilla(*c) && *c != start)
                .collect();
            if !ends.is_empty() && (cells.len() + 1 >= max_cells || rng.gen_bool(0.3)) {
                cells.push(*ends.choose(rng).unwrap());
                return Some(Path2D::new(cells));
            }
        }
        if cells.len() + 1 >= max_cells {
            return None;
        }
        let next: Vec<CellCoord> = DIRS
            .iter()
            .filter_map(|d| plane.neighbor(cur, *d))
            .filter(|c| is_ancilla(*c) && !cells.contains(c))
            .collect();
        cells.push(*next.choose(rng)?);
    }
}

pub fn random_heights(rng: &mut impl Rng, plane: &QubitPlane, max: u32) -> HeightMap {
    let hs = (0..plane.num_cells()).map(|_| rng.gen_range(0..=max)).collect();
    HeightMap::from_vec(plane, hs)
}

/// Random route lifted onto random terrain.
pub fn random_lifted(rng: &mut impl Rng, plane: &QubitPlane, max_cells: usize, max_h: u32) -> (Path3D, HeightMap) {
    loop {
        if let Some(r) = random_route(rng, plane, max_cells) {
            let h = random_heights(rng, plane, max_h);
            return (lift_path(&r, &h), h);
        }
    }
}

pub fn first_dir(p: &Path3D) -> Dir {
    p.voxels
        .windows(2)
        .find_map(|w| w[0].cell.dir_to(w[1].cell))
        .unwrap()
}

pub fn last_dir(p: &Path3D) -> Dir {
    p.voxels
        .windows(2)
        .rev()
        .find_map(|w| w[0].cell.dir_to(w[1].cell))
        .unwrap()
}

/// Boundaries the path leaves its start through and enters its end through.
pub fn path_boundaries(p: &Path3D) -> (BoundaryType, BoundaryType) {
    (
        boundary_of_side(first_dir(p)),
        boundary_of_side(last_dir(p).opposite()),
    )
}

/// Vertical runs between perpendicular horizontal moves, counted directly
/// from the voxel list.
pub fn kinks_by_hand(p: &Path3D) -> usize {
    let mut last_h: Option<Dir> = None;
    let mut climbed = false;
    let mut n = 0;
    for w in p.voxels.windows(2) {
        match w[0].cell.dir_to(w[1].cell) {
            Some(d) => {
                if climbed {
                    if let Some(prev) = last_h {
                        if matches!((prev, d), (Dir::N | Dir::S, Dir::E | Dir::W) | (Dir::E | Dir::W, Dir::N | Dir::S)) {
                            n += 1;
                        }
                    }
                }
                climbed = false;
                last_h = Some(d);
            }
            None => climbed = true,
        }
    }
    n
}

/// Every simple flat route for a two-body instruction, as bit masks over
/// cell indices (endpoints included).
pub fn all_flat_routes(plane: &QubitPlane, a: CellCoord, b: CellCoord, basis: Basis) -> Vec<u64> {
    let (ba, bb) = match basis {
        Basis::ZZ => (BoundaryType::Z, BoundaryType::Z),
        Basis::XX => (BoundaryType::X, BoundaryType::X),
        Basis::Cnot => (BoundaryType::Z, BoundaryType::X),
    };
    let mut out = Vec::new();
    fn walk(
        plane: &QubitPlane,
        cur: CellCoord,
        mask: u64,
        b: CellCoord,
        bb: BoundaryType,
        out: &mut Vec<u64>,
    ) {
        for d in DIRS {
            let Some(n) = plane.neighbor(cur, d) else { continue };
            let bit = 1u64 << plane.index(n);
            if n == b {
                if boundary_of_side(d.opposite()) == bb {
                    out.push(mask | bit);
                }
                continue;
            }
            if is_ancilla(n) && mask & bit == 0 {
                walk(plane, n, mask | bit, b, bb, out);
            }
        }
    }
    for d in DIRS {
        if boundary_of_side(d) != ba {
            continue;
        }
        if let Some(n) = plane.neighbor(a, d) {
            if is_ancilla(n) {
                let mask = 1u64 << plane.index(a) | 1u64 << plane.index(n);
                walk(plane, n, mask, b, bb, &mut out);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn disjoint_choice(sets: &[&Vec<u64>], used: u64) -> bool {
    match sets.split_first() {
        None => true,
        Some((first, rest)) => first
            .iter()
            .any(|&m| m & used == 0 && disjoint_choice(rest, used | m)),
    }
}

/// Fewest beats for `instrs` when each instruction takes one flat route in
/// one beat, routes in a beat are cell-disjoint, and instructions sharing a
/// qubit keep program order. Exhaustive over beat assignments.
pub struct BeatOracle {
    cache: HashMap<(usize, usize, Basis), Vec<u64>>,
}

impl BeatOracle {
    pub fn new() -> Self {
        Self { cache: HashMap::new() }
    }

    fn routes(&mut self, plane: &QubitPlane, a: usize, b: usize, basis: Basis) -> &Vec<u64> {
        self.cache.entry((a, b, basis)).or_insert_with(|| {
            all_flat_routes(
                plane,
                plane.cell_of(QubitId(a as u32)),
                plane.cell_of(QubitId(b as u32)),
                basis,
            )
        })
    }

    pub fn optimum(&mut self, plane: &QubitPlane, instrs: &InstructionList) -> Option<u32> {
        let m = instrs.len();
        if m == 0 {
            return Some(0);
        }
        let ops: Vec<(usize, usize, Basis)> = instrs
            .iter()
            .map(|i| (i.q1().index(), i.q2().index(), i.basis))
            .collect();
        let routes: Vec<Vec<u64>> = ops
            .iter()
            .map(|&(a, b, basis)| self.routes(plane, a, b, basis).clone())
            .collect();
        if routes.iter().any(Vec::is_empty) {
            return None;
        }
        for beats in 1..=m as u32 {
            let mut assign = vec![0u32; m];
            if assign_beats(&ops, &routes, beats, 0, &mut assign) {
                return Some(beats);
            }
        }
        None
    }
}

fn assign_beats(
    ops: &[(usize, usize, Basis)],
    routes: &[Vec<u64>],
    beats: u32,
    i: usize,
    assign: &mut Vec<u32>,
) -> bool {
    if i == ops.len() {
        return (0..beats).all(|t| {
            let sets: Vec<&Vec<u64>> = (0..ops.len()).filter(|&k| assign[k] == t).map(|k| &routes[k]).collect();
            disjoint_choice(&sets, 0)
        });
    }
    let (a, b, _) = ops[i];
    let earliest = (0..i)
        .filter(|&k| {
            let (c, d, _) = ops[k];
            c == a || c == b || d == a || d == b
        })
        .map(|k| assign[k] + 1)
        .max()
        .unwrap_or(0);
    for t in earliest..beats {
        assign[i] = t;
        if assign_beats(ops, routes, beats, i + 1, assign) {
            return true;
        }
    }
    false
}
