//! Path-search kernels: unweighted and height-weighted 2D search, 3D BFS
//! and 3D Dijkstra over the voxel lattice, and lifting of 2D paths onto a
//! height map.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    boundary_of_side, BoundaryType, CellCoord, CellKind, Dir, HeightMap, Occupancy3D, QubitPlane,
    VoxelCoord,
};
use crate::program::{Basis, Instruction};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path2D {
    pub cells: Vec<CellCoord>,
}

impl Path2D {
    pub fn new(cells: Vec<CellCoord>) -> Self {
        Self { cells }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// The flat voxel path at layer `t`.
    pub fn at_layer(&self, t: u32) -> Path3D {
        Path3D::new(self.cells.iter().map(|&c| VoxelCoord::at(c, t)).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    Horizontal(Dir),
    Up,
    Down,
}

impl Step {
    pub fn between(a: VoxelCoord, b: VoxelCoord) -> Option<Step> {
        if a.cell == b.cell {
            if b.t == a.t + 1 {
                Some(Step::Up)
            } else if a.t == b.t + 1 {
                Some(Step::Down)
            } else {
                None
            }
        } else if a.t == b.t {
            a.cell.dir_to(b.cell).map(Step::Horizontal)
        } else {
            None
        }
    }

    pub fn is_vertical(self) -> bool {
        !matches!(self, Step::Horizontal(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentKind {
    Horizontal,
    Vertical,
}

/// Voxel index range `[start, end]` of one segment; adjacent segments
/// share their junction voxel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path3D {
    pub voxels: Vec<VoxelCoord>,
}

impl Path3D {
    pub fn new(voxels: Vec<VoxelCoord>) -> Self {
        Self { voxels }
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    pub fn first(&self) -> VoxelCoord {
        self.voxels[0]
    }

    pub fn last(&self) -> VoxelCoord {
        self.voxels[self.voxels.len() - 1]
    }

    /// Unit steps between consecutive voxels; `None` marks a gap.
    pub fn steps(&self) -> Vec<Option<Step>> {
        self.voxels.windows(2).map(|w| Step::between(w[0], w[1])).collect()
    }

    pub fn reversed(&self) -> Path3D {
        let mut v = self.voxels.clone();
        v.reverse();
        Path3D::new(v)
    }

    /// Splits a face-connected path into maximal horizontal and vertical
    /// runs. Returns an empty list for paths shorter than two voxels or
    /// containing gaps.
    pub fn segments(&self) -> Vec<Segment> {
        let steps = self.steps();
        let mut out: Vec<Segment> = Vec::new();
        for (i, s) in steps.iter().enumerate() {
            let Some(s) = s else { return Vec::new() };
            let kind = if s.is_vertical() {
                SegmentKind::Vertical
            } else {
                SegmentKind::Horizontal
            };
            match out.last_mut() {
                Some(seg) if seg.kind == kind => seg.end = i + 1,
                _ => out.push(Segment {
                    kind,
                    start: i,
                    end: i + 1,
                }),
            }
        }
        out
    }

    pub fn max_t(&self) -> u32 {
        self.voxels.iter().map(|v| v.t).max().unwrap_or(0)
    }

    /// `Σ 2^t` over all voxels, saturating.
    pub fn height_cost(&self) -> u128 {
        self.voxels
            .iter()
            .fold(0u128, |acc, v| acc.saturating_add(pow2(v.t)))
    }
}

pub(crate) fn pow2(e: u32) -> u128 {
    if e >= 128 {
        u128::MAX
    } else {
        1u128 << e
    }
}

/// Endpoint cells of a two-body route and the boundary type each end must
/// be attached through.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RouteSpec {
    pub start: CellCoord,
    pub start_boundary: BoundaryType,
    pub end: CellCoord,
    pub end_boundary: BoundaryType,
}

pub fn endpoint_boundaries(basis: Basis) -> (BoundaryType, BoundaryType) {
    match basis {
        Basis::ZZ => (BoundaryType::Z, BoundaryType::Z),
        Basis::XX => (BoundaryType::X, BoundaryType::X),
        Basis::Cnot => (BoundaryType::Z, BoundaryType::X),
    }
}

impl RouteSpec {
    pub fn new(
        start: CellCoord,
        start_boundary: BoundaryType,
        end: CellCoord,
        end_boundary: BoundaryType,
    ) -> Self {
        Self {
            start,
            start_boundary,
            end,
            end_boundary,
        }
    }

    pub fn for_instruction(plane: &QubitPlane, instr: &Instruction) -> Result<Self> {
        if instr.qubits.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "instruction {} is not a two-body instruction",
                instr.index
            )));
        }
        let cell = |q| {
            plane.try_cell_of(q).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "qubit {} of instruction {} is not placed",
                    q.index(),
                    instr.index
                ))
            })
        };
        let (b1, b2) = endpoint_boundaries(instr.basis);
        Ok(Self::new(cell(instr.q1())?, b1, cell(instr.q2())?, b2))
    }

    /// Ancilla cells through which the start endpoint may be left, in
    /// neighbor order.
    pub fn start_exits(&self, plane: &QubitPlane) -> Vec<CellCoord> {
        side_cells(plane, self.start, self.start_boundary)
    }

    pub fn end_entries(&self, plane: &QubitPlane) -> Vec<CellCoord> {
        side_cells(plane, self.end, self.end_boundary)
    }

    /// True when an ancilla at `c` may be the last interior cell.
    fn is_end_entry(&self, c: CellCoord) -> bool {
        c.dir_to(self.end)
            .is_some_and(|d| boundary_of_side(d.opposite()) == self.end_boundary)
    }
}

fn side_cells(plane: &QubitPlane, cell: CellCoord, boundary: BoundaryType) -> Vec<CellCoord> {
    Dir::ALL
        .iter()
        .filter(|d| boundary_of_side(**d) == boundary)
        .filter_map(|d| plane.neighbor(cell, *d))
        .filter(|c| plane.kind(*c) == CellKind::Ancilla)
        .collect()
}

/// Checks adjacency, endpoint placement, boundary attachment, interior cell
/// kinds and repetition for a 2D route.
pub fn validate_path2d(
    plane: &QubitPlane,
    spec: &RouteSpec,
    path: &Path2D,
) -> std::result::Result<(), String> {
    validate_path3d(plane, spec, &path.at_layer(0))
}

pub fn validate_path3d(
    plane: &QubitPlane,
    spec: &RouteSpec,
    path: &Path3D,
) -> std::result::Result<(), String> {
    let v = &path.voxels;
    if v.len() < 3 {
        return Err(format!("path has {} voxels, need at least 3", v.len()));
    }
    for x in v {
        if !plane.contains(x.cell) {
            return Err(format!("voxel {x} lies outside the plane"));
        }
    }
    if v[0].cell != spec.start || v[v.len() - 1].cell != spec.end {
        return Err("path does not connect the instruction's endpoints".into());
    }
    let steps = path.steps();
    for (i, s) in steps.iter().enumerate() {
        if s.is_none() {
            return Err(format!("voxels {} and {} are not face-adjacent", v[i], v[i + 1]));
        }
    }
    match steps[0] {
        Some(Step::Horizontal(d)) if boundary_of_side(d) == spec.start_boundary => {}
        _ => return Err(format!("path leaves {} through the wrong boundary", spec.start)),
    }
    match steps[steps.len() - 1] {
        Some(Step::Horizontal(d)) if boundary_of_side(d.opposite()) == spec.end_boundary => {}
        _ => return Err(format!("path enters {} through the wrong boundary", spec.end)),
    }
    for x in &v[1..v.len() - 1] {
        if plane.kind(x.cell) != CellKind::Ancilla {
            return Err(format!("interior voxel {x} is not on an ancilla cell"));
        }
    }
    let mut seen = HashSet::with_capacity(v.len());
    for x in v {
        if !seen.insert(*x) {
            return Err(format!("voxel {x} repeats"));
        }
    }
    Ok(())
}

fn reconstruct(parent: &[u32], mut at: usize, first: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut out = vec![at];
    while !first(at) {
        at = parent[at] as usize;
        out.push(at);
    }
    out.reverse();
    out
}

/// Minimum-length route through cells with `avail[index] == true`; both
/// endpoint cells must be available too.
/// Breadth-first with neighbor order N, E, S, W.
pub fn find_shortest_path_2d(
    plane: &QubitPlane,
    avail: &[bool],
    spec: &RouteSpec,
) -> Option<Path2D> {
    if !avail[plane.index(spec.start)] || !avail[plane.index(spec.end)] {
        return None;
    }
    let n = plane.num_cells();
    let mut parent = vec![u32::MAX; n];
    let mut seen = vec![false; n];
    let mut is_root = vec![false; n];
    let mut queue = VecDeque::new();
    for c in spec.start_exits(plane) {
        let i = plane.index(c);
        if avail[i] && !seen[i] {
            seen[i] = true;
            is_root[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let c = plane.coord(i);
        if spec.is_end_entry(c) {
            let idx = reconstruct(&parent, i, |j| is_root[j]);
            let mut cells = Vec::with_capacity(idx.len() + 2);
            cells.push(spec.start);
            cells.extend(idx.into_iter().map(|j| plane.coord(j)));
            cells.push(spec.end);
            return Some(Path2D::new(cells));
        }
        for d in Dir::ALL {
            if let Some(nb) = plane.neighbor(c, d) {
                let j = plane.index(nb);
                if !seen[j] && avail[j] && plane.kind_at(j) == CellKind::Ancilla {
                    seen[j] = true;
                    parent[j] = i as u32;
                    queue.push_back(j);
                }
            }
        }
    }
    None
}

/// Order on candidate routes: weight, then cell count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PathCost {
    pub weight_sum: u128,
    pub length: usize,
}

/// Minimum-cost route with cell weight `2^H`, every ancilla cell usable.
/// Weights are taken relative to the lowest ancilla height so that tall
/// terrain stays representable.
pub fn find_weighted_path_2d(
    plane: &QubitPlane,
    h: &HeightMap,
    spec: &RouteSpec,
) -> Result<(Path2D, PathCost)> {
    find_weighted_path_2d_filtered(plane, h, spec, |_| true).ok_or_else(|| Error::Routing {
        index: usize::MAX,
        reason: format!("no route between {} and {}", spec.start, spec.end),
    })
}

pub(crate) fn height_base(plane: &QubitPlane, h: &HeightMap) -> u32 {
    (0..plane.num_cells())
        .filter(|&i| plane.kind_at(i) == CellKind::Ancilla)
        .map(|i| h.at(i))
        .min()
        .unwrap_or(0)
}

pub(crate) fn find_weighted_path_2d_filtered(
    plane: &QubitPlane,
    h: &HeightMap,
    spec: &RouteSpec,
    usable: impl Fn(usize) -> bool,
) -> Option<(Path2D, PathCost)> {
    let base = height_base(plane, h);
    let weight = |i: usize| pow2(h.at(i).saturating_sub(base));
    let n = plane.num_cells();
    let mut best: Vec<Option<(u128, u32)>> = vec![None; n];
    let mut parent = vec![u32::MAX; n];
    let mut is_root = vec![false; n];
    let mut heap = BinaryHeap::new();
    for c in spec.start_exits(plane) {
        let i = plane.index(c);
        if !usable(i) {
            continue;
        }
        let key = (weight(i), 1u32);
        if best[i].is_none_or(|b| key < b) {
            best[i] = Some(key);
            is_root[i] = true;
            heap.push(Reverse((key.0, key.1, i)));
        }
    }
    while let Some(Reverse((cost, len, i))) = heap.pop() {
        if best[i] != Some((cost, len)) {
            continue;
        }
        let c = plane.coord(i);
        if spec.is_end_entry(c) {
            let idx = reconstruct(&parent, i, |j| is_root[j] && parent[j] == u32::MAX);
            let mut cells = Vec::with_capacity(idx.len() + 2);
            cells.push(spec.start);
            cells.extend(idx.into_iter().map(|j| plane.coord(j)));
            cells.push(spec.end);
            let ends = pow2(h.get(spec.start).saturating_sub(base))
                .saturating_add(pow2(h.get(spec.end).saturating_sub(base)));
            let total = PathCost {
                weight_sum: cost.saturating_add(ends),
                length: cells.len(),
            };
            return Some((Path2D::new(cells), total));
        }
        for d in Dir::ALL {
            let Some(nb) = plane.neighbor(c, d) else { continue };
            let j = plane.index(nb);
            if plane.kind_at(j) != CellKind::Ancilla || !usable(j) {
                continue;
            }
            let key = (cost.saturating_add(weight(j)), len + 1);
            if best[j].is_none_or(|b| key < b) {
                best[j] = Some(key);
                parent[j] = i as u32;
                is_root[j] = false;
                heap.push(Reverse((key.0, key.1, j)));
            }
        }
    }
    None
}

/// Stacks a 2D route onto the height map. Cell `v_i` sits at its own
/// height, except that each endpoint is raised to its neighbor's height;
/// each move between two cells happens at the larger of their levels and
/// the climb between two moves is taken at the cell joining them, so the
/// path never dips below the terrain.
pub fn lift_path(p: &Path2D, h: &HeightMap) -> Path3D {
    let cells = &p.cells;
    let n = cells.len();
    if n < 2 {
        return Path3D::new(cells.iter().map(|&c| VoxelCoord::at(c, h.get(c))).collect());
    }
    let mut base: Vec<u32> = cells.iter().map(|&c| h.get(c)).collect();
    base[0] = base[0].max(h.get(cells[1]));
    base[n - 1] = base[n - 1].max(h.get(cells[n - 2]));
    let levels: Vec<u32> = (0..n - 1).map(|i| base[i].max(base[i + 1])).collect();
    from_levels(cells, &levels)
}

/// Builds the voxel path for footprint `cells` where the move out of
/// `cells[i]` happens at `levels[i]`.
pub fn from_levels(cells: &[CellCoord], levels: &[u32]) -> Path3D {
    debug_assert_eq!(levels.len() + 1, cells.len());
    let mut out = Vec::with_capacity(cells.len() + 4);
    out.push(VoxelCoord::at(cells[0], levels[0]));
    for i in 1..cells.len() {
        let arrive = levels[i - 1];
        out.push(VoxelCoord::at(cells[i], arrive));
        if i + 1 < cells.len() {
            let leave = levels[i];
            let mut t = arrive;
            while t != leave {
                t = if leave > t { t + 1 } else { t - 1 };
                out.push(VoxelCoord::at(cells[i], t));
            }
        }
    }
    Path3D::new(out)
}

/// Inverse of [`from_levels`]: the footprint and per-move levels of a path
/// whose horizontal moves never revisit a cell and whose endpoints carry
/// no vertical run. `None` for any other shape.
pub fn to_levels(path: &Path3D) -> Option<(Vec<CellCoord>, Vec<u32>)> {
    let v = &path.voxels;
    if v.len() < 2 {
        return None;
    }
    let mut cells = vec![v[0].cell];
    let mut levels = Vec::new();
    for w in v.windows(2) {
        match Step::between(w[0], w[1])? {
            Step::Horizontal(_) => {
                cells.push(w[1].cell);
                levels.push(w[0].t);
            }
            _ => {
                if cells.len() == 1 {
                    return None;
                }
            }
        }
    }
    if v[v.len() - 1].t != *levels.last()? || v[v.len() - 2].cell == v[v.len() - 1].cell {
        return None;
    }
    let distinct: HashSet<_> = cells.iter().collect();
    if distinct.len() != cells.len() {
        return None;
    }
    Some((cells, levels))
}

fn endpoint_has_exit(
    plane: &QubitPlane,
    occ: &Occupancy3D,
    cell: CellCoord,
    boundary: BoundaryType,
    t: u32,
) -> bool {
    side_cells(plane, cell, boundary)
        .iter()
        .any(|c| !occ.is_occupied_index(plane.index(*c), t))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Search3D {
    Bfs,
    Dijkstra,
}

/// Lowest free endpoint voxels at or above each qubit's frontier, raised
/// until a route exists.
fn route_3d(
    plane: &QubitPlane,
    occ: &Occupancy3D,
    instr: &Instruction,
    mode: Search3D,
) -> Result<Path3D> {
    let spec = RouteSpec::for_instruction(plane, instr)?;
    let i1 = plane.index(spec.start);
    let i2 = plane.index(spec.end);
    let mut t1 = occ.lowest_free(i1, occ.frontier(instr.q1()));
    let mut t2 = occ.lowest_free(i2, occ.frontier(instr.q2()));
    loop {
        let found = match mode {
            Search3D::Bfs => search_3d_bfs(plane, occ, &spec, t1, t2),
            Search3D::Dijkstra => search_3d_dijkstra(plane, occ, &spec, t1, t2),
        };
        if let Some(p) = found {
            return Ok(p);
        }
        let e1 = endpoint_has_exit(plane, occ, spec.start, spec.start_boundary, t1);
        let e2 = endpoint_has_exit(plane, occ, spec.end, spec.end_boundary, t2);
        let (r1, r2) = match (e1, e2) {
            (false, false) => (true, true),
            (false, true) => (true, false),
            (true, false) => (false, true),
            (true, true) => (t1 <= t2, t2 <= t1),
        };
        if r1 {
            t1 = occ.lowest_free(i1, t1 + 1);
        }
        if r2 {
            t2 = occ.lowest_free(i2, t2 + 1);
        }
    }
}

pub fn find_shortest_path_3d(
    plane: &QubitPlane,
    occ: &Occupancy3D,
    instr: &Instruction,
) -> Result<Path3D> {
    route_3d(plane, occ, instr, Search3D::Bfs)
}

pub fn find_weighted_path_3d(
    plane: &QubitPlane,
    occ: &Occupancy3D,
    instr: &Instruction,
) -> Result<Path3D> {
    route_3d(plane, occ, instr, Search3D::Dijkstra)
}

struct Grid3 {
    cells: usize,
    layers: u32,
}

impl Grid3 {
    fn id(&self, cell: usize, t: u32) -> usize {
        t as usize * self.cells + cell
    }

    fn split(&self, id: usize) -> (usize, u32) {
        (id % self.cells, (id / self.cells) as u32)
    }
}

fn voxel_neighbors(
    plane: &QubitPlane,
    occ: &Occupancy3D,
    g: &Grid3,
    id: usize,
    mut f: impl FnMut(usize),
) {
    let (cell, t) = g.split(id);
    let c = plane.coord(cell);
    let ok = |ci: usize, tt: u32| plane.kind_at(ci) == CellKind::Ancilla && !occ.is_occupied_index(ci, tt);
    for d in Dir::ALL {
        if let Some(nb) = plane.neighbor(c, d) {
            let j = plane.index(nb);
            if ok(j, t) {
                f(g.id(j, t));
            }
        }
    }
    if t + 1 < g.layers && ok(cell, t + 1) {
        f(g.id(cell, t + 1));
    }
    if t > 0 && ok(cell, t - 1) {
        f(g.id(cell, t - 1));
    }
}

fn finish_3d(
    plane: &QubitPlane,
    g: &Grid3,
    spec: &RouteSpec,
    t1: u32,
    t2: u32,
    interior: Vec<usize>,
) -> Path3D {
    let mut v = Vec::with_capacity(interior.len() + 2);
    v.push(VoxelCoord::at(spec.start, t1));
    for id in interior {
        let (c, t) = g.split(id);
        v.push(VoxelCoord::at(plane.coord(c), t));
    }
    v.push(VoxelCoord::at(spec.end, t2));
    Path3D::new(v)
}

fn search_3d_bfs(
    plane: &QubitPlane,
    occ: &Occupancy3D,
    spec: &RouteSpec,
    t1: u32,
    t2: u32,
) -> Option<Path3D> {
    let g = Grid3 {
        cells: plane.num_cells(),
        layers: occ.layers().max(t1).max(t2) + 1,
    };
    let total = g.cells * g.layers as usize;
    let mut parent = vec![u32::MAX; total];
    let mut seen = vec![false; total];
    let mut queue = VecDeque::new();
    for c in spec.start_exits(plane) {
        let i = plane.index(c);
        if !occ.is_occupied_index(i, t1) {
            let id = g.id(i, t1);
            seen[id] = true;
            queue.push_back(id);
        }
    }
    while let Some(id) = queue.pop_front() {
        let (cell, t) = g.split(id);
        if t == t2 && spec.is_end_entry(plane.coord(cell)) {
            let interior = reconstruct(&parent, id, |j| parent[j] == u32::MAX);
            return Some(finish_3d(plane, &g, spec, t1, t2, interior));
        }
        voxel_neighbors(plane, occ, &g, id, |j| {
            if !seen[j] {
                seen[j] = true;
                parent[j] = id as u32;
                queue.push_back(j);
            }
        });
    }
    None
}

fn search_3d_dijkstra(
    plane: &QubitPlane,
    occ: &Occupancy3D,
    spec: &RouteSpec,
    t1: u32,
    t2: u32,
) -> Option<Path3D> {
    let g = Grid3 {
        cells: plane.num_cells(),
        layers: occ.layers().max(t1).max(t2) + 1,
    };
    // Layers far below both endpoints all weigh 1 so that late routes do
    // not saturate.
    let base = t1.min(t2).saturating_sub(64);
    let weight = |t: u32| pow2(t.saturating_sub(base));
    let total = g.cells * g.layers as usize;
    let mut best: Vec<Option<(u128, u32)>> = vec![None; total];
    let mut parent = vec![u32::MAX; total];
    let mut heap = BinaryHeap::new();
    for c in spec.start_exits(plane) {
        let i = plane.index(c);
        if !occ.is_occupied_index(i, t1) {
            let id = g.id(i, t1);
            let key = (weight(t1), 1u32);
            best[id] = Some(key);
            heap.push(Reverse((key.0, key.1, id)));
        }
    }
    while let Some(Reverse((cost, len, id))) = heap.pop() {
        if best[id] != Some((cost, len)) {
            continue;
        }
        let (cell, t) = g.split(id);
        if t == t2 && spec.is_end_entry(plane.coord(cell)) {
            let interior = reconstruct(&parent, id, |j| parent[j] == u32::MAX);
            return Some(finish_3d(plane, &g, spec, t1, t2, interior));
        }
        voxel_neighbors(plane, occ, &g, id, |j| {
            let (_, tj) = g.split(j);
            let key = (cost.saturating_add(weight(tj)), len + 1);
            if best[j].is_none_or(|b| key < b) {
                best[j] = Some(key);
                parent[j] = id as u32;
                heap.push(Reverse((key.0, key.1, j)));
            }
        });
    }
    None
}
