//! Geometry of the qubit plane: cell kinds, boundary orientation, the
//! per-cell height map used by projection scheduling and the voxel
//! occupancy used by the 3D searches.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::program::QubitId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellCoord {
    pub x: u32,
    pub y: u32,
}

impl CellCoord {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    /// Neighbor in direction `dir`, or `None` when it would leave the
    /// non-negative quadrant. Upper bounds are checked by the plane.
    pub fn step(self, dir: Dir) -> Option<CellCoord> {
        match dir {
            Dir::N => self.y.checked_sub(1).map(|y| CellCoord::new(self.x, y)),
            Dir::E => Some(CellCoord::new(self.x + 1, self.y)),
            Dir::S => Some(CellCoord::new(self.x, self.y + 1)),
            Dir::W => self.x.checked_sub(1).map(|x| CellCoord::new(x, self.y)),
        }
    }

    /// Direction of the unit step from `self` to `other`, if they are
    /// 4-adjacent.
    pub fn dir_to(self, other: CellCoord) -> Option<Dir> {
        let dx = other.x as i64 - self.x as i64;
        let dy = other.y as i64 - self.y as i64;
        match (dx, dy) {
            (0, -1) => Some(Dir::N),
            (1, 0) => Some(Dir::E),
            (0, 1) => Some(Dir::S),
            (-1, 0) => Some(Dir::W),
            _ => None,
        }
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VoxelCoord {
    pub cell: CellCoord,
    pub t: u32,
}

impl VoxelCoord {
    pub const fn new(x: u32, y: u32, t: u32) -> Self {
        Self {
            cell: CellCoord::new(x, y),
            t,
        }
    }

    pub const fn at(cell: CellCoord, t: u32) -> Self {
        Self { cell, t }
    }
}

impl fmt::Display for VoxelCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.cell.x, self.cell.y, self.t)
    }
}

/// In-plane grid direction. `N` points toward row 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    N,
    E,
    S,
    W,
}

impl Dir {
    /// Fixed neighbor order used by every search kernel.
    pub const ALL: [Dir; 4] = [Dir::N, Dir::E, Dir::S, Dir::W];

    pub fn opposite(self) -> Dir {
        match self {
            Dir::N => Dir::S,
            Dir::E => Dir::W,
            Dir::S => Dir::N,
            Dir::W => Dir::E,
        }
    }

    /// Counter-clockwise quarter turn (the left-hand side when facing `self`).
    pub fn left(self) -> Dir {
        match self {
            Dir::N => Dir::W,
            Dir::E => Dir::N,
            Dir::S => Dir::E,
            Dir::W => Dir::S,
        }
    }

    pub fn right(self) -> Dir {
        self.left().opposite()
    }

    pub fn is_perpendicular(self, other: Dir) -> bool {
        self.is_vertical_axis() != other.is_vertical_axis()
    }

    fn is_vertical_axis(self) -> bool {
        matches!(self, Dir::N | Dir::S)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryType {
    X,
    Z,
}

impl BoundaryType {
    pub fn flipped(self) -> BoundaryType {
        match self {
            BoundaryType::X => BoundaryType::Z,
            BoundaryType::Z => BoundaryType::X,
        }
    }

    /// Sides of a data cell that expose this boundary type.
    pub fn sides(self) -> [Dir; 2] {
        match self {
            BoundaryType::X => [Dir::N, Dir::S],
            BoundaryType::Z => [Dir::E, Dir::W],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Data,
    Ancilla,
    Factory,
}

impl CellKind {
    /// Data and factory cells are only ever path endpoints.
    pub fn is_endpoint_kind(self) -> bool {
        !matches!(self, CellKind::Ancilla)
    }
}

/// Boundary exposed on side `dir` of any data or factory cell. The
/// orientation is global: north and south are X-type, east and west Z-type.
pub fn boundary_of_side(dir: Dir) -> BoundaryType {
    match dir {
        Dir::N | Dir::S => BoundaryType::X,
        Dir::E | Dir::W => BoundaryType::Z,
    }
}

/// Square qubit plane of `(2s-1) x (2s-1)` cells with data positions at
/// even-even coordinates and ancilla cells everywhere else.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitPlane {
    plane_size: u32,
    width: u32,
    kinds: Vec<CellKind>,
    qubit_cells: Vec<CellCoord>,
    cell_qubit: Vec<Option<QubitId>>,
}

impl QubitPlane {
    /// Plane with all data positions marked `Data` and no qubits bound.
    pub fn new(plane_size: u32) -> Result<Self> {
        if plane_size == 0 {
            return Err(Error::InvalidArgument("plane size must be at least 1".into()));
        }
        let width = 2 * plane_size - 1;
        let n = (width * width) as usize;
        let mut kinds = vec![CellKind::Ancilla; n];
        for y in (0..width).step_by(2) {
            for x in (0..width).step_by(2) {
                kinds[(y * width + x) as usize] = CellKind::Data;
            }
        }
        Ok(Self {
            plane_size,
            width,
            kinds,
            qubit_cells: Vec::new(),
            cell_qubit: vec![None; n],
        })
    }

    pub fn plane_size(&self) -> u32 {
        self.plane_size
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.width
    }

    pub fn num_cells(&self) -> usize {
        self.kinds.len()
    }

    /// Data positions in row-major order.
    pub fn data_positions(&self) -> Vec<CellCoord> {
        let mut out = Vec::with_capacity((self.plane_size * self.plane_size) as usize);
        for y in (0..self.width).step_by(2) {
            for x in (0..self.width).step_by(2) {
                out.push(CellCoord::new(x, y));
            }
        }
        out
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        c.x < self.width && c.y < self.width
    }

    pub fn index(&self, c: CellCoord) -> usize {
        debug_assert!(self.contains(c));
        (c.y * self.width + c.x) as usize
    }

    pub fn coord(&self, index: usize) -> CellCoord {
        let w = self.width as usize;
        CellCoord::new((index % w) as u32, (index / w) as u32)
    }

    pub fn kind(&self, c: CellCoord) -> CellKind {
        self.kinds[self.index(c)]
    }

    pub fn kind_at(&self, index: usize) -> CellKind {
        self.kinds[index]
    }

    pub fn neighbor(&self, c: CellCoord, dir: Dir) -> Option<CellCoord> {
        c.step(dir).filter(|n| self.contains(*n))
    }

    pub fn set_kind(&mut self, c: CellCoord, kind: CellKind) -> Result<()> {
        let i = self.checked_index(c)?;
        if self.kinds[i] == CellKind::Ancilla || kind == CellKind::Ancilla {
            return Err(Error::InvalidArgument(format!(
                "cell {c} is not a data position"
            )));
        }
        self.kinds[i] = kind;
        Ok(())
    }

    /// Binds qubit `q` to the data position `c`. Qubit ids must be bound
    /// densely in increasing order.
    pub fn bind(&mut self, q: QubitId, c: CellCoord, kind: CellKind) -> Result<()> {
        let i = self.checked_index(c)?;
        if self.kinds[i] == CellKind::Ancilla {
            return Err(Error::InvalidArgument(format!(
                "cell {c} is an ancilla cell and cannot hold a qubit"
            )));
        }
        if self.cell_qubit[i].is_some() {
            return Err(Error::InvalidArgument(format!("cell {c} already holds a qubit")));
        }
        if q.index() != self.qubit_cells.len() {
            return Err(Error::InvalidArgument(format!(
                "qubit {} bound out of order",
                q.index()
            )));
        }
        self.kinds[i] = kind;
        self.cell_qubit[i] = Some(q);
        self.qubit_cells.push(c);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.qubit_cells.len()
    }

    pub fn cell_of(&self, q: QubitId) -> CellCoord {
        self.qubit_cells[q.index()]
    }

    pub fn try_cell_of(&self, q: QubitId) -> Option<CellCoord> {
        self.qubit_cells.get(q.index()).copied()
    }

    pub fn qubit_at(&self, c: CellCoord) -> Option<QubitId> {
        if !self.contains(c) {
            return None;
        }
        self.cell_qubit[self.index(c)]
    }

    /// Number of data and factory cells bound to program symbols.
    pub fn bound_cells(&self) -> usize {
        self.qubit_cells.len()
    }

    pub fn checked_index(&self, c: CellCoord) -> Result<usize> {
        if self.contains(c) {
            Ok(self.index(c))
        } else {
            Err(Error::OutOfBounds(c))
        }
    }
}

/// `(2s-1)^2` plane whose first `n_factories` data positions (row-major)
/// are factory cells.
pub fn build_plane(plane_size: u32, n_factories: usize) -> Result<QubitPlane> {
    let mut plane = QubitPlane::new(plane_size)?;
    let positions = plane.data_positions();
    if n_factories > positions.len() {
        return Err(Error::Capacity {
            needed: n_factories,
            available: positions.len(),
        });
    }
    for c in positions.into_iter().take(n_factories) {
        plane.set_kind(c, CellKind::Factory)?;
    }
    Ok(plane)
}

pub fn boundary_of_edge(plane: &QubitPlane, cell: CellCoord, dir: Dir) -> Result<BoundaryType> {
    plane.checked_index(cell)?;
    Ok(boundary_of_side(dir))
}

/// First free time layer above each cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightMap {
    width: u32,
    heights: Vec<u32>,
}

impl HeightMap {
    pub fn new(plane: &QubitPlane) -> Self {
        Self {
            width: plane.width(),
            heights: vec![0; plane.num_cells()],
        }
    }

    pub fn from_vec(plane: &QubitPlane, heights: Vec<u32>) -> Self {
        assert_eq!(heights.len(), plane.num_cells());
        Self {
            width: plane.width(),
            heights,
        }
    }

    pub fn get(&self, c: CellCoord) -> u32 {
        self.heights[(c.y * self.width + c.x) as usize]
    }

    pub fn at(&self, index: usize) -> u32 {
        self.heights[index]
    }

    pub fn set(&mut self, c: CellCoord, h: u32) {
        self.heights[(c.y * self.width + c.x) as usize] = h;
    }

    /// `H[v] = max(H[v], t + 1)` for the voxel's cell.
    pub fn raise_to_cover(&mut self, v: VoxelCoord) {
        let i = (v.cell.y * self.width + v.cell.x) as usize;
        self.heights[i] = self.heights[i].max(v.t + 1);
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.heights
    }

    pub fn max(&self) -> u32 {
        self.heights.iter().copied().max().unwrap_or(0)
    }
}

/// Voxel occupancy for the 3D searches, plus the per-qubit causal frontier.
#[derive(Clone, Debug)]
pub struct Occupancy3D {
    cells: usize,
    bits: Vec<u64>,
    layers: u32,
    qubit_frontier: Vec<u32>,
}

impl Occupancy3D {
    pub fn new(plane: &QubitPlane) -> Self {
        Self {
            cells: plane.num_cells(),
            bits: Vec::new(),
            layers: 0,
            qubit_frontier: vec![0; plane.num_qubits()],
        }
    }

    /// Number of materialized layers; every layer at or above this is empty.
    pub fn layers(&self) -> u32 {
        self.layers
    }

    pub fn is_occupied_index(&self, cell: usize, t: u32) -> bool {
        if t >= self.layers {
            return false;
        }
        let bit = t as usize * self.cells + cell;
        self.bits[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn is_occupied(&self, plane: &QubitPlane, v: VoxelCoord) -> bool {
        self.is_occupied_index(plane.index(v.cell), v.t)
    }

    pub fn frontier(&self, q: QubitId) -> u32 {
        self.qubit_frontier[q.index()]
    }

    fn grow_to(&mut self, layers: u32) {
        if layers > self.layers {
            self.layers = layers;
            let words = (layers as usize * self.cells).div_ceil(64);
            self.bits.resize(words, 0);
        }
    }

    fn set_index(&mut self, cell: usize, t: u32) {
        self.grow_to(t + 1);
        let bit = t as usize * self.cells + cell;
        self.bits[bit / 64] |= 1 << (bit % 64);
    }

    /// Lowest unoccupied voxel at `cell` at or above `from`.
    pub fn lowest_free(&self, cell: usize, from: u32) -> u32 {
        let mut t = from;
        while self.is_occupied_index(cell, t) {
            t += 1;
        }
        t
    }

    /// Marks every voxel of `voxels`. Fails without modifying anything if
    /// any voxel is already taken. Endpoint qubits found on data or factory
    /// cells have their frontier raised past their touch time.
    pub fn occupy(&mut self, plane: &QubitPlane, voxels: &[VoxelCoord]) -> Result<()> {
        for v in voxels {
            let i = plane.checked_index(v.cell)?;
            if self.is_occupied_index(i, v.t) {
                return Err(Error::Collision(*v));
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(voxels.len());
        for v in voxels {
            if !seen.insert(*v) {
                return Err(Error::Collision(*v));
            }
        }
        for v in voxels {
            let i = plane.index(v.cell);
            self.set_index(i, v.t);
            if let Some(q) = plane.qubit_at(v.cell) {
                let f = &mut self.qubit_frontier[q.index()];
                *f = (*f).max(v.t + 1);
            }
        }
        Ok(())
    }

    pub fn occupied_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}
