//! Many-body routing trees: validity conditions, segment parity, routing
//! by repeated projection, and conversion to a measurement circuit.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::kinkmod::{count_kinks, fix_kink_parity, twist_straight_path, Parity};
use crate::lattice::{
    boundary_of_side, BoundaryType, CellCoord, CellKind, Dir, HeightMap, QubitPlane, VoxelCoord,
};
use crate::program::Basis;
use crate::routing::{
    find_weighted_path_2d, from_levels, height_base, lift_path, pow2, Path3D, RouteSpec, Step,
};
use crate::semantics::{
    ideal_measurement, matches_ideal, run_circuit, choi_state, CircuitOp, Outcomes,
};
use crate::stabilizer::Pauli;

/// Voxel tree with explicit edges; stacked but unconnected voxels are not
/// neighbors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoutingTree {
    pub voxels: Vec<VoxelCoord>,
    pub edges: Vec<(usize, usize)>,
    /// Cells of the target qubits `Q_1..Q_m`.
    pub targets: Vec<CellCoord>,
}

impl RoutingTree {
    pub fn from_path(path: &Path3D, targets: Vec<CellCoord>) -> Self {
        let mut t = RoutingTree {
            voxels: Vec::new(),
            edges: Vec::new(),
            targets,
        };
        t.add_path(path);
        t
    }

    /// Appends `path`, sharing its last voxel if it is already present.
    fn add_path(&mut self, path: &Path3D) {
        let mut prev: Option<usize> = None;
        for v in &path.voxels {
            let id = match self.voxels.iter().position(|x| x == v) {
                Some(i) => i,
                None => {
                    self.voxels.push(*v);
                    self.voxels.len() - 1
                }
            };
            if let Some(p) = prev {
                self.edges.push((p, id));
            }
            prev = Some(id);
        }
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.voxels.len()];
        for &(a, b) in &self.edges {
            if a < adj.len() && b < adj.len() {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        adj
    }

    pub fn leaves(&self) -> Vec<usize> {
        let adj = self.adjacency();
        (0..self.voxels.len()).filter(|&i| adj[i].len() == 1).collect()
    }

    pub fn forks(&self) -> Vec<usize> {
        let adj = self.adjacency();
        (0..self.voxels.len()).filter(|&i| adj[i].len() > 2).collect()
    }

    fn step(&self, a: usize, b: usize) -> Option<Step> {
        Step::between(self.voxels[a], self.voxels[b])
    }

    fn leaf_of_target(&self, k: usize) -> Option<usize> {
        let adj = self.adjacency();
        (0..self.voxels.len()).find(|&i| self.voxels[i].cell == self.targets[k] && adj[i].len() == 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub condition: u8,
    pub witness: Option<VoxelCoord>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConditionReport {
    pub violations: Vec<Violation>,
    /// Whether conditions 3 and 4 were evaluated.
    pub classified: bool,
}

impl ConditionReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, condition: u8) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }

    fn push(&mut self, condition: u8, witness: Option<VoxelCoord>, detail: impl Into<String>) {
        self.violations.push(Violation {
            condition,
            witness,
            detail: detail.into(),
        });
    }

    pub fn first_error(&self) -> Option<Error> {
        self.violations.first().map(|v| Error::Condition {
            condition: v.condition,
            detail: v.detail.clone(),
        })
    }
}

/// Horizontal component of the tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSegment {
    pub voxels: Vec<usize>,
    pub layer: u32,
}

/// Maximal vertical run joining two segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connector {
    /// Bottom to top.
    pub voxels: Vec<usize>,
    pub bottom: usize,
    pub top: usize,
    pub kink: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub segments: Vec<TreeSegment>,
    pub connectors: Vec<Connector>,
    pub segment_of: Vec<Option<usize>>,
}

fn check_structure(tree: &RoutingTree, report: &mut ConditionReport) {
    let n = tree.voxels.len();
    if n == 0 {
        report.push(1, None, "tree is empty");
        return;
    }
    let mut seen = HashMap::with_capacity(n);
    for (i, v) in tree.voxels.iter().enumerate() {
        if seen.insert(*v, i).is_some() {
            report.push(1, Some(*v), format!("voxel {v} appears twice"));
        }
    }
    let mut edge_set = std::collections::HashSet::new();
    for &(a, b) in &tree.edges {
        if a >= n || b >= n || a == b {
            report.push(1, None, format!("edge ({a},{b}) is malformed"));
            return;
        }
        if tree.step(a, b).is_none() {
            report.push(
                1,
                Some(tree.voxels[a]),
                format!("{} and {} do not share a face", tree.voxels[a], tree.voxels[b]),
            );
        }
        if !edge_set.insert((a.min(b), a.max(b))) {
            report.push(1, Some(tree.voxels[a]), "edge repeated, forming a loop");
        }
    }
    if tree.edges.len() + 1 != n {
        report.push(1, None, format!("{} voxels with {} edges is not a tree", n, tree.edges.len()));
    }
    let adj = tree.adjacency();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        report.push(1, Some(tree.voxels[i]), "tree is not connected");
    }
    for (i, v) in tree.voxels.iter().enumerate() {
        let is_target = tree.targets.contains(&v.cell);
        if adj[i].len() == 1 && !is_target {
            report.push(1, Some(*v), format!("leaf {v} is not on a target cell"));
        }
        if is_target && adj[i].len() != 1 {
            report.push(1, Some(*v), format!("target voxel {v} is not a leaf"));
        }
        if is_target && adj[i].len() == 1 && tree.step(i, adj[i][0]).is_some_and(Step::is_vertical)
        {
            report.push(1, Some(*v), format!("leaf {v} is attached vertically"));
        }
    }
    for c in &tree.targets {
        let k = tree.voxels.iter().filter(|v| v.cell == *c).count();
        if k != 1 {
            report.push(1, None, format!("target {c} holds {k} voxels"));
        }
    }
}

fn check_forks(tree: &RoutingTree, report: &mut ConditionReport) {
    let adj = tree.adjacency();
    for (i, nb) in adj.iter().enumerate() {
        if nb.len() > 2 && nb.iter().any(|&j| tree.step(i, j).is_some_and(Step::is_vertical)) {
            report.push(2, Some(tree.voxels[i]), format!("fork {} has a vertical neighbor", tree.voxels[i]));
        }
    }
}

fn horizontal_dir(tree: &RoutingTree, adj: &[Vec<usize>], i: usize) -> Option<Dir> {
    adj[i].iter().find_map(|&j| match tree.step(i, j) {
        Some(Step::Horizontal(d)) => Some(d),
        _ => None,
    })
}

/// Splits a tree that satisfies conditions 1 and 2 into segments and
/// connectors.
pub fn decompose(tree: &RoutingTree) -> Result<Decomposition> {
    let n = tree.voxels.len();
    let adj = tree.adjacency();
    let horiz = |i: usize, j: usize| matches!(tree.step(i, j), Some(Step::Horizontal(_)));
    let mut segment_of: Vec<Option<usize>> = vec![None; n];
    let mut segments = Vec::new();
    for s in 0..n {
        if segment_of[s].is_some() || !adj[s].iter().any(|&j| horiz(s, j)) {
            continue;
        }
        let id = segments.len();
        let mut members = vec![s];
        segment_of[s] = Some(id);
        let mut k = 0;
        while k < members.len() {
            let i = members[k];
            for &j in &adj[i] {
                if horiz(i, j) && segment_of[j].is_none() {
                    segment_of[j] = Some(id);
                    members.push(j);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        segments.push(TreeSegment {
            layer: tree.voxels[s].t,
            voxels: members,
        });
    }
    let mut connectors = Vec::new();
    for (i, seg) in segment_of.iter().enumerate() {
        let Some(bottom) = *seg else { continue };
        let Some(&up) = adj[i]
            .iter()
            .find(|&&j| tree.step(i, j) == Some(Step::Up))
        else {
            continue;
        };
        let mut run = vec![i, up];
        let mut cur = up;
        while segment_of[cur].is_none() {
            let next = adj[cur]
                .iter()
                .copied()
                .find(|&j| tree.step(cur, j) == Some(Step::Up))
                .ok_or_else(|| {
                    Error::Condition {
                        condition: 1,
                        detail: format!("vertical run ends at {} without a segment", tree.voxels[cur]),
                    }
                })?;
            run.push(next);
            cur = next;
        }
        let top = segment_of[cur].expect("loop ends on a segment");
        let kink = match (horizontal_dir(tree, &adj, i), horizontal_dir(tree, &adj, cur)) {
            (Some(a), Some(b)) => a.is_perpendicular(b),
            _ => false,
        };
        connectors.push(Connector {
            voxels: run,
            bottom,
            top,
            kink,
        });
    }
    Ok(Decomposition {
        segments,
        connectors,
        segment_of,
    })
}

/// Parity of every segment, starting from the segment holding `pivot`.
pub fn classify_segments(tree: &RoutingTree, pivot: usize) -> Result<(Decomposition, Vec<Parity>)> {
    let mut report = ConditionReport::default();
    check_structure(tree, &mut report);
    check_forks(tree, &mut report);
    if let Some(e) = report.first_error() {
        return Err(e);
    }
    let dec = decompose(tree)?;
    let start = dec.segment_of[pivot]
        .ok_or_else(|| Error::InvalidArgument("pivot is not in a segment".into()))?;
    let mut parity: Vec<Option<Parity>> = vec![None; dec.segments.len()];
    let mut by_segment: Vec<Vec<usize>> = vec![Vec::new(); dec.segments.len()];
    for (k, c) in dec.connectors.iter().enumerate() {
        by_segment[c.bottom].push(k);
        by_segment[c.top].push(k);
    }
    parity[start] = Some(Parity::Even);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        let p = parity[s].expect("queued segments are labeled");
        for &k in &by_segment[s] {
            let c = &dec.connectors[k];
            let other = if c.bottom == s { c.top } else { c.bottom };
            if parity[other].is_none() {
                parity[other] = Some(match (p, c.kink) {
                    (q, false) => q,
                    (Parity::Even, true) => Parity::Odd,
                    (Parity::Odd, true) => Parity::Even,
                });
                queue.push_back(other);
            }
        }
    }
    let parity = parity
        .into_iter()
        .map(|p| p.ok_or_else(|| Error::Internal("segment graph is disconnected".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok((dec, parity))
}

fn check_with_pivot(tree: &RoutingTree, pivot: usize, report: &mut ConditionReport) {
    let Ok((dec, parity)) = classify_segments(tree, pivot) else {
        return;
    };
    report.classified = true;
    let adj = tree.adjacency();
    for (i, seg) in dec.segment_of.iter().enumerate() {
        let Some(s) = *seg else { continue };
        if parity[s] != Parity::Odd {
            continue;
        }
        if adj[i].len() == 1 {
            report.push(3, Some(tree.voxels[i]), format!("leaf {} is in an odd segment", tree.voxels[i]));
        }
        if adj[i].len() > 2 {
            report.push(4, Some(tree.voxels[i]), format!("fork {} is in an odd segment", tree.voxels[i]));
        }
    }
}

pub fn check_tree_conditions(tree: &RoutingTree) -> ConditionReport {
    check_tree_conditions_with_pivot(tree, None)
}

/// As [`check_tree_conditions`], classifying from the given leaf (the
/// first target's leaf by default).
pub fn check_tree_conditions_with_pivot(tree: &RoutingTree, pivot: Option<usize>) -> ConditionReport {
    let mut report = ConditionReport::default();
    check_structure(tree, &mut report);
    check_forks(tree, &mut report);
    if !report.is_valid() {
        return report;
    }
    let pivot = pivot.or_else(|| (!tree.targets.is_empty()).then(|| tree.leaf_of_target(0)).flatten());
    match pivot {
        Some(p) => check_with_pivot(tree, p, &mut report),
        None => report.push(1, None, "tree has no target leaf"),
    }
    report
}

fn pauli_of(b: BoundaryType) -> Pauli {
    match b {
        BoundaryType::X => Pauli::X,
        BoundaryType::Z => Pauli::Z,
    }
}

fn flip(p: Pauli) -> Pauli {
    if p == Pauli::X {
        Pauli::Z
    } else {
        Pauli::X
    }
}

/// Circuit of a valid tree on `[data…, refs…, connector ancillas…]`: one
/// joint measurement per segment in layer order, `boundary`-type on even
/// segments and the other type on odd ones.
pub fn tree_circuit(tree: &RoutingTree, boundary: BoundaryType) -> Result<(Vec<CircuitOp>, usize)> {
    let report = check_tree_conditions(tree);
    if let Some(e) = report.first_error() {
        return Err(e);
    }
    let m = tree.targets.len();
    let pivot = tree
        .leaf_of_target(0)
        .ok_or_else(|| Error::Internal("missing first leaf".into()))?;
    let (dec, parity) = classify_segments(tree, pivot)?;
    let adj = tree.adjacency();
    for k in 0..m {
        let leaf = tree.leaf_of_target(k).expect("condition 1 holds");
        let Some(Step::Horizontal(d)) = tree.step(leaf, adj[leaf][0]) else {
            unreachable!("condition 1 forbids vertical leaves")
        };
        if boundary_of_side(d) != boundary {
            return Err(Error::Semantic(format!(
                "target {} is attached through its {:?} boundary",
                tree.targets[k],
                boundary_of_side(d)
            )));
        }
    }
    let n_qubits = 2 * m + dec.connectors.len();
    let mut attached: Vec<Vec<usize>> = vec![Vec::new(); dec.segments.len()];
    for (k, c) in dec.connectors.iter().enumerate() {
        attached[c.bottom].push(2 * m + k);
        attached[c.top].push(2 * m + k);
    }
    for k in 0..m {
        let leaf = tree.leaf_of_target(k).expect("condition 1 holds");
        let s = dec.segment_of[leaf].expect("leaves are horizontal");
        attached[s].push(k);
    }
    let mut order: Vec<usize> = (0..dec.segments.len()).collect();
    order.sort_by_key(|&s| (dec.segments[s].layer, s));
    let even = pauli_of(boundary);
    let mut uses = vec![0u8; dec.connectors.len()];
    let mut ops = Vec::new();
    for s in order {
        let p = if parity[s] == Parity::Even { even } else { flip(even) };
        let mut qubits = attached[s].clone();
        qubits.sort_unstable();
        for &q in &qubits {
            if q >= 2 * m && uses[q - 2 * m] == 0 {
                ops.push(CircuitOp::Prepare { qubit: q, basis: flip(p) });
            }
        }
        ops.push(CircuitOp::Measure {
            qubits: qubits.clone(),
            basis: p,
        });
        for &q in &qubits {
            if q >= 2 * m {
                uses[q - 2 * m] += 1;
                if uses[q - 2 * m] == 2 {
                    ops.push(CircuitOp::Measure {
                        qubits: vec![q],
                        basis: flip(p),
                    });
                }
            }
        }
    }
    Ok((ops, n_qubits))
}

/// Simulates the tree's circuit on Bell pairs for `n_seeds` outcome draws
/// and checks it against the ideal `m`-body measurement.
pub fn verify_tree_action(tree: &RoutingTree, boundary: BoundaryType, n_seeds: u64) -> Result<bool> {
    use rand::SeedableRng;
    let (ops, n) = tree_circuit(tree, boundary)?;
    let m = tree.targets.len();
    let p = pauli_of(boundary);
    let ideal = [ideal_measurement(m, p, false), ideal_measurement(m, p, true)];
    for seed in 0..n_seeds {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut state = choi_state(m, n);
        run_circuit(&mut state, &ops, Outcomes::Random(&mut rng))?;
        if !matches_ideal(&state, m, &ideal) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn boundary_of_basis(basis: Basis) -> Result<BoundaryType> {
    match basis {
        Basis::XX => Ok(BoundaryType::X),
        Basis::ZZ => Ok(BoundaryType::Z),
        Basis::Cnot => Err(Error::InvalidArgument(
            "many-body measurements are XX… or ZZ… only".into(),
        )),
    }
}

/// Kink-parity fix for a projected path, falling back to a twist when the
/// path has no corner.
pub(crate) fn flip_parity(plane: &QubitPlane, h: &HeightMap, path: &Path3D) -> Option<Path3D> {
    match fix_kink_parity(path, h) {
        Ok(p) => Some(p),
        Err(Error::NotApplicable(_)) => twist_straight_path(plane, path, |c, t| {
            plane.kind(c) == CellKind::Ancilla && t >= h.get(c)
        }),
        Err(_) => None,
    }
}

/// Like `flip_parity`, but also tries the corner nearest the far end and
/// keeps whichever result peaks lower; ties keep the near-end fix.
pub(crate) fn flip_parity_lowest(plane: &QubitPlane, h: &HeightMap, path: &Path3D) -> Option<Path3D> {
    let near = flip_parity(plane, h, path);
    let far = fix_kink_parity(&path.reversed(), h).ok().map(|p| p.reversed());
    match (near, far) {
        (Some(a), Some(b)) if (b.max_t(), b.len()) < (a.max_t(), a.len()) => Some(b),
        (Some(a), _) => Some(a),
        (None, b) => b,
    }
}

struct Candidate {
    cost: u128,
    length: u32,
    cell: CellCoord,
    t: u32,
    /// Last cell before the attachment cell; `None` when the target qubit
    /// is itself adjacent.
    via: Option<usize>,
}

/// Routes an `m`-body measurement over `cells` by projection: the first two
/// qubits are joined by a two-body route with even kinks, then each further
/// qubit is attached to an even segment of the growing tree by a weighted
/// route whose last move is level with the attachment voxel. If some qubit
/// cannot be attached on the current terrain, the whole tree is routed again
/// on a flat terrain at the current maximum height. `h` is raised over every
/// voxel placed. Routing errors carry instruction index 0; schedulers
/// substitute the real index.
pub fn route_manybody_projection(
    plane: &QubitPlane,
    cells: &[CellCoord],
    boundary: BoundaryType,
    h: &mut HeightMap,
) -> Result<RoutingTree> {
    if cells.len() < 2 {
        return Err(Error::InvalidArgument("need at least two qubits".into()));
    }
    let mut trial = h.clone();
    let tree = match grow_tree(plane, cells, boundary, &mut trial) {
        Ok(tree) => tree,
        Err(Error::Routing { .. }) => {
            let mut flat = HeightMap::from_vec(plane, vec![h.max(); plane.num_cells()]);
            grow_tree(plane, cells, boundary, &mut flat)?
        }
        Err(e) => return Err(e),
    };
    for v in &tree.voxels {
        h.raise_to_cover(*v);
    }
    Ok(tree)
}

fn grow_tree(
    plane: &QubitPlane,
    cells: &[CellCoord],
    boundary: BoundaryType,
    h: &mut HeightMap,
) -> Result<RoutingTree> {
    let routing_err = |reason: String| Error::Routing { index: 0, reason };
    let spec = RouteSpec::new(cells[0], boundary, cells[1], boundary);
    let (p2, _) = find_weighted_path_2d(plane, h, &spec)?;
    let mut first = lift_path(&p2, h);
    if count_kinks(&first).parity != Parity::Even {
        first = flip_parity(plane, h, &first)
            .ok_or_else(|| routing_err("cannot fix the first branch to even parity".into()))?;
    }
    for v in &first.voxels {
        h.raise_to_cover(*v);
    }
    let mut tree = RoutingTree::from_path(&first, cells[..2].to_vec());
    for (k, &q) in cells.iter().enumerate().skip(2) {
        let branch = attach_branch(plane, h, &tree, q, boundary)
            .ok_or_else(|| routing_err(format!("no even attachment for qubit at {q}")))?;
        for v in &branch.voxels {
            h.raise_to_cover(*v);
        }
        tree.targets.push(q);
        tree.add_path(&branch);
        debug_assert!(check_tree_conditions(&tree).is_valid(), "after qubit {k}");
    }
    Ok(tree)
}

fn attach_branch(
    plane: &QubitPlane,
    h: &HeightMap,
    tree: &RoutingTree,
    q: CellCoord,
    boundary: BoundaryType,
) -> Option<Path3D> {
    let pivot = tree.leaf_of_target(0)?;
    let (dec, parity) = classify_segments(tree, pivot).ok()?;
    let adj = tree.adjacency();
    let n = plane.num_cells();
    let base = height_base(plane, h);
    let weight = |i: usize| pow2(h.at(i).saturating_sub(base));
    let mut best: Vec<Option<(u128, u32)>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    for d in Dir::ALL {
        if boundary_of_side(d) != boundary {
            continue;
        }
        if let Some(c) = plane.neighbor(q, d) {
            let i = plane.index(c);
            if plane.kind_at(i) == CellKind::Ancilla {
                best[i] = Some((weight(i), 1));
                heap.push(Reverse((weight(i), 1u32, i)));
            }
        }
    }
    while let Some(Reverse((cost, len, i))) = heap.pop() {
        if best[i] != Some((cost, len)) {
            continue;
        }
        for d in Dir::ALL {
            let Some(nb) = plane.neighbor(plane.coord(i), d) else { continue };
            let j = plane.index(nb);
            if plane.kind_at(j) != CellKind::Ancilla {
                continue;
            }
            let key = (cost.saturating_add(weight(j)), len + 1);
            if best[j].is_none_or(|b| key < b) {
                best[j] = Some(key);
                parent[j] = i;
                heap.push(Reverse((key.0, key.1, j)));
            }
        }
    }
    let mut candidates = Vec::new();
    for (e, v) in tree.voxels.iter().enumerate() {
        let Some(s) = dec.segment_of[e] else { continue };
        if parity[s] != Parity::Even
            || adj[e].len() == 1
            || adj[e].iter().any(|&j| tree.step(e, j).is_some_and(Step::is_vertical))
        {
            continue;
        }
        for d in Dir::ALL {
            let Some(u) = plane.neighbor(v.cell, d) else { continue };
            if u == q {
                if boundary_of_side(d.opposite()) == boundary && h.get(q) <= v.t {
                    candidates.push(Candidate {
                        cost: 0,
                        length: 0,
                        cell: v.cell,
                        t: v.t,
                        via: None,
                    });
                }
                continue;
            }
            let ui = plane.index(u);
            if let Some((c, l)) = best[ui] {
                if h.at(ui) <= v.t {
                    candidates.push(Candidate {
                        cost: c,
                        length: l,
                        cell: v.cell,
                        t: v.t,
                        via: Some(ui),
                    });
                }
            }
        }
    }
    candidates.sort_by_key(|c| (c.cost, c.length, c.cell, c.t, c.via));
    for cand in candidates {
        let mut footprint = vec![q];
        if let Some(u) = cand.via {
            let mut back = vec![u];
            let mut at = u;
            while parent[at] != usize::MAX {
                at = parent[at];
                back.push(at);
            }
            back.reverse();
            footprint.extend(back.into_iter().map(|i| plane.coord(i)));
        }
        if footprint.contains(&cand.cell) {
            continue;
        }
        footprint.push(cand.cell);
        let branch = lift_pinned(&footprint, h, cand.t);
        let target = VoxelCoord::at(cand.cell, cand.t);
        let branch = if count_kinks(&branch).parity == Parity::Even {
            branch
        } else {
            match flip_parity(plane, h, &branch) {
                Some(b) if b.last() == target && b.first().cell == q => b,
                _ => continue,
            }
        };
        debug_assert_eq!(count_kinks(&branch).parity, Parity::Even);
        return Some(branch);
    }
    None
}

/// Lifts `cells` like [`lift_path`] except that the final move, into the
/// attachment voxel, is pinned at level `t`.
fn lift_pinned(cells: &[CellCoord], h: &HeightMap, t: u32) -> Path3D {
    let n = cells.len();
    let mut base: Vec<u32> = cells.iter().map(|&c| h.get(c)).collect();
    if n > 2 {
        base[0] = base[0].max(h.get(cells[1]));
    }
    let mut levels: Vec<u32> = (0..n - 1).map(|i| base[i].max(base[i + 1])).collect();
    levels[n - 2] = t;
    from_levels(cells, &levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_plane;

    fn v(x: u32, y: u32, t: u32) -> VoxelCoord {
        VoxelCoord::new(x, y, t)
    }

    fn chain_tree(voxels: Vec<VoxelCoord>, targets: Vec<CellCoord>) -> RoutingTree {
        RoutingTree::from_path(&Path3D::new(voxels), targets)
    }

    /// Flat T: three targets joined through (1,1).
    fn flat_t() -> RoutingTree {
        RoutingTree {
            voxels: vec![v(0, 0, 0), v(1, 0, 0), v(1, 1, 0), v(2, 1, 0), v(3, 1, 0), v(4, 1, 0), v(4, 2, 0), v(1, 2, 0), v(1, 3, 0), v(1, 4, 0), v(0, 4, 0)],
            edges: vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (2, 7), (7, 8), (8, 9), (9, 10)],
            targets: vec![CellCoord::new(0, 0), CellCoord::new(4, 2), CellCoord::new(0, 4)],
        }
    }

    #[test]
    fn flat_t_passes() {
        let t = flat_t();
        let r = check_tree_conditions(&t);
        assert!(r.is_valid(), "{r:?}");
        let (dec, par) = classify_segments(&t, 0).unwrap();
        assert_eq!(dec.segments.len(), 1);
        assert_eq!(par, vec![Parity::Even]);
        assert!(matches!(verify_tree_action(&t, BoundaryType::Z, 1), Err(Error::Semantic(_))));
    }

    #[test]
    fn voxel_on_fork_violates_condition_two() {
        let mut t = flat_t();
        t.voxels.push(v(1, 1, 1));
        t.edges.push((2, 11));
        t.voxels.push(v(2, 1, 1));
        t.edges.push((11, 12));
        t.voxels.push(v(2, 0, 1));
        t.edges.push((12, 13));
        t.targets.push(CellCoord::new(2, 0));
        let r = check_tree_conditions(&t);
        assert!(r.violates(2), "{r:?}");
    }

    #[test]
    fn odd_kink_two_leaf_path_violates_condition_three() {
        let t = chain_tree(
            vec![v(0, 0, 0), v(1, 0, 0), v(1, 0, 1), v(1, 1, 1), v(1, 2, 1)],
            vec![CellCoord::new(0, 0), CellCoord::new(1, 2)],
        );
        let r = check_tree_conditions(&t);
        assert!(r.violates(3), "{r:?}");
        assert!(!r.violates(1) && !r.violates(2));
    }

    #[test]
    fn non_kink_connector_keeps_parity() {
        let t = chain_tree(
            vec![v(0, 0, 0), v(1, 0, 0), v(1, 0, 1), v(2, 0, 1)],
            vec![CellCoord::new(0, 0), CellCoord::new(2, 0)],
        );
        let (dec, par) = classify_segments(&t, 0).unwrap();
        assert_eq!(dec.segments.len(), 2);
        assert_eq!(dec.connectors.len(), 1);
        assert_eq!(par, vec![Parity::Even, Parity::Even]);
    }

    #[test]
    fn kink_connector_flips_parity() {
        let t = chain_tree(
            vec![v(0, 0, 0), v(1, 0, 0), v(1, 0, 1), v(1, 1, 1), v(1, 2, 1)],
            vec![CellCoord::new(0, 0), CellCoord::new(1, 2)],
        );
        let (_, par) = classify_segments(&t, 0).unwrap();
        assert_eq!(par, vec![Parity::Even, Parity::Odd]);
    }

    #[test]
    fn flat_tree_verifies_three_body_z() {
        assert!(verify_tree_action(&flat_t_z(), BoundaryType::Z, 4).unwrap());
    }

    /// Flat tree whose three leaves are entered east/west.
    fn flat_t_z() -> RoutingTree {
        RoutingTree {
            voxels: vec![v(0, 0, 0), v(1, 0, 0), v(1, 1, 0), v(2, 1, 0), v(3, 1, 0), v(3, 0, 0), v(4, 0, 0), v(1, 2, 0), v(0, 2, 0)],
            edges: vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (2, 7), (7, 8)],
            targets: vec![CellCoord::new(0, 0), CellCoord::new(4, 0), CellCoord::new(0, 2)],
        }
    }

    #[test]
    fn two_body_path_verifies_as_zz() {
        let t = chain_tree(vec![v(0, 0, 0), v(1, 0, 0), v(2, 0, 0)], vec![CellCoord::new(0, 0), CellCoord::new(2, 0)]);
        assert!(verify_tree_action(&t, BoundaryType::Z, 4).unwrap());
    }

    #[test]
    fn condition_failure_blocks_verification() {
        let t = chain_tree(
            vec![v(0, 0, 0), v(1, 0, 0), v(1, 0, 1), v(1, 1, 1), v(1, 2, 1)],
            vec![CellCoord::new(0, 0), CellCoord::new(1, 2)],
        );
        assert!(matches!(verify_tree_action(&t, BoundaryType::Z, 1), Err(Error::Condition { .. })));
    }

    #[test]
    fn collinear_three_body_projection() {
        let mut plane = build_plane(3, 0).unwrap();
        let cells: Vec<CellCoord> = plane.data_positions().into_iter().take(3).collect();
        for (i, c) in cells.iter().enumerate() {
            plane.bind(crate::program::QubitId(i as u32), *c, CellKind::Data).unwrap();
        }
        let mut h = HeightMap::new(&plane);
        let tree = route_manybody_projection(&plane, &cells, BoundaryType::Z, &mut h).unwrap();
        assert!(check_tree_conditions(&tree).is_valid());
        assert!(verify_tree_action(&tree, BoundaryType::Z, 4).unwrap());
    }

    #[test]
    fn two_qubits_reduce_to_projection() {
        let plane = build_plane(2, 0).unwrap();
        let cells = vec![CellCoord::new(0, 0), CellCoord::new(2, 0)];
        let mut h = HeightMap::new(&plane);
        let tree = route_manybody_projection(&plane, &cells, BoundaryType::Z, &mut h).unwrap();
        assert_eq!(tree.voxels, vec![v(0, 0, 0), v(1, 0, 0), v(2, 0, 0)]);
    }
}
