//! Measurement-chain image of a routed path, its algebraic simplification,
//! and a stabilizer-simulation check of the logical action on Bell pairs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{boundary_of_side, BoundaryType, CellCoord};
use crate::program::Basis;
use crate::routing::{Path3D, SegmentKind, Step};
use crate::stabilizer::{canonical_subgroup, Pauli, PauliString, StabilizerState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TwoBodyBasis {
    XX,
    ZZ,
}

impl TwoBodyBasis {
    pub fn of_boundary(b: BoundaryType) -> Self {
        match b {
            BoundaryType::X => TwoBodyBasis::XX,
            BoundaryType::Z => TwoBodyBasis::ZZ,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            TwoBodyBasis::XX => TwoBodyBasis::ZZ,
            TwoBodyBasis::ZZ => TwoBodyBasis::XX,
        }
    }

    pub fn pauli(self) -> Pauli {
        match self {
            TwoBodyBasis::XX => Pauli::X,
            TwoBodyBasis::ZZ => Pauli::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitBasis {
    Z0,
    XPlus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingleBasis {
    X,
    Z,
}

/// Initialization opposite the first measurement an ancilla takes part in.
pub fn init_for(first: TwoBodyBasis) -> InitBasis {
    match first {
        TwoBodyBasis::XX => InitBasis::Z0,
        TwoBodyBasis::ZZ => InitBasis::XPlus,
    }
}

/// Destructive measurement opposite the last measurement.
pub fn readout_for(last: TwoBodyBasis) -> SingleBasis {
    match last {
        TwoBodyBasis::XX => SingleBasis::Z,
        TwoBodyBasis::ZZ => SingleBasis::X,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainNode {
    Endpoint(usize),
    Ancilla(usize),
}

/// Two-body measurement between path-order nodes `k` and `k + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Link {
    pub basis: TwoBodyBasis,
    pub t: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ancilla {
    pub cell: CellCoord,
    pub init: InitBasis,
    pub readout: SingleBasis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainStep {
    Init {
        ancilla: usize,
        basis: InitBasis,
    },
    TwoBody {
        a: ChainNode,
        b: ChainNode,
        basis: TwoBodyBasis,
    },
    Destructive {
        ancilla: usize,
        basis: SingleBasis,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasChain {
    pub links: Vec<Link>,
    pub ancillas: Vec<Ancilla>,
    /// Time-ordered realization.
    pub steps: Vec<ChainStep>,
}

impl MeasChain {
    /// Node `k` of a chain with `L` links: endpoint 0, ancillas `0..L-1`,
    /// endpoint 1.
    pub fn node(&self, k: usize) -> ChainNode {
        if k == 0 {
            ChainNode::Endpoint(0)
        } else if k == self.links.len() {
            ChainNode::Endpoint(1)
        } else {
            ChainNode::Ancilla(k - 1)
        }
    }

    /// Builds the chain for links in path order; `cells[k]` hosts the
    /// ancilla between links `k` and `k + 1`.
    pub fn from_links(links: Vec<Link>, cells: Vec<CellCoord>) -> Result<Self> {
        if !links.is_empty() && cells.len() + 1 != links.len() {
            return Err(Error::InvalidArgument("one ancilla cell per inner node".into()));
        }
        let mut ancillas = Vec::with_capacity(cells.len());
        for (k, cell) in cells.iter().enumerate() {
            let (a, b) = (links[k], links[k + 1]);
            if a.t == b.t {
                return Err(Error::Semantic(format!(
                    "ancilla at {cell} is measured twice at t={}",
                    a.t
                )));
            }
            let (first, last) = if a.t < b.t { (a, b) } else { (b, a) };
            ancillas.push(Ancilla {
                cell: *cell,
                init: init_for(first.basis),
                readout: readout_for(last.basis),
            });
        }
        let mut chain = MeasChain {
            links,
            ancillas,
            steps: Vec::new(),
        };
        let mut order: Vec<usize> = (0..chain.links.len()).collect();
        order.sort_by_key(|&k| (chain.links[k].t, k));
        let mut uses = vec![0u8; chain.ancillas.len()];
        let mut steps = Vec::new();
        for k in order {
            let (a, b) = (chain.node(k), chain.node(k + 1));
            for n in [a, b] {
                if let ChainNode::Ancilla(i) = n {
                    if uses[i] == 0 {
                        steps.push(ChainStep::Init {
                            ancilla: i,
                            basis: chain.ancillas[i].init,
                        });
                    }
                }
            }
            steps.push(ChainStep::TwoBody {
                a,
                b,
                basis: chain.links[k].basis,
            });
            for n in [a, b] {
                if let ChainNode::Ancilla(i) = n {
                    uses[i] += 1;
                    if uses[i] == 2 {
                        steps.push(ChainStep::Destructive {
                            ancilla: i,
                            basis: chain.ancillas[i].readout,
                        });
                    }
                }
            }
        }
        chain.steps = steps;
        Ok(chain)
    }

    pub fn bases(&self) -> Vec<TwoBodyBasis> {
        self.links.iter().map(|l| l.basis).collect()
    }
}

/// Converts a path to its measurement chain: each horizontal segment is a
/// two-body measurement, each vertical segment an ancilla, and the basis
/// flips across every kink starting from the boundary the path leaves its
/// first endpoint through.
pub fn path_to_chain(path: &Path3D) -> Result<MeasChain> {
    let segs = path.segments();
    let steps = path.steps();
    if segs.is_empty() {
        return Err(Error::Semantic("path is not face-connected".into()));
    }
    if segs[0].kind != SegmentKind::Horizontal || segs[segs.len() - 1].kind != SegmentKind::Horizontal
    {
        return Err(Error::Semantic("path must start and end horizontally".into()));
    }
    let dir_at = |i: usize| match steps[i] {
        Some(Step::Horizontal(d)) => d,
        _ => unreachable!("horizontal segment holds only horizontal steps"),
    };
    let mut basis = TwoBodyBasis::of_boundary(boundary_of_side(dir_at(0)));
    let mut links = Vec::new();
    let mut cells = Vec::new();
    for seg in &segs {
        match seg.kind {
            SegmentKind::Horizontal => links.push(Link {
                basis,
                t: path.voxels[seg.start].t,
            }),
            SegmentKind::Vertical => {
                cells.push(path.voxels[seg.start].cell);
                if dir_at(seg.start - 1).is_perpendicular(dir_at(seg.end)) {
                    basis = basis.flipped();
                }
            }
        }
    }
    let entry = boundary_of_side(dir_at(steps.len() - 1));
    if TwoBodyBasis::of_boundary(entry) != basis {
        return Err(Error::Semantic(format!(
            "far endpoint {} is entered through its {:?} boundary but the chain arrives in {:?}",
            path.last().cell,
            entry,
            basis
        )));
    }
    MeasChain::from_links(links, cells)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogicalOp {
    Mxx,
    Mzz,
    /// CNOT whose control is chain endpoint `control` (0 or 1).
    Cnot { control: usize },
}

impl LogicalOp {
    pub fn for_basis(basis: Basis) -> Self {
        match basis {
            Basis::XX => LogicalOp::Mxx,
            Basis::ZZ => LogicalOp::Mzz,
            Basis::Cnot => LogicalOp::Cnot { control: 0 },
        }
    }
}

/// Merges equal neighbors and cancels alternating triples. An odd number
/// of alternating runs is a measurement; an even number is a CNOT with the
/// control at the `ZZ` end.
pub fn simplify_chain(chain: &MeasChain) -> Result<LogicalOp> {
    let mut runs: Vec<TwoBodyBasis> = Vec::new();
    for b in chain.bases() {
        if runs.last() != Some(&b) {
            runs.push(b);
        }
    }
    let Some(&first) = runs.first() else {
        return Err(Error::Semantic("empty chain has no logical action".into()));
    };
    Ok(if runs.len() % 2 == 1 {
        match first {
            TwoBodyBasis::XX => LogicalOp::Mxx,
            TwoBodyBasis::ZZ => LogicalOp::Mzz,
        }
    } else {
        LogicalOp::Cnot {
            control: if first == TwoBodyBasis::ZZ { 0 } else { 1 },
        }
    })
}

/// Gate-level circuit over a flat qubit register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CircuitOp {
    /// Fresh qubit into the +1 eigenstate of `basis`.
    Prepare { qubit: usize, basis: Pauli },
    /// Measurement of `basis` on every listed qubit jointly.
    Measure { qubits: Vec<usize>, basis: Pauli },
}

/// Chain as a circuit on `[data0, data1, ref0, ref1, ancillas…]`.
pub fn chain_circuit(chain: &MeasChain) -> Vec<CircuitOp> {
    let q = |n: ChainNode| match n {
        ChainNode::Endpoint(i) => i,
        ChainNode::Ancilla(i) => 4 + i,
    };
    chain
        .steps
        .iter()
        .map(|s| match *s {
            ChainStep::Init { ancilla, basis } => CircuitOp::Prepare {
                qubit: 4 + ancilla,
                basis: match basis {
                    InitBasis::Z0 => Pauli::Z,
                    InitBasis::XPlus => Pauli::X,
                },
            },
            ChainStep::TwoBody { a, b, basis } => CircuitOp::Measure {
                qubits: vec![q(a), q(b)],
                basis: basis.pauli(),
            },
            ChainStep::Destructive { ancilla, basis } => CircuitOp::Measure {
                qubits: vec![4 + ancilla],
                basis: match basis {
                    SingleBasis::X => Pauli::X,
                    SingleBasis::Z => Pauli::Z,
                },
            },
        })
        .collect()
}

/// Where measurement outcomes come from.
pub enum Outcomes<'a> {
    Random(&'a mut ChaCha8Rng),
    /// Bit `k` of the mask is the outcome of the `k`-th measurement.
    Forced(u64),
}

/// `m` data qubits each maximally entangled with a reference qubit
/// `m + i`, inside an `n`-qubit register.
pub fn choi_state(m: usize, n: usize) -> StabilizerState {
    let mut s = StabilizerState::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for i in 0..m {
        let p = PauliString::on(n, &[i, m + i], Pauli::X);
        s.measure(&p, Some(false), &mut rng)
            .expect("fresh pair accepts +1");
    }
    s
}

/// Runs `ops`, returning the outcomes of the `Measure` ops. Forcing an
/// impossible outcome is a `Semantic` error.
pub fn run_circuit(
    state: &mut StabilizerState,
    ops: &[CircuitOp],
    mut outcomes: Outcomes<'_>,
) -> Result<Vec<bool>> {
    let n = state.num_qubits();
    let mut scratch = ChaCha8Rng::seed_from_u64(0);
    let mut record = Vec::new();
    for op in ops {
        match op {
            CircuitOp::Prepare { qubit, basis } => {
                state.measure(&PauliString::on(n, &[*qubit], *basis), Some(false), &mut scratch)?;
            }
            CircuitOp::Measure { qubits, basis } => {
                let p = PauliString::on(n, qubits, *basis);
                let k = record.len();
                let r = match &mut outcomes {
                    Outcomes::Random(rng) => state.measure(&p, None, *rng)?,
                    Outcomes::Forced(mask) => {
                        state.measure(&p, Some(*mask >> k & 1 == 1), &mut scratch)?
                    }
                };
                record.push(r);
            }
        }
    }
    Ok(record)
}

pub fn count_measurements(ops: &[CircuitOp]) -> usize {
    ops.iter()
        .filter(|o| matches!(o, CircuitOp::Measure { .. }))
        .count()
}

/// Runs the chain on Bell pairs with outcomes drawn from `seed`.
pub fn simulate_chain(chain: &MeasChain, seed: u64) -> Result<StabilizerState> {
    let n = 4 + chain.ancillas.len();
    let mut state = choi_state(2, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_circuit(&mut state, &chain_circuit(chain), Outcomes::Random(&mut rng))?;
    Ok(state)
}

/// Ideal post-state generators of a joint `basis` measurement with
/// outcome `neg` on `m` data qubits, over `[data…, refs…]`.
pub fn ideal_measurement(m: usize, basis: Pauli, neg: bool) -> Vec<PauliString> {
    let other = if basis == Pauli::Z { Pauli::X } else { Pauli::Z };
    let n = 2 * m;
    let mut rows = Vec::with_capacity(n);
    let mut joint = PauliString::on(n, &(0..m).collect::<Vec<_>>(), basis);
    joint.set_negative(neg);
    rows.push(joint);
    for i in 0..m {
        rows.push(PauliString::on(n, &[i, m + i], basis));
    }
    for i in 1..m {
        let mut r = PauliString::on(n, &[0, m], other);
        r.mul_assign(&PauliString::on(n, &[i, m + i], other));
        rows.push(r);
    }
    rows
}

/// Choi stabilizers of CNOT(control → 1-control) on two data qubits.
pub fn ideal_cnot(control: usize) -> Vec<PauliString> {
    let (c, t) = (control, 1 - control);
    let (rc, rt) = (2 + c, 2 + t);
    vec![
        PauliString::on(4, &[c, t, rc], Pauli::X),
        PauliString::on(4, &[c, rc], Pauli::Z),
        PauliString::on(4, &[t, rt], Pauli::X),
        PauliString::on(4, &[c, t, rt], Pauli::Z),
    ]
}

/// True when a Pauli on the first `m` qubits maps `actual` onto `ideal`.
/// Both must be in canonical form over the same `2m` qubits.
pub fn equal_up_to_frame(actual: &[PauliString], ideal: &[PauliString], m: usize) -> bool {
    if actual.len() != ideal.len() {
        return false;
    }
    let mut flips = Vec::with_capacity(actual.len());
    for (a, b) in actual.iter().zip(ideal) {
        let (mut ua, mut ub) = (a.clone(), b.clone());
        ua.set_negative(false);
        ub.set_negative(false);
        if ua != ub {
            return false;
        }
        flips.push(a.is_negative() != b.is_negative());
    }
    let n = 2 * m;
    let paulis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    (0..4usize.pow(m as u32)).any(|code| {
        let mut p = PauliString::identity(n);
        let mut c = code;
        for q in 0..m {
            p.set(q, paulis[c % 4]);
            c /= 4;
        }
        actual
            .iter()
            .zip(&flips)
            .all(|(row, &f)| row.commutes(&p) != f)
    })
}

fn canonical_data(state: &StabilizerState, m: usize) -> Vec<PauliString> {
    let keep: Vec<usize> = (0..2 * m).collect();
    canonical_subgroup(state.stabilizers(), &keep)
}

/// Whether `state` (data `0..m`, refs `m..2m`) equals the ideal action up
/// to a Pauli frame. Measurements accept either recorded outcome.
pub fn matches_ideal(state: &StabilizerState, m: usize, ideal: &[Vec<PauliString>]) -> bool {
    let actual = canonical_data(state, m);
    let idx: Vec<usize> = (0..2 * m).collect();
    ideal.iter().any(|rows| {
        let canon = crate::stabilizer::rref(rows, &idx);
        equal_up_to_frame(&actual, &canon, m)
    })
}

pub fn ideal_candidates(op: LogicalOp) -> Vec<Vec<PauliString>> {
    match op {
        LogicalOp::Mxx => vec![
            ideal_measurement(2, Pauli::X, false),
            ideal_measurement(2, Pauli::X, true),
        ],
        LogicalOp::Mzz => vec![
            ideal_measurement(2, Pauli::Z, false),
            ideal_measurement(2, Pauli::Z, true),
        ],
        LogicalOp::Cnot { control } => vec![ideal_cnot(control)],
    }
}

/// Simulates the chain with `n_seeds` outcome draws and checks each run
/// against `expected`.
pub fn verify_chain_action(chain: &MeasChain, expected: LogicalOp, n_seeds: u64) -> Result<bool> {
    let ideal = ideal_candidates(expected);
    for seed in 0..n_seeds {
        let state = simulate_chain(chain, seed)?;
        if !matches_ideal(&state, 2, &ideal) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn verify_path_action(path: &Path3D, expected: LogicalOp, n_seeds: u64) -> Result<bool> {
    verify_chain_action(&path_to_chain(path)?, expected, n_seeds)
}

/// Checks `ops` against `expected` on every feasible outcome branch.
/// Returns the number of feasible branches, or `None` on a mismatch.
pub fn verify_all_branches(
    ops: &[CircuitOp],
    n_qubits: usize,
    m: usize,
    expected: &[Vec<PauliString>],
) -> Result<Option<usize>> {
    let k = count_measurements(ops);
    if k > 20 {
        return Err(Error::InvalidArgument(format!("{k} measurements is too many to enumerate")));
    }
    let mut feasible = 0;
    for mask in 0..1u64 << k {
        let mut state = choi_state(m, n_qubits);
        match run_circuit(&mut state, ops, Outcomes::Forced(mask)) {
            Ok(_) => {}
            Err(Error::Semantic(_)) => continue,
            Err(e) => return Err(e),
        }
        feasible += 1;
        if !matches_ideal(&state, m, expected) {
            return Ok(None);
        }
    }
    Ok(Some(feasible))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::VoxelCoord;

    fn v(x: u32, y: u32, t: u32) -> VoxelCoord {
        VoxelCoord::new(x, y, t)
    }

    fn link(basis: TwoBodyBasis, t: u32) -> Link {
        Link { basis, t }
    }

    #[test]
    fn flat_zz_chain() {
        let p = Path3D::new(vec![v(0, 0, 0), v(1, 0, 0), v(2, 0, 0)]);
        let chain = path_to_chain(&p).unwrap();
        assert_eq!(chain.links, vec![link(TwoBodyBasis::ZZ, 0)]);
        assert!(chain.ancillas.is_empty());
        assert_eq!(simplify_chain(&chain).unwrap(), LogicalOp::Mzz);
        assert!(verify_path_action(&p, LogicalOp::Mzz, 4).unwrap());
        assert!(!verify_path_action(&p, LogicalOp::Mxx, 1).unwrap());
    }

    #[test]
    fn two_kink_x_chain() {
        // Leaves (0,0) southwards (X), kinks east, then kinks south again.
        let p = Path3D::new(vec![
            v(0, 0, 0),
            v(0, 1, 0),
            v(0, 1, 1),
            v(1, 1, 1),
            v(2, 1, 1),
            v(2, 1, 2),
            v(2, 2, 2),
        ]);
        let chain = path_to_chain(&p).unwrap();
        assert_eq!(chain.bases(), vec![TwoBodyBasis::XX, TwoBodyBasis::ZZ, TwoBodyBasis::XX]);
        assert_eq!(chain.ancillas[0].init, InitBasis::Z0);
        assert_eq!(chain.ancillas[0].readout, SingleBasis::X);
        assert_eq!(chain.ancillas[1].init, InitBasis::XPlus);
        assert_eq!(chain.ancillas[1].readout, SingleBasis::Z);
        assert_eq!(simplify_chain(&chain).unwrap(), LogicalOp::Mxx);
        assert!(verify_path_action(&p, LogicalOp::Mxx, 8).unwrap());
    }

    #[test]
    fn one_kink_cnot() {
        // Z exit eastwards, kink, X entry from the north.
        let p = Path3D::new(vec![v(0, 0, 0), v(1, 0, 0), v(1, 0, 1), v(1, 1, 1), v(1, 2, 1)]);
        let chain = path_to_chain(&p).unwrap();
        assert_eq!(simplify_chain(&chain).unwrap(), LogicalOp::Cnot { control: 0 });
        assert!(verify_path_action(&p, LogicalOp::Cnot { control: 0 }, 8).unwrap());
        assert!(!verify_path_action(&p, LogicalOp::Cnot { control: 1 }, 2).unwrap());
    }

    #[test]
    fn parity_mismatch_is_rejected() {
        let p = Path3D::new(vec![
            v(0, 0, 0),
            v(1, 0, 0),
            v(1, 0, 1),
            v(1, 1, 1),
            v(2, 1, 1),
        ]);
        assert!(matches!(path_to_chain(&p), Err(Error::Semantic(_))));
    }

    #[test]
    fn empty_chain_keeps_bell_pairs() {
        let chain = MeasChain::from_links(vec![], vec![]).unwrap();
        let s = simulate_chain(&chain, 3).unwrap();
        let bell = vec![
            PauliString::parse("ZIZI"),
            PauliString::parse("XIXI"),
            PauliString::parse("IZIZ"),
            PauliString::parse("IXIX"),
        ];
        assert!(matches_ideal(&s, 2, &[bell]));
        assert!(simplify_chain(&chain).is_err());
    }

    #[test]
    fn outcome_independence() {
        let chain = MeasChain::from_links(
            vec![link(TwoBodyBasis::ZZ, 0), link(TwoBodyBasis::XX, 1)],
            vec![CellCoord::new(1, 0)],
        )
        .unwrap();
        let mut groups = Vec::new();
        for seed in 0..6 {
            let mut g = canonical_data(&simulate_chain(&chain, seed).unwrap(), 2);
            g.iter_mut().for_each(|r| r.set_negative(false));
            groups.push(g);
        }
        assert!(groups.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn single_zz_matches_projector() {
        let chain = MeasChain::from_links(vec![link(TwoBodyBasis::ZZ, 0)], vec![]).unwrap();
        let ops = chain_circuit(&chain);
        let mut s = choi_state(2, 4);
        run_circuit(&mut s, &ops, Outcomes::Forced(0)).unwrap();
        let actual = canonical_data(&s, 2);
        let ideal = crate::stabilizer::rref(&ideal_measurement(2, Pauli::Z, false), &[0, 1, 2, 3]);
        assert_eq!(actual, ideal);
    }
}
