//! Instruction lists, their JSON-lines encoding, and the dependency DAG
//! used for instruction look-ahead.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interned logical-qubit symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitId(pub u32);

impl QubitId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Lattice-surgery basis. `XX`/`ZZ` instructions with more than two
/// operands are many-body measurements of the same Pauli on every operand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    XX,
    ZZ,
    Cnot,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instruction {
    pub index: usize,
    pub basis: Basis,
    /// For `Cnot`, `[control, target]`.
    pub qubits: Vec<QubitId>,
}

impl Instruction {
    pub fn q1(&self) -> QubitId {
        self.qubits[0]
    }

    pub fn q2(&self) -> QubitId {
        self.qubits[1]
    }

    pub fn is_many_body(&self) -> bool {
        self.qubits.len() > 2
    }
}

/// Optional first line of an instruction file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramHeader {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane_size: Option<u32>,
    #[serde(default)]
    pub factories: usize,
    /// Placement order for non-factory symbols; unlisted symbols follow in
    /// first-appearance order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub qubits: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factory_symbols: Vec<String>,
}

impl ProgramHeader {
    fn is_empty(&self) -> bool {
        *self == ProgramHeader::default()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InstructionList {
    symbols: Vec<String>,
    lookup: HashMap<String, QubitId>,
    instrs: Vec<Instruction>,
    pub header: ProgramHeader,
}

impl InstructionList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, symbol: &str) -> QubitId {
        if let Some(&q) = self.lookup.get(symbol) {
            return q;
        }
        let q = QubitId(self.symbols.len() as u32);
        self.symbols.push(symbol.to_string());
        self.lookup.insert(symbol.to_string(), q);
        q
    }

    pub fn qubit(&self, symbol: &str) -> Option<QubitId> {
        self.lookup.get(symbol).copied()
    }

    pub fn symbol(&self, q: QubitId) -> &str {
        &self.symbols[q.index()]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    /// Appends an instruction over symbol names.
    pub fn push(&mut self, basis: Basis, operands: &[&str]) -> Result<usize> {
        let qubits: Vec<QubitId> = operands.iter().map(|s| self.intern(s)).collect();
        self.push_ids(basis, qubits)
    }

    pub fn push_ids(&mut self, basis: Basis, qubits: Vec<QubitId>) -> Result<usize> {
        let index = self.instrs.len();
        if qubits.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "instruction {index} needs at least two operands"
            )));
        }
        if basis == Basis::Cnot && qubits.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "CNOT instruction {index} takes exactly two operands"
            )));
        }
        for (a, qa) in qubits.iter().enumerate() {
            if qubits[a + 1..].contains(qa) {
                return Err(Error::InvalidArgument(format!(
                    "instruction {index} repeats operand {}",
                    self.symbols.get(qa.index()).map(String::as_str).unwrap_or("?")
                )));
            }
        }
        self.instrs.push(Instruction {
            index,
            basis,
            qubits,
        });
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instrs
    }

    pub fn get(&self, i: usize) -> &Instruction {
        &self.instrs[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Instruction> {
        self.instrs.iter()
    }
}

#[derive(Serialize, Deserialize)]
struct InstrLine {
    op: String,
    q: Vec<String>,
}

fn op_name(basis: Basis, arity: usize) -> String {
    match basis {
        Basis::Cnot => "CX".to_string(),
        Basis::XX => format!("M{}", "X".repeat(arity)),
        Basis::ZZ => format!("M{}", "Z".repeat(arity)),
    }
}

fn parse_op(op: &str, arity: usize) -> std::result::Result<Basis, String> {
    if op == "CX" {
        return if arity == 2 {
            Ok(Basis::Cnot)
        } else {
            Err(format!("CX takes 2 operands, got {arity}"))
        };
    }
    let paulis = op
        .strip_prefix('M')
        .filter(|rest| rest.len() >= 2)
        .ok_or_else(|| format!("unknown op `{op}`"))?;
    let basis = if paulis.bytes().all(|b| b == b'X') {
        Basis::XX
    } else if paulis.bytes().all(|b| b == b'Z') {
        Basis::ZZ
    } else {
        return Err(format!("unknown op `{op}`"));
    };
    if paulis.len() != arity {
        return Err(format!("`{op}` expects {} operands, got {arity}", paulis.len()));
    }
    Ok(basis)
}

impl InstructionList {
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut list = InstructionList::new();
        let mut seen_instr = false;
        for (n, line) in reader.lines().enumerate() {
            let line_no = n + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let value: serde_json::Value =
                serde_json::from_str(trimmed).map_err(|e| Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
            if value.get("op").is_none() {
                if seen_instr {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "header must precede instructions".into(),
                    });
                }
                list.header = serde_json::from_value(value).map_err(|e| Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
                continue;
            }
            seen_instr = true;
            let parsed: InstrLine = serde_json::from_value(value).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let basis = parse_op(&parsed.op, parsed.q.len()).map_err(|message| Error::Parse {
                line: line_no,
                message,
            })?;
            let operands: Vec<&str> = parsed.q.iter().map(String::as_str).collect();
            list.push(basis, &operands).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        Ok(list)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        if !self.header.is_empty() {
            serde_json::to_writer(&mut w, &self.header).map_err(|e| Error::Io(e.to_string()))?;
            w.write_all(b"\n")?;
        }
        for instr in &self.instrs {
            let line = InstrLine {
                op: op_name(instr.basis, instr.qubits.len()),
                q: instr.qubits.iter().map(|q| self.symbol(*q).to_string()).collect(),
            };
            serde_json::to_writer(&mut w, &line).map_err(|e| Error::Io(e.to_string()))?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub fn read_instructions(path: &std::path::Path) -> Result<InstructionList> {
    let f = std::fs::File::open(path)?;
    InstructionList::read_from(std::io::BufReader::new(f))
}

pub fn write_instructions(list: &InstructionList, path: &std::path::Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    list.write_to(&mut w)?;
    w.flush()?;
    Ok(())
}

impl fmt::Display for InstructionList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = Vec::new();
        self.write_to(&mut buf).map_err(|_| fmt::Error)?;
        f.write_str(&String::from_utf8_lossy(&buf))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NodeState {
    Waiting,
    Ready,
    Popped,
    Executed,
}

/// Instruction dependency DAG. Each instruction is a child of the latest
/// earlier instruction on each of its operands; ready instructions sit in
/// an ordered queue keyed by `(priority, index)`.
#[derive(Clone, Debug)]
pub struct DependencyGraph {
    children: Vec<Vec<usize>>,
    pending_parents: Vec<u32>,
    state: Vec<NodeState>,
    key: Vec<u64>,
    ready: BTreeSet<(u64, usize)>,
    remaining: usize,
    queue_ops: usize,
}

impl DependencyGraph {
    pub fn build(instrs: &InstructionList) -> Self {
        Self::build_keyed(instrs, |_| 0)
    }

    /// Builds the graph and keys every initially ready instruction with
    /// `key_of`.
    pub fn build_keyed(instrs: &InstructionList, mut key_of: impl FnMut(usize) -> u64) -> Self {
        let m = instrs.len();
        let mut children = vec![Vec::new(); m];
        let mut pending_parents = vec![0u32; m];
        let mut last_on_qubit: HashMap<QubitId, usize> = HashMap::new();
        for instr in instrs.iter() {
            let mut parents: Vec<usize> = Vec::with_capacity(instr.qubits.len());
            for q in &instr.qubits {
                if let Some(&p) = last_on_qubit.get(q) {
                    if !parents.contains(&p) {
                        parents.push(p);
                    }
                }
                last_on_qubit.insert(*q, instr.index);
            }
            for p in parents {
                children[p].push(instr.index);
                pending_parents[instr.index] += 1;
            }
        }
        let mut g = Self {
            children,
            pending_parents,
            state: vec![NodeState::Waiting; m],
            key: vec![0; m],
            ready: BTreeSet::new(),
            remaining: m,
            queue_ops: 0,
        };
        for i in 0..m {
            if g.pending_parents[i] == 0 {
                let k = key_of(i);
                g.enqueue(i, k);
            }
        }
        g
    }

    fn enqueue(&mut self, i: usize, key: u64) {
        self.state[i] = NodeState::Ready;
        self.key[i] = key;
        self.ready.insert((key, i));
        self.queue_ops += 1;
    }

    pub fn is_empty(&self) -> bool {
        self.remaining == 0
    }

    pub fn len(&self) -> usize {
        self.state.len()
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn unexecuted_parent_count(&self, i: usize) -> u32 {
        self.pending_parents[i]
    }

    /// Total insertions and removals performed on the ready queue.
    pub fn queue_operations(&self) -> usize {
        self.queue_ops
    }

    /// Ready, unexecuted instructions in ascending index order.
    pub fn executable_indices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.ready.iter().map(|&(_, i)| i).collect();
        out.sort_unstable();
        out
    }

    /// Removes and returns the ready instruction with minimum
    /// `(key, index)`.
    pub fn pop_min_height(&mut self) -> Option<usize> {
        let (_, i) = self.ready.pop_first()?;
        self.queue_ops += 1;
        self.state[i] = NodeState::Popped;
        Some(i)
    }

    pub fn mark_executed(&mut self, i: usize) -> Result<Vec<usize>> {
        self.mark_executed_keyed(i, |_| 0)
    }

    /// Marks `i` executed and enqueues children whose last parent it was,
    /// keyed by `key_of`. Returns the newly ready indices.
    pub fn mark_executed_keyed(
        &mut self,
        i: usize,
        mut key_of: impl FnMut(usize) -> u64,
    ) -> Result<Vec<usize>> {
        match self.state.get(i) {
            None => return Err(Error::InvalidArgument(format!("no instruction {i}"))),
            Some(NodeState::Executed) => return Err(Error::AlreadyExecuted(i)),
            Some(NodeState::Waiting) => return Err(Error::NotReady(i)),
            Some(NodeState::Ready) => {
                self.ready.remove(&(self.key[i], i));
                self.queue_ops += 1;
            }
            Some(NodeState::Popped) => {}
        }
        self.state[i] = NodeState::Executed;
        self.remaining -= 1;
        let mut newly = Vec::new();
        for c in self.children[i].clone() {
            self.pending_parents[c] -= 1;
            if self.pending_parents[c] == 0 {
                let k = key_of(c);
                self.enqueue(c, k);
                newly.push(c);
            }
        }
        Ok(newly)
    }

    pub fn is_executed(&self, i: usize) -> bool {
        self.state[i] == NodeState::Executed
    }
}
