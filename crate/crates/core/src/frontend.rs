//! Clifford+T circuits to lattice-surgery instruction streams, and
//! placement of symbols onto the qubit plane.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CellCoord, CellKind, QubitPlane};
use crate::program::{Basis, InstructionList, QubitId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    T,
    Tdg,
    CX,
    CCX,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::T => "T",
            GateKind::Tdg => "Tdg",
            GateKind::CX => "CX",
            GateKind::CCX => "CCX",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::CX => 2,
            GateKind::CCX => 3,
            _ => 1,
        }
    }

    fn parse(name: &str) -> Option<GateKind> {
        use GateKind::*;
        [X, Y, Z, H, S, T, Tdg, CX, CCX].into_iter().find(|k| k.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub operands: Vec<String>,
}

impl Gate {
    pub fn new(kind: GateKind, operands: &[&str]) -> Result<Gate> {
        if operands.len() != kind.arity() {
            return Err(Error::InvalidArgument(format!(
                "{} takes {} operands, got {}",
                kind.name(),
                kind.arity(),
                operands.len()
            )));
        }
        Ok(Gate {
            kind,
            operands: operands.iter().map(|s| s.to_string()).collect(),
        })
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind.name(), self.operands.join(","))
    }
}

#[derive(Serialize, Deserialize)]
struct GateLine {
    g: String,
    q: Vec<String>,
}

pub fn parse_circuit<R: BufRead>(reader: R) -> Result<Vec<Gate>> {
    let mut gates = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: GateLine = serde_json::from_str(line.trim()).map_err(|e| Error::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        let kind = GateKind::parse(&parsed.g).ok_or_else(|| {
            Error::UnsupportedGate(format!("line {}: gate `{}`", n + 1, parsed.g))
        })?;
        let ops: Vec<&str> = parsed.q.iter().map(String::as_str).collect();
        let gate = Gate::new(kind, &ops).map_err(|e| Error::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        if ops.iter().enumerate().any(|(i, a)| ops[i + 1..].contains(a)) {
            return Err(Error::Parse {
                line: n + 1,
                message: "repeated operand".into(),
            });
        }
        gates.push(gate);
    }
    Ok(gates)
}

pub fn write_circuit<W: Write>(gates: &[Gate], mut w: W) -> Result<()> {
    for g in gates {
        let line = GateLine {
            g: g.kind.name().into(),
            q: g.operands.clone(),
        };
        serde_json::to_writer(&mut w, &line).map_err(|e| Error::Io(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerMode {
    /// CX becomes an MZZ/MXX pair through a per-qubit ancilla symbol.
    Measurements,
    /// CX stays a single CNOT instruction.
    Cnot,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoweredProgram {
    pub instrs: InstructionList,
    pub factories: usize,
    /// Gates absorbed into the Pauli frame or treated as free.
    pub dropped: Vec<Gate>,
}

pub fn factory_symbol(i: usize) -> String {
    format!("f{i}")
}

pub fn ancilla_symbol(q: &str) -> String {
    format!("anc_{q}")
}

/// Toffoli as 6 CX and 7 T/Tdg gates plus two H on the target.
pub fn expand_ccx(a: &str, b: &str, c: &str) -> Vec<Gate> {
    use GateKind::*;
    let g = |k: GateKind, ops: &[&str]| Gate::new(k, ops).expect("fixed arity");
    vec![
        g(H, &[c]),
        g(CX, &[b, c]),
        g(Tdg, &[c]),
        g(CX, &[a, c]),
        g(T, &[c]),
        g(CX, &[b, c]),
        g(Tdg, &[c]),
        g(CX, &[a, c]),
        g(T, &[b]),
        g(T, &[c]),
        g(H, &[c]),
        g(CX, &[a, b]),
        g(T, &[a]),
        g(Tdg, &[b]),
        g(CX, &[a, b]),
    ]
}

pub fn lower(circuit: &[Gate], mode: LowerMode, factories: usize) -> Result<LoweredProgram> {
    let mut out = InstructionList::new();
    let mut dropped = Vec::new();
    let mut next_factory = 0;
    let mut stack: Vec<Gate> = circuit.iter().rev().cloned().collect();
    while let Some(gate) = stack.pop() {
        let ops: Vec<&str> = gate.operands.iter().map(String::as_str).collect();
        match gate.kind {
            GateKind::X | GateKind::Y | GateKind::Z | GateKind::H | GateKind::S => {
                dropped.push(gate);
            }
            GateKind::T | GateKind::Tdg => {
                if factories == 0 {
                    return Err(Error::InvalidArgument(
                        "T gates need at least one magic-state factory".into(),
                    ));
                }
                let f = factory_symbol(next_factory);
                next_factory = (next_factory + 1) % factories;
                out.push(Basis::ZZ, &[ops[0], &f])?;
            }
            GateKind::CX => match mode {
                LowerMode::Measurements => {
                    let anc = ancilla_symbol(ops[0]);
                    out.push(Basis::ZZ, &[ops[0], &anc])?;
                    out.push(Basis::XX, &[&anc, ops[1]])?;
                }
                LowerMode::Cnot => {
                    out.push(Basis::Cnot, &ops)?;
                }
            },
            GateKind::CCX => {
                stack.extend(expand_ccx(ops[0], ops[1], ops[2]).into_iter().rev());
            }
        }
    }
    out.header.factories = factories;
    out.header.factory_symbols = (0..factories).map(factory_symbol).collect();
    Ok(LoweredProgram {
        instrs: out,
        factories,
        dropped,
    })
}

/// Smallest plane size whose data positions hold `n` symbols.
pub fn min_plane_size(n: usize) -> u32 {
    let mut s = 1u32;
    while ((s * s) as usize) < n {
        s += 1;
    }
    s
}

/// Row-major placement of the program's symbols. Header-listed qubits come
/// first in header order, then other non-factory symbols in order of first
/// appearance; factories follow (or precede, with `factories_first`).
pub fn place(
    instrs: &InstructionList,
    plane_size: Option<u32>,
    factories_first: bool,
) -> Result<QubitPlane> {
    let header = &instrs.header;
    let mut factory_syms: Vec<String> = header.factory_symbols.clone();
    while factory_syms.len() < header.factories {
        factory_syms.push(factory_symbol(factory_syms.len()));
    }
    let mut qubit_syms: Vec<String> = Vec::new();
    let mut listed: HashMap<&str, ()> = HashMap::new();
    for s in header.qubits.iter().chain(instrs.symbols()) {
        if factory_syms.contains(s) || listed.contains_key(s.as_str()) {
            continue;
        }
        listed.insert(s, ());
        qubit_syms.push(s.clone());
    }
    let order: Vec<(&String, CellKind)> = if factories_first {
        factory_syms
            .iter()
            .map(|s| (s, CellKind::Factory))
            .chain(qubit_syms.iter().map(|s| (s, CellKind::Data)))
            .collect()
    } else {
        qubit_syms
            .iter()
            .map(|s| (s, CellKind::Data))
            .chain(factory_syms.iter().map(|s| (s, CellKind::Factory)))
            .collect()
    };
    let size = plane_size
        .or(header.plane_size)
        .unwrap_or_else(|| min_plane_size(order.len()).max(1));
    let mut plane = QubitPlane::new(size)?;
    let positions = plane.data_positions();
    if order.len() > positions.len() {
        return Err(Error::Capacity {
            needed: order.len(),
            available: positions.len(),
        });
    }
    let mut slot: Vec<Option<(CellCoord, CellKind)>> = vec![None; instrs.symbols().len()];
    for ((sym, kind), cell) in order.iter().zip(&positions) {
        match instrs.qubit(sym) {
            Some(q) => slot[q.index()] = Some((*cell, *kind)),
            None => plane.set_kind(*cell, *kind)?,
        }
    }
    for (i, s) in slot.into_iter().enumerate() {
        let (cell, kind) = s.ok_or_else(|| Error::Internal(format!("symbol {i} unplaced")))?;
        plane.bind(QubitId(i as u32), cell, kind)?;
    }
    Ok(plane)
}
