//! Small stabilizer-tableau simulator with destabilizer rows, arbitrary
//! Pauli-product measurements and canonical forms for group comparison.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Hermitian Pauli product `±P_0 ⊗ … ⊗ P_{n-1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    neg: bool,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = n.div_ceil(64).max(1);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
            neg: false,
        }
    }

    /// `P` on each listed qubit, identity elsewhere.
    pub fn on(n: usize, qubits: &[usize], p: Pauli) -> Self {
        let mut s = Self::identity(n);
        for &q in qubits {
            s.set(q, p);
        }
        s
    }

    pub fn parse(text: &str) -> Self {
        let (neg, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let mut s = Self::identity(body.len());
        for (q, ch) in body.chars().enumerate() {
            s.set(
                q,
                match ch {
                    'X' => Pauli::X,
                    'Y' => Pauli::Y,
                    'Z' => Pauli::Z,
                    _ => Pauli::I,
                },
            );
        }
        s.neg = neg;
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    pub fn set_negative(&mut self, neg: bool) {
        self.neg = neg;
    }

    pub fn get(&self, q: usize) -> Pauli {
        let (w, b) = (q / 64, q % 64);
        match (self.x[w] >> b & 1, self.z[w] >> b & 1) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        let (xb, zb) = match p {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        };
        self.x[w] = if xb { self.x[w] | m } else { self.x[w] & !m };
        self.z[w] = if zb { self.z[w] | m } else { self.z[w] & !m };
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.x[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.z[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        let mut acc = 0u32;
        for w in 0..self.x.len() {
            acc ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones() & 1;
        }
        acc == 0
    }

    /// `self ← self · other`, returning the power of `i` of the product's
    /// phase (0 or 2 for commuting factors).
    fn mul_phase(&mut self, other: &PauliString) -> u32 {
        let mut plus = 0u32;
        let mut minus = 0u32;
        for w in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            let p = (x1 & z1 & z2 & !x2) | (x1 & !z1 & x2 & z2) | (!x1 & z1 & x2 & !z2);
            let m = (x1 & z1 & x2 & !z2) | (x1 & !z1 & !x2 & z2) | (!x1 & z1 & x2 & z2);
            plus += p.count_ones();
            minus += m.count_ones();
            self.x[w] ^= x2;
            self.z[w] ^= z2;
        }
        let e = (2 * self.neg as u32 + 2 * other.neg as u32 + plus + 4 * self.n as u32 - minus) % 4;
        self.neg = e >= 2;
        e
    }

    /// Product with a commuting Pauli.
    pub fn mul_assign(&mut self, other: &PauliString) {
        let e = self.mul_phase(other);
        debug_assert!(e % 2 == 0, "product of anticommuting Paulis");
    }

    /// Restriction to the listed qubits, in the given order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        let mut out = PauliString::identity(qubits.len());
        for (k, &q) in qubits.iter().enumerate() {
            out.set(k, self.get(q));
        }
        out.neg = self.neg;
        out
    }

    pub fn supported_on_any(&self, qubits: &[usize]) -> bool {
        qubits.iter().any(|&q| self.get(q) != Pauli::I)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.neg { "-" } else { "+" })?;
        for q in 0..self.n {
            f.write_str(match self.get(q) {
                Pauli::I => "I",
                Pauli::X => "X",
                Pauli::Y => "Y",
                Pauli::Z => "Z",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Pure stabilizer state on `n` qubits.
#[derive(Clone, Debug)]
pub struct StabilizerState {
    n: usize,
    stab: Vec<PauliString>,
    destab: Vec<PauliString>,
}

impl StabilizerState {
    /// `|0…0⟩`.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            stab: (0..n).map(|q| PauliString::on(n, &[q], Pauli::Z)).collect(),
            destab: (0..n).map(|q| PauliString::on(n, &[q], Pauli::X)).collect(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stab
    }

    /// Sign with which `p` belongs to the group if it commutes with every
    /// stabilizer, `None` otherwise.
    pub fn expectation(&self, p: &PauliString) -> Option<bool> {
        if self.stab.iter().any(|s| !s.commutes(p)) {
            return None;
        }
        let mut acc = PauliString::identity(self.n);
        for i in 0..self.n {
            if !self.destab[i].commutes(p) {
                acc.mul_assign(&self.stab[i]);
            }
        }
        debug_assert_eq!(acc.x, p.x);
        debug_assert_eq!(acc.z, p.z);
        Some(acc.neg != p.neg)
    }

    /// Measures `p`. Returns `true` for outcome −1. `forced` fixes a random
    /// outcome; forcing the impossible value of a deterministic outcome is
    /// an error.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        p: &PauliString,
        forced: Option<bool>,
        rng: &mut R,
    ) -> Result<bool> {
        let Some(k) = self.stab.iter().position(|s| !s.commutes(p)) else {
            let outcome = self.expectation(p).ok_or_else(|| {
                Error::Internal("measured operator outside a maximal group".into())
            })?;
            if forced.is_some_and(|f| f != outcome) {
                return Err(Error::Semantic("forced outcome has zero probability".into()));
            }
            return Ok(outcome);
        };
        let pivot = self.stab[k].clone();
        for i in 0..self.n {
            if i != k && !self.stab[i].commutes(p) {
                self.stab[i].mul_assign(&pivot);
            }
            if i != k && !self.destab[i].commutes(p) {
                self.destab[i].mul_phase(&pivot);
            }
        }
        let outcome = forced.unwrap_or_else(|| rng.gen());
        self.destab[k] = pivot;
        let mut s = p.clone();
        s.neg = p.neg ^ outcome;
        self.stab[k] = s;
        Ok(outcome)
    }
}

/// Reduced row-echelon form of a commuting generator set, with pivots
/// taken qubit by qubit in `order` (X bit before Z bit). Identity rows are
/// dropped.
pub fn rref(rows: &[PauliString], order: &[usize]) -> Vec<PauliString> {
    let mut rows: Vec<PauliString> = rows.to_vec();
    let mut rank = 0;
    for &q in order {
        for use_z in [false, true] {
            let bit = |r: &PauliString| if use_z { r.z_bit(q) } else { r.x_bit(q) };
            let Some(p) = (rank..rows.len()).find(|&r| bit(&rows[r])) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && bit(row) {
                    row.mul_assign(&pivot);
                }
            }
            rank += 1;
        }
    }
    rows.truncate(rank);
    rows
}

/// Canonical generators of the subgroup supported on `keep`, written over
/// `keep` in order. Qubits outside `keep` are eliminated first.
pub fn canonical_subgroup(rows: &[PauliString], keep: &[usize]) -> Vec<PauliString> {
    let n = rows.first().map_or(0, |r| r.num_qubits());
    let mut order: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let dropped = order.clone();
    order.extend_from_slice(keep);
    let reduced = rref(rows, &order);
    let kept: Vec<PauliString> = reduced
        .into_iter()
        .filter(|r| !r.supported_on_any(&dropped))
        .map(|r| r.restrict(keep))
        .collect();
    let idx: Vec<usize> = (0..keep.len()).collect();
    rref(&kept, &idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn products_and_phases() {
        let mut a = PauliString::parse("XX");
        a.mul_assign(&PauliString::parse("ZZ"));
        assert_eq!(a, PauliString::parse("-YY"));
        let mut b = PauliString::parse("XZ");
        b.mul_assign(&PauliString::parse("ZX"));
        assert_eq!(b, PauliString::parse("YY"));
        assert!(!PauliString::parse("XI").commutes(&PauliString::parse("ZI")));
        assert!(PauliString::parse("XX").commutes(&PauliString::parse("ZZ")));
    }

    #[test]
    fn bell_pair_by_forced_measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = StabilizerState::new(2);
        let r = s.measure(&PauliString::parse("XX"), Some(false), &mut rng).unwrap();
        assert!(!r);
        assert_eq!(s.expectation(&PauliString::parse("ZZ")), Some(false));
        assert_eq!(s.expectation(&PauliString::parse("YY")), Some(true));
        assert_eq!(s.expectation(&PauliString::parse("ZI")), None);
        assert!(s.measure(&PauliString::parse("ZZ"), Some(true), &mut rng).is_err());
    }

    #[test]
    fn repeated_measurement_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut s = StabilizerState::new(3);
        let p = PauliString::parse("XYZ");
        let first = s.measure(&p, None, &mut rng).unwrap();
        for _ in 0..5 {
            assert_eq!(s.measure(&p, None, &mut rng).unwrap(), first);
        }
    }

    #[test]
    fn canonical_form_is_basis_independent() {
        let a = vec![PauliString::parse("XXI"), PauliString::parse("ZZI"), PauliString::parse("IIZ")];
        let mut b1 = a[0].clone();
        b1.mul_assign(&a[1]);
        let mut b2 = a[1].clone();
        b2.mul_assign(&a[2]);
        let b = vec![b2, b1, a[2].clone()];
        assert_eq!(rref(&a, &[0, 1, 2]), rref(&b, &[0, 1, 2]));
        let sub = canonical_subgroup(&a, &[0, 1]);
        assert_eq!(sub, rref(&[PauliString::parse("XX"), PauliString::parse("ZZ")], &[0, 1]));
    }
}
