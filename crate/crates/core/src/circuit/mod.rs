//! Immutable circuit representation.
//!
//! A [`Circuit`] is an ordered list of [`Op`]s over a fixed number of qubits.
//! All public operations return new values; [`CircuitBuilder`] exists for
//! constructing long gate sequences without repeated copying, and applies the
//! same validation.

mod gate;
pub mod qasm;
pub mod synth;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::state::StateVector;

pub use gate::{Gate, GateKind, Mat2};

/// Qubit count above which circuits are rejected.
pub const MAX_QUBITS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("circuit must have between 1 and {MAX_QUBITS} qubits, got {0}")]
    QubitCount(usize),
    #[error("qubit index {index} out of range for {num_qubits}-qubit circuit")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("qubit indices must be distinct, got {0:?}")]
    DuplicateQubits(Vec<usize>),
    #[error("{kind} expects {expected} qubit(s), got {got}")]
    Arity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("{kind} expects {expected} parameter(s), got {got}")]
    ParamCount {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("parameter {0} is not finite")]
    NonFiniteParam(f64),
    #[error("qubit {0} has already been measured")]
    AfterMeasure(usize),
    #[error("classical bit {0} is already in use")]
    ClbitInUse(usize),
    #[error("qubit {0} already has operations; initialization must come first")]
    InitializeTouched(usize),
    #[error("state of length {len} cannot initialize {targets} qubit(s)")]
    InitializeDimension { len: usize, targets: usize },
    #[error("initialization state has norm squared {0}, expected 1")]
    InitializeNorm(f64),
    #[error("qubit map must have {expected} entries, got {got}")]
    MapLength { expected: usize, got: usize },
    #[error("qubit map is not injective: {0:?}")]
    MapNotInjective(Vec<usize>),
    #[error("operation not supported here: {0}")]
    Unsupported(String),
}

/// Measurement basis. Non-Z bases are realised by rotations before a Z measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn as_char(self) -> char {
        match self {
            Basis::X => 'x',
            Basis::Y => 'y',
            Basis::Z => 'z',
        }
    }

    pub fn from_char(c: char) -> Option<Basis> {
        match c.to_ascii_lowercase() {
            'x' => Some(Basis::X),
            'y' => Some(Basis::Y),
            'z' => Some(Basis::Z),
            _ => None,
        }
    }

    fn tag(self) -> u8 {
        match self {
            Basis::X => 0,
            Basis::Y => 1,
            Basis::Z => 2,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char().to_ascii_uppercase())
    }
}

/// One element of a circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Op {
    Gate(Gate),
    /// Prepares `state` on `qubits` (sorted ascending; bit `i` of the state
    /// index is `qubits[i]`). The targets must be untouched beforehand.
    Initialize {
        state: StateVector,
        qubits: Vec<usize>,
    },
    /// Terminal Z measurement. `basis` records which rotation precedes it;
    /// the rotation gates themselves are already part of the op list.
    Measure {
        qubit: usize,
        basis: Basis,
        clbit: usize,
    },
}

/// SHA-256 over the canonical encoding of a circuit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CircuitDigest(pub [u8; 32]);

impl CircuitDigest {
    /// First eight bytes as a word, for seed derivation.
    pub fn word(&self) -> u64 {
        let mut w = [0u8; 8];
        w.copy_from_slice(&self.0[..8]);
        u64::from_le_bytes(w)
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for CircuitDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CircuitDigest({})", &self.to_hex()[..16])
    }
}

impl fmt::Display for CircuitDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<Op>,
    #[serde(skip)]
    touched: Vec<bool>,
    #[serde(skip)]
    measured: Vec<bool>,
    #[serde(skip)]
    clbits: Vec<usize>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self, CircuitError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(CircuitError::QubitCount(num_qubits));
        }
        Ok(Self {
            num_qubits,
            ops: Vec::new(),
            touched: vec![false; num_qubits],
            measured: vec![false; num_qubits],
            clbits: Vec::new(),
        })
    }

    /// Builds a circuit from a gate list, validating every gate.
    pub fn from_gates(num_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self, CircuitError> {
        let mut c = Self::new(num_qubits)?;
        for g in gates {
            c.push_gate(g)?;
        }
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn gates(&self) -> impl DoubleEndedIterator<Item = &Gate> {
        self.ops.iter().filter_map(|op| match op {
            Op::Gate(g) => Some(g),
            _ => None,
        })
    }

    pub fn has_measurements(&self) -> bool {
        self.ops.iter().any(|op| matches!(op, Op::Measure { .. }))
    }

    pub fn has_initialize(&self) -> bool {
        self.ops.iter().any(|op| matches!(op, Op::Initialize { .. }))
    }

    /// True if the circuit only contains gates.
    pub fn is_gate_only(&self) -> bool {
        self.ops.iter().all(|op| matches!(op, Op::Gate(_)))
    }

    /// (qubit, basis, clbit) of each measurement, in op order.
    pub fn measurements(&self) -> Vec<(usize, Basis, usize)> {
        self.ops
            .iter()
            .filter_map(|op| match op {
                Op::Measure { qubit, basis, clbit } => Some((*qubit, *basis, *clbit)),
                _ => None,
            })
            .collect()
    }

    pub fn is_measured(&self, qubit: usize) -> bool {
        self.measured.get(qubit).copied().unwrap_or(false)
    }

    pub fn append_gate(&self, gate: Gate) -> Result<Circuit, CircuitError> {
        let mut next = self.clone();
        next.push_gate(gate)?;
        Ok(next)
    }

    /// Prepares `state` on `targets`, which must not have been touched yet.
    pub fn initialize(&self, state: &StateVector, targets: &[usize]) -> Result<Circuit, CircuitError> {
        let mut next = self.clone();
        next.push_initialize(state.clone(), targets.to_vec())?;
        Ok(next)
    }

    /// Appends `other` with its qubit `i` mapped to `qubit_map[i]` (identity by default).
    pub fn compose(&self, other: &Circuit, qubit_map: Option<&[usize]>) -> Result<Circuit, CircuitError> {
        let map: Vec<usize> = match qubit_map {
            Some(m) => m.to_vec(),
            None => (0..other.num_qubits).collect(),
        };
        if map.len() != other.num_qubits {
            return Err(CircuitError::MapLength {
                expected: other.num_qubits,
                got: map.len(),
            });
        }
        for &q in &map {
            self.check_index(q)?;
        }
        if has_duplicates(&map) {
            return Err(CircuitError::MapNotInjective(map));
        }
        let mut next = self.clone();
        for op in &other.ops {
            match op {
                Op::Gate(g) => {
                    let qubits = g.qubits().iter().map(|&q| map[q]).collect();
                    next.push_gate(Gate::new(g.kind(), g.params().to_vec(), qubits)?)?;
                }
                Op::Initialize { state, qubits } => {
                    let mapped: Vec<usize> = qubits.iter().map(|&q| map[q]).collect();
                    next.push_initialize(state.clone(), mapped)?;
                }
                Op::Measure { qubit, basis, clbit } => {
                    next.push_measure(map[*qubit], *basis, *clbit)?;
                }
            }
        }
        Ok(next)
    }

    /// Appends the rotation that maps `basis` onto Z: nothing for Z, H for X,
    /// Sdg then H for Y.
    pub fn insert_basis_change(&self, qubit: usize, basis: Basis) -> Result<Circuit, CircuitError> {
        let mut next = self.clone();
        next.push_basis_change(qubit, basis)?;
        Ok(next)
    }

    /// Basis change followed by a terminal measurement into `clbit`.
    pub fn measure(&self, qubit: usize, basis: Basis, clbit: usize) -> Result<Circuit, CircuitError> {
        let mut next = self.clone();
        next.push_basis_change(qubit, basis)?;
        next.push_measure(qubit, basis, clbit)?;
        Ok(next)
    }

    /// The same gates applied in reverse order, each inverted.
    pub fn inverse(&self) -> Result<Circuit, CircuitError> {
        if !self.is_gate_only() {
            return Err(CircuitError::Unsupported(
                "only gate circuits can be inverted".into(),
            ));
        }
        let gates: Vec<Gate> = self.gates().rev().map(Gate::inverse).collect();
        Circuit::from_gates(self.num_qubits, gates)
    }

    /// Digest of the canonical encoding. Equal digests iff equal op lists
    /// (angles and amplitudes compared by exact bit pattern).
    pub fn canonical_hash(&self) -> CircuitDigest {
        let mut h = Sha256::new();
        h.update(b"qprop-circuit-v1");
        h.update((self.num_qubits as u64).to_le_bytes());
        h.update((self.ops.len() as u64).to_le_bytes());
        for op in &self.ops {
            match op {
                Op::Gate(g) => {
                    h.update([0u8, g.kind().tag()]);
                    h.update((g.params().len() as u64).to_le_bytes());
                    for p in g.params() {
                        h.update(p.to_bits().to_le_bytes());
                    }
                    h.update((g.qubits().len() as u64).to_le_bytes());
                    for q in g.qubits() {
                        h.update((*q as u64).to_le_bytes());
                    }
                }
                Op::Initialize { state, qubits } => {
                    h.update([1u8]);
                    h.update((qubits.len() as u64).to_le_bytes());
                    for q in qubits {
                        h.update((*q as u64).to_le_bytes());
                    }
                    for a in state.amplitudes() {
                        h.update(a.re.to_bits().to_le_bytes());
                        h.update(a.im.to_bits().to_le_bytes());
                    }
                }
                Op::Measure { qubit, basis, clbit } => {
                    h.update([2u8, basis.tag()]);
                    h.update((*qubit as u64).to_le_bytes());
                    h.update((*clbit as u64).to_le_bytes());
                }
            }
        }
        CircuitDigest(h.finalize().into())
    }

    fn check_index(&self, q: usize) -> Result<(), CircuitError> {
        if q >= self.num_qubits {
            Err(CircuitError::QubitOutOfRange {
                index: q,
                num_qubits: self.num_qubits,
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn push_gate(&mut self, gate: Gate) -> Result<(), CircuitError> {
        for &q in gate.qubits() {
            self.check_index(q)?;
            if self.measured[q] {
                return Err(CircuitError::AfterMeasure(q));
            }
        }
        for &q in gate.qubits() {
            self.touched[q] = true;
        }
        self.ops.push(Op::Gate(gate));
        Ok(())
    }

    pub(crate) fn push_initialize(&mut self, state: StateVector, targets: Vec<usize>) -> Result<(), CircuitError> {
        if state.len() != 1usize << targets.len().min(63) || targets.is_empty() {
            return Err(CircuitError::InitializeDimension {
                len: state.len(),
                targets: targets.len(),
            });
        }
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(CircuitError::InitializeNorm(norm));
        }
        for &q in &targets {
            self.check_index(q)?;
        }
        if has_duplicates(&targets) {
            return Err(CircuitError::DuplicateQubits(targets));
        }
        for &q in &targets {
            if self.touched[q] || self.measured[q] {
                return Err(CircuitError::InitializeTouched(q));
            }
        }
        let (state, qubits) = sort_targets(state, targets);
        for &q in &qubits {
            self.touched[q] = true;
        }
        self.ops.push(Op::Initialize { state, qubits });
        Ok(())
    }

    pub(crate) fn push_basis_change(&mut self, qubit: usize, basis: Basis) -> Result<(), CircuitError> {
        self.check_index(qubit)?;
        if self.measured[qubit] {
            return Err(CircuitError::AfterMeasure(qubit));
        }
        match basis {
            Basis::Z => {}
            Basis::X => self.push_gate(Gate::h(qubit))?,
            Basis::Y => {
                self.push_gate(Gate::sdg(qubit))?;
                self.push_gate(Gate::h(qubit))?;
            }
        }
        Ok(())
    }

    pub(crate) fn push_measure(&mut self, qubit: usize, basis: Basis, clbit: usize) -> Result<(), CircuitError> {
        self.check_index(qubit)?;
        if self.measured[qubit] {
            return Err(CircuitError::AfterMeasure(qubit));
        }
        if self.clbits.contains(&clbit) {
            return Err(CircuitError::ClbitInUse(clbit));
        }
        self.measured[qubit] = true;
        self.touched[qubit] = true;
        self.clbits.push(clbit);
        self.ops.push(Op::Measure { qubit, basis, clbit });
        Ok(())
    }

    /// Rebuilds the derived bookkeeping after deserialization.
    pub fn revalidate(self) -> Result<Circuit, CircuitError> {
        let mut c = Circuit::new(self.num_qubits)?;
        for op in self.ops {
            match op {
                Op::Gate(g) => c.push_gate(Gate::new(g.kind(), g.params().to_vec(), g.qubits().to_vec())?)?,
                Op::Initialize { state, qubits } => c.push_initialize(state, qubits)?,
                Op::Measure { qubit, basis, clbit } => c.push_measure(qubit, basis, clbit)?,
            }
        }
        Ok(c)
    }
}

/// Mutable construction with the same validation as [`Circuit`].
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    circuit: Circuit,
}

impl CircuitBuilder {
    pub fn new(num_qubits: usize) -> Result<Self, CircuitError> {
        Ok(Self {
            circuit: Circuit::new(num_qubits)?,
        })
    }

    pub fn from_circuit(circuit: Circuit) -> Self {
        Self { circuit }
    }

    pub fn num_qubits(&self) -> usize {
        self.circuit.num_qubits
    }

    pub fn gate(&mut self, gate: Gate) -> Result<&mut Self, CircuitError> {
        self.circuit.push_gate(gate)?;
        Ok(self)
    }

    pub fn gates(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<&mut Self, CircuitError> {
        for g in gates {
            self.circuit.push_gate(g)?;
        }
        Ok(self)
    }

    pub fn append(&mut self, other: &Circuit, qubit_map: Option<&[usize]>) -> Result<&mut Self, CircuitError> {
        self.circuit = self.circuit.compose(other, qubit_map)?;
        Ok(self)
    }

    pub fn initialize(&mut self, state: &StateVector, targets: &[usize]) -> Result<&mut Self, CircuitError> {
        self.circuit.push_initialize(state.clone(), targets.to_vec())?;
        Ok(self)
    }

    pub fn measure(&mut self, qubit: usize, basis: Basis, clbit: usize) -> Result<&mut Self, CircuitError> {
        self.circuit.push_basis_change(qubit, basis)?;
        self.circuit.push_measure(qubit, basis, clbit)?;
        Ok(self)
    }

    pub fn build(self) -> Circuit {
        self.circuit
    }
}

fn has_duplicates(xs: &[usize]) -> bool {
    xs.iter()
        .enumerate()
        .any(|(i, a)| xs[i + 1..].contains(a))
}

/// Sorts initialization targets ascending and permutes the state's index bits to match.
fn sort_targets(state: StateVector, targets: Vec<usize>) -> (StateVector, Vec<usize>) {
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by_key(|&i| targets[i]);
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return (state, targets);
    }
    let sorted: Vec<usize> = order.iter().map(|&i| targets[i]).collect();
    let amps = state.amplitudes();
    let mut out = vec![num_complex::Complex64::new(0.0, 0.0); amps.len()];
    for (new_idx, slot) in out.iter_mut().enumerate() {
        // bit k of new_idx is the value of target order[k], which was bit order[k] of the old index
        let mut old_idx = 0usize;
        for (k, &o) in order.iter().enumerate() {
            if new_idx >> k & 1 == 1 {
                old_idx |= 1 << o;
            }
        }
        *slot = amps[old_idx];
    }
    (StateVector::from_raw(out), sorted)
}
