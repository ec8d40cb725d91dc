//! Staged gate programs: the mutable part of an algorithm fixture.
//!
//! A program is a flat, gate-only circuit cut into consecutive stages. A
//! fixture assembles a runnable circuit by interleaving the stages with
//! input-dependent pieces (oracles, controlled powers, state preparation);
//! mutation edits the flat gate list and keeps the stage cuts consistent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::qasm::{parse_qasm_program, to_qasm_with_marks, QasmError};
use crate::circuit::{Circuit, CircuitDigest, CircuitError, Gate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProgramError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Qasm(#[from] QasmError),
    #[error("programs contain gates only")]
    NotGateOnly,
    #[error("stage bounds must be non-decreasing and within 0..={len}, got {bounds:?}")]
    InvalidBounds { bounds: Vec<usize>, len: usize },
    #[error("stage index {index} out of range for {stages} stages")]
    NoSuchStage { index: usize, stages: usize },
    #[error("gate position {position} out of range for {len} gates")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("expected {expected_qubits} qubits and {expected_stages} stages, got {qubits} and {stages}")]
    Shape {
        expected_qubits: usize,
        expected_stages: usize,
        qubits: usize,
        stages: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    circuit: Circuit,
    /// Gate index at which stage `i + 1` starts.
    bounds: Vec<usize>,
}

impl Program {
    /// A single-stage program.
    pub fn single(circuit: Circuit) -> Result<Program, ProgramError> {
        Program::new(circuit, Vec::new())
    }

    pub fn new(circuit: Circuit, bounds: Vec<usize>) -> Result<Program, ProgramError> {
        if !circuit.is_gate_only() {
            return Err(ProgramError::NotGateOnly);
        }
        if bounds.windows(2).any(|w| w[0] > w[1]) || bounds.iter().any(|&b| b > circuit.len()) {
            return Err(ProgramError::InvalidBounds {
                bounds,
                len: circuit.len(),
            });
        }
        Ok(Program { circuit, bounds })
    }

    /// Concatenates per-stage circuits over the same register.
    pub fn from_stages(num_qubits: usize, stages: &[Circuit]) -> Result<Program, ProgramError> {
        let mut circuit = Circuit::new(num_qubits)?;
        let mut bounds = Vec::with_capacity(stages.len().saturating_sub(1));
        for (i, s) in stages.iter().enumerate() {
            if i > 0 {
                bounds.push(circuit.len());
            }
            circuit = circuit.compose(s, None)?;
        }
        Program::new(circuit, bounds)
    }

    pub fn num_qubits(&self) -> usize {
        self.circuit.num_qubits()
    }

    pub fn num_stages(&self) -> usize {
        self.bounds.len() + 1
    }

    /// Total gate count.
    pub fn len(&self) -> usize {
        self.circuit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circuit.is_empty()
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    /// The flattened circuit of all stages.
    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn gates(&self) -> Vec<Gate> {
        self.circuit.gates().cloned().collect()
    }

    /// Gate range of stage `i`.
    pub fn stage_range(&self, i: usize) -> Result<std::ops::Range<usize>, ProgramError> {
        if i >= self.num_stages() {
            return Err(ProgramError::NoSuchStage {
                index: i,
                stages: self.num_stages(),
            });
        }
        let start = if i == 0 { 0 } else { self.bounds[i - 1] };
        let end = self.bounds.get(i).copied().unwrap_or(self.circuit.len());
        Ok(start..end)
    }

    /// Stage `i` as a circuit over the full register.
    pub fn stage(&self, i: usize) -> Result<Circuit, ProgramError> {
        let range = self.stage_range(i)?;
        let gates = self.gates();
        Ok(Circuit::from_gates(self.num_qubits(), gates[range].iter().cloned())?)
    }

    pub fn digest(&self) -> CircuitDigest {
        self.circuit.canonical_hash()
    }

    /// Inserts `gate` before position `pos`; a gate inserted exactly at a
    /// stage cut joins the later stage.
    pub fn insert(&self, pos: usize, gate: Gate) -> Result<Program, ProgramError> {
        let mut gates = self.gates();
        if pos > gates.len() {
            return Err(ProgramError::PositionOutOfRange {
                position: pos,
                len: gates.len(),
            });
        }
        gates.insert(pos, gate);
        let bounds = self.bounds.iter().map(|&b| if b > pos { b + 1 } else { b }).collect();
        Program::new(Circuit::from_gates(self.num_qubits(), gates)?, bounds)
    }

    pub fn delete(&self, pos: usize) -> Result<Program, ProgramError> {
        let mut gates = self.gates();
        if pos >= gates.len() {
            return Err(ProgramError::PositionOutOfRange {
                position: pos,
                len: gates.len(),
            });
        }
        gates.remove(pos);
        let bounds = self.bounds.iter().map(|&b| if b > pos { b - 1 } else { b }).collect();
        Program::new(Circuit::from_gates(self.num_qubits(), gates)?, bounds)
    }

    pub fn replace(&self, pos: usize, gate: Gate) -> Result<Program, ProgramError> {
        let mut gates = self.gates();
        if pos >= gates.len() {
            return Err(ProgramError::PositionOutOfRange {
                position: pos,
                len: gates.len(),
            });
        }
        gates[pos] = gate;
        Program::new(Circuit::from_gates(self.num_qubits(), gates)?, self.bounds.clone())
    }

    /// Checks the register width and stage count a fixture expects.
    pub fn check_shape(&self, qubits: usize, stages: usize) -> Result<(), ProgramError> {
        if self.num_qubits() != qubits || self.num_stages() != stages {
            return Err(ProgramError::Shape {
                expected_qubits: qubits,
                expected_stages: stages,
                qubits: self.num_qubits(),
                stages: self.num_stages(),
            });
        }
        Ok(())
    }

    /// QASM with a stage marker comment before every stage after the first.
    pub fn to_qasm(&self) -> Result<String, ProgramError> {
        Ok(to_qasm_with_marks(&self.circuit, &self.bounds)?)
    }

    pub fn from_qasm(text: &str) -> Result<Program, ProgramError> {
        let parsed = parse_qasm_program(text)?;
        Program::new(parsed.circuit, parsed.stage_marks)
    }
}
