//! Seeded input generators.
//!
//! Every generator is a pure function of its parameters and a 64-bit seed:
//! the same seed always yields the bit-identical value, which is what lets a
//! failing test case be replayed from the seed alone.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::synth::{pattern_controlled, synthesize_unitary};
use crate::circuit::{Circuit, CircuitBuilder, CircuitError, Gate, MAX_QUBITS};
use crate::rng::{rng_for, StreamRng};
use crate::simulator::circuit_unitary;
use crate::state::StateVector;

/// Largest register for [`random_unitary`].
pub const MAX_UNITARY_QUBITS: usize = 4;
/// Largest register for [`grover_oracle`].
pub const MAX_ORACLE_QUBITS: usize = 6;

// one RNG stream per generator kind, so equal seeds do not produce
// correlated draws across kinds
const STREAM_STATE: u64 = 1;
const STREAM_UNITARY: u64 = 2;
const STREAM_INT: u64 = 3;
const STREAM_GROVER: u64 = 4;
const STREAM_UCNOT: u64 = 5;
const STREAM_DJ: u64 = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("{what} needs between {min} and {max} qubits, got {got}")]
    QubitRange {
        what: &'static str,
        min: usize,
        max: usize,
        got: usize,
    },
    #[error("empty integer range [{low}, {high}]")]
    EmptyRange { low: i64, high: i64 },
    #[error("mark fractions must satisfy 0 <= min <= max <= 1, got ({0}, {1})")]
    InvalidFractions(f64, f64),
    #[error("no subset size of {size} states lies within fractions ({min}, {max})")]
    InfeasibleSize { size: usize, min: f64, max: f64 },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("custom generator '{name}' failed: {message}")]
    Custom { name: String, message: String },
}

fn check_qubits(what: &'static str, n: usize, max: usize) -> Result<(), GenError> {
    if n == 0 || n > max {
        Err(GenError::QubitRange { what, min: 1, max, got: n })
    } else {
        Ok(())
    }
}

/// Haar-random pure state: 2^n complex standard Gaussians, normalised.
pub fn random_state(num_qubits: usize, seed: u64) -> Result<StateVector, GenError> {
    check_qubits("random_state", num_qubits, MAX_QUBITS)?;
    let mut rng = rng_for(seed, STREAM_STATE);
    let mut amps: Vec<Complex64> = (0..1usize << num_qubits).map(|_| gaussian(&mut rng)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    Ok(StateVector::new(amps).expect("normalised by construction"))
}

fn gaussian(rng: &mut StreamRng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// A Haar-random unitary and a gate sequence realising it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomUnitary {
    pub circuit: Circuit,
    /// Sampled matrix, row-major, little-endian indices.
    pub matrix: Vec<Complex64>,
    /// `matrix = e^{i·global_phase} · unitary(circuit)`.
    pub global_phase: f64,
}

/// Samples a Ginibre matrix, orthonormalises it by QR with the phases of
/// R's diagonal moved into Q (which makes Q Haar-distributed), and
/// decomposes it into gates.
pub fn random_unitary(num_qubits: usize, seed: u64) -> Result<RandomUnitary, GenError> {
    check_qubits("random_unitary", num_qubits, MAX_UNITARY_QUBITS)?;
    let dim = 1usize << num_qubits;
    let mut rng = rng_for(seed, STREAM_UNITARY);
    let z = DMatrix::from_fn(dim, dim, |_, _| gaussian(&mut rng));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    let matrix: Vec<Complex64> = (0..dim * dim).map(|k| q[(k / dim, k % dim)]).collect();
    let circuit = synthesize_unitary(&matrix, num_qubits)?;
    let realised = circuit_unitary(&circuit).expect("gate-only circuit");
    let overlap: Complex64 = realised.iter().zip(&matrix).map(|(a, b)| a.conj() * b).sum();
    Ok(RandomUnitary {
        circuit,
        matrix,
        global_phase: overlap.arg(),
    })
}

/// Uniform integer in `[low, high]`.
pub fn random_int(low: i64, high: i64, seed: u64) -> Result<i64, GenError> {
    if low > high {
        return Err(GenError::EmptyRange { low, high });
    }
    Ok(rng_for(seed, STREAM_INT).random_range(low..=high))
}

/// A diagonal ±1 phase oracle and the basis states it marks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroverOracle {
    pub circuit: Circuit,
    /// Marked basis-state indices, ascending.
    pub marked: Vec<usize>,
}

impl GroverOracle {
    pub fn num_qubits(&self) -> usize {
        self.circuit.num_qubits()
    }

    /// True when fewer than half of the basis states are marked, the regime
    /// in which Grover iterations amplify the marked set.
    pub fn marks_fewer_than_half(&self) -> bool {
        self.marked.len() < 1 << (self.num_qubits() - 1)
    }

    /// The iteration count that brings the marked amplitude closest to 1:
    /// round(π/(4θ) − 1/2) with sin θ = √(|S|/N), at least 1.
    pub fn optimal_iterations(&self) -> usize {
        if self.marked.is_empty() {
            return 1;
        }
        let frac = self.marked.len() as f64 / (1usize << self.num_qubits()) as f64;
        let theta = frac.sqrt().asin();
        ((std::f64::consts::FRAC_PI_4 / theta - 0.5).round().max(1.0)) as usize
    }
}

/// Phase-flip oracle for an explicit marked set; one multi-controlled Z per state.
pub fn phase_oracle(num_qubits: usize, marked: &[usize]) -> Result<GroverOracle, GenError> {
    check_qubits("phase_oracle", num_qubits, MAX_ORACLE_QUBITS)?;
    let z = Gate::z(0).base_matrix().expect("Z has a matrix");
    let mut b = CircuitBuilder::new(num_qubits)?;
    let controls: Vec<usize> = (1..num_qubits).collect();
    let mut sorted = marked.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &x in &sorted {
        if x >= 1 << num_qubits {
            return Err(CircuitError::QubitOutOfRange {
                index: x,
                num_qubits: 1 << num_qubits,
            }
            .into());
        }
        let flip = x & 1 == 0;
        if flip {
            b.gate(Gate::x(0))?;
        }
        b.gates(pattern_controlled(&controls, x >> 1, 0, &z))?;
        if flip {
            b.gate(Gate::x(0))?;
        }
    }
    Ok(GroverOracle {
        circuit: b.build(),
        marked: sorted,
    })
}

/// Marks a uniformly chosen subset whose size is uniform over the feasible
/// sizes `min_frac·2^n ≤ |S| ≤ max_frac·2^n`.
pub fn grover_oracle(num_qubits: usize, mark_range: (f64, f64), seed: u64) -> Result<GroverOracle, GenError> {
    check_qubits("grover_oracle", num_qubits, MAX_ORACLE_QUBITS)?;
    let (lo_f, hi_f) = mark_range;
    if !(0.0..=1.0).contains(&lo_f) || !(0.0..=1.0).contains(&hi_f) || lo_f > hi_f {
        return Err(GenError::InvalidFractions(lo_f, hi_f));
    }
    let size = 1usize << num_qubits;
    let lo = (lo_f * size as f64 - 1e-9).ceil().max(0.0) as usize;
    let hi = ((hi_f * size as f64 + 1e-9).floor() as usize).min(size);
    if lo > hi {
        return Err(GenError::InfeasibleSize { size, min: lo_f, max: hi_f });
    }
    let mut rng = rng_for(seed, STREAM_GROVER);
    let k = rng.random_range(lo..=hi);
    let marked = sample(&mut rng, size, k).into_vec();
    phase_oracle(num_qubits, &marked)
}

/// Alternating layers of random U gates on every qubit and one CX on a
/// random pair; `n` layers in total.
pub fn ucnot_state_prep(num_qubits: usize, seed: u64) -> Result<Circuit, GenError> {
    check_qubits("ucnot_state_prep", num_qubits, MAX_QUBITS)?;
    let mut rng = rng_for(seed, STREAM_UCNOT);
    let tau = std::f64::consts::TAU;
    let mut b = CircuitBuilder::new(num_qubits)?;
    for _ in 0..num_qubits {
        for q in 0..num_qubits {
            let (t, p, l) = (rng.random_range(0.0..tau), rng.random_range(0.0..tau), rng.random_range(0.0..tau));
            b.gate(Gate::u(t, p, l, q))?;
        }
        if num_qubits >= 2 {
            let pair = sample(&mut rng, num_qubits, 2);
            b.gate(Gate::cx(pair.index(0), pair.index(1)))?;
        }
    }
    Ok(b.build())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Constant,
    Balanced,
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleKind::Constant => "constant",
            OracleKind::Balanced => "balanced",
        })
    }
}

/// Bit-flip oracle `|x⟩|y⟩ → |x⟩|y ⊕ f(x)⟩` on `n + 1` qubits (ancilla last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DjOracle {
    pub circuit: Circuit,
    pub kind: OracleKind,
    /// For balanced oracles f(x) = popcount(x & mask) mod 2; zero otherwise.
    pub mask: usize,
    /// For constant oracles, the constant value of f.
    pub constant: bool,
}

impl DjOracle {
    pub fn input_qubits(&self) -> usize {
        self.circuit.num_qubits() - 1
    }

    pub fn eval(&self, x: usize) -> bool {
        match self.kind {
            OracleKind::Constant => self.constant,
            OracleKind::Balanced => (x & self.mask).count_ones() % 2 == 1,
        }
    }
}

/// Constant oracles are identity or X on the ancilla; balanced oracles are
/// the linear functions x·mask for a uniformly chosen nonzero mask.
pub fn constant_or_balanced_oracle(num_qubits: usize, kind: OracleKind, seed: u64) -> Result<DjOracle, GenError> {
    check_qubits("constant_or_balanced_oracle", num_qubits, MAX_QUBITS - 1)?;
    let mut rng = rng_for(seed, STREAM_DJ);
    let anc = num_qubits;
    let mut b = CircuitBuilder::new(num_qubits + 1)?;
    let (mask, constant) = match kind {
        OracleKind::Constant => {
            let value: bool = rng.random();
            if value {
                b.gate(Gate::x(anc))?;
            }
            (0, value)
        }
        OracleKind::Balanced => {
            let mask = rng.random_range(1..1usize << num_qubits);
            for q in 0..num_qubits {
                if mask >> q & 1 == 1 {
                    b.gate(Gate::cx(q, anc))?;
                }
            }
            (mask, false)
        }
    };
    Ok(DjOracle {
        circuit: b.build(),
        kind,
        mask,
        constant,
    })
}

/// A value produced by an [`InputGenerator`].
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratedInput {
    State(StateVector),
    Circuit(Circuit),
    Integer(i64),
    Unitary(RandomUnitary),
    GroverOracle(GroverOracle),
    DjOracle(DjOracle),
}

impl GeneratedInput {
    pub fn kind_name(&self) -> &'static str {
        match self {
            GeneratedInput::State(_) => "state",
            GeneratedInput::Circuit(_) => "circuit",
            GeneratedInput::Integer(_) => "integer",
            GeneratedInput::Unitary(_) => "unitary",
            GeneratedInput::GroverOracle(_) => "grover_oracle",
            GeneratedInput::DjOracle(_) => "dj_oracle",
        }
    }

    pub fn as_state(&self) -> Option<&StateVector> {
        match self {
            GeneratedInput::State(s) => Some(s),
            _ => None,
        }
    }

    /// The circuit carried by circuit, unitary, and oracle inputs.
    pub fn as_circuit(&self) -> Option<&Circuit> {
        match self {
            GeneratedInput::Circuit(c) => Some(c),
            GeneratedInput::Unitary(u) => Some(&u.circuit),
            GeneratedInput::GroverOracle(o) => Some(&o.circuit),
            GeneratedInput::DjOracle(o) => Some(&o.circuit),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            GeneratedInput::Integer(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_unitary(&self) -> Option<&RandomUnitary> {
        match self {
            GeneratedInput::Unitary(u) => Some(u),
            _ => None,
        }
    }

    pub fn as_grover_oracle(&self) -> Option<&GroverOracle> {
        match self {
            GeneratedInput::GroverOracle(o) => Some(o),
            _ => None,
        }
    }

    pub fn as_dj_oracle(&self) -> Option<&DjOracle> {
        match self {
            GeneratedInput::DjOracle(o) => Some(o),
            _ => None,
        }
    }
}

pub type CustomGenerate = Arc<dyn Fn(u64) -> Result<GeneratedInput, GenError> + Send + Sync>;

/// A generator kind plus its parameters.
///
/// The [`signature`](InputGenerator::signature) — kind and parameters — keys
/// the seed stream, so structurally equal generators receive equal seeds.
#[derive(Clone)]
pub enum InputGenerator {
    RandomState { num_qubits: usize },
    RandomUnitary { num_qubits: usize },
    RandomInt { low: i64, high: i64 },
    GroverOracle { num_qubits: usize, min_frac: f64, max_frac: f64 },
    UcnotStatePrep { num_qubits: usize },
    /// `kind: None` draws constant or balanced with equal probability.
    ConstantOrBalanced { num_qubits: usize, kind: Option<OracleKind> },
    /// A user-supplied generator; `params` is part of the signature.
    Custom {
        name: String,
        params: String,
        generate: CustomGenerate,
    },
}

impl InputGenerator {
    pub fn custom(
        name: impl Into<String>,
        params: impl Into<String>,
        generate: impl Fn(u64) -> Result<GeneratedInput, GenError> + Send + Sync + 'static,
    ) -> Self {
        InputGenerator::Custom {
            name: name.into(),
            params: params.into(),
            generate: Arc::new(generate),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<GeneratedInput, GenError> {
        Ok(match self {
            InputGenerator::RandomState { num_qubits } => GeneratedInput::State(random_state(*num_qubits, seed)?),
            InputGenerator::RandomUnitary { num_qubits } => GeneratedInput::Unitary(random_unitary(*num_qubits, seed)?),
            InputGenerator::RandomInt { low, high } => GeneratedInput::Integer(random_int(*low, *high, seed)?),
            InputGenerator::GroverOracle {
                num_qubits,
                min_frac,
                max_frac,
            } => GeneratedInput::GroverOracle(grover_oracle(*num_qubits, (*min_frac, *max_frac), seed)?),
            InputGenerator::UcnotStatePrep { num_qubits } => GeneratedInput::Circuit(ucnot_state_prep(*num_qubits, seed)?),
            InputGenerator::ConstantOrBalanced { num_qubits, kind } => {
                let kind = match kind {
                    Some(k) => *k,
                    None if rng_for(seed, STREAM_DJ + 100).random::<bool>() => OracleKind::Balanced,
                    None => OracleKind::Constant,
                };
                GeneratedInput::DjOracle(constant_or_balanced_oracle(*num_qubits, kind, seed)?)
            }
            InputGenerator::Custom { generate, .. } => generate(seed)?,
        })
    }

    /// Canonical text of kind and parameters. Floats use their exact bits.
    pub fn signature(&self) -> String {
        match self {
            InputGenerator::RandomState { num_qubits } => format!("random_state({num_qubits})"),
            InputGenerator::RandomUnitary { num_qubits } => format!("random_unitary({num_qubits})"),
            InputGenerator::RandomInt { low, high } => format!("random_int({low},{high})"),
            InputGenerator::GroverOracle {
                num_qubits,
                min_frac,
                max_frac,
            } => format!(
                "grover_oracle({num_qubits},{:016x},{:016x})",
                min_frac.to_bits(),
                max_frac.to_bits()
            ),
            InputGenerator::UcnotStatePrep { num_qubits } => format!("ucnot_state_prep({num_qubits})"),
            InputGenerator::ConstantOrBalanced { num_qubits, kind } => {
                let k = kind.map(|k| k.to_string()).unwrap_or_else(|| "any".into());
                format!("constant_or_balanced({num_qubits},{k})")
            }
            InputGenerator::Custom { name, params, .. } => format!("custom:{name}({params})"),
        }
    }
}

impl fmt::Debug for InputGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.signature())
    }
}

impl PartialEq for InputGenerator {
    fn eq(&self, other: &Self) -> bool {
        self.signature() == other.signature()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::statevector;

    #[test]
    fn random_state_is_deterministic_and_normalised() {
        assert_eq!(random_state(1, 42).unwrap(), random_state(1, 42).unwrap());
        assert_ne!(random_state(1, 42).unwrap(), random_state(1, 43).unwrap());
        for s in 0..1000 {
            assert!((random_state(3, s).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        }
        assert!(random_state(0, 1).is_err());
        assert!(random_state(21, 1).is_err());
    }

    #[test]
    fn random_int_cases() {
        assert_eq!(random_int(5, 5, 9).unwrap(), 5);
        assert_eq!(random_int(0, 100, 9).unwrap(), random_int(0, 100, 9).unwrap());
        assert_eq!(random_int(3, 2, 0), Err(GenError::EmptyRange { low: 3, high: 2 }));
    }

    #[test]
    fn single_qubit_unitary_is_one_u_gate() {
        let u = random_unitary(1, 7).unwrap();
        assert_eq!(u.circuit.len(), 1);
        let m = circuit_unitary(&u.circuit).unwrap();
        let ph = Complex64::from_polar(1.0, u.global_phase);
        for (a, b) in m.iter().zip(&u.matrix) {
            assert!((a * ph - b).norm() < 1e-10);
        }
        assert!(random_unitary(5, 0).is_err());
    }

    #[test]
    fn grover_cz_case() {
        let o = phase_oracle(2, &[3]).unwrap();
        let prep = Circuit::from_gates(2, [Gate::h(0), Gate::h(1)]).unwrap();
        let sv = statevector(&prep.compose(&o.circuit, None).unwrap()).unwrap();
        let a = sv.amplitudes();
        assert!((a[0].re - 0.5).abs() < 1e-12 && (a[1].re - 0.5).abs() < 1e-12 && (a[2].re - 0.5).abs() < 1e-12);
        assert!((a[3].re + 0.5).abs() < 1e-12);
        assert_eq!(o.circuit.len(), 1);
    }

    #[test]
    fn grover_empty_range_is_identity() {
        let o = grover_oracle(3, (0.0, 0.0), 5).unwrap();
        assert!(o.marked.is_empty());
        assert!(o.circuit.is_empty());
        assert!(grover_oracle(3, (0.3, 0.32), 0).is_err());
        assert!(grover_oracle(3, (0.5, 0.2), 0).is_err());
    }

    #[test]
    fn ucnot_single_qubit() {
        let c = ucnot_state_prep(1, 3).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.gates().next().unwrap().kind(), crate::GateKind::U);
        let c3 = ucnot_state_prep(3, 3).unwrap();
        assert_eq!(c3.len(), 3 * 4);
    }

    #[test]
    fn dj_oracles() {
        let c = constant_or_balanced_oracle(3, OracleKind::Constant, 1).unwrap();
        assert!(c.circuit.gates().all(|g| g.qubits() == [3]));
        let b = constant_or_balanced_oracle(3, OracleKind::Balanced, 1).unwrap();
        assert!(b.mask > 0 && b.mask < 8);
        assert_eq!((0..8).filter(|&x| b.eval(x)).count(), 4);
    }

    #[test]
    fn signatures_are_structural() {
        let a = InputGenerator::RandomState { num_qubits: 1 };
        let b = InputGenerator::RandomState { num_qubits: 1 };
        assert_eq!(a, b);
        assert_ne!(a, InputGenerator::RandomState { num_qubits: 2 });
        assert_eq!(a.generate(3).unwrap().kind_name(), "state");
    }
}
