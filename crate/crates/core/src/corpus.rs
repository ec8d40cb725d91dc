//! Reference algorithms and their properties.
//!
//! Each fixture pairs a staged [`Program`] (the part subject to mutation)
//! with three properties that assemble runnable circuits from it and from
//! generated inputs. Only the teleportation property reproduces a published
//! listing; the other properties are our reconstructions of what a tester
//! would check for each algorithm.
//!
//! Fixed register sizes: teleportation 3 qubits, QFT 3, QPE 3 counting + 1
//! target, Grover 3, Deutsch–Jozsa 3 inputs + 1 ancilla, superdense coding
//! 2 + 2 message qubits.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use thiserror::Error;

use crate::assertions::{bits_le, AssertionRegistry};
use crate::circuit::synth::{controlled, multi_controlled, repeat};
use crate::circuit::{Basis, Circuit, CircuitBuilder, CircuitError, Gate};
use crate::engine::{OperationsResult, Property};
use crate::generators::{
    constant_or_balanced_oracle, grover_oracle, random_int, random_state, random_unitary, GenError, GeneratedInput,
    InputGenerator, OracleKind,
};
use crate::program::{Program, ProgramError};
use crate::rng::derive_seed;
use crate::simulator::{statevector, SimError};
use crate::state::StateVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FixtureError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Generator(#[from] GenError),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

pub const QFT_QUBITS: usize = 3;
pub const QPE_COUNTING: usize = 3;
pub const GROVER_QUBITS: usize = 3;
pub const DJ_INPUTS: usize = 3;

type PropertyBuilder = fn(Arc<Program>) -> Vec<Property>;
type ScreenCase = fn(&Program, u64) -> Result<StateVector, FixtureError>;

/// A subject algorithm: its program, three properties, and the input domain
/// used to tell faulty mutants from accidentally equivalent ones.
pub struct AlgorithmFixture {
    pub name: &'static str,
    pub program: Program,
    /// Seed for this fixture's default mutant sets.
    pub mutant_seed: u64,
    properties: PropertyBuilder,
    screen_case: ScreenCase,
}

impl std::fmt::Debug for AlgorithmFixture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AlgorithmFixture")
            .field("name", &self.name)
            .field("program", &self.program)
            .field("mutant_seed", &self.mutant_seed)
            .finish_non_exhaustive()
    }
}

/// Number of inputs in a screening domain.
pub const SCREEN_CASES: usize = 8;

impl AlgorithmFixture {
    /// The properties bound to `program`, which must have the base program's shape.
    pub fn properties_for(&self, program: &Program) -> Result<Vec<Property>, FixtureError> {
        program.check_shape(self.program.num_qubits(), self.program.num_stages())?;
        Ok((self.properties)(Arc::new(program.clone())))
    }

    pub fn properties(&self) -> Vec<Property> {
        (self.properties)(Arc::new(self.program.clone()))
    }

    /// Output states of `program` over the fixture's screening domain.
    pub fn screen(&self, program: &Program, seed: u64) -> Result<Vec<StateVector>, FixtureError> {
        program.check_shape(self.program.num_qubits(), self.program.num_stages())?;
        (0..SCREEN_CASES as u64)
            .map(|i| (self.screen_case)(program, derive_seed("screen", &[seed, i])))
            .collect()
    }
}

/// All fixtures, in a fixed order.
pub fn fixtures() -> Vec<AlgorithmFixture> {
    vec![
        teleportation_fixture(),
        qft_fixture(),
        qpe_fixture(),
        grover_fixture(),
        dj_fixture(),
        superdense_fixture(),
    ]
}

pub const FIXTURE_NAMES: [&str; 6] = ["teleportation", "qft", "qpe", "grover", "deutsch_jozsa", "superdense"];

pub fn fixture(name: &str) -> Option<AlgorithmFixture> {
    fixtures().into_iter().find(|f| f.name == name)
}

/// Screening domain for arbitrary circuits: |0…0⟩, then Haar-random inputs.
pub fn default_screen(circuit: &Circuit, seed: u64) -> Result<Vec<StateVector>, FixtureError> {
    let n = circuit.num_qubits();
    let mut out = vec![statevector(circuit)?];
    for i in 1..SCREEN_CASES as u64 {
        let psi = random_state(n, derive_seed("screen", &[seed, i]))?;
        let prepared = Circuit::new(n)?.initialize(&psi, &(0..n).collect::<Vec<_>>())?;
        out.push(statevector(&prepared.compose(circuit, None)?)?);
    }
    Ok(out)
}

fn stage(p: &Program, i: usize) -> Circuit {
    p.stage(i).expect("program shape checked by the fixture")
}

fn all(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn prepared(n: usize, state: &StateVector, targets: &[usize]) -> Result<Circuit, CircuitError> {
    Circuit::new(n)?.initialize(state, targets)
}

fn input_state(inputs: &[GeneratedInput], i: usize) -> Result<&StateVector, String> {
    inputs[i].as_state().ok_or_else(|| format!("input {i} is not a state"))
}

fn input_int(inputs: &[GeneratedInput], i: usize) -> Result<i64, String> {
    inputs[i].as_int().ok_or_else(|| format!("input {i} is not an integer"))
}

// ---------------------------------------------------------------- teleportation

/// Teleportation of qubit 0 onto qubit 2 with the classically controlled
/// corrections replaced by CX(1,2) and CZ(0,2) (deferred measurement).
pub fn teleportation_program() -> Program {
    let c = Circuit::from_gates(
        3,
        [
            Gate::h(1),
            Gate::cx(1, 2),
            Gate::cx(0, 1),
            Gate::h(0),
            Gate::cx(1, 2),
            Gate::cz(0, 2),
        ],
    )
    .expect("valid teleportation circuit");
    Program::single(c).expect("gate-only")
}

pub fn build_teleportation() -> Circuit {
    teleportation_program().circuit().clone()
}

fn teleport_input(p: &Program, psi: &StateVector) -> Result<Circuit, CircuitError> {
    prepared(3, psi, &[0])?.compose(p.circuit(), None)
}

fn teleportation_properties(p: Arc<Program>) -> Vec<Property> {
    let state = || vec![InputGenerator::RandomState { num_qubits: 1 }];
    let p1 = Arc::clone(&p);
    let p2 = Arc::clone(&p);
    let p3 = p;
    vec![
        Property::new("teleported_state_equals_input", state(), move |inputs, reg| {
            let psi = input_state(inputs, 0)?;
            let qc = teleport_input(&p1, psi)?;
            let qc2 = prepared(1, psi, &[0])?;
            reg.assert_equal(&qc, &[2], &qc2, &[0])?;
            Ok(())
        }),
        Property::new("sender_qubits_end_in_plus", state(), move |inputs, reg| {
            let psi = input_state(inputs, 0)?;
            let qc = teleport_input(&p2, psi)?;
            reg.assert_probability(&qc, &[0, 1], &[1.0, 1.0], Basis::X)?;
            Ok(())
        }),
        Property::new("double_teleport_preserves_state", state(), move |inputs, reg| {
            let psi = input_state(inputs, 0)?;
            let qc = prepared(5, psi, &[0])?
                .compose(p3.circuit(), Some(&[0, 1, 2]))?
                .compose(p3.circuit(), Some(&[2, 3, 4]))?;
            let qc2 = prepared(1, psi, &[0])?;
            reg.assert_equal(&qc, &[4], &qc2, &[0])?;
            Ok(())
        }),
    ]
}

fn teleportation_screen(p: &Program, seed: u64) -> Result<StateVector, FixtureError> {
    Ok(statevector(&teleport_input(p, &random_state(1, seed)?)?)?)
}

pub fn teleportation_fixture() -> AlgorithmFixture {
    AlgorithmFixture {
        name: "teleportation",
        program: teleportation_program(),
        mutant_seed: 0x7e1e,
        properties: teleportation_properties,
        screen_case: teleportation_screen,
    }
}

// ---------------------------------------------------------------- QFT

/// QFT|x⟩ = 2^{-n/2} Σ_y e^{2πi·xy/2^n} |y⟩ with little-endian integers:
/// controlled-phase ladder from the top qubit down, then the swap layer.
pub fn build_qft(n: usize) -> Result<Circuit, FixtureError> {
    if !(1..=10).contains(&n) {
        return Err(FixtureError::InvalidParameter(format!("QFT size must be in 1..=10, got {n}")));
    }
    let mut b = CircuitBuilder::new(n)?;
    for j in (0..n).rev() {
        b.gate(Gate::h(j))?;
        for k in (0..j).rev() {
            b.gate(Gate::cp(PI / f64::from(1u32 << (j - k)), k, j))?;
        }
    }
    for i in 0..n / 2 {
        b.gate(Gate::swap(i, n - 1 - i))?;
    }
    Ok(b.build())
}

pub fn qft_program() -> Program {
    Program::single(build_qft(QFT_QUBITS).expect("valid size")).expect("gate-only")
}

/// H on every qubit and P(2π·f·2^j/2^n) on qubit j: the state
/// 2^{-n/2} Σ_x e^{2πi·f·x/2^n} |x⟩.
pub fn phase_gradient(n: usize, f: f64) -> Result<Circuit, CircuitError> {
    let mut b = CircuitBuilder::new(n)?;
    for j in 0..n {
        b.gate(Gate::h(j))?;
        b.gate(Gate::p(TAU * f * f64::from(1u32 << j) / f64::from(1u32 << n), j))?;
    }
    Ok(b.build())
}

fn basis_prep(n: usize, value: usize) -> Result<Circuit, CircuitError> {
    Circuit::from_gates(n, (0..n).filter(|j| value >> j & 1 == 1).map(Gate::x))
}

/// Fractional frequency of the QFT peak property: k/16 for k in 0..=127.
fn peak_frequency(k: i64) -> f64 {
    k as f64 / 16.0
}

/// Largest distance from the nearest integer for which the expected peak
/// is well separated from its neighbours (probability ≈ 0.62 vs ≈ 0.23).
const PEAK_MAX_OFFSET: f64 = 0.375;

fn qft_properties(p: Arc<Program>) -> Vec<Property> {
    let n = QFT_QUBITS;
    let p1 = Arc::clone(&p);
    let p2 = Arc::clone(&p);
    let p3 = p;
    vec![
        Property::new(
            "inverse_restores_input",
            vec![InputGenerator::RandomState { num_qubits: n }],
            move |inputs, reg| {
                let psi = input_state(inputs, 0)?;
                let reference_inverse = build_qft(n)?.inverse()?;
                let qc = prepared(n, psi, &all(n))?
                    .compose(p1.circuit(), None)?
                    .compose(&reference_inverse, None)?;
                let qc2 = prepared(n, psi, &all(n))?;
                reg.assert_equal(&qc, &all(n), &qc2, &all(n))?;
                Ok(())
            },
        ),
        Property::new(
            "phase_gradient_peaks_at_frequency",
            vec![InputGenerator::RandomInt { low: 0, high: 127 }],
            move |inputs, reg| {
                let f = peak_frequency(input_int(inputs, 0)?);
                let qc = phase_gradient(n, f)?.compose(p2.circuit(), None)?;
                let size = 1i64 << n;
                let peak = (-(f.round() as i64)).rem_euclid(size) as usize;
                reg.assert_most_frequent(&qc, &all(n), &bits_le(peak, n), Basis::Z)?;
                Ok(())
            },
        )
        .with_precondition(|inputs| {
            inputs[0]
                .as_int()
                .map(|k| {
                    let f = peak_frequency(k);
                    (f - f.round()).abs() <= PEAK_MAX_OFFSET
                })
                .unwrap_or(false)
        }),
        Property::new(
            "basis_state_gives_phase_gradient",
            vec![InputGenerator::RandomInt { low: 0, high: (1 << n) - 1 }],
            move |inputs, reg| {
                let x = input_int(inputs, 0)? as usize;
                let qc = basis_prep(n, x)?.compose(p3.circuit(), None)?;
                let reference = phase_gradient(n, x as f64)?;
                reg.assert_equal(&qc, &all(n), &reference, &all(n))?;
                Ok(())
            },
        ),
    ]
}

fn qft_screen(p: &Program, seed: u64) -> Result<StateVector, FixtureError> {
    let psi = random_state(QFT_QUBITS, seed)?;
    Ok(statevector(&prepared(QFT_QUBITS, &psi, &all(QFT_QUBITS))?.compose(p.circuit(), None)?)?)
}

pub fn qft_fixture() -> AlgorithmFixture {
    AlgorithmFixture {
        name: "qft",
        program: qft_program(),
        mutant_seed: 0x0f7,
        properties: qft_properties,
        screen_case: qft_screen,
    }
}

// ---------------------------------------------------------------- QPE

/// Stages: Hadamards on the counting register, then the inverse QFT on it.
/// The controlled powers of the unitary are input-dependent and inserted
/// between the two stages by [`assemble_qpe`].
pub fn qpe_program(counting: usize, target_qubits: usize) -> Result<Program, FixtureError> {
    let n = counting + target_qubits;
    let hs = Circuit::from_gates(n, (0..counting).map(Gate::h))?;
    let iqft = Circuit::new(n)?.compose(&build_qft(counting)?.inverse()?, Some(&all(counting)))?;
    Ok(Program::from_stages(n, &[hs, iqft])?)
}

/// Phase estimation with counting qubits `0..m` (little-endian estimate) and
/// the target register after them, prepared in `eigenstate`.
pub fn assemble_qpe(p: &Program, unitary: &Circuit, eigenstate: &StateVector) -> Result<Circuit, FixtureError> {
    let t = unitary.num_qubits();
    let n = p.num_qubits();
    if eigenstate.num_qubits() != t || t >= n {
        return Err(FixtureError::InvalidParameter(format!(
            "unitary on {t} qubits and eigenstate on {} qubits do not fit a {n}-qubit program",
            eigenstate.num_qubits()
        )));
    }
    let m = n - t;
    let targets: Vec<usize> = (m..n).collect();
    let mut qc = prepared(n, eigenstate, &targets)?.compose(&stage(p, 0), None)?;
    for j in 0..m {
        let power = controlled(&repeat(unitary, 1 << j)?)?;
        let mut map = vec![j];
        map.extend(&targets);
        qc = qc.compose(&power, Some(&map))?;
    }
    Ok(qc.compose(&stage(p, 1), None)?)
}

pub fn build_qpe(counting: usize, unitary: &Circuit, eigenstate: &StateVector) -> Result<Circuit, FixtureError> {
    if !(1..=8).contains(&counting) {
        return Err(FixtureError::InvalidParameter(format!("counting qubits must be in 1..=8, got {counting}")));
    }
    if !(1..=2).contains(&unitary.num_qubits()) {
        return Err(FixtureError::InvalidParameter("the unitary must act on 1 or 2 qubits".into()));
    }
    assemble_qpe(&qpe_program(counting, unitary.num_qubits())?, unitary, eigenstate)
}

/// U = W·P(2πk/2^m)·W† has eigenvectors W|0⟩ (phase 0) and W|1⟩ (phase k/2^m).
fn qpe_unitary(w: &Circuit, k: i64) -> Result<Circuit, CircuitError> {
    let phase = Circuit::from_gates(1, [Gate::p(TAU * k as f64 / f64::from(1u32 << QPE_COUNTING), 0)])?;
    w.inverse()?.compose(&phase, None)?.compose(w, None)
}

fn rotated_basis(w: &Circuit, bit: usize) -> Result<StateVector, FixtureError> {
    Ok(statevector(&basis_prep(1, bit)?.compose(w, None)?)?)
}

fn qpe_inputs() -> Vec<InputGenerator> {
    vec![
        InputGenerator::RandomUnitary { num_qubits: 1 },
        InputGenerator::RandomInt {
            low: 0,
            high: (1 << QPE_COUNTING) - 1,
        },
    ]
}

fn qpe_case(p: &Program, inputs: &[GeneratedInput], eigen_bit: usize) -> Result<(Circuit, Circuit, i64), Box<dyn std::error::Error + Send + Sync>> {
    let w = &inputs[0].as_unitary().ok_or("input 0 is not a unitary")?.circuit;
    let k = input_int(inputs, 1)?;
    let qc = assemble_qpe(p, &qpe_unitary(w, k)?, &rotated_basis(w, eigen_bit)?)?;
    Ok((qc, w.clone(), k))
}

fn qpe_properties(p: Arc<Program>) -> Vec<Property> {
    let m = QPE_COUNTING;
    let p1 = Arc::clone(&p);
    let p2 = Arc::clone(&p);
    let p3 = p;
    vec![
        // an exact phase k/2^m leaves the counting register in exactly |k⟩
        Property::new("recovers_exact_phase", qpe_inputs(), move |inputs, reg| {
            let (qc, _, k) = qpe_case(&p1, inputs, 1)?;
            reg.assert_equal(&qc, &all(m), &basis_prep(m, k as usize)?, &all(m))?;
            Ok(())
        }),
        Property::new("zero_phase_eigenstate_reads_zero", qpe_inputs(), move |inputs, reg| {
            let (qc, _, _) = qpe_case(&p2, inputs, 0)?;
            reg.assert_most_frequent(&qc, &all(m), &bits_le(0, m), Basis::Z)?;
            Ok(())
        }),
        Property::new("eigenstate_register_unchanged", qpe_inputs(), move |inputs, reg| {
            let (qc, w, _) = qpe_case(&p3, inputs, 1)?;
            let reference = prepared(1, &rotated_basis(&w, 1)?, &[0])?;
            reg.assert_equal(&qc, &[m], &reference, &[0])?;
            Ok(())
        }),
    ]
}

fn qpe_screen(p: &Program, seed: u64) -> Result<StateVector, FixtureError> {
    let w = random_unitary(1, derive_seed("qpe-w", &[seed]))?.circuit;
    let k = random_int(0, (1 << QPE_COUNTING) - 1, derive_seed("qpe-k", &[seed]))?;
    let eigen = random_state(1, derive_seed("qpe-e", &[seed]))?;
    Ok(statevector(&assemble_qpe(p, &qpe_unitary(&w, k)?, &eigen)?)?)
}

pub fn qpe_fixture() -> AlgorithmFixture {
    AlgorithmFixture {
        name: "qpe",
        program: qpe_program(QPE_COUNTING, 1).expect("valid sizes"),
        mutant_seed: 0x9e,
        properties: qpe_properties,
        screen_case: qpe_screen,
    }
}

// ---------------------------------------------------------------- Grover

/// Stages: the Hadamard layer, then the diffusion operator H·X·CZ…·X·H
/// (equal to 2|s⟩⟨s| − I up to global phase). Oracles are inserted before
/// every diffusion by [`assemble_grover`].
pub fn grover_program(n: usize) -> Result<Program, FixtureError> {
    if n < 2 {
        return Err(FixtureError::InvalidParameter("Grover needs at least 2 qubits".into()));
    }
    let hs = Circuit::from_gates(n, (0..n).map(Gate::h))?;
    let mut d = CircuitBuilder::new(n)?;
    d.gates((0..n).map(Gate::h))?;
    d.gates((0..n).map(Gate::x))?;
    let z = Gate::z(0).base_matrix().expect("Z has a matrix");
    d.gates(multi_controlled(&(0..n - 1).collect::<Vec<_>>(), n - 1, &z))?;
    d.gates((0..n).map(Gate::x))?;
    d.gates((0..n).map(Gate::h))?;
    Ok(Program::from_stages(n, &[hs, d.build()])?)
}

pub fn assemble_grover(p: &Program, oracle: &Circuit, iterations: usize) -> Result<Circuit, FixtureError> {
    if iterations == 0 {
        return Err(FixtureError::InvalidParameter("Grover needs at least one iteration".into()));
    }
    if oracle.num_qubits() != p.num_qubits() {
        return Err(FixtureError::InvalidParameter(format!(
            "oracle has {} qubits, expected {}",
            oracle.num_qubits(),
            p.num_qubits()
        )));
    }
    let mut qc = stage(p, 0);
    let diffusion = stage(p, 1);
    for _ in 0..iterations {
        qc = qc.compose(oracle, None)?.compose(&diffusion, None)?;
    }
    Ok(qc)
}

pub fn build_grover(n: usize, oracle: &Circuit, iterations: usize) -> Result<Circuit, FixtureError> {
    assemble_grover(&grover_program(n)?, oracle, iterations)
}

/// Marks up to half of the states uniformly over the feasible set sizes.
fn grover_search_input() -> InputGenerator {
    InputGenerator::GroverOracle {
        num_qubits: GROVER_QUBITS,
        min_frac: 0.0,
        max_frac: 0.5,
    }
}

fn single_mark(inputs: &[GeneratedInput]) -> bool {
    inputs[0].as_grover_oracle().is_some_and(|o| o.marked.len() == 1)
}

/// At least one and fewer than half of the states marked.
fn amplifiable(inputs: &[GeneratedInput]) -> bool {
    inputs[0]
        .as_grover_oracle()
        .is_some_and(|o| !o.marked.is_empty() && o.marks_fewer_than_half())
}

/// Per-qubit probabilities of reading 0 after `iterations` ideal Grover
/// iterations: the marked set carries sin²((2r+1)θ) with sin²θ = |S|/N,
/// spread evenly over its members, the rest is spread over unmarked states.
pub fn grover_zero_probabilities(n: usize, marked: &[usize], iterations: usize) -> Vec<f64> {
    let size = 1usize << n;
    let theta = (marked.len() as f64 / size as f64).sqrt().asin();
    let p_marked = ((2 * iterations + 1) as f64 * theta).sin().powi(2);
    let per_marked = p_marked / marked.len() as f64;
    let per_other = if marked.len() == size {
        0.0
    } else {
        (1.0 - p_marked) / (size - marked.len()) as f64
    };
    (0..n)
        .map(|j| {
            let p: f64 = (0..size)
                .filter(|x| x >> j & 1 == 0)
                .map(|x| if marked.contains(&x) { per_marked } else { per_other })
                .sum();
            // snap round-off so exact 0/1 targets stay exact
            (p * 1e12).round() / 1e12
        })
        .collect()
}

fn grover_properties(p: Arc<Program>) -> Vec<Property> {
    let n = GROVER_QUBITS;
    let p1 = Arc::clone(&p);
    let p2 = Arc::clone(&p);
    let p3 = p;
    vec![
        Property::new("marked_probability_amplified", vec![grover_search_input()], move |inputs, reg| {
            let o = inputs[0].as_grover_oracle().ok_or("input 0 is not an oracle")?;
            let r = o.optimal_iterations();
            let qc = assemble_grover(&p1, &o.circuit, r)?;
            reg.assert_probability(&qc, &all(n), &grover_zero_probabilities(n, &o.marked, r), Basis::Z)?;
            Ok(())
        })
        .with_precondition(amplifiable),
        Property::new(
            "identity_oracle_is_noop",
            vec![
                InputGenerator::GroverOracle {
                    num_qubits: n,
                    min_frac: 0.0,
                    max_frac: 0.0,
                },
                InputGenerator::RandomInt { low: 1, high: 3 },
            ],
            move |inputs, reg| -> OperationsResult {
                let o = inputs[0].as_grover_oracle().ok_or("input 0 is not an oracle")?;
                let iterations = input_int(inputs, 1)? as usize;
                let qc = assemble_grover(&p2, &o.circuit, iterations)?;
                let uniform = Circuit::from_gates(n, (0..n).map(Gate::h))?;
                reg.assert_equal(&qc, &all(n), &uniform, &all(n))?;
                Ok(())
            },
        ),
        Property::new("single_marked_state_most_frequent", vec![grover_search_input()], move |inputs, reg| {
            let o = inputs[0].as_grover_oracle().ok_or("input 0 is not an oracle")?;
            let qc = assemble_grover(&p3, &o.circuit, o.optimal_iterations())?;
            reg.assert_most_frequent(&qc, &all(n), &bits_le(o.marked[0], n), Basis::Z)?;
            Ok(())
        })
        .with_precondition(single_mark),
    ]
}

fn grover_screen(p: &Program, seed: u64) -> Result<StateVector, FixtureError> {
    let o = grover_oracle(GROVER_QUBITS, (0.0, 0.5), seed)?;
    Ok(statevector(&assemble_grover(p, &o.circuit, o.optimal_iterations())?)?)
}

pub fn grover_fixture() -> AlgorithmFixture {
    AlgorithmFixture {
        name: "grover",
        program: grover_program(GROVER_QUBITS).expect("valid size"),
        mutant_seed: 0x6a0,
        properties: grover_properties,
        screen_case: grover_screen,
    }
}

// ---------------------------------------------------------------- Deutsch–Jozsa

/// Stages: X on the ancilla and H on every qubit, then H on the inputs.
/// The oracle goes between them.
pub fn dj_program(n: usize) -> Result<Program, FixtureError> {
    let mut prep = CircuitBuilder::new(n + 1)?;
    prep.gate(Gate::x(n))?;
    prep.gates((0..=n).map(Gate::h))?;
    let post = Circuit::from_gates(n + 1, (0..n).map(Gate::h))?;
    Ok(Program::from_stages(n + 1, &[prep.build(), post])?)
}

pub fn assemble_dj(p: &Program, oracle: &Circuit) -> Result<Circuit, FixtureError> {
    if oracle.num_qubits() != p.num_qubits() {
        return Err(FixtureError::InvalidParameter(format!(
            "oracle has {} qubits, expected {}",
            oracle.num_qubits(),
            p.num_qubits()
        )));
    }
    Ok(stage(p, 0).compose(oracle, None)?.compose(&stage(p, 1), None)?)
}

pub fn build_dj(n: usize, oracle: &Circuit) -> Result<Circuit, FixtureError> {
    assemble_dj(&dj_program(n)?, oracle)
}

fn dj_input(kind: Option<OracleKind>) -> Vec<InputGenerator> {
    vec![InputGenerator::ConstantOrBalanced {
        num_qubits: DJ_INPUTS,
        kind,
    }]
}

fn dj_case(p: &Program, inputs: &[GeneratedInput]) -> Result<Circuit, Box<dyn std::error::Error + Send + Sync>> {
    let o = inputs[0].as_dj_oracle().ok_or("input 0 is not an oracle")?;
    Ok(assemble_dj(p, &o.circuit)?)
}

fn dj_properties(p: Arc<Program>) -> Vec<Property> {
    let n = DJ_INPUTS;
    let p1 = Arc::clone(&p);
    let p2 = Arc::clone(&p);
    let p3 = p;
    vec![
        Property::new("constant_oracle_reads_zero", dj_input(Some(OracleKind::Constant)), move |inputs, reg| {
            let qc = dj_case(&p1, inputs)?;
            reg.assert_most_frequent(&qc, &all(n), &bits_le(0, n), Basis::Z)?;
            Ok(())
        }),
        Property::new("balanced_oracle_reads_nonzero", dj_input(Some(OracleKind::Balanced)), move |inputs, reg| {
            let qc = dj_case(&p2, inputs)?;
            let zero = Circuit::new(n)?;
            reg.assert_different(&qc, &all(n), &zero, &all(n))?;
            Ok(())
        }),
        Property::new("ancilla_stays_minus", dj_input(None), move |inputs, reg| {
            let qc = dj_case(&p3, inputs)?;
            let minus = Circuit::from_gates(1, [Gate::x(0), Gate::h(0)])?;
            reg.assert_equal(&qc, &[n], &minus, &[0])?;
            Ok(())
        }),
    ]
}

fn dj_screen(p: &Program, seed: u64) -> Result<StateVector, FixtureError> {
    let kind = if seed & 1 == 0 { OracleKind::Constant } else { OracleKind::Balanced };
    let o = constant_or_balanced_oracle(DJ_INPUTS, kind, seed)?;
    Ok(statevector(&assemble_dj(p, &o.circuit)?)?)
}

pub fn dj_fixture() -> AlgorithmFixture {
    AlgorithmFixture {
        name: "deutsch_jozsa",
        program: dj_program(DJ_INPUTS).expect("valid size"),
        mutant_seed: 0xd1,
        properties: dj_properties,
        screen_case: dj_screen,
    }
}

// ---------------------------------------------------------------- superdense coding

/// Qubits 0 (sender) and 1 (receiver) share a Bell pair; message bits sit on
/// qubits 2 (b0) and 3 (b1). Stages: Bell preparation; encoding by CZ(2,0)
/// and CX(3,0), the deferred form of "Z if b0, X if b1"; Bell-basis
/// decoding, after which qubit 0 holds b0 and qubit 1 holds b1.
pub fn superdense_program() -> Program {
    let stages = [
        Circuit::from_gates(4, [Gate::h(0), Gate::cx(0, 1)]),
        Circuit::from_gates(4, [Gate::cz(2, 0), Gate::cx(3, 0)]),
        Circuit::from_gates(4, [Gate::cx(0, 1), Gate::h(0)]),
    ]
    .map(|c| c.expect("valid superdense stage"));
    Program::from_stages(4, &stages).expect("gate-only")
}

fn superdense_input(p: &Program, bits: usize) -> Result<Circuit, CircuitError> {
    Circuit::from_gates(4, [(2, 0), (3, 1)].into_iter().filter(|&(_, b)| bits >> b & 1 == 1).map(|(q, _)| Gate::x(q)))?
        .compose(p.circuit(), None)
}

pub fn build_superdense(bits: usize) -> Result<Circuit, FixtureError> {
    if bits > 3 {
        return Err(FixtureError::InvalidParameter(format!("superdense message must be in 0..=3, got {bits}")));
    }
    Ok(superdense_input(&superdense_program(), bits)?)
}

fn superdense_properties(p: Arc<Program>) -> Vec<Property> {
    let message = || vec![InputGenerator::RandomInt { low: 0, high: 3 }];
    let p1 = Arc::clone(&p);
    let p2 = Arc::clone(&p);
    let p3 = p;
    vec![
        Property::new("outputs_are_basis_states", message(), move |inputs, reg: &mut AssertionRegistry| {
            let bits = input_int(inputs, 0)? as usize;
            let qc = superdense_input(&p1, bits)?;
            let zeros: Vec<f64> = (0..2).map(|i| if bits >> i & 1 == 1 { 0.0 } else { 1.0 }).collect();
            reg.assert_probability(&qc, &[0, 1], &zeros, Basis::Z)?;
            reg.assert_probability(&qc, &[0, 1], &[0.5, 0.5], Basis::X)?;
            reg.assert_probability(&qc, &[0, 1], &[0.5, 0.5], Basis::Y)?;
            Ok(())
        }),
        Property::new("decodes_message", message(), move |inputs, reg| {
            let bits = input_int(inputs, 0)? as usize;
            let qc = superdense_input(&p2, bits)?;
            reg.assert_most_frequent(&qc, &[0, 1], &bits_le(bits, 2), Basis::Z)?;
            Ok(())
        }),
        Property::new("matches_direct_preparation", message(), move |inputs, reg| {
            let bits = input_int(inputs, 0)? as usize;
            let qc = superdense_input(&p3, bits)?;
            reg.assert_equal(&qc, &[0, 1], &basis_prep(2, bits)?, &[0, 1])?;
            Ok(())
        }),
    ]
}

fn superdense_screen(p: &Program, seed: u64) -> Result<StateVector, FixtureError> {
    let message = random_state(2, seed)?;
    Ok(statevector(&prepared(4, &message, &[2, 3])?.compose(p.circuit(), None)?)?)
}

pub fn superdense_fixture() -> AlgorithmFixture {
    AlgorithmFixture {
        name: "superdense",
        program: superdense_program(),
        mutant_seed: 0x5d,
        properties: superdense_properties,
        screen_case: superdense_screen,
    }
}
