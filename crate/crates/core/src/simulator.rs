//! Dense statevector simulation and seeded shot sampling.
//!
//! Measurements are terminal by construction, so sampling computes the exact
//! marginal over the measured qubits once and draws every shot from it by
//! inverse-CDF lookup on uniform doubles from [`crate::rng`].

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Basis, Circuit, Gate, GateKind, Op, MAX_QUBITS};
use crate::rng::rng_for;
use crate::state::StateVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("circuit contains measurements; use sample_counts")]
    HasMeasurements,
    #[error("circuit has no measurements to sample")]
    NoMeasurements,
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("qubit indices must be distinct, got {0:?}")]
    DuplicateQubits(Vec<usize>),
    #[error("qubit index {index} out of range for {num_qubits}-qubit state")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("{0}-qubit circuit exceeds the {MAX_QUBITS}-qubit simulation limit")]
    TooLarge(usize),
}

/// Outcome histogram over the measured qubits.
///
/// Character `i` of every key is the outcome of the `i`-th measured qubit in
/// ascending qubit-index order (see [`Counts::qubits`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    qubits: Vec<usize>,
    bases: Vec<Basis>,
    counts: BTreeMap<String, u64>,
    total_shots: u64,
}

impl Counts {
    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    /// Measurement basis of each measured qubit, aligned with [`Counts::qubits`].
    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn total_shots(&self) -> u64 {
        self.total_shots
    }

    pub fn get(&self, outcome: &str) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Number of distinct observed outcomes.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// (zeros, ones) for one measured qubit, summing over the others.
    pub fn single_qubit(&self, qubit: usize) -> Option<(u64, u64)> {
        let pos = self.qubits.iter().position(|&q| q == qubit)?;
        let ones: u64 = self
            .counts
            .iter()
            .filter(|(k, _)| k.as_bytes()[pos] == b'1')
            .map(|(_, v)| *v)
            .sum();
        Some((self.total_shots - ones, ones))
    }

    /// Counts restricted to `qubits` (in the given order), summing over the rest.
    pub fn project(&self, qubits: &[usize]) -> Option<BTreeMap<String, u64>> {
        let positions: Vec<usize> = qubits
            .iter()
            .map(|q| self.qubits.iter().position(|m| m == q))
            .collect::<Option<_>>()?;
        let mut out = BTreeMap::new();
        for (k, v) in &self.counts {
            let bytes = k.as_bytes();
            let key: String = positions.iter().map(|&p| bytes[p] as char).collect();
            *out.entry(key).or_insert(0) += v;
        }
        Some(out)
    }
}

impl fmt::Display for Counts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|(k, v)| format!("{k}: {v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Exact final state of a measurement-free circuit applied to |0…0⟩.
pub fn statevector(circuit: &Circuit) -> Result<StateVector, SimError> {
    if circuit.has_measurements() {
        return Err(SimError::HasMeasurements);
    }
    Ok(StateVector::from_raw(evolve(circuit)?))
}

/// Samples `shots` outcomes of the circuit's terminal measurements.
pub fn sample_counts(circuit: &Circuit, shots: u64, seed: u64) -> Result<Counts, SimError> {
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    let measured: Vec<(usize, Basis)> = circuit.measurements().iter().map(|m| (m.0, m.1)).collect();
    if measured.is_empty() {
        return Err(SimError::NoMeasurements);
    }
    // basis rotations are already part of the op list
    let state = StateVector::from_raw(evolve(circuit)?);
    counts_from(&state, measured, shots, seed)
}

/// Samples measurements of `(qubit, basis)` pairs on a prepared state,
/// applying the basis-change rotations first. Gives the same counts as
/// [`sample_counts`] on the circuit with those measurements appended.
pub fn sample_state(state: &StateVector, measured: &[(usize, Basis)], shots: u64, seed: u64) -> Result<Counts, SimError> {
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    if measured.is_empty() {
        return Err(SimError::NoMeasurements);
    }
    let n = state.num_qubits();
    let mut amps = state.amplitudes().to_vec();
    for &(q, basis) in measured {
        if q >= n {
            return Err(SimError::QubitOutOfRange { index: q, num_qubits: n });
        }
        match basis {
            Basis::Z => {}
            Basis::X => apply_gate(&mut amps, &Gate::h(q)),
            Basis::Y => {
                apply_gate(&mut amps, &Gate::sdg(q));
                apply_gate(&mut amps, &Gate::h(q));
            }
        }
    }
    counts_from(&StateVector::from_raw(amps), measured.to_vec(), shots, seed)
}

fn counts_from(state: &StateVector, mut measured: Vec<(usize, Basis)>, shots: u64, seed: u64) -> Result<Counts, SimError> {
    measured.sort_unstable_by_key(|m| m.0);
    let qubits: Vec<usize> = measured.iter().map(|m| m.0).collect();
    let probs = marginal_distribution(state, &qubits)?;
    let hist = sample_indices(&probs, shots, seed);
    let k = qubits.len();
    let counts = hist
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .map(|(idx, c)| {
            let key: String = (0..k).map(|i| if idx >> i & 1 == 1 { '1' } else { '0' }).collect();
            (key, c)
        })
        .collect();
    Ok(Counts {
        qubits,
        bases: measured.iter().map(|m| m.1).collect(),
        counts,
        total_shots: shots,
    })
}

/// Per-index draw counts from a categorical distribution.
fn sample_indices(probs: &[f64], shots: u64, seed: u64) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    // the last outcome with nonzero mass absorbs rounding in the tail
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut rng = rng_for(seed, 0);
    let mut hist = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let mut idx = cdf.partition_point(|&c| c <= u);
        if idx > last {
            idx = last;
        }
        // skip zero-probability bins that share a cdf value with their predecessor
        while probs[idx] == 0.0 && idx < last {
            idx += 1;
        }
        hist[idx] += 1;
    }
    hist
}

/// Outcome probabilities over `qubits`; bit `i` of the result index is `qubits[i]`.
pub fn marginal_distribution(state: &StateVector, qubits: &[usize]) -> Result<Vec<f64>, SimError> {
    let n = state.num_qubits();
    for &q in qubits {
        if q >= n {
            return Err(SimError::QubitOutOfRange { index: q, num_qubits: n });
        }
    }
    if qubits.iter().enumerate().any(|(i, q)| qubits[i + 1..].contains(q)) {
        return Err(SimError::DuplicateQubits(qubits.to_vec()));
    }
    let mut out = vec![0.0; 1 << qubits.len()];
    for (idx, a) in state.amplitudes().iter().enumerate() {
        let mut local = 0usize;
        for (i, &q) in qubits.iter().enumerate() {
            local |= (idx >> q & 1) << i;
        }
        out[local] += a.norm_sqr();
    }
    Ok(out)
}

/// Full `2^n × 2^n` unitary (row-major) of a gate-only circuit.
pub fn circuit_unitary(circuit: &Circuit) -> Result<Vec<Complex64>, SimError> {
    if !circuit.is_gate_only() {
        return Err(SimError::HasMeasurements);
    }
    let n = circuit.num_qubits();
    if n > 12 {
        return Err(SimError::TooLarge(n));
    }
    let dim = 1usize << n;
    let mut u = vec![Complex64::new(0.0, 0.0); dim * dim];
    for col in 0..dim {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[col] = Complex64::new(1.0, 0.0);
        for g in circuit.gates() {
            apply_gate(&mut amps, g);
        }
        for (row, a) in amps.into_iter().enumerate() {
            u[row * dim + col] = a;
        }
    }
    Ok(u)
}

/// Applies the circuit's gates and initializations, ignoring measurements.
fn evolve(circuit: &Circuit) -> Result<Vec<Complex64>, SimError> {
    let n = circuit.num_qubits();
    if n > MAX_QUBITS {
        return Err(SimError::TooLarge(n));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[0] = Complex64::new(1.0, 0.0);
    for op in circuit.ops() {
        match op {
            Op::Gate(g) => apply_gate(&mut amps, g),
            Op::Initialize { state, qubits } => apply_initialize(&mut amps, state, qubits),
            Op::Measure { .. } => {}
        }
    }
    Ok(amps)
}

/// Applies one gate in place. Indices in `gate` must fit the vector.
pub fn apply_gate(amps: &mut [Complex64], gate: &Gate) {
    let qs = gate.qubits();
    if gate.kind() == GateKind::SWAP {
        let (a, b) = (1usize << qs[0], 1usize << qs[1]);
        for i in 0..amps.len() {
            if i & a != 0 && i & b == 0 {
                amps.swap(i, i ^ a ^ b);
            }
        }
        return;
    }
    let m = gate.base_matrix().expect("non-swap gates have a base matrix");
    let nc = gate.kind().num_controls();
    let cmask: usize = qs[..nc].iter().map(|&q| 1usize << q).sum();
    let t = 1usize << qs[nc];
    let diagonal = m[0][1] == Complex64::new(0.0, 0.0) && m[1][0] == Complex64::new(0.0, 0.0);
    for i in 0..amps.len() {
        if i & t != 0 || i & cmask != cmask {
            continue;
        }
        let j = i | t;
        let (a0, a1) = (amps[i], amps[j]);
        if diagonal {
            amps[i] = m[0][0] * a0;
            amps[j] = m[1][1] * a1;
        } else {
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

/// Sets untouched (hence |0⟩) target qubits to `state`, tensoring with the rest.
fn apply_initialize(amps: &mut [Complex64], state: &StateVector, qubits: &[usize]) {
    let tmask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let sv = state.amplitudes();
    for i in (0..amps.len()).rev() {
        let base = amps[i & !tmask];
        let mut local = 0usize;
        for (k, &q) in qubits.iter().enumerate() {
            local |= (i >> q & 1) << k;
        }
        amps[i] = base * sv[local];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a - Complex64::new(re, im)).norm() < 1e-12
    }

    #[test]
    fn hadamard_and_bell() {
        let h = Circuit::from_gates(1, [Gate::h(0)]).unwrap();
        let sv = statevector(&h).unwrap();
        assert!(close(sv.amplitudes()[0], FRAC_1_SQRT_2, 0.0));
        assert!(close(sv.amplitudes()[1], FRAC_1_SQRT_2, 0.0));
        let bell = Circuit::from_gates(2, [Gate::h(0), Gate::cx(0, 1)]).unwrap();
        let a = statevector(&bell).unwrap();
        let a = a.amplitudes();
        assert!(close(a[0], FRAC_1_SQRT_2, 0.0) && close(a[3], FRAC_1_SQRT_2, 0.0));
        assert!(close(a[1], 0.0, 0.0) && close(a[2], 0.0, 0.0));
    }

    #[test]
    fn measured_circuit_rejected_by_statevector() {
        let c = Circuit::new(1).unwrap().measure(0, Basis::Z, 0).unwrap();
        assert_eq!(statevector(&c), Err(SimError::HasMeasurements));
        assert_eq!(sample_counts(&Circuit::new(1).unwrap(), 10, 0), Err(SimError::NoMeasurements));
    }

    #[test]
    fn zero_state_counts() {
        let c = Circuit::new(1).unwrap().measure(0, Basis::Z, 0).unwrap();
        let counts = sample_counts(&c, 100, 9).unwrap();
        assert_eq!(counts.get("0"), 100);
        assert_eq!(counts.len(), 1);
    }

    #[test]
    fn bell_counts_only_correlated() {
        let c = Circuit::from_gates(2, [Gate::h(0), Gate::cx(0, 1)])
            .unwrap()
            .measure(1, Basis::Z, 0)
            .unwrap()
            .measure(0, Basis::Z, 1)
            .unwrap();
        let counts = sample_counts(&c, 500, 3).unwrap();
        assert_eq!(counts.get("00") + counts.get("11"), 500);
        assert_eq!(counts.qubits(), &[0, 1]);
    }

    #[test]
    fn key_order_is_ascending_qubit() {
        // q0 = 1, q2 = 0
        let c = Circuit::from_gates(3, [Gate::x(0)])
            .unwrap()
            .measure(2, Basis::Z, 0)
            .unwrap()
            .measure(0, Basis::Z, 1)
            .unwrap();
        let counts = sample_counts(&c, 10, 1).unwrap();
        assert_eq!(counts.get("10"), 10);
        assert_eq!(counts.single_qubit(0), Some((0, 10)));
        assert_eq!(counts.single_qubit(2), Some((10, 0)));
    }

    #[test]
    fn marginals() {
        let ghz = statevector(&Circuit::from_gates(3, [Gate::h(0), Gate::cx(0, 1), Gate::cx(1, 2)]).unwrap()).unwrap();
        let m = marginal_distribution(&ghz, &[0, 1]).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-12 && (m[3] - 0.5).abs() < 1e-12);
        assert!(m[1].abs() < 1e-12 && m[2].abs() < 1e-12);
        let full = marginal_distribution(&ghz, &[0, 1, 2]).unwrap();
        assert_eq!(full, ghz.probabilities());
        assert!(matches!(marginal_distribution(&ghz, &[0, 0]), Err(SimError::DuplicateQubits(_))));
    }

    #[test]
    fn basis_changes_map_eigenstates_to_zero() {
        let plus = Circuit::from_gates(1, [Gate::h(0)]).unwrap().measure(0, Basis::X, 0).unwrap();
        assert_eq!(sample_counts(&plus, 50, 0).unwrap().get("0"), 50);
        let i_state = Circuit::from_gates(1, [Gate::h(0), Gate::s(0)]).unwrap().measure(0, Basis::Y, 0).unwrap();
        assert_eq!(sample_counts(&i_state, 50, 0).unwrap().get("0"), 50);
    }

    #[test]
    fn initialize_places_state() {
        let sv = StateVector::new(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        let c = Circuit::new(3).unwrap().initialize(&sv, &[1]).unwrap();
        let out = statevector(&c).unwrap();
        assert!(close(out.amplitudes()[0], 0.6, 0.0));
        assert!(close(out.amplitudes()[2], 0.0, 0.8));
        let c2 = Circuit::from_gates(3, [Gate::x(0)]).unwrap().initialize(&sv, &[2]).unwrap();
        let out2 = statevector(&c2).unwrap();
        assert!(close(out2.amplitudes()[1], 0.6, 0.0));
        assert!(close(out2.amplitudes()[5], 0.0, 0.8));
    }

    #[test]
    fn sample_state_matches_sample_counts() {
        let prep = Circuit::from_gates(3, [Gate::h(0), Gate::ry(0.7, 1), Gate::cx(0, 2), Gate::t(2)]).unwrap();
        let measured = prep
            .measure(2, Basis::Y, 0)
            .unwrap()
            .measure(0, Basis::X, 1)
            .unwrap()
            .measure(1, Basis::Z, 2)
            .unwrap();
        let sv = statevector(&prep).unwrap();
        let a = sample_state(&sv, &[(2, Basis::Y), (0, Basis::X), (1, Basis::Z)], 777, 11).unwrap();
        assert_eq!(a, sample_counts(&measured, 777, 11).unwrap());
        assert_eq!(a.bases(), &[Basis::X, Basis::Z, Basis::Y]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = Circuit::from_gates(2, [Gate::h(0), Gate::ry(0.7, 1)])
            .unwrap()
            .measure(0, Basis::Z, 0)
            .unwrap()
            .measure(1, Basis::Z, 1)
            .unwrap();
        assert_eq!(sample_counts(&c, 1000, 5).unwrap(), sample_counts(&c, 1000, 5).unwrap());
        assert_ne!(sample_counts(&c, 1000, 5).unwrap(), sample_counts(&c, 1000, 6).unwrap());
    }
}
