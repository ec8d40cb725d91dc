//! The six statistical assertions.
//!
//! An [`Assertion`] names the circuits and qubits it needs measured
//! ([`Assertion::requirements`]), the hypothesis tests it contributes to the
//! suite-wide family ([`Assertion::tests`]), and a verdict rule over the
//! measured counts and that family's rejection set ([`Assertion::verdict`]).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Basis, Circuit};
use crate::stats::{binomial_two_sided, fisher_exact_two_sided, ContingencyTable2x2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssertionError {
    #[error("qubit lists differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("qubit {qubit} out of range for {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit list {0:?} contains duplicates")]
    DuplicateQubits(Vec<usize>),
    #[error("assertion needs at least {0} qubit(s)")]
    TooFewQubits(usize),
    #[error("assertion circuits must be measurement-free")]
    MeasuredCircuit,
    #[error("probability target {0} outside [0, 1]")]
    InvalidTarget(f64),
    #[error("expected outcome '{0}' must be a string of 0/1 of length {1}")]
    MalformedOutcome(String, usize),
    #[error("basis list is empty")]
    NoBases,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AssertionKind {
    Equal,
    Different,
    Entangled,
    Separable,
    Probability,
    MostFrequent,
}

impl fmt::Display for AssertionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AssertionKind::Equal => "assert_equal",
            AssertionKind::Different => "assert_different",
            AssertionKind::Entangled => "assert_entangled",
            AssertionKind::Separable => "assert_separable",
            AssertionKind::Probability => "assert_probability",
            AssertionKind::MostFrequent => "assert_most_frequent",
        };
        f.write_str(s)
    }
}

/// Qubits of one circuit that must be measured in one basis. Single-qubit
/// requirements may share a copy with anything compatible; joint ones need
/// all their qubits measured together in the same copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementRequirement {
    /// Index into [`Assertion::circuits`].
    pub circuit: usize,
    pub qubits: Vec<usize>,
    pub basis: Basis,
    pub joint: bool,
}

/// Measured data for one requirement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observation {
    /// (zeros, ones) of a single qubit.
    Single(u64, u64),
    /// Joint outcome counts; character `i` is the `i`-th listed qubit.
    Joint(BTreeMap<String, u64>),
}

impl Observation {
    fn single(&self) -> (u64, u64) {
        match self {
            Observation::Single(z, o) => (*z, *o),
            Observation::Joint(_) => panic!("single-qubit observation expected"),
        }
    }

    fn joint(&self) -> &BTreeMap<String, u64> {
        match self {
            Observation::Joint(m) => m,
            Observation::Single(..) => panic!("joint observation expected"),
        }
    }
}

/// One hypothesis test an assertion contributes to the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    /// e.g. `q2|q0 X` for a comparison, `q1 Z` for a probability test.
    pub label: String,
    pub basis: Basis,
    pub p_value: f64,
    /// Filled in after correction.
    pub threshold: f64,
    pub rejected: bool,
    /// Observed (zeros, ones) of the first (or only) side.
    pub observed: (u64, u64),
    /// Observed (zeros, ones) of the second side, or the expected zeros
    /// fraction for probability tests encoded as `None`.
    pub observed_other: Option<(u64, u64)>,
}

#[derive(Debug, Clone)]
pub enum Assertion {
    Equal(Comparison),
    Different(Comparison),
    Entangled(JointSpec),
    Separable(JointSpec),
    Probability {
        circuit: Arc<Circuit>,
        qubits: Vec<usize>,
        targets: Vec<f64>,
        basis: Basis,
    },
    MostFrequent {
        spec: JointSpec,
        expected: String,
    },
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub a: Arc<Circuit>,
    pub qubits_a: Vec<usize>,
    pub b: Arc<Circuit>,
    pub qubits_b: Vec<usize>,
    pub bases: Vec<Basis>,
}

#[derive(Debug, Clone)]
pub struct JointSpec {
    pub circuit: Arc<Circuit>,
    pub qubits: Vec<usize>,
    pub basis: Basis,
}

fn check_circuit(c: &Circuit, qubits: &[usize]) -> Result<(), AssertionError> {
    if c.has_measurements() {
        return Err(AssertionError::MeasuredCircuit);
    }
    for &q in qubits {
        if q >= c.num_qubits() {
            return Err(AssertionError::QubitOutOfRange {
                qubit: q,
                num_qubits: c.num_qubits(),
            });
        }
    }
    if qubits.iter().enumerate().any(|(i, q)| qubits[i + 1..].contains(q)) {
        return Err(AssertionError::DuplicateQubits(qubits.to_vec()));
    }
    Ok(())
}

fn comparison(a: &Circuit, qa: &[usize], b: &Circuit, qb: &[usize], bases: &[Basis]) -> Result<Comparison, AssertionError> {
    if qa.len() != qb.len() {
        return Err(AssertionError::LengthMismatch(qa.len(), qb.len()));
    }
    if qa.is_empty() {
        return Err(AssertionError::TooFewQubits(1));
    }
    if bases.is_empty() {
        return Err(AssertionError::NoBases);
    }
    check_circuit(a, qa)?;
    check_circuit(b, qb)?;
    let mut bs = bases.to_vec();
    bs.dedup();
    Ok(Comparison {
        a: Arc::new(a.clone()),
        qubits_a: qa.to_vec(),
        b: Arc::new(b.clone()),
        qubits_b: qb.to_vec(),
        bases: bs,
    })
}

fn joint(c: &Circuit, qubits: &[usize], basis: Basis, min: usize) -> Result<JointSpec, AssertionError> {
    if qubits.len() < min {
        return Err(AssertionError::TooFewQubits(min));
    }
    check_circuit(c, qubits)?;
    Ok(JointSpec {
        circuit: Arc::new(c.clone()),
        qubits: qubits.to_vec(),
        basis,
    })
}

/// Passes unless some per-qubit, per-basis Fisher test rejects equality.
pub fn assert_equal(a: &Circuit, qubits_a: &[usize], b: &Circuit, qubits_b: &[usize], bases: &[Basis]) -> Result<Assertion, AssertionError> {
    Ok(Assertion::Equal(comparison(a, qubits_a, b, qubits_b, bases)?))
}

/// Passes only if some per-qubit, per-basis Fisher test rejects equality.
pub fn assert_different(a: &Circuit, qubits_a: &[usize], b: &Circuit, qubits_b: &[usize], bases: &[Basis]) -> Result<Assertion, AssertionError> {
    Ok(Assertion::Different(comparison(a, qubits_a, b, qubits_b, bases)?))
}

/// Passes iff exactly two complementary joint outcomes are observed.
pub fn assert_entangled(c: &Circuit, qubits: &[usize], basis: Basis) -> Result<Assertion, AssertionError> {
    Ok(Assertion::Entangled(joint(c, qubits, basis, 2)?))
}

/// The negation of [`assert_entangled`].
pub fn assert_separable(c: &Circuit, qubits: &[usize], basis: Basis) -> Result<Assertion, AssertionError> {
    Ok(Assertion::Separable(joint(c, qubits, basis, 2)?))
}

/// Per qubit, an exact binomial test of the zero count against its target.
pub fn assert_probability(c: &Circuit, qubits: &[usize], probs_of_zero: &[f64], basis: Basis) -> Result<Assertion, AssertionError> {
    if probs_of_zero.len() != qubits.len() {
        return Err(AssertionError::LengthMismatch(qubits.len(), probs_of_zero.len()));
    }
    if qubits.is_empty() {
        return Err(AssertionError::TooFewQubits(1));
    }
    if let Some(&t) = probs_of_zero.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(AssertionError::InvalidTarget(t));
    }
    check_circuit(c, qubits)?;
    Ok(Assertion::Probability {
        circuit: Arc::new(c.clone()),
        qubits: qubits.to_vec(),
        targets: probs_of_zero.to_vec(),
        basis,
    })
}

/// Passes iff `expected` (character `i` ↔ `qubits[i]`) is the unique most
/// frequent joint outcome. No statistical test is involved.
pub fn assert_most_frequent(c: &Circuit, qubits: &[usize], expected: &str, basis: Basis) -> Result<Assertion, AssertionError> {
    if expected.len() != qubits.len() || !expected.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(AssertionError::MalformedOutcome(expected.to_string(), qubits.len()));
    }
    Ok(Assertion::MostFrequent {
        spec: joint(c, qubits, basis, 1)?,
        expected: expected.to_string(),
    })
}

/// Little-endian bit string of `value`: character `i` is bit `i`.
pub fn bits_le(value: usize, width: usize) -> String {
    (0..width).map(|i| if value >> i & 1 == 1 { '1' } else { '0' }).collect()
}

impl Assertion {
    pub fn kind(&self) -> AssertionKind {
        match self {
            Assertion::Equal(_) => AssertionKind::Equal,
            Assertion::Different(_) => AssertionKind::Different,
            Assertion::Entangled(_) => AssertionKind::Entangled,
            Assertion::Separable(_) => AssertionKind::Separable,
            Assertion::Probability { .. } => AssertionKind::Probability,
            Assertion::MostFrequent { .. } => AssertionKind::MostFrequent,
        }
    }

    pub fn circuits(&self) -> Vec<&Arc<Circuit>> {
        match self {
            Assertion::Equal(c) | Assertion::Different(c) => vec![&c.a, &c.b],
            Assertion::Entangled(s) | Assertion::Separable(s) | Assertion::MostFrequent { spec: s, .. } => vec![&s.circuit],
            Assertion::Probability { circuit, .. } => vec![circuit],
        }
    }

    /// Requirements in a fixed order; observations are passed back in the same order.
    pub fn requirements(&self) -> Vec<MeasurementRequirement> {
        let single = |circuit, qubit, basis| MeasurementRequirement {
            circuit,
            qubits: vec![qubit],
            basis,
            joint: false,
        };
        match self {
            Assertion::Equal(c) | Assertion::Different(c) => {
                let mut out = Vec::new();
                for (&qa, &qb) in c.qubits_a.iter().zip(&c.qubits_b) {
                    for &basis in &c.bases {
                        out.push(single(0, qa, basis));
                        out.push(single(1, qb, basis));
                    }
                }
                out
            }
            Assertion::Probability { qubits, basis, .. } => qubits.iter().map(|&q| single(0, q, *basis)).collect(),
            Assertion::Entangled(s) | Assertion::Separable(s) | Assertion::MostFrequent { spec: s, .. } => {
                vec![MeasurementRequirement {
                    circuit: 0,
                    qubits: s.qubits.clone(),
                    basis: s.basis,
                    joint: true,
                }]
            }
        }
    }

    /// The hypothesis tests with their p-values (thresholds not yet set).
    pub fn tests(&self, obs: &[Observation]) -> Vec<TestRecord> {
        match self {
            Assertion::Equal(c) | Assertion::Different(c) => {
                let mut out = Vec::new();
                let mut k = 0;
                for (&qa, &qb) in c.qubits_a.iter().zip(&c.qubits_b) {
                    for &basis in &c.bases {
                        let (a0, a1) = obs[k].single();
                        let (b0, b1) = obs[k + 1].single();
                        k += 2;
                        let p = fisher_exact_two_sided(&ContingencyTable2x2::new(a0, a1, b0, b1)).unwrap_or(1.0);
                        out.push(TestRecord {
                            label: format!("q{qa}|q{qb} {basis}"),
                            basis,
                            p_value: p,
                            threshold: 0.0,
                            rejected: false,
                            observed: (a0, a1),
                            observed_other: Some((b0, b1)),
                        });
                    }
                }
                out
            }
            Assertion::Probability { qubits, targets, basis, .. } => qubits
                .iter()
                .zip(targets)
                .zip(obs)
                .map(|((&q, &t), o)| {
                    let (z, one) = o.single();
                    let p = binomial_two_sided(z, z + one, t).expect("validated target");
                    TestRecord {
                        label: format!("q{q} {basis} p0={t}"),
                        basis: *basis,
                        p_value: p,
                        threshold: 0.0,
                        rejected: false,
                        observed: (z, one),
                        observed_other: None,
                    }
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Applies the verdict rule. `tests` carry their rejection flags.
    pub fn verdict(&self, obs: &[Observation], tests: &[TestRecord]) -> (bool, Option<String>) {
        let rejected: Vec<&TestRecord> = tests.iter().filter(|t| t.rejected).collect();
        match self {
            Assertion::Equal(_) | Assertion::Probability { .. } => {
                if rejected.is_empty() {
                    (true, None)
                } else {
                    let detail = rejected
                        .iter()
                        .map(|t| describe(t))
                        .collect::<Vec<_>>()
                        .join("; ");
                    (false, Some(format!("rejected: {detail}")))
                }
            }
            Assertion::Different(_) => {
                if rejected.is_empty() {
                    let min = tests.iter().map(|t| t.p_value).fold(1.0, f64::min);
                    (false, Some(format!("no test rejected equality (smallest p = {min:.3e})")))
                } else {
                    (true, None)
                }
            }
            Assertion::Entangled(_) | Assertion::Separable(_) => {
                let counts = obs[0].joint();
                let entangled = complementary_pair(counts);
                let want = matches!(self, Assertion::Entangled(_));
                if entangled == want {
                    (true, None)
                } else {
                    let what = if want { "two complementary outcomes" } else { "no complementary pair" };
                    (false, Some(format!("expected {what}, observed {}", show(counts))))
                }
            }
            Assertion::MostFrequent { expected, .. } => {
                let counts = obs[0].joint();
                let max = counts.values().copied().max().unwrap_or(0);
                let winners: Vec<&String> = counts.iter().filter(|(_, &v)| v == max).map(|(k, _)| k).collect();
                if winners.len() == 1 && winners[0] == expected {
                    (true, None)
                } else {
                    (false, Some(format!("expected '{expected}' most frequent, observed {}", show(counts))))
                }
            }
        }
    }
}

fn describe(t: &TestRecord) -> String {
    match t.observed_other {
        Some((b0, b1)) => format!(
            "{} p={:.3e} <= {:.3e} (zeros/ones {}/{} vs {}/{})",
            t.label, t.p_value, t.threshold, t.observed.0, t.observed.1, b0, b1
        ),
        None => format!(
            "{} p={:.3e} <= {:.3e} (zeros/ones {}/{})",
            t.label, t.p_value, t.threshold, t.observed.0, t.observed.1
        ),
    }
}

fn show(counts: &BTreeMap<String, u64>) -> String {
    let parts: Vec<String> = counts.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn complementary_pair(counts: &BTreeMap<String, u64>) -> bool {
    let seen: Vec<&String> = counts.iter().filter(|(_, &v)| v > 0).map(|(k, _)| k).collect();
    if seen.len() != 2 {
        return false;
    }
    seen[0].bytes().zip(seen[1].bytes()).all(|(a, b)| a != b)
}

/// Collects the assertions registered by one operations call, in order.
#[derive(Debug, Default)]
pub struct AssertionRegistry {
    assertions: Vec<Assertion>,
}

impl AssertionRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    pub fn assert_equal(&mut self, a: &Circuit, qa: &[usize], b: &Circuit, qb: &[usize]) -> Result<(), AssertionError> {
        self.register(assert_equal(a, qa, b, qb, &Basis::ALL)?);
        Ok(())
    }

    pub fn assert_equal_in(&mut self, a: &Circuit, qa: &[usize], b: &Circuit, qb: &[usize], bases: &[Basis]) -> Result<(), AssertionError> {
        self.register(assert_equal(a, qa, b, qb, bases)?);
        Ok(())
    }

    pub fn assert_different(&mut self, a: &Circuit, qa: &[usize], b: &Circuit, qb: &[usize]) -> Result<(), AssertionError> {
        self.register(assert_different(a, qa, b, qb, &Basis::ALL)?);
        Ok(())
    }

    pub fn assert_entangled(&mut self, c: &Circuit, qubits: &[usize], basis: Basis) -> Result<(), AssertionError> {
        self.register(assert_entangled(c, qubits, basis)?);
        Ok(())
    }

    pub fn assert_separable(&mut self, c: &Circuit, qubits: &[usize], basis: Basis) -> Result<(), AssertionError> {
        self.register(assert_separable(c, qubits, basis)?);
        Ok(())
    }

    pub fn assert_probability(&mut self, c: &Circuit, qubits: &[usize], probs_of_zero: &[f64], basis: Basis) -> Result<(), AssertionError> {
        self.register(assert_probability(c, qubits, probs_of_zero, basis)?);
        Ok(())
    }

    pub fn assert_most_frequent(&mut self, c: &Circuit, qubits: &[usize], expected: &str, basis: Basis) -> Result<(), AssertionError> {
        self.register(assert_most_frequent(c, qubits, expected, basis)?);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.assertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }

    pub fn into_assertions(self) -> Vec<Assertion> {
        self.assertions
    }
}
