//! Suite-wide statistical analysis.
//!
//! All assertions of a run are evaluated together: circuits are deduplicated
//! by canonical hash, measurement requirements are packed greedily into as
//! few measured copies per circuit as possible, every copy is sampled once,
//! and all p-values form a single Holm–Bonferroni family.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assertions::{Assertion, MeasurementRequirement, Observation, TestRecord};
use crate::circuit::{Basis, Circuit, CircuitDigest};
use crate::rng::derive_seed;
use crate::simulator::{sample_state, statevector, Counts, SimError};
use crate::stats::holm_bonferroni;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("assertion {assertion}: {source}")]
pub struct AnalysisError {
    pub assertion: usize,
    #[source]
    pub source: SimError,
}

/// The measurements of one circuit copy: each qubit carries at most one basis.
pub type CopyMeasurements = BTreeMap<usize, Basis>;

#[derive(Debug, Clone)]
pub struct PlanEntry {
    pub digest: CircuitDigest,
    pub circuit: Arc<Circuit>,
    pub copies: Vec<CopyMeasurements>,
}

/// Which copy of which distinct circuit serves each requirement.
#[derive(Debug, Clone, Default)]
pub struct MeasurementPlan {
    pub entries: Vec<PlanEntry>,
    /// `placements[a][r]` = (entry, copy) for requirement `r` of assertion `a`.
    pub placements: Vec<Vec<(usize, usize)>>,
    /// The requirements themselves, aligned with `placements`.
    pub requirements: Vec<Vec<MeasurementRequirement>>,
}

impl MeasurementPlan {
    pub fn num_copies(&self) -> usize {
        self.entries.iter().map(|e| e.copies.len()).sum()
    }

    pub fn num_requirements(&self) -> usize {
        self.requirements.iter().map(Vec::len).sum()
    }

    /// Checks the plan invariants; used by tests.
    pub fn validate(&self) -> Result<(), String> {
        for (a, reqs) in self.requirements.iter().enumerate() {
            for (r, req) in reqs.iter().enumerate() {
                let (e, c) = self.placements[a][r];
                let copy = self.entries.get(e).and_then(|en| en.copies.get(c)).ok_or("dangling placement")?;
                for q in &req.qubits {
                    if copy.get(q) != Some(&req.basis) {
                        return Err(format!("requirement {a}/{r} not satisfied by copy {e}/{c}"));
                    }
                }
            }
        }
        for (i, e) in self.entries.iter().enumerate() {
            if e.circuit.canonical_hash() != e.digest {
                return Err(format!("entry {i} digest mismatch"));
            }
            for (j, c) in e.copies.iter().enumerate() {
                if e.copies[..j].contains(c) {
                    return Err(format!("entry {i} has duplicate copies"));
                }
            }
        }
        Ok(())
    }
}

/// One entry per distinct circuit; requirements point at their representative.
/// Returns the skeleton (no copies yet) and, per assertion and requirement, the entry index.
pub fn deduplicate_circuits(assertions: &[Assertion]) -> (Vec<PlanEntry>, Vec<Vec<usize>>) {
    let mut index: HashMap<CircuitDigest, usize> = HashMap::new();
    let mut entries = Vec::new();
    let mut pointers = Vec::with_capacity(assertions.len());
    for a in assertions {
        let circuits = a.circuits();
        let slots: Vec<usize> = circuits
            .iter()
            .map(|c| {
                let d = c.canonical_hash();
                *index.entry(d).or_insert_with(|| {
                    entries.push(PlanEntry {
                        digest: d,
                        circuit: Arc::clone(c),
                        copies: Vec::new(),
                    });
                    entries.len() - 1
                })
            })
            .collect();
        pointers.push(a.requirements().iter().map(|r| slots[r.circuit]).collect());
    }
    (entries, pointers)
}

/// Builds the full plan: deduplicate, then first-fit packing in canonical
/// order, then a pass merging copies with identical measurement sets.
pub fn plan_measurements(assertions: &[Assertion]) -> MeasurementPlan {
    let (mut entries, pointers) = deduplicate_circuits(assertions);
    let requirements: Vec<Vec<MeasurementRequirement>> = assertions.iter().map(Assertion::requirements).collect();
    let mut placements = Vec::with_capacity(assertions.len());
    for (reqs, ptrs) in requirements.iter().zip(&pointers) {
        let mut row = Vec::with_capacity(reqs.len());
        for (req, &e) in reqs.iter().zip(ptrs) {
            let copies = &mut entries[e].copies;
            let fits = |copy: &CopyMeasurements| req.qubits.iter().all(|q| copy.get(q).is_none_or(|b| *b == req.basis));
            let c = match copies.iter().position(fits) {
                Some(c) => c,
                None => {
                    copies.push(CopyMeasurements::new());
                    copies.len() - 1
                }
            };
            for &q in &req.qubits {
                copies[c].insert(q, req.basis);
            }
            row.push((e, c));
        }
        placements.push(row);
    }
    // merge identical copies
    for (e, entry) in entries.iter_mut().enumerate() {
        let mut remap = Vec::with_capacity(entry.copies.len());
        let mut kept: Vec<CopyMeasurements> = Vec::new();
        for copy in entry.copies.drain(..) {
            match kept.iter().position(|k| *k == copy) {
                Some(i) => remap.push(i),
                None => {
                    kept.push(copy);
                    remap.push(kept.len() - 1);
                }
            }
        }
        entry.copies = kept;
        for row in &mut placements {
            for p in row.iter_mut().filter(|p| p.0 == e) {
                p.1 = remap[p.1];
            }
        }
    }
    MeasurementPlan {
        entries,
        placements,
        requirements,
    }
}

/// Execution counters for one analysis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStats {
    pub assertions: usize,
    pub requirements: usize,
    pub distinct_circuits: usize,
    pub copies_executed: usize,
    pub shots_sampled: u64,
    /// Executions without optimisation: one per (assertion, circuit, basis).
    pub baseline_executions: usize,
    pub baseline_shots: u64,
    /// Size of the Holm family.
    pub family_size: usize,
}

/// Result for one assertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionOutcome {
    pub passed: bool,
    pub tests: Vec<TestRecord>,
    pub detail: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub outcomes: Vec<AssertionOutcome>,
    pub stats: PlanStats,
}

/// Seed of copy `copy` of the circuit with digest `digest`.
pub fn copy_seed(seed: u64, digest: &CircuitDigest, copy: usize) -> u64 {
    derive_seed("copy", &[seed, digest.word(), copy as u64])
}

/// Samples every copy of the plan (in parallel) and evaluates all assertions
/// against one Holm family at level `family_alpha`.
pub fn execute_and_evaluate(
    plan: &MeasurementPlan,
    assertions: &[Assertion],
    shots: u64,
    family_alpha: f64,
    seed: u64,
) -> Result<Evaluation, AnalysisError> {
    let owner_of = |entry: usize| -> usize {
        plan.placements
            .iter()
            .position(|row| row.iter().any(|p| p.0 == entry))
            .unwrap_or(0)
    };
    let counts: Vec<Vec<Counts>> = plan
        .entries
        .par_iter()
        .enumerate()
        .map(|(e, entry)| {
            let wrap = |source| AnalysisError {
                assertion: owner_of(e),
                source,
            };
            let state = statevector(&entry.circuit).map_err(wrap)?;
            entry
                .copies
                .iter()
                .enumerate()
                .map(|(c, copy)| {
                    let measured: Vec<(usize, Basis)> = copy.iter().map(|(q, b)| (*q, *b)).collect();
                    sample_state(&state, &measured, shots, copy_seed(seed, &entry.digest, c)).map_err(wrap)
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;

    // observations and raw tests per assertion, in canonical order
    let mut observations = Vec::with_capacity(assertions.len());
    let mut tests: Vec<Vec<TestRecord>> = Vec::with_capacity(assertions.len());
    for (a, assertion) in assertions.iter().enumerate() {
        let obs: Vec<Observation> = plan.requirements[a]
            .iter()
            .zip(&plan.placements[a])
            .map(|(req, &(e, c))| {
                let cnt = &counts[e][c];
                if req.joint {
                    Observation::Joint(cnt.project(&req.qubits).expect("placed qubits are measured"))
                } else {
                    let (z, o) = cnt.single_qubit(req.qubits[0]).expect("placed qubit is measured");
                    Observation::Single(z, o)
                }
            })
            .collect();
        tests.push(assertion.tests(&obs));
        observations.push(obs);
    }

    let family: Vec<f64> = tests.iter().flatten().map(|t| t.p_value).collect();
    let holm = holm_bonferroni(&family, family_alpha);
    for (k, t) in tests.iter_mut().flatten().enumerate() {
        t.threshold = holm.thresholds[k];
        t.rejected = holm.rejected[k];
    }

    let outcomes = assertions
        .iter()
        .zip(&observations)
        .zip(tests)
        .map(|((a, obs), tests)| {
            let (passed, detail) = a.verdict(obs, &tests);
            AssertionOutcome { passed, tests, detail }
        })
        .collect();

    let baseline_executions: usize = plan
        .requirements
        .iter()
        .map(|reqs| {
            let mut pairs: Vec<(usize, Basis)> = reqs.iter().map(|r| (r.circuit, r.basis)).collect();
            pairs.sort_unstable();
            pairs.dedup();
            pairs.len()
        })
        .sum();
    let copies = plan.num_copies();
    Ok(Evaluation {
        outcomes,
        stats: PlanStats {
            assertions: assertions.len(),
            requirements: plan.num_requirements(),
            distinct_circuits: plan.entries.len(),
            copies_executed: copies,
            shots_sampled: copies as u64 * shots,
            baseline_executions,
            baseline_shots: baseline_executions as u64 * shots,
            family_size: family.len(),
        },
    })
}

/// Plans, executes, and evaluates in one call.
pub fn analyze(assertions: &[Assertion], shots: u64, family_alpha: f64, seed: u64) -> Result<Evaluation, AnalysisError> {
    let plan = plan_measurements(assertions);
    execute_and_evaluate(&plan, assertions, shots, family_alpha, seed)
}
