//! Properties and the test runner.
//!
//! For every property the runner draws `num_inputs` input tuples whose seeds
//! derive from the base seed and the property's generator signature, filters
//! them through the precondition with bounded retry, runs the operations body
//! once per accepted tuple, and finally hands every registered assertion of
//! the whole suite to [`crate::analysis`] in one batch.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{analyze, AssertionOutcome, PlanStats};
use crate::assertions::{Assertion, AssertionKind, AssertionRegistry, TestRecord};
use crate::generators::{GenError, GeneratedInput, InputGenerator};
use crate::rng::{derive_seed, hash_bytes};

pub type Precondition = Arc<dyn Fn(&[GeneratedInput]) -> bool + Send + Sync>;
pub type OperationsResult = Result<(), Box<dyn std::error::Error + Send + Sync>>;
pub type Operations = Arc<dyn Fn(&[GeneratedInput], &mut AssertionRegistry) -> OperationsResult + Send + Sync>;

/// Input generators, a precondition over their outputs, and an operations
/// body that builds circuits and registers assertions.
#[derive(Clone)]
pub struct Property {
    pub name: String,
    pub generators: Vec<InputGenerator>,
    pub precondition: Precondition,
    pub operations: Operations,
}

impl Property {
    /// A property whose precondition accepts everything.
    pub fn new(
        name: impl Into<String>,
        generators: Vec<InputGenerator>,
        operations: impl Fn(&[GeneratedInput], &mut AssertionRegistry) -> OperationsResult + Send + Sync + 'static,
    ) -> Self {
        Property {
            name: name.into(),
            generators,
            precondition: Arc::new(|_| true),
            operations: Arc::new(operations),
        }
    }

    pub fn with_precondition(mut self, pre: impl Fn(&[GeneratedInput]) -> bool + Send + Sync + 'static) -> Self {
        self.precondition = Arc::new(pre);
        self
    }

    /// Ordered generator signatures; the key of the property's seed stream.
    pub fn signature(&self) -> String {
        self.generators.iter().map(InputGenerator::signature).collect::<Vec<_>>().join(";")
    }

    fn signature_hash(&self) -> u64 {
        hash_bytes("generator-signature", self.signature().as_bytes())
    }
}

impl fmt::Debug for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Property")
            .field("name", &self.name)
            .field("generators", &self.generators)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestConfig {
    pub num_inputs: usize,
    pub shots: u64,
    pub family_alpha: f64,
    pub max_precondition_attempts: usize,
    pub base_seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            num_inputs: 64,
            shots: 1600,
            family_alpha: 0.05,
            max_precondition_attempts: 100,
            base_seed: 0,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.num_inputs == 0 {
            return Err(EngineError::InvalidConfig("num_inputs must be at least 1".into()));
        }
        if self.shots == 0 {
            return Err(EngineError::InvalidConfig("shots must be at least 1".into()));
        }
        if !(self.family_alpha > 0.0 && self.family_alpha < 1.0) {
            return Err(EngineError::InvalidConfig(format!(
                "family_alpha must lie in (0, 1), got {}",
                self.family_alpha
            )));
        }
        if self.max_precondition_attempts == 0 {
            return Err(EngineError::InvalidConfig("max_precondition_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("property list is empty")]
    EmptySuite,
    #[error("invalid test configuration: {0}")]
    InvalidConfig(String),
    #[error("duplicate property name '{0}'")]
    DuplicateName(String),
}

/// Why a property failed to produce its inputs.
#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
pub enum InputFailure {
    #[error("precondition not satisfied after {attempts} attempts for input {ordinal}")]
    PreconditionTimeout { ordinal: usize, attempts: usize },
    #[error("generator failed for input {ordinal}: {message}")]
    Generator { ordinal: usize, message: String },
}

/// One accepted input tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct InputCase {
    pub ordinal: usize,
    /// Seed of the tuple; replays the inputs via [`regenerate`].
    pub seed: u64,
    /// Number of rejected candidates before this one.
    pub rejected: usize,
    pub inputs: Vec<GeneratedInput>,
}

/// Seed of candidate `attempt` for input `ordinal` of a property.
pub fn tuple_seed(base_seed: u64, signature_hash: u64, ordinal: usize, attempt: usize) -> u64 {
    derive_seed("input-tuple", &[base_seed, signature_hash, ordinal as u64, attempt as u64])
}

/// Regenerates the inputs of a tuple from its seed.
pub fn regenerate(p: &Property, seed: u64) -> Result<Vec<GeneratedInput>, GenError> {
    p.generators
        .iter()
        .enumerate()
        .map(|(i, g)| g.generate(derive_seed("generator", &[seed, i as u64])))
        .collect()
}

/// Draws `cfg.num_inputs` accepted tuples, trying up to
/// `cfg.max_precondition_attempts` candidates per ordinal.
pub fn generate_inputs(p: &Property, cfg: &TestConfig) -> Result<Vec<InputCase>, InputFailure> {
    let sig = p.signature_hash();
    let mut out = Vec::with_capacity(cfg.num_inputs);
    for ordinal in 0..cfg.num_inputs {
        let mut accepted = None;
        for attempt in 0..cfg.max_precondition_attempts {
            let seed = tuple_seed(cfg.base_seed, sig, ordinal, attempt);
            let inputs = regenerate(p, seed).map_err(|e| InputFailure::Generator {
                ordinal,
                message: e.to_string(),
            })?;
            if (p.precondition)(&inputs) {
                accepted = Some(InputCase {
                    ordinal,
                    seed,
                    rejected: attempt,
                    inputs,
                });
                break;
            }
        }
        match accepted {
            Some(case) => out.push(case),
            None => {
                return Err(InputFailure::PreconditionTimeout {
                    ordinal,
                    attempts: cfg.max_precondition_attempts,
                })
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    /// A statistical (or deterministic) assertion failed.
    Fail,
    /// The operations body returned an error.
    ExecutionError,
}

/// Outcome of one assertion of one test case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionVerdict {
    pub property: String,
    pub input_ordinal: usize,
    pub assertion_ordinal: usize,
    /// `None` for execution-error verdicts.
    pub kind: Option<AssertionKind>,
    pub status: VerdictStatus,
    pub tests: Vec<TestRecord>,
    pub detail: Option<String>,
    /// Input tuple seed for [`reproduce`].
    pub seed: u64,
}

impl AssertionVerdict {
    pub fn passed(&self) -> bool {
        self.status == VerdictStatus::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub verdicts: Vec<AssertionVerdict>,
    /// Set when inputs could not be generated; no verdicts exist then.
    pub input_failure: Option<InputFailure>,
    /// Seeds of the accepted input tuples, by ordinal.
    pub seeds: Vec<u64>,
}

impl PropertyResult {
    pub fn execution_errors(&self) -> usize {
        self.verdicts.iter().filter(|v| v.status == VerdictStatus::ExecutionError).count()
    }

    pub fn failing_seeds(&self) -> Vec<u64> {
        let mut s: Vec<u64> = self.verdicts.iter().filter(|v| !v.passed()).map(|v| v.seed).collect();
        s.dedup();
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub properties: Vec<PropertyResult>,
    pub stats: PlanStats,
    pub duration: Duration,
    pub config: TestConfig,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }

    /// True if any property failed through an error rather than a statistical verdict.
    pub fn had_errors(&self) -> bool {
        self.properties
            .iter()
            .any(|p| p.input_failure.is_some() || p.execution_errors() > 0)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

/// Seed of the suite-wide analysis.
pub fn analysis_seed(base_seed: u64) -> u64 {
    derive_seed("analysis", &[base_seed])
}

/// What one operations call produced.
enum CaseRun {
    Assertions(Vec<Assertion>),
    Error(String),
}

fn run_case(p: &Property, inputs: &[GeneratedInput]) -> CaseRun {
    let mut reg = AssertionRegistry::new();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| (p.operations)(inputs, &mut reg)));
    match result {
        Ok(Ok(())) => CaseRun::Assertions(reg.into_assertions()),
        Ok(Err(e)) => CaseRun::Error(e.to_string()),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "operations body panicked".into());
            CaseRun::Error(format!("panic: {msg}"))
        }
    }
}

struct Slot {
    property: usize,
    ordinal: usize,
    seed: u64,
    assertion_ordinal: usize,
}

fn error_verdict(p: &Property, ordinal: usize, seed: u64, message: String) -> AssertionVerdict {
    AssertionVerdict {
        property: p.name.clone(),
        input_ordinal: ordinal,
        assertion_ordinal: 0,
        kind: None,
        status: VerdictStatus::ExecutionError,
        tests: Vec::new(),
        detail: Some(message),
        seed,
    }
}

fn to_verdict(p: &Property, slot: &Slot, kind: AssertionKind, outcome: AssertionOutcome) -> AssertionVerdict {
    AssertionVerdict {
        property: p.name.clone(),
        input_ordinal: slot.ordinal,
        assertion_ordinal: slot.assertion_ordinal,
        kind: Some(kind),
        status: if outcome.passed { VerdictStatus::Pass } else { VerdictStatus::Fail },
        tests: outcome.tests,
        detail: outcome.detail,
        seed: slot.seed,
    }
}

/// Runs every property on its inputs and evaluates all assertions together.
pub fn run_suite(properties: &[Property], cfg: &TestConfig) -> Result<SuiteResult, EngineError> {
    if properties.is_empty() {
        return Err(EngineError::EmptySuite);
    }
    cfg.validate()?;
    for (i, p) in properties.iter().enumerate() {
        if properties[..i].iter().any(|q| q.name == p.name) {
            return Err(EngineError::DuplicateName(p.name.clone()));
        }
    }
    let start = Instant::now();
    let mut results: Vec<PropertyResult> = Vec::with_capacity(properties.len());
    let mut assertions = Vec::new();
    let mut slots = Vec::new();
    for (pi, p) in properties.iter().enumerate() {
        let mut res = PropertyResult {
            name: p.name.clone(),
            passed: true,
            verdicts: Vec::new(),
            input_failure: None,
            seeds: Vec::new(),
        };
        match generate_inputs(p, cfg) {
            Err(f) => {
                res.passed = false;
                res.input_failure = Some(f);
            }
            Ok(cases) => {
                for case in cases {
                    res.seeds.push(case.seed);
                    match run_case(p, &case.inputs) {
                        CaseRun::Assertions(list) => {
                            for (ai, a) in list.into_iter().enumerate() {
                                slots.push(Slot {
                                    property: pi,
                                    ordinal: case.ordinal,
                                    seed: case.seed,
                                    assertion_ordinal: ai,
                                });
                                assertions.push(a);
                            }
                        }
                        CaseRun::Error(msg) => res.verdicts.push(error_verdict(p, case.ordinal, case.seed, msg)),
                    }
                }
            }
        }
        results.push(res);
    }

    let (outcomes, stats) = match analyze(&assertions, cfg.shots, cfg.family_alpha, analysis_seed(cfg.base_seed)) {
        Ok(ev) => (ev.outcomes.into_iter().map(Ok).collect::<Vec<_>>(), ev.stats),
        // the simulator cannot fail on validated circuits within the size cap,
        // but keep the failure attributable if it ever does
        Err(e) => (
            (0..assertions.len())
                .map(|i| if i == e.assertion { Err(e.source.to_string()) } else { Err("analysis aborted".into()) })
                .collect(),
            PlanStats::default(),
        ),
    };
    for ((slot, assertion), outcome) in slots.iter().zip(&assertions).zip(outcomes) {
        let p = &properties[slot.property];
        let verdict = match outcome {
            Ok(o) => to_verdict(p, slot, assertion.kind(), o),
            Err(msg) => error_verdict(p, slot.ordinal, slot.seed, msg),
        };
        results[slot.property].verdicts.push(verdict);
    }
    for r in &mut results {
        r.verdicts.sort_by_key(|v| (v.input_ordinal, v.assertion_ordinal));
        if r.verdicts.iter().any(|v| !v.passed()) {
            r.passed = false;
        }
    }
    Ok(SuiteResult {
        properties: results,
        stats,
        duration: start.elapsed(),
        config: *cfg,
    })
}

/// Re-runs a single test case from its tuple seed. Only the input is pinned
/// by the seed: the analysis covers this case alone, so thresholds and shot
/// samples can differ from the original suite run.
pub fn reproduce(p: &Property, seed: u64, cfg: &TestConfig) -> Result<Vec<AssertionVerdict>, EngineError> {
    cfg.validate()?;
    let inputs = match regenerate(p, seed) {
        Ok(i) => i,
        Err(e) => return Ok(vec![error_verdict(p, 0, seed, e.to_string())]),
    };
    let assertions = match run_case(p, &inputs) {
        CaseRun::Assertions(a) => a,
        CaseRun::Error(msg) => return Ok(vec![error_verdict(p, 0, seed, msg)]),
    };
    let ev = match analyze(&assertions, cfg.shots, cfg.family_alpha, analysis_seed(cfg.base_seed)) {
        Ok(ev) => ev,
        Err(e) => return Ok(vec![error_verdict(p, 0, seed, e.to_string())]),
    };
    Ok(assertions
        .iter()
        .zip(ev.outcomes)
        .enumerate()
        .map(|(i, (a, o))| {
            let slot = Slot {
                property: 0,
                ordinal: 0,
                seed,
                assertion_ordinal: i,
            };
            to_verdict(p, &slot, a.kind(), o)
        })
        .collect())
}
