//! Circuit-level mutation analysis.
//!
//! Faulty mutants come from one random gate insertion, deletion, or
//! replacement, screened so that the mutant is observably different from the
//! base program on a domain of inputs. Equivalent mutants insert an identity
//! pair and are verified unitarily equal to the base. A sweep runs every
//! fixture's properties against every mutant over a grid of configurations.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Gate, GateKind};
use crate::corpus::{AlgorithmFixture, FixtureError};
use crate::engine::{run_suite, TestConfig};
use crate::program::{Program, ProgramError};
use crate::rng::{derive_seed, rng_for, StreamRng};
use crate::simulator::circuit_unitary;
use crate::state::StateVector;
use crate::stats::spearman_rank;

/// Upper bound on candidate draws per mutant set.
pub const MAX_ATTEMPTS: usize = 1000;
/// Tolerance of the equivalence checks.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;

pub const PROPERTY_COUNTS: [usize; 3] = [1, 2, 3];
pub const INPUT_COUNTS: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];
pub const SHOT_COUNTS: [u64; 9] = [12, 25, 50, 100, 200, 400, 800, 1600, 3200];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MutationError {
    #[error("cannot mutate an empty program")]
    EmptyProgram,
    #[error("found only {found} of {wanted} mutants after {attempts} attempts")]
    Exhausted { found: usize, wanted: usize, attempts: usize },
    #[error("identity insertion changed the unitary: {0}")]
    NotEquivalent(String),
    #[error("no rows to score")]
    EmptyRows,
    #[error("invalid sweep configuration: {0}")]
    InvalidSweep(String),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutantKind {
    Faulty,
    Equivalent,
}

impl fmt::Display for MutantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MutantKind::Faulty => "faulty",
            MutantKind::Equivalent => "equivalent",
        })
    }
}

/// One edit of a program's flat gate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MutationOperator {
    GateInsert { position: usize, gate: Gate },
    GateDelete { position: usize },
    GateReplace { position: usize, gate: Gate },
    /// Two consecutive gates whose product is the identity.
    IdentityInsert { position: usize, first: Gate, second: Gate },
}

fn show_gate(g: &Gate) -> String {
    let qs: Vec<String> = g.qubits().iter().map(usize::to_string).collect();
    if g.params().is_empty() {
        format!("{}({})", g.kind().qasm_name(), qs.join(","))
    } else {
        let ps: Vec<String> = g.params().iter().map(|p| format!("{p:.4}")).collect();
        format!("{}[{}]({})", g.kind().qasm_name(), ps.join(","), qs.join(","))
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MutationOperator::GateInsert { position, gate } => write!(f, "insert {} at {position}", show_gate(gate)),
            MutationOperator::GateDelete { position } => write!(f, "delete gate {position}"),
            MutationOperator::GateReplace { position, gate } => write!(f, "replace gate {position} with {}", show_gate(gate)),
            MutationOperator::IdentityInsert { position, first, second } => {
                write!(f, "insert {}·{} at {position}", show_gate(first), show_gate(second))
            }
        }
    }
}

impl MutationOperator {
    pub fn apply(&self, p: &Program) -> Result<Program, ProgramError> {
        match self {
            MutationOperator::GateInsert { position, gate } => p.insert(*position, gate.clone()),
            MutationOperator::GateDelete { position } => p.delete(*position),
            MutationOperator::GateReplace { position, gate } => p.replace(*position, gate.clone()),
            MutationOperator::IdentityInsert { position, first, second } => {
                p.insert(*position, first.clone())?.insert(position + 1, second.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutantRecord {
    pub id: String,
    pub kind: MutantKind,
    /// Hex digest of the base program's circuit.
    pub base_digest: String,
    pub program: Program,
    pub operator: MutationOperator,
    pub description: String,
    /// Seed of the draw that produced this mutant; see [`draw_mutation`].
    pub seed: u64,
}

/// Gate kinds an insertion may draw: all one- and two-qubit kinds.
fn insertable(num_qubits: usize) -> Vec<GateKind> {
    GateKind::ALL
        .into_iter()
        .filter(|k| k.arity() <= 2 && k.arity() <= num_qubits)
        .collect()
}

fn random_params(kind: GateKind, rng: &mut StreamRng) -> Vec<f64> {
    (0..kind.num_params())
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect()
}

fn random_gate(kind: GateKind, num_qubits: usize, rng: &mut StreamRng) -> Gate {
    let qubits = sample(rng, num_qubits, kind.arity()).into_vec();
    let params = random_params(kind, rng);
    Gate::new(kind, params, qubits).expect("arity and parameters match the kind")
}

/// Draws one faulty-style edit from `seed`: operator uniform over
/// {insert, delete, replace}, site uniform. Returns `None` when the drawn
/// operator has no valid instance at the drawn site (a 3-qubit gate has no
/// same-arity replacement).
pub fn draw_mutation(p: &Program, seed: u64) -> Option<MutationOperator> {
    let mut rng = rng_for(seed, 0);
    let n = p.num_qubits();
    let gates = p.gates();
    let op = if gates.is_empty() { 0 } else { rng.random_range(0..3) };
    match op {
        0 => {
            let kinds = insertable(n);
            let kind = kinds[rng.random_range(0..kinds.len())];
            let position = rng.random_range(0..=gates.len());
            Some(MutationOperator::GateInsert {
                position,
                gate: random_gate(kind, n, &mut rng),
            })
        }
        1 => Some(MutationOperator::GateDelete {
            position: rng.random_range(0..gates.len()),
        }),
        _ => {
            let position = rng.random_range(0..gates.len());
            let old = &gates[position];
            let kinds: Vec<GateKind> = GateKind::ALL
                .into_iter()
                .filter(|k| k.arity() == old.kind().arity() && *k != old.kind())
                .collect();
            if kinds.is_empty() {
                return None;
            }
            let kind = kinds[rng.random_range(0..kinds.len())];
            let gate = Gate::new(kind, random_params(kind, &mut rng), old.qubits().to_vec()).expect("same arity");
            Some(MutationOperator::GateReplace { position, gate })
        }
    }
}

/// The identity pairs used for equivalent mutants.
pub const IDENTITY_PAIRS: [(GateKind, GateKind); 8] = [
    (GateKind::H, GateKind::H),
    (GateKind::X, GateKind::X),
    (GateKind::Y, GateKind::Y),
    (GateKind::Z, GateKind::Z),
    (GateKind::S, GateKind::Sdg),
    (GateKind::T, GateKind::Tdg),
    (GateKind::CX, GateKind::CX),
    (GateKind::SWAP, GateKind::SWAP),
];

/// Draws one identity-pair insertion from `seed`.
pub fn draw_identity_insertion(p: &Program, seed: u64) -> Option<MutationOperator> {
    let mut rng = rng_for(seed, 0);
    let n = p.num_qubits();
    let pairs: Vec<_> = IDENTITY_PAIRS.iter().filter(|(a, _)| a.arity() <= n).collect();
    let (a, b) = pairs[rng.random_range(0..pairs.len())];
    let qubits = sample(&mut rng, n, a.arity()).into_vec();
    let position = rng.random_range(0..=p.len());
    Some(MutationOperator::IdentityInsert {
        position,
        first: Gate::new(*a, vec![], qubits.clone()).ok()?,
        second: Gate::new(*b, vec![], qubits).ok()?,
    })
}

fn same_outputs(a: &[StateVector], b: &[StateVector]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.equal_up_to_phase(y, EQUIVALENCE_TOLERANCE))
}

fn mutant_id(kind: MutantKind, index: usize) -> String {
    format!("{kind}-{index:02}")
}

/// `n` distinct faulty mutants of `base`. A candidate is kept when
/// `screen` shows a different output state (beyond global phase) on at
/// least one input and its digest is new.
pub fn generate_faulty_mutants<F>(base: &Program, n: usize, seed: u64, screen: F) -> Result<Vec<MutantRecord>, MutationError>
where
    F: Fn(&Program) -> Result<Vec<StateVector>, FixtureError>,
{
    if base.is_empty() {
        return Err(MutationError::EmptyProgram);
    }
    let reference = screen(base)?;
    let base_digest = base.digest();
    let mut seen = vec![base_digest];
    let mut out = Vec::with_capacity(n);
    for attempt in 0..MAX_ATTEMPTS {
        if out.len() == n {
            break;
        }
        let s = derive_seed("faulty-mutant", &[seed, attempt as u64]);
        let Some(op) = draw_mutation(base, s) else { continue };
        let program = op.apply(base)?;
        let digest = program.digest();
        if seen.contains(&digest) || same_outputs(&screen(&program)?, &reference) {
            continue;
        }
        seen.push(digest);
        out.push(MutantRecord {
            id: mutant_id(MutantKind::Faulty, out.len()),
            kind: MutantKind::Faulty,
            base_digest: base_digest.to_hex(),
            description: op.to_string(),
            operator: op,
            program,
            seed: s,
        });
    }
    if out.len() < n {
        return Err(MutationError::Exhausted {
            found: out.len(),
            wanted: n,
            attempts: MAX_ATTEMPTS,
        });
    }
    Ok(out)
}

/// True when the two programs' unitaries agree up to global phase.
pub fn unitarily_equal(a: &Program, b: &Program) -> bool {
    let (Ok(ua), Ok(ub)) = (circuit_unitary(a.circuit()), circuit_unitary(b.circuit())) else {
        return false;
    };
    let overlap: num_complex::Complex64 = ua.iter().zip(&ub).map(|(x, y)| x.conj() * y).sum();
    if overlap.norm() < 1e-12 {
        return false;
    }
    let phase = overlap / overlap.norm();
    ua.iter().zip(&ub).all(|(x, y)| (x * phase - y).norm() <= EQUIVALENCE_TOLERANCE)
}

/// `n` distinct identity-pair mutants, each verified unitarily equal to `base`.
pub fn generate_equivalent_mutants(base: &Program, n: usize, seed: u64) -> Result<Vec<MutantRecord>, MutationError> {
    let base_digest = base.digest();
    let mut seen = vec![base_digest];
    let mut out = Vec::with_capacity(n);
    for attempt in 0..MAX_ATTEMPTS {
        if out.len() == n {
            break;
        }
        let s = derive_seed("equivalent-mutant", &[seed, attempt as u64]);
        let Some(op) = draw_identity_insertion(base, s) else { continue };
        let program = op.apply(base)?;
        let digest = program.digest();
        if seen.contains(&digest) {
            continue;
        }
        if !unitarily_equal(base, &program) {
            return Err(MutationError::NotEquivalent(op.to_string()));
        }
        seen.push(digest);
        out.push(MutantRecord {
            id: mutant_id(MutantKind::Equivalent, out.len()),
            kind: MutantKind::Equivalent,
            base_digest: base_digest.to_hex(),
            description: op.to_string(),
            operator: op,
            program,
            seed: s,
        });
    }
    if out.len() < n {
        return Err(MutationError::Exhausted {
            found: out.len(),
            wanted: n,
            attempts: MAX_ATTEMPTS,
        });
    }
    Ok(out)
}

/// Faulty and equivalent sets for a fixture, screened on its own input domain.
pub fn fixture_mutants(fixture: &AlgorithmFixture, per_kind: usize, seed: u64) -> Result<Vec<MutantRecord>, MutationError> {
    let screen_seed = derive_seed("screen-domain", &[seed]);
    let mut out = generate_faulty_mutants(&fixture.program, per_kind, seed, |p| fixture.screen(p, screen_seed))?;
    out.extend(generate_equivalent_mutants(&fixture.program, per_kind, seed)?);
    Ok(out)
}

/// Killed fraction of `rows`, optionally restricted to one mutant kind. On
/// equivalent mutants this is the false-positive rate.
pub fn mutation_score(rows: &[SweepRow], kind: Option<MutantKind>) -> Result<f64, MutationError> {
    let selected: Vec<&SweepRow> = rows.iter().filter(|r| kind.is_none_or(|k| r.mutant_kind == k)).collect();
    if selected.is_empty() {
        return Err(MutationError::EmptyRows);
    }
    Ok(selected.iter().filter(|r| r.killed).count() as f64 / selected.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub properties_counts: Vec<usize>,
    pub input_counts: Vec<usize>,
    pub shot_counts: Vec<u64>,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_alpha")]
    pub family_alpha: f64,
    #[serde(default = "default_attempts")]
    pub max_precondition_attempts: usize,
}

fn one() -> usize {
    1
}

fn default_alpha() -> f64 {
    0.05
}

fn default_attempts() -> usize {
    100
}

impl SweepConfig {
    /// The full configuration grid.
    pub fn full_grid(base_seed: u64) -> SweepConfig {
        SweepConfig {
            properties_counts: PROPERTY_COUNTS.to_vec(),
            input_counts: INPUT_COUNTS.to_vec(),
            shot_counts: SHOT_COUNTS.to_vec(),
            repetitions: 1,
            base_seed,
            family_alpha: default_alpha(),
            max_precondition_attempts: default_attempts(),
        }
    }

    pub fn validate(&self) -> Result<(), MutationError> {
        fn check<T: PartialEq + fmt::Debug>(name: &str, values: &[T], allowed: &[T]) -> Result<(), MutationError> {
            if values.is_empty() {
                return Err(MutationError::InvalidSweep(format!("{name} is empty")));
            }
            if let Some(v) = values.iter().find(|v| !allowed.contains(v)) {
                return Err(MutationError::InvalidSweep(format!("{name} value {v:?} not in {allowed:?}")));
            }
            Ok(())
        }
        check("properties_counts", &self.properties_counts, &PROPERTY_COUNTS)?;
        check("input_counts", &self.input_counts, &INPUT_COUNTS)?;
        check("shot_counts", &self.shot_counts, &SHOT_COUNTS)?;
        if self.repetitions == 0 {
            return Err(MutationError::InvalidSweep("repetitions must be at least 1".into()));
        }
        Ok(())
    }

    pub fn num_configs(&self) -> usize {
        self.properties_counts.len() * self.input_counts.len() * self.shot_counts.len()
    }
}

/// One fixture with the mutants to run its properties against.
pub struct SweepSubject<'a> {
    pub fixture: &'a AlgorithmFixture,
    pub mutants: Vec<MutantRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: String,
    pub mutant_id: String,
    pub mutant_kind: MutantKind,
    pub num_properties: usize,
    pub num_inputs: usize,
    pub shots: u64,
    pub killed: bool,
    /// Killed through an execution error or precondition timeout.
    pub error: bool,
    pub wall_time_s: f64,
    pub seed: u64,
    #[serde(skip)]
    pub repetition: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variable: String,
    pub mutant_kind: MutantKind,
    /// `None` when undefined (fewer than three points or a constant column).
    pub spearman_r: Option<f64>,
    pub p_value: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SummaryRow>,
}

/// Base seed of every row of repetition `rep`, shared across configs and
/// mutants so that differences between rows come from the configuration
/// and the mutant only.
pub fn row_seed(base_seed: u64, repetition: usize) -> u64 {
    derive_seed("sweep-row", &[base_seed, repetition as u64])
}

struct Job<'a> {
    subject: &'a SweepSubject<'a>,
    mutant: &'a MutantRecord,
    num_properties: usize,
    num_inputs: usize,
    shots: u64,
    repetition: usize,
}

fn run_job(job: &Job<'_>, cfg: &SweepConfig) -> SweepRow {
    let seed = row_seed(cfg.base_seed, job.repetition);
    let start = Instant::now();
    let test_cfg = TestConfig {
        num_inputs: job.num_inputs,
        shots: job.shots,
        family_alpha: cfg.family_alpha,
        max_precondition_attempts: cfg.max_precondition_attempts,
        base_seed: seed,
    };
    let (killed, error) = match job.subject.fixture.properties_for(&job.mutant.program) {
        Ok(mut props) => {
            props.truncate(job.num_properties);
            match run_suite(&props, &test_cfg) {
                Ok(res) => (!res.passed(), res.had_errors()),
                Err(_) => (true, true),
            }
        }
        Err(_) => (true, true),
    };
    SweepRow {
        algorithm: job.subject.fixture.name.to_string(),
        mutant_id: job.mutant.id.clone(),
        mutant_kind: job.mutant.kind,
        num_properties: job.num_properties,
        num_inputs: job.num_inputs,
        shots: job.shots,
        killed,
        error,
        wall_time_s: start.elapsed().as_secs_f64(),
        seed,
        repetition: job.repetition,
    }
}

/// Runs every (configuration, mutant, repetition) row in parallel and
/// summarises kill rates against each independent variable.
pub fn run_sweep(subjects: &[SweepSubject<'_>], cfg: &SweepConfig) -> Result<SweepReport, MutationError> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for subject in subjects {
        for mutant in &subject.mutants {
            for &num_properties in &cfg.properties_counts {
                for &num_inputs in &cfg.input_counts {
                    for &shots in &cfg.shot_counts {
                        for repetition in 0..cfg.repetitions {
                            jobs.push(Job {
                                subject,
                                mutant,
                                num_properties,
                                num_inputs,
                                shots,
                                repetition,
                            });
                        }
                    }
                }
            }
        }
    }
    let mut rows: Vec<SweepRow> = jobs.par_iter().map(|j| run_job(j, cfg)).collect();
    rows.sort_by(|a, b| {
        (&a.algorithm, &a.mutant_id, a.num_properties, a.num_inputs, a.shots, a.repetition).cmp(&(
            &b.algorithm,
            &b.mutant_id,
            b.num_properties,
            b.num_inputs,
            b.shots,
            b.repetition,
        ))
    });
    let summary = summarize(&rows);
    Ok(SweepReport { rows, summary })
}

/// Mean kill rate per (algorithm, configuration) for one mutant kind.
pub fn config_scores(rows: &[SweepRow], kind: MutantKind) -> Vec<((String, usize, usize, u64), f64)> {
    let mut acc: std::collections::BTreeMap<(String, usize, usize, u64), (usize, usize)> = Default::default();
    for r in rows.iter().filter(|r| r.mutant_kind == kind) {
        let e = acc
            .entry((r.algorithm.clone(), r.num_properties, r.num_inputs, r.shots))
            .or_default();
        e.0 += usize::from(r.killed);
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (killed, total))| (k, killed as f64 / total as f64)).collect()
}

/// Spearman correlation of per-(algorithm, configuration) mean kill rate
/// against each independent variable, per mutant kind.
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for kind in [MutantKind::Faulty, MutantKind::Equivalent] {
        let points = config_scores(rows, kind);
        let ys: Vec<f64> = points.iter().map(|(_, y)| *y).collect();
        let variables: [(&str, Vec<f64>); 3] = [
            ("num_properties", points.iter().map(|(k, _)| k.1 as f64).collect()),
            ("num_inputs", points.iter().map(|(k, _)| k.2 as f64).collect()),
            ("shots", points.iter().map(|(k, _)| k.3 as f64).collect()),
        ];
        for (name, xs) in variables {
            let (r, p) = match spearman_rank(&xs, &ys) {
                Ok((r, p)) => (Some(r), Some(p)),
                Err(_) => (None, None),
            };
            out.push(SummaryRow {
                variable: name.to_string(),
                mutant_kind: kind,
                spearman_r: r,
                p_value: p,
                n: xs.len(),
            });
        }
    }
    out
}

pub const RESULTS_HEADER: [&str; 10] = [
    "algorithm",
    "mutant_id",
    "mutant_kind",
    "num_properties",
    "num_inputs",
    "shots",
    "killed",
    "error",
    "wall_time_s",
    "seed",
];

pub const SUMMARY_HEADER: [&str; 5] = ["variable", "mutant_kind", "spearman_r", "p_value", "n"];

pub fn write_results_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.mutant_id.clone(),
            r.mutant_kind.to_string(),
            r.num_properties.to_string(),
            r.num_inputs.to_string(),
            r.shots.to_string(),
            r.killed.to_string(),
            r.error.to_string(),
            format!("{:.6}", r.wall_time_s),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<(), csv::Error> {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.variable.clone(),
            r.mutant_kind.to_string(),
            opt(r.spearman_r),
            r.p_value.map(|x| format!("{x:.6e}")).unwrap_or_default(),
            r.n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
