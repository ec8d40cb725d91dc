//! `qprop`: run property suites, replay failures, generate mutants, and run
//! mutation sweeps from JSON manifests.
//!
//! Exit codes: 0 when every property passes, 1 when a property fails, 2 on
//! manifest, input, or usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use qprop_core::corpus::{default_screen, fixture, fixtures, AlgorithmFixture, FIXTURE_NAMES};
use qprop_core::engine::{reproduce, run_suite, AssertionVerdict, Property, SuiteResult, TestConfig, VerdictStatus};
use qprop_core::mutation::{
    generate_equivalent_mutants, generate_faulty_mutants, mutation_score, run_sweep, write_results_csv,
    write_summary_csv, MutantKind, MutantRecord, SweepConfig, SweepSubject,
};
use qprop_core::program::Program;
use qprop_core::rng::derive_seed;

/// Environment variable overriding every manifest's base seed.
const SEED_ENV: &str = "QPROP_SEED";

#[derive(Parser, Debug)]
#[command(name = "qprop", version, about = "Property-based testing for quantum circuits")]
struct Cli {
    /// Worker threads for sweep rows and circuit copies (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a fixture's properties as described by a run manifest.
    Run { manifest: PathBuf },
    /// Re-run one test case of a property from its input seed.
    Reproduce {
        manifest: PathBuf,
        #[arg(long)]
        property: String,
        #[arg(long)]
        seed: u64,
    },
    /// Generate mutants of a QASM program.
    Mutate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Screen faulty mutants on this fixture's input domain instead of
        /// |0…0⟩ plus random input states.
        #[arg(long)]
        algorithm: Option<String>,
    },
    /// Run a mutation sweep described by a sweep manifest.
    Sweep { manifest: PathBuf },
    /// Write every fixture program as QASM.
    ExportCorpus {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Faulty,
    Equivalent,
}

/// Configuration of `qprop run` and `qprop reproduce`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunManifest {
    /// Fixture name.
    algorithm: String,
    /// Optional QASM program replacing the fixture's own (e.g. a mutant),
    /// relative to the manifest.
    #[serde(default)]
    program: Option<PathBuf>,
    /// Property names to run; all by default.
    #[serde(default)]
    properties: Option<Vec<String>>,
    #[serde(default)]
    config: TestConfig,
    /// Where to write the JSON result document, relative to the manifest.
    #[serde(default)]
    output: Option<PathBuf>,
}

/// Configuration of `qprop sweep`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepManifest {
    algorithms: Vec<String>,
    #[serde(default = "ten")]
    faulty_per_algorithm: usize,
    #[serde(default = "ten")]
    equivalent_per_algorithm: usize,
    /// Mutant seed; each fixture's own default seed when absent.
    #[serde(default)]
    mutant_seed: Option<u64>,
    grid: SweepConfig,
    results_csv: PathBuf,
    summary_csv: PathBuf,
    /// Optional JSON index of the generated mutants.
    #[serde(default)]
    mutants_index: Option<PathBuf>,
}

fn ten() -> usize {
    10
}

/// A failure that maps to exit code 2.
#[derive(Debug)]
struct InputError(anyhow::Error);

fn input_err<E: Into<anyhow::Error>>(e: E) -> InputError {
    InputError(e.into())
}

type CmdResult = std::result::Result<ExitCode, InputError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Run { manifest } => cmd_run(&manifest),
        Command::Reproduce { manifest, property, seed } => cmd_reproduce(&manifest, &property, seed),
        Command::Mutate {
            input,
            kind,
            count,
            seed,
            out,
            algorithm,
        } => cmd_mutate(&input, kind, count, seed, &out, algorithm.as_deref()),
        Command::Sweep { manifest } => cmd_sweep(&manifest),
        Command::ExportCorpus { out } => cmd_export(&out),
    };
    match result {
        Ok(code) => code,
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned 64-bit integer")),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(anyhow!("{SEED_ENV}: {e}")),
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid manifest {}", path.display()))
}

fn relative_to(manifest: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        manifest.parent().unwrap_or(Path::new(".")).join(p)
    }
}

fn lookup_fixture(name: &str) -> Result<AlgorithmFixture> {
    fixture(name).ok_or_else(|| anyhow!("unknown algorithm '{name}' (known: {})", FIXTURE_NAMES.join(", ")))
}

fn read_program(path: &Path) -> Result<Program> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Program::from_qasm(&text).with_context(|| format!("cannot parse {}", path.display()))
}

/// Loads a run manifest: fixture, selected properties, and effective config.
fn load_run(path: &Path) -> Result<(RunManifest, Vec<Property>, TestConfig)> {
    let m: RunManifest = read_json(path)?;
    let f = lookup_fixture(&m.algorithm)?;
    let program = match &m.program {
        Some(p) => read_program(&relative_to(path, p))?,
        None => f.program.clone(),
    };
    let all = f
        .properties_for(&program)
        .with_context(|| format!("program does not fit the {} fixture", f.name))?;
    let props = match &m.properties {
        None => all,
        Some(names) => {
            let mut out = Vec::new();
            for n in names {
                let p = all
                    .iter()
                    .find(|p| &p.name == n)
                    .ok_or_else(|| anyhow!("unknown property '{n}' for {}", f.name))?;
                out.push(p.clone());
            }
            out
        }
    };
    if props.is_empty() {
        bail!("no properties selected");
    }
    let mut cfg = m.config;
    if let Some(seed) = seed_override()? {
        cfg.base_seed = seed;
    }
    cfg.validate()?;
    Ok((m, props, cfg))
}

fn print_report(algorithm: &str, res: &SuiteResult) {
    println!(
        "{algorithm}: {} properties, {} inputs, {} shots, alpha {}, base seed {}",
        res.properties.len(),
        res.config.num_inputs,
        res.config.shots,
        res.config.family_alpha,
        res.config.base_seed
    );
    for p in &res.properties {
        println!("  {} {}", if p.passed { "PASS" } else { "FAIL" }, p.name);
        if let Some(f) = &p.input_failure {
            println!("       {f}");
        }
        for v in p.verdicts.iter().filter(|v| !v.passed()) {
            print_failure(v);
        }
    }
    let s = &res.stats;
    println!(
        "  {} assertions, {} tests in the family, {} distinct circuits, {} copies ({} shots; unoptimised {} executions, {} shots), {:.2}s",
        s.assertions,
        s.family_size,
        s.distinct_circuits,
        s.copies_executed,
        s.shots_sampled,
        s.baseline_executions,
        s.baseline_shots,
        res.duration.as_secs_f64()
    );
}

fn print_failure(v: &AssertionVerdict) {
    let kind = v.kind.map(|k| k.to_string()).unwrap_or_else(|| "execution".into());
    let tag = if v.status == VerdictStatus::ExecutionError { "error" } else { "failed" };
    println!(
        "       input {} (seed {}): {kind} #{} {tag}: {}",
        v.input_ordinal,
        v.seed,
        v.assertion_ordinal,
        v.detail.as_deref().unwrap_or("")
    );
}

fn cmd_run(path: &Path) -> CmdResult {
    let (m, props, cfg) = load_run(path).map_err(input_err)?;
    let res = run_suite(&props, &cfg).map_err(input_err)?;
    print_report(&m.algorithm, &res);
    if let Some(out) = &m.output {
        let out = relative_to(path, out);
        let text = serde_json::to_string_pretty(&res).map_err(input_err)?;
        fs::write(&out, text)
            .with_context(|| format!("cannot write {}", out.display()))
            .map_err(input_err)?;
    }
    Ok(if res.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_reproduce(path: &Path, property: &str, seed: u64) -> CmdResult {
    let (m, props, cfg) = load_run(path).map_err(input_err)?;
    let p = props
        .iter()
        .find(|p| p.name == property)
        .ok_or_else(|| input_err(anyhow!("unknown property '{property}' for {}", m.algorithm)))?;
    let verdicts = reproduce(p, seed, &cfg).map_err(input_err)?;
    let passed = verdicts.iter().all(AssertionVerdict::passed);
    println!("{} {} seed {seed}", if passed { "PASS" } else { "FAIL" }, p.name);
    for v in &verdicts {
        if v.passed() {
            println!("       {} #{} passed", v.kind.map(|k| k.to_string()).unwrap_or_default(), v.assertion_ordinal);
        } else {
            print_failure(v);
        }
    }
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Entry of the mutant index written next to the mutant files.
#[derive(Debug, Serialize)]
struct IndexEntry<'a> {
    id: &'a str,
    kind: MutantKind,
    base_digest: &'a str,
    file: String,
    description: &'a str,
    seed: u64,
}

fn write_mutants(out: &Path, mutants: &[MutantRecord]) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut index = Vec::with_capacity(mutants.len());
    for m in mutants {
        let file = format!("{}.qasm", m.id);
        fs::write(out.join(&file), m.program.to_qasm()?)?;
        index.push(IndexEntry {
            id: &m.id,
            kind: m.kind,
            base_digest: &m.base_digest,
            file,
            description: &m.description,
            seed: m.seed,
        });
    }
    fs::write(out.join("index.json"), serde_json::to_string_pretty(&index)?)?;
    Ok(())
}

fn cmd_mutate(input: &Path, kind: KindArg, count: usize, seed: u64, out: &Path, algorithm: Option<&str>) -> CmdResult {
    let base = read_program(input).map_err(input_err)?;
    let mutants = match kind {
        KindArg::Equivalent => generate_equivalent_mutants(&base, count, seed).map_err(input_err)?,
        KindArg::Faulty => {
            let screen_seed = derive_seed("screen-domain", &[seed]);
            match algorithm {
                Some(name) => {
                    let f = lookup_fixture(name).map_err(input_err)?;
                    generate_faulty_mutants(&base, count, seed, |p| f.screen(p, screen_seed)).map_err(input_err)?
                }
                None => generate_faulty_mutants(&base, count, seed, |p| default_screen(p.circuit(), screen_seed))
                    .map_err(input_err)?,
            }
        }
    };
    write_mutants(out, &mutants).map_err(input_err)?;
    for m in &mutants {
        println!("{} {}: {}", m.id, m.kind, m.description);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(path: &Path) -> CmdResult {
    let m: SweepManifest = read_json(path).map_err(input_err)?;
    let mut grid = m.grid.clone();
    if let Some(seed) = seed_override().map_err(input_err)? {
        grid.base_seed = seed;
    }
    grid.validate().map_err(input_err)?;
    if m.algorithms.is_empty() {
        return Err(input_err(anyhow!("no algorithms listed")));
    }
    let fixtures: Vec<AlgorithmFixture> = m
        .algorithms
        .iter()
        .map(|a| lookup_fixture(a))
        .collect::<Result<_>>()
        .map_err(input_err)?;
    let mut subjects = Vec::with_capacity(fixtures.len());
    for f in &fixtures {
        let seed = m.mutant_seed.unwrap_or(f.mutant_seed);
        let screen_seed = derive_seed("screen-domain", &[seed]);
        let mut mutants = generate_faulty_mutants(&f.program, m.faulty_per_algorithm, seed, |p| f.screen(p, screen_seed))
            .map_err(input_err)?;
        mutants.extend(generate_equivalent_mutants(&f.program, m.equivalent_per_algorithm, seed).map_err(input_err)?);
        subjects.push(SweepSubject { fixture: f, mutants });
    }
    if let Some(index) = &m.mutants_index {
        let all: Vec<(&str, &MutantRecord)> = subjects
            .iter()
            .flat_map(|s| s.mutants.iter().map(move |mu| (s.fixture.name, mu)))
            .collect();
        let text = serde_json::to_string_pretty(&all).map_err(input_err)?;
        fs::write(relative_to(path, index), text).map_err(input_err)?;
    }
    let report = run_sweep(&subjects, &grid).map_err(input_err)?;
    let results = relative_to(path, &m.results_csv);
    let summary = relative_to(path, &m.summary_csv);
    let open = |p: &Path| fs::File::create(p).with_context(|| format!("cannot create {}", p.display()));
    write_results_csv(&report.rows, open(&results).map_err(input_err)?).map_err(input_err)?;
    write_summary_csv(&report.summary, open(&summary).map_err(input_err)?).map_err(input_err)?;
    println!("{} rows -> {}", report.rows.len(), results.display());
    for f in &fixtures {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.algorithm == f.name).cloned().collect();
        let score = mutation_score(&rows, Some(MutantKind::Faulty)).ok();
        let fpr = mutation_score(&rows, Some(MutantKind::Equivalent)).ok();
        let show = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
        println!("  {}: mutation score {}, false-positive rate {}", f.name, show(score), show(fpr));
    }
    for s in &report.summary {
        match (s.spearman_r, s.p_value) {
            (Some(r), Some(p)) => println!("  {} kill rate vs {}: r = {r:.3}, p = {p:.3e}, n = {}", s.mutant_kind, s.variable, s.n),
            _ => println!("  {} kill rate vs {}: undefined (n = {})", s.mutant_kind, s.variable, s.n),
        }
    }
    println!("summary -> {}", summary.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_export(out: &Path) -> CmdResult {
    fs::create_dir_all(out)
        .with_context(|| format!("cannot create {}", out.display()))
        .map_err(input_err)?;
    for f in fixtures() {
        let file = out.join(format!("{}.qasm", f.name));
        fs::write(&file, f.program.to_qasm().map_err(input_err)?)
            .with_context(|| format!("cannot write {}", file.display()))
            .map_err(input_err)?;
        println!("{}", file.display());
    }
    Ok(ExitCode::SUCCESS)
}
