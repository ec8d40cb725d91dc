use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qprop_core::corpus::{teleportation_program, FIXTURE_NAMES};
use qprop_core::program::Program;
use qprop_core::Gate;
use serde_json::Value;
use tempfile::TempDir;

fn qprop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qprop"))
        .args(args)
        .env_remove("QPROP_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_manifest(dir: &Path, name: &str, program: Option<&str>, output: &str) -> String {
    let program = program.map(|p| format!(r#""program": "{p}","#)).unwrap_or_default();
    write(
        dir,
        name,
        &format!(
            r#"{{
                "algorithm": "teleportation",
                {program}
                "properties": ["teleported_state_equals_input"],
                "config": {{"num_inputs": 16, "shots": 1600, "base_seed": 3}},
                "output": "{output}"
            }}"#
        ),
    )
}

fn mutant_qasm(dir: &Path) -> String {
    let base = teleportation_program();
    let mutant = base.insert(base.len(), Gate::x(2)).unwrap();
    write(dir, "mutant.qasm", &mutant.to_qasm().unwrap());
    "mutant.qasm".into()
}

fn result_doc(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_passes_on_the_correct_circuit() {
    let dir = TempDir::new().unwrap();
    let manifest = run_manifest(dir.path(), "run.json", None, "result.json");
    let out = qprop(&["run", &manifest]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS teleported_state_equals_input"));
    let doc = result_doc(&dir.path().join("result.json"));
    let prop = &doc["properties"][0];
    assert_eq!(prop["passed"], Value::Bool(true));
    assert_eq!(prop["verdicts"].as_array().unwrap().len(), 16);
    assert_eq!(prop["seeds"].as_array().unwrap().len(), 16);
}

#[test]
fn run_fails_on_a_mutant_and_the_seed_reproduces() {
    let dir = TempDir::new().unwrap();
    let qasm = mutant_qasm(dir.path());
    let manifest = run_manifest(dir.path(), "run.json", Some(&qasm), "result.json");
    let out = qprop(&["run", &manifest]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL teleported_state_equals_input"));
    assert!(stdout(&out).contains("(seed "));

    let doc = result_doc(&dir.path().join("result.json"));
    let failing = doc["properties"][0]["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["status"] == "fail")
        .expect("a failing verdict")["seed"]
        .as_u64()
        .unwrap()
        .to_string();
    let rep = qprop(&["reproduce", &manifest, "--property", "teleported_state_equals_input", "--seed", &failing]);
    assert_eq!(code(&rep), 1, "{}", stdout(&rep));

    // the same seed on the correct circuit passes
    let good = run_manifest(dir.path(), "good.json", None, "good-result.json");
    let rep = qprop(&["reproduce", &good, "--property", "teleported_state_equals_input", "--seed", &failing]);
    assert_eq!(code(&rep), 0, "{}", stdout(&rep));
}

#[test]
fn reproduce_rejects_unknown_properties() {
    let dir = TempDir::new().unwrap();
    let manifest = run_manifest(dir.path(), "run.json", None, "result.json");
    let out = qprop(&["reproduce", &manifest, "--property", "no_such_property", "--seed", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn malformed_manifests_exit_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("unknown_key.json", r#"{"algorithm": "qft", "colour": "red"}"#),
        ("unknown_config_key.json", r#"{"algorithm": "qft", "config": {"shot": 5}}"#),
        ("not_json.json", "algorithm = qft"),
        ("bad_fixture.json", r#"{"algorithm": "shor"}"#),
        ("bad_config.json", r#"{"algorithm": "qft", "config": {"shots": 0}}"#),
        ("bad_program.json", r#"{"algorithm": "qft", "program": "missing.qasm"}"#),
        ("bad_property.json", r#"{"algorithm": "qft", "properties": ["nope"]}"#),
    ];
    for (name, text) in cases {
        let manifest = write(dir.path(), name, text);
        let out = qprop(&["run", &manifest]);
        assert_eq!(code(&out), 2, "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(code(&qprop(&["run", "/nonexistent/manifest.json"])), 2);
}

#[test]
fn misshapen_program_exits_two() {
    let dir = TempDir::new().unwrap();
    // a two-qubit program for a three-qubit fixture
    write(dir.path(), "small.qasm", "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\nh q[0];\n");
    let manifest = run_manifest(dir.path(), "run.json", Some("small.qasm"), "result.json");
    assert_eq!(code(&qprop(&["run", &manifest])), 2);
}

#[test]
fn seed_override_changes_the_run() {
    let dir = TempDir::new().unwrap();
    let manifest = run_manifest(dir.path(), "run.json", None, "result.json");
    let out = Command::new(env!("CARGO_BIN_EXE_qprop"))
        .args(["run", &manifest])
        .env("QPROP_SEED", "77")
        .output()
        .unwrap();
    assert!(stdout(&out).contains("base seed 77"));
    let bad = Command::new(env!("CARGO_BIN_EXE_qprop"))
        .args(["run", &manifest])
        .env("QPROP_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn mutate_writes_the_requested_mutants() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "base.qasm", &teleportation_program().to_qasm().unwrap());
    for (kind, extra) in [("faulty", None), ("equivalent", None), ("faulty", Some("teleportation"))] {
        let out_dir = dir.path().join(format!("{kind}-{}", extra.unwrap_or("default")));
        let mut args = vec!["mutate", "--input", &input, "--kind", kind, "--count", "10", "--seed", "5"];
        let out_str = out_dir.to_str().unwrap().to_string();
        args.extend(["--out", &out_str]);
        if let Some(a) = extra {
            args.extend(["--algorithm", a]);
        }
        let out = qprop(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let qasm: Vec<_> = fs::read_dir(&out_dir)
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.path().extension().is_some_and(|x| x == "qasm"))
            .collect();
        assert_eq!(qasm.len(), 10);
        let index: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("index.json")).unwrap()).unwrap();
        assert_eq!(index.as_array().unwrap().len(), 10);
        for e in qasm {
            let p = Program::from_qasm(&fs::read_to_string(e.path()).unwrap()).unwrap();
            assert_eq!(p.num_stages(), 1);
        }
    }
}

#[test]
fn mutate_rejects_unreadable_input() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let missing = qprop(&["mutate", "--input", "/nonexistent.qasm", "--kind", "faulty", "--out", out]);
    assert_eq!(code(&missing), 2);
    let garbage = write(dir.path(), "garbage.qasm", "this is not qasm");
    assert_eq!(code(&qprop(&["mutate", "--input", &garbage, "--kind", "equivalent", "--out", out])), 2);
}

fn sweep_manifest(dir: &Path, algorithms: &str) -> String {
    write(
        dir,
        "sweep.json",
        &format!(
            r#"{{
                "algorithms": {algorithms},
                "faulty_per_algorithm": 2,
                "equivalent_per_algorithm": 2,
                "grid": {{
                    "properties_counts": [1, 3],
                    "input_counts": [1, 4],
                    "shot_counts": [25, 400, 1600],
                    "base_seed": 2
                }},
                "results_csv": "results.csv",
                "summary_csv": "summary.csv",
                "mutants_index": "mutants.json"
            }}"#
        ),
    )
}

fn kill_columns(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            // everything but wall time
            [&cols[..8], &cols[9..]].concat().join(",")
        })
        .collect()
}

#[test]
fn sweep_emits_one_row_per_configuration_and_mutant() {
    let dir = TempDir::new().unwrap();
    let manifest = sweep_manifest(dir.path(), r#"["teleportation", "superdense"]"#);
    let out = qprop(&["--jobs", "2", "sweep", &manifest]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let results = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    // 2 algorithms × 4 mutants × 2 × 2 × 3 configurations, plus the header
    assert_eq!(results.lines().count(), 2 * 4 * 12 + 1);
    assert!(results.starts_with("algorithm,mutant_id,mutant_kind,num_properties,num_inputs,shots,killed,error,wall_time_s,seed"));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 7);
    assert!(dir.path().join("mutants.json").exists());

    // the kill columns do not depend on the worker count
    let again = qprop(&["--jobs", "1", "sweep", &manifest]);
    assert_eq!(code(&again), 0);
    let repeat = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(kill_columns(&results), kill_columns(&repeat));
}

#[test]
fn sweep_rejects_missing_fixtures_and_bad_grids() {
    let dir = TempDir::new().unwrap();
    let manifest = sweep_manifest(dir.path(), r#"["teleportation", "shor"]"#);
    assert_eq!(code(&qprop(&["sweep", &manifest])), 2);
    let bad_grid = write(
        dir.path(),
        "bad.json",
        r#"{"algorithms": ["qft"], "grid": {"properties_counts": [4], "input_counts": [1], "shot_counts": [12]},
            "results_csv": "r.csv", "summary_csv": "s.csv"}"#,
    );
    assert_eq!(code(&qprop(&["sweep", &bad_grid])), 2);
}

#[test]
fn export_corpus_writes_every_fixture() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("corpus");
    let out = qprop(&["export-corpus", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    for name in FIXTURE_NAMES {
        let text = fs::read_to_string(out_dir.join(format!("{name}.qasm"))).unwrap();
        Program::from_qasm(&text).unwrap();
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&qprop(&["frobnicate"])), 2);
    assert_eq!(code(&qprop(&["mutate", "--kind", "sideways"])), 2);
}
