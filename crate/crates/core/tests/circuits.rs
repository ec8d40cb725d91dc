mod common;

use common::{dense_unitary, max_diff};
use proptest::prelude::*;
use qprop_core::circuit::qasm::{from_qasm, to_qasm};
use qprop_core::corpus::{fixtures, qft_program, superdense_program, teleportation_program};
use qprop_core::mutation::{draw_identity_insertion, draw_mutation, unitarily_equal, MutationOperator};
use qprop_core::program::Program;
use qprop_core::rng::derive_seed;
use qprop_core::{Basis, Circuit, Gate};

/// A random program grown by `steps` mutation draws from a fixture base.
fn mutated(base: &Program, seed: u64, steps: usize) -> Program {
    let mut p = base.clone();
    for i in 0..steps {
        if let Some(op) = draw_mutation(&p, derive_seed("grow", &[seed, i as u64])) {
            p = op.apply(&p).unwrap();
        }
    }
    p
}

#[test]
fn qasm_rejects_malformed_text() {
    for text in [
        "OPENQASM 2.0;\nqreg q[2];\nfoo q[0];\n",
        "OPENQASM 2.0;\nqreg q[2];\nh q[5];\n",
        "OPENQASM 2.0;\nqreg q[2];\ncx q[0],q[0];\n",
        "OPENQASM 2.0;\nqreg q[1];\nrx q[0];\n",
        "OPENQASM 2.0;\nh q[0];\n",
        "",
    ] {
        assert!(from_qasm(text).is_err(), "accepted: {text:?}");
    }
}

#[test]
fn qasm_measurements_keep_their_basis() {
    let c = Circuit::from_gates(2, [Gate::h(0)])
        .unwrap()
        .measure(0, Basis::X, 0)
        .unwrap()
        .measure(1, Basis::Y, 1)
        .unwrap();
    let back = from_qasm(&to_qasm(&c).unwrap()).unwrap();
    assert_eq!(back, c);
    assert_eq!(back.measurements(), c.measurements());
}

#[test]
fn fixture_programs_round_trip() {
    for f in fixtures() {
        let text = f.program.to_qasm().unwrap();
        assert_eq!(Program::from_qasm(&text).unwrap(), f.program, "{}", f.name);
    }
}

#[test]
fn canonical_hash_separates_fixtures() {
    let digests: std::collections::HashSet<_> = fixtures().iter().map(|f| f.program.digest()).collect();
    assert_eq!(digests.len(), fixtures().len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn qasm_round_trip_is_exact(seed in any::<u64>(), steps in 0usize..12, which in 0usize..3) {
        let base = [teleportation_program(), qft_program(), superdense_program()][which].clone();
        let p = mutated(&base, seed, steps);
        let text = p.to_qasm().unwrap();
        let back = Program::from_qasm(&text).unwrap();
        prop_assert_eq!(back.digest(), p.digest());
        prop_assert_eq!(&back, &p);
        // the plain circuit round-trips without stage marks too
        prop_assert_eq!(from_qasm(&to_qasm(p.circuit()).unwrap()).unwrap(), p.circuit().clone());
    }

    #[test]
    fn edits_keep_stage_bounds_valid(seed in any::<u64>(), steps in 1usize..20) {
        let base = superdense_program();
        let p = mutated(&base, seed, steps);
        prop_assert_eq!(p.num_stages(), base.num_stages());
        let total: usize = (0..p.num_stages()).map(|i| p.stage(i).unwrap().len()).sum();
        prop_assert_eq!(total, p.len());
        prop_assert!(p.bounds().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(p.bounds().iter().all(|&b| b <= p.len()));
    }

    #[test]
    fn insert_then_delete_is_identity(seed in any::<u64>(), pos_frac in 0.0f64..=1.0, q in 0usize..3) {
        let p = mutated(&qft_program(), seed, 3);
        let pos = ((p.len() as f64) * pos_frac).floor() as usize;
        let back = p.insert(pos, Gate::x(q)).unwrap().delete(pos).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn identity_insertions_preserve_the_unitary(seed in any::<u64>()) {
        let base = teleportation_program();
        let op = draw_identity_insertion(&base, seed).unwrap();
        prop_assert!(matches!(op, MutationOperator::IdentityInsert { .. }), "{:?}", op);
        let m = op.apply(&base).unwrap();
        prop_assert_ne!(m.digest(), base.digest());
        prop_assert!(unitarily_equal(&m, &base));
        prop_assert!(max_diff(&dense_unitary(m.circuit()), &dense_unitary(base.circuit())) < 1e-9);
    }

    #[test]
    fn mutation_draws_are_deterministic(seed in any::<u64>()) {
        let base = qft_program();
        prop_assert_eq!(draw_mutation(&base, seed), draw_mutation(&base, seed));
    }

    #[test]
    fn hash_tracks_structural_equality(seed in any::<u64>(), steps in 0usize..6) {
        let a = mutated(&teleportation_program(), seed, steps);
        let b = mutated(&teleportation_program(), seed, steps);
        prop_assert_eq!(a.digest(), b.digest());
        let c = a.insert(0, Gate::rz(0.25, 0)).unwrap();
        prop_assert_ne!(c.digest(), a.digest());
    }
}
