mod common;

use common::{c, corpus_circuits, dense_statevector, max_diff};
use proptest::prelude::*;
use qprop_core::simulator::{marginal_distribution, sample_counts, sample_state, statevector};
use qprop_core::stats::binomial_two_sided;
use qprop_core::{Basis, Circuit, Gate, SimError, StateVector};

#[test]
fn corpus_circuits_match_dense_oracle() {
    let circuits = corpus_circuits(6, 4);
    assert!(circuits.len() > 100, "only {} circuits collected", circuits.len());
    for (name, circ) in &circuits {
        let got = statevector(circ).unwrap();
        let want = dense_statevector(circ);
        let d = max_diff(got.amplitudes(), &want);
        assert!(d < 1e-9, "{name}: max difference {d}");
    }
}

#[test]
fn qft_of_two_qubits_is_the_dft() {
    let n = 2;
    let dim = 1 << n;
    let u = qprop_core::simulator::circuit_unitary(&qprop_core::corpus::build_qft(n).unwrap()).unwrap();
    for j in 0..dim {
        for k in 0..dim {
            let angle = 2.0 * std::f64::consts::PI * (j * k) as f64 / dim as f64;
            let want = num_complex::Complex64::from_polar(0.5, angle);
            assert!((u[j * dim + k] - want).norm() < 1e-12, "entry ({j},{k})");
        }
    }
}

#[test]
fn bell_state_amplitudes() {
    let circ = Circuit::from_gates(2, [Gate::h(0), Gate::cx(0, 1)]).unwrap();
    let s = statevector(&circ).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!(max_diff(s.amplitudes(), &[c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]) < 1e-15);
}

#[test]
fn measured_circuits_are_rejected_by_statevector() {
    let circ = Circuit::new(1).unwrap().measure(0, Basis::Z, 0).unwrap();
    assert_eq!(statevector(&circ), Err(SimError::HasMeasurements));
    assert_eq!(sample_counts(&Circuit::new(1).unwrap(), 10, 0), Err(SimError::NoMeasurements));
    assert_eq!(sample_counts(&circ, 0, 0), Err(SimError::ZeroShots));
}

#[test]
fn sampling_is_deterministic_and_sums_to_shots() {
    let circ = Circuit::from_gates(3, [Gate::h(0), Gate::ry(0.7, 1), Gate::cx(1, 2)]).unwrap();
    let s = statevector(&circ).unwrap();
    let measured = [(0, Basis::X), (1, Basis::Z), (2, Basis::Y)];
    let a = sample_state(&s, &measured, 999, 42).unwrap();
    let b = sample_state(&s, &measured, 999, 42).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.iter().map(|(_, n)| n).sum::<u64>(), 999);
    assert_eq!(a.total_shots(), 999);
    // X on |+⟩ is deterministic
    assert_eq!(a.single_qubit(0), Some((999, 0)));
}

#[test]
fn sampling_agrees_with_circuit_measurements() {
    let base = Circuit::from_gates(2, [Gate::h(0), Gate::rx(1.1, 1), Gate::cz(0, 1)]).unwrap();
    let s = statevector(&base).unwrap();
    let measured = base.measure(0, Basis::Y, 0).unwrap().measure(1, Basis::X, 1).unwrap();
    let direct = sample_counts(&measured, 500, 7).unwrap();
    let via_state = sample_state(&s, &[(0, Basis::Y), (1, Basis::X)], 500, 7).unwrap();
    assert_eq!(direct, via_state);
}

#[test]
fn sampled_frequencies_fit_the_marginals() {
    let circ = Circuit::from_gates(3, [Gate::ry(0.4, 0), Gate::ry(2.0, 1), Gate::cx(1, 2), Gate::h(2)]).unwrap();
    let s = statevector(&circ).unwrap();
    let shots = 20_000;
    for seed in 0..5 {
        let counts = sample_state(&s, &[(0, Basis::Z), (1, Basis::Z), (2, Basis::Z)], shots, seed).unwrap();
        for q in 0..3 {
            let p0 = marginal_distribution(&s, &[q]).unwrap()[0];
            let (zeros, _) = counts.single_qubit(q).unwrap();
            let p = binomial_two_sided(zeros, shots, p0).unwrap();
            assert!(p > 1e-4, "qubit {q} seed {seed}: {zeros}/{shots} vs {p0} (p = {p})");
        }
    }
}

#[test]
fn zero_probability_outcomes_are_never_drawn() {
    let circ = Circuit::from_gates(3, [Gate::x(1)]).unwrap();
    let s = statevector(&circ).unwrap();
    let counts = sample_state(&s, &[(0, Basis::Z), (1, Basis::Z), (2, Basis::Z)], 1000, 3).unwrap();
    assert_eq!(counts.get("010"), 1000);
    assert_eq!(counts.len(), 1);
}

#[test]
fn marginal_rejects_bad_qubits() {
    let s = StateVector::basis(2, 0);
    assert!(matches!(marginal_distribution(&s, &[2]), Err(SimError::QubitOutOfRange { .. })));
    assert!(matches!(marginal_distribution(&s, &[0, 0]), Err(SimError::DuplicateQubits(_))));
}

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    let pair = (0..n, 1..n).prop_map(move |(a, d)| (a, (a + d) % n));
    prop_oneof![
        q.clone().prop_map(Gate::h),
        q.clone().prop_map(Gate::s),
        q.clone().prop_map(Gate::tdg),
        q.clone().prop_map(Gate::y),
        (q.clone(), -4.0f64..4.0).prop_map(|(q, a)| Gate::rx(a, q)),
        (q.clone(), -4.0f64..4.0, -4.0f64..4.0, -4.0f64..4.0).prop_map(|(q, a, b, l)| Gate::u(a, b, l, q)),
        pair.clone().prop_map(|(a, b)| Gate::cx(a, b)),
        pair.clone().prop_map(|(a, b)| Gate::swap(a, b)),
        (pair.clone(), -4.0f64..4.0).prop_map(|((a, b), t)| Gate::cp(t, a, b)),
        (pair.clone(), 0usize..1).prop_map(|((a, b), _)| Gate::cz(a, b)),
        q.prop_map(move |q| Gate::ccx((q + 1) % n, (q + 2) % n, q)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_circuits_match_dense_oracle(gates in prop::collection::vec(gate_strategy(4), 0..40)) {
        let circ = Circuit::from_gates(4, gates).unwrap();
        let got = statevector(&circ).unwrap();
        prop_assert!(max_diff(got.amplitudes(), &dense_statevector(&circ)) < 1e-9);
        prop_assert!((got.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_undoes_the_circuit(gates in prop::collection::vec(gate_strategy(3), 0..30)) {
        let circ = Circuit::from_gates(3, gates).unwrap();
        let round = circ.compose(&circ.inverse().unwrap(), None).unwrap();
        let s = statevector(&round).unwrap();
        prop_assert!(s.equal_up_to_phase(&StateVector::basis(3, 0), 1e-9));
    }

    #[test]
    fn marginals_sum_to_one(gates in prop::collection::vec(gate_strategy(3), 0..20), q in 0usize..3) {
        let s = statevector(&Circuit::from_gates(3, gates).unwrap()).unwrap();
        let m = marginal_distribution(&s, &[q]).unwrap();
        prop_assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}
