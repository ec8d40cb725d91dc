//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use qprop_core::{Circuit, Op};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Embeds a gate's local matrix into the full 2^n space by index matching.
pub fn embed(local: &[Complex64], qubits: &[usize], n: usize) -> Vec<Complex64> {
    let dim = 1usize << n;
    let k = qubits.len();
    let ldim = 1usize << k;
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let local_of = |i: usize| qubits.iter().enumerate().fold(0, |acc, (j, &q)| acc | ((i >> q & 1) << j));
    let mut out = vec![c(0.0, 0.0); dim * dim];
    for row in 0..dim {
        for col in 0..dim {
            if row & !mask == col & !mask {
                out[row * dim + col] = local[local_of(row) * ldim + local_of(col)];
            }
        }
    }
    out
}

pub fn matmul(a: &[Complex64], b: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik == c(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

pub fn identity(dim: usize) -> Vec<Complex64> {
    let mut m = vec![c(0.0, 0.0); dim * dim];
    for i in 0..dim {
        m[i * dim + i] = c(1.0, 0.0);
    }
    m
}

/// Product of full gate matrices for a gate-only circuit.
pub fn dense_unitary(circuit: &Circuit) -> Vec<Complex64> {
    let n = circuit.num_qubits();
    let dim = 1usize << n;
    let mut u = identity(dim);
    for g in circuit.gates() {
        u = matmul(&embed(&g.matrix(), g.qubits(), n), &u, dim);
    }
    u
}

/// Statevector by dense matrix products; initializations are applied as a
/// tensor product onto the (untouched, |0⟩) targets.
pub fn dense_statevector(circuit: &Circuit) -> Vec<Complex64> {
    let n = circuit.num_qubits();
    let dim = 1usize << n;
    let mut v = vec![c(0.0, 0.0); dim];
    v[0] = c(1.0, 0.0);
    for op in circuit.ops() {
        match op {
            Op::Gate(g) => {
                let m = embed(&g.matrix(), g.qubits(), n);
                v = (0..dim).map(|i| (0..dim).map(|j| m[i * dim + j] * v[j]).sum()).collect();
            }
            Op::Initialize { state, qubits } => {
                let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
                let s = state.amplitudes();
                v = (0..dim)
                    .map(|i| {
                        let local = qubits.iter().enumerate().fold(0, |acc, (j, &q)| acc | ((i >> q & 1) << j));
                        v[i & !mask] * s[local]
                    })
                    .collect();
            }
            Op::Measure { .. } => panic!("oracle takes measurement-free circuits"),
        }
    }
    v
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Max elementwise difference after removing the best global phase.
pub fn phase_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let ph = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    a.iter().zip(b).map(|(x, y)| (x * ph - y).norm()).fold(0.0, f64::max)
}

pub mod exact {
    //! Exact rational reference implementations of the statistical kernels.

    use num_bigint::{BigInt, BigUint};
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};

    pub fn choose(n: u64, k: u64) -> BigUint {
        if k > n {
            return BigUint::zero();
        }
        let k = k.min(n - k);
        let mut acc = BigUint::one();
        for i in 0..k {
            acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
        }
        acc
    }

    fn big(x: BigUint) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    /// Whether `p` is no more probable than `observed`, with the same
    /// relative tie slack as the kernels (1e-7).
    fn no_more_probable(p: &BigRational, observed: &BigRational) -> bool {
        let scale = BigRational::from_integer(BigInt::from(10_000_000u64));
        p * &scale <= observed * (scale + BigRational::one())
    }

    /// Fisher two-sided p by enumerating every table with the same margins.
    pub fn fisher(a: u64, b: u64, c: u64, d: u64) -> f64 {
        let (r1, r2, c1) = (a + b, c + d, a + c);
        let n = r1 + r2;
        let denom = big(choose(n, c1));
        let prob = |x: u64| big(choose(r1, x) * choose(r2, c1 - x)) / &denom;
        let observed = prob(a);
        let lo = c1.saturating_sub(r2);
        let hi = r1.min(c1);
        let total = (lo..=hi)
            .map(prob)
            .filter(|p| no_more_probable(p, &observed))
            .fold(BigRational::zero(), |s, p| s + p);
        total.to_f64().unwrap().min(1.0)
    }

    /// Exact two-sided binomial p over all outcomes no more probable than
    /// the observed one.
    pub fn binomial(k: u64, n: u64, p0: f64) -> f64 {
        let p = BigRational::from_float(p0).unwrap();
        let q = BigRational::one() - &p;
        let pmf = |i: u64| {
            big(choose(n, i)) * num_traits::pow(p.clone(), i as usize) * num_traits::pow(q.clone(), (n - i) as usize)
        };
        let observed = pmf(k);
        let total = (0..=n)
            .map(pmf)
            .filter(|x| no_more_probable(x, &observed))
            .fold(BigRational::zero(), |s, x| s + x);
        total.to_f64().unwrap().min(1.0)
    }

    /// Holm's procedure from adjusted p-values: reject iff
    /// max_{j ≤ rank} min(1, (m − j + 1)·p_(j)) ≤ α.
    pub fn holm(ps: &[f64], alpha: f64) -> Vec<bool> {
        let m = ps.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| ps[i].partial_cmp(&ps[j]).unwrap());
        let mut out = vec![false; m];
        let mut running = 0.0f64;
        for (j, &i) in order.iter().enumerate() {
            running = running.max((ps[i] * (m - j) as f64).min(1.0));
            out[i] = running <= alpha;
        }
        out
    }
}

/// Every circuit the corpus properties build on `inputs` generated input
/// tuples (base seed 0), plus the standalone builders, up to `max_qubits`.
pub fn corpus_circuits(max_qubits: usize, inputs: usize) -> Vec<(String, Circuit)> {
    use qprop_core::assertions::AssertionRegistry;
    use qprop_core::corpus;
    use qprop_core::engine::{generate_inputs, TestConfig};
    use qprop_core::generators::{phase_oracle, random_state};

    let mut out: Vec<(String, Circuit)> = Vec::new();
    let cfg = TestConfig {
        num_inputs: inputs,
        ..TestConfig::default()
    };
    for fixture in corpus::fixtures() {
        for p in fixture.properties() {
            let cases = generate_inputs(&p, &cfg).expect("corpus preconditions are satisfiable");
            for case in cases {
                let mut reg = AssertionRegistry::new();
                (p.operations)(&case.inputs, &mut reg).expect("corpus operations succeed");
                for a in reg.into_assertions() {
                    for circ in a.circuits() {
                        out.push((format!("{}/{}#{}", fixture.name, p.name, case.ordinal), (**circ).clone()));
                    }
                }
            }
        }
    }
    out.push(("teleportation".into(), corpus::build_teleportation()));
    for n in 1..=6 {
        out.push((format!("qft({n})"), corpus::build_qft(n).unwrap()));
    }
    for bits in 0..4 {
        out.push((format!("superdense({bits})"), corpus::build_superdense(bits).unwrap()));
    }
    let t = Circuit::from_gates(1, [qprop_core::Gate::p(std::f64::consts::PI / 4.0, 0)]).unwrap();
    for m in 1..=5 {
        let one = qprop_core::StateVector::basis(1, 1);
        out.push((format!("qpe({m})"), corpus::build_qpe(m, &t, &one).unwrap()));
    }
    for n in 2..=5 {
        let oracle = phase_oracle(n, &[1]).unwrap();
        let it = oracle.optimal_iterations();
        out.push((format!("grover({n})"), corpus::build_grover(n, &oracle.circuit, it).unwrap()));
    }
    for n in 1..=5 {
        let balanced = qprop_core::generators::constant_or_balanced_oracle(
            n,
            qprop_core::generators::OracleKind::Balanced,
            n as u64,
        )
        .unwrap();
        out.push((format!("dj({n})"), corpus::build_dj(n, &balanced.circuit).unwrap()));
    }
    for q in 1..=4 {
        let psi = random_state(q, q as u64).unwrap();
        out.push((format!("init({q})"), Circuit::new(q).unwrap().initialize(&psi, &(0..q).collect::<Vec<_>>()).unwrap()));
    }
    out.retain(|(_, c)| c.num_qubits() <= max_qubits && !c.has_measurements());
    out
}
