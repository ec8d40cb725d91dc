//! Exact lowering of controlled operations and dense unitaries into the gate set.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Circuit, CircuitBuilder, CircuitError, Gate, GateKind, Mat2, Op};

const EXACT: f64 = 1e-14;

/// `m = e^{i·phase} · U(theta, phi, lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZyzAngles {
    pub phase: f64,
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

/// Euler decomposition of a 2×2 unitary into the `U` convention plus a phase.
pub fn zyz(m: &Mat2) -> ZyzAngles {
    let cos_half = m[0][0].norm();
    let sin_half = m[1][0].norm();
    let theta = 2.0 * sin_half.atan2(cos_half);
    // take the phases from the larger pair of entries; the other pair only
    // contributes an error proportional to its magnitude
    let (phase, phi, lambda) = if cos_half >= sin_half {
        let phase = m[0][0].arg();
        let phi = if sin_half > 0.0 { m[1][0].arg() - phase } else { 0.0 };
        (phase, phi, m[1][1].arg() - phase - phi)
    } else {
        let a = m[1][0].arg();
        let b = (-m[0][1]).arg();
        let phase = if cos_half > 0.0 { a + b - m[1][1].arg() } else { 0.0 };
        (phase, a - phase, b - phase)
    };
    ZyzAngles {
        phase,
        theta,
        phi,
        lambda,
    }
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (col, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][col] + a[r][1] * b[1][col];
        }
    }
    out
}

pub fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

/// A square root of a 2×2 unitary, `(M + sI) / sqrt(tr M + 2s)` with `s² = det M`.
pub fn mat2_sqrt(m: &Mat2) -> Mat2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let tr = m[0][0] + m[1][1];
    let s0 = det.sqrt();
    let s = if (tr + 2.0 * s0).norm() >= (tr - 2.0 * s0).norm() {
        s0
    } else {
        -s0
    };
    let t = (tr + 2.0 * s).sqrt();
    [[(m[0][0] + s) / t, m[0][1] / t], [m[1][0] / t, (m[1][1] + s) / t]]
}

fn mat2_close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
    (0..2).all(|r| (0..2).all(|c| (a[r][c] - b[r][c]).norm() <= tol))
}

fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli_x() -> Mat2 {
    [[cplx(0.0, 0.0), cplx(1.0, 0.0)], [cplx(1.0, 0.0), cplx(0.0, 0.0)]]
}

fn pauli_z() -> Mat2 {
    [[cplx(1.0, 0.0), cplx(0.0, 0.0)], [cplx(0.0, 0.0), cplx(-1.0, 0.0)]]
}

fn is_identity(m: &Mat2) -> bool {
    mat2_close(m, &[[cplx(1.0, 0.0), cplx(0.0, 0.0)], [cplx(0.0, 0.0), cplx(1.0, 0.0)]], EXACT)
}

/// Diagonal with leading 1: the phase angle.
fn as_phase(m: &Mat2) -> Option<f64> {
    let diag = m[0][1].norm() <= EXACT && m[1][0].norm() <= EXACT;
    if diag && (m[0][0] - cplx(1.0, 0.0)).norm() <= EXACT {
        Some(m[1][1].arg())
    } else {
        None
    }
}

/// Gates applying `m` to `target` when every qubit in `controls` is |1⟩.
///
/// Exact including relative phase whenever `controls` is non-empty; with no
/// controls the global phase of `m` is dropped.
pub fn multi_controlled(controls: &[usize], target: usize, m: &Mat2) -> Vec<Gate> {
    let mut out = Vec::new();
    emit_mc(controls, target, m, &mut out);
    out
}

fn emit_mc(controls: &[usize], target: usize, m: &Mat2, out: &mut Vec<Gate>) {
    if is_identity(m) {
        return;
    }
    let k = controls.len();
    if k == 0 {
        if let Some(l) = as_phase(m) {
            out.push(Gate::p(l, target));
        } else if mat2_close(m, &pauli_x(), EXACT) {
            out.push(Gate::x(target));
        } else {
            let a = zyz(m);
            out.push(Gate::u(a.theta, a.phi, a.lambda, target));
        }
        return;
    }
    if mat2_close(m, &pauli_x(), EXACT) {
        match k {
            1 => return out.push(Gate::cx(controls[0], target)),
            2 => return out.push(Gate::ccx(controls[0], controls[1], target)),
            _ => {}
        }
    }
    if k >= 2 && mat2_close(m, &pauli_z(), EXACT) {
        out.push(Gate::h(target));
        emit_mc(controls, target, &pauli_x(), out);
        out.push(Gate::h(target));
        return;
    }
    if k == 1 {
        let c = controls[0];
        if mat2_close(m, &pauli_z(), EXACT) {
            return out.push(Gate::cz(c, target));
        }
        if let Some(l) = as_phase(m) {
            return out.push(Gate::cp(l, c, target));
        }
        let a = zyz(m);
        if a.phase.abs() > EXACT {
            out.push(Gate::p(a.phase, c));
        }
        // controlled-U(θ, φ, λ)
        out.push(Gate::p((a.lambda + a.phi) / 2.0, c));
        out.push(Gate::p((a.lambda - a.phi) / 2.0, target));
        out.push(Gate::cx(c, target));
        out.push(Gate::u(-a.theta / 2.0, 0.0, -(a.phi + a.lambda) / 2.0, target));
        out.push(Gate::cx(c, target));
        out.push(Gate::u(a.theta / 2.0, a.phi, 0.0, target));
        return;
    }
    // C^k(U) = C(V)·C^{k-1}(X)·C(V†)·C^{k-1}(X)·C^{k-1}(V), V² = U
    let v = mat2_sqrt(m);
    let vd = mat2_adjoint(&v);
    let last = controls[k - 1];
    let rest = &controls[..k - 1];
    emit_mc(&[last], target, &v, out);
    emit_mc(rest, last, &pauli_x(), out);
    emit_mc(&[last], target, &vd, out);
    emit_mc(rest, last, &pauli_x(), out);
    emit_mc(rest, target, &v, out);
}

/// Gates applying `m` to `target` when the `controls` hold the bit pattern
/// `pattern` (bit `i` of `pattern` is the required value of `controls[i]`).
pub fn pattern_controlled(controls: &[usize], pattern: usize, target: usize, m: &Mat2) -> Vec<Gate> {
    let flips: Vec<Gate> = controls
        .iter()
        .enumerate()
        .filter(|(i, _)| pattern >> i & 1 == 0)
        .map(|(_, &q)| Gate::x(q))
        .collect();
    let mut out = flips.clone();
    out.extend(multi_controlled(controls, target, m));
    out.extend(flips);
    out
}

/// The gates of `gate` with one extra control qubit.
pub fn controlled_gate(gate: &Gate, control: usize) -> Vec<Gate> {
    if gate.kind() == GateKind::SWAP {
        let (a, b) = (gate.qubits()[0], gate.qubits()[1]);
        return vec![Gate::cx(b, a), Gate::ccx(control, a, b), Gate::cx(b, a)];
    }
    let nc = gate.kind().num_controls();
    let mut controls = vec![control];
    controls.extend_from_slice(&gate.qubits()[..nc]);
    let target = gate.qubits()[nc];
    multi_controlled(&controls, target, &gate.base_matrix().expect("non-swap gate"))
}

/// A circuit on `n + 1` qubits applying `circuit` to qubits `1..=n` controlled on qubit 0.
/// Only gate circuits are supported.
pub fn controlled(circuit: &Circuit) -> Result<Circuit, CircuitError> {
    let mut b = CircuitBuilder::new(circuit.num_qubits() + 1)?;
    for op in circuit.ops() {
        match op {
            Op::Gate(g) => {
                let shifted = g.on(g.qubits().iter().map(|q| q + 1).collect())?;
                b.gates(controlled_gate(&shifted, 0))?;
            }
            _ => {
                return Err(CircuitError::Unsupported(
                    "controlled() requires a gate-only circuit".into(),
                ))
            }
        }
    }
    Ok(b.build())
}

/// `circuit` applied `times` times.
pub fn repeat(circuit: &Circuit, times: usize) -> Result<Circuit, CircuitError> {
    let mut b = CircuitBuilder::new(circuit.num_qubits())?;
    for _ in 0..times {
        b.append(circuit, None)?;
    }
    Ok(b.build())
}

fn gray(p: usize) -> usize {
    p ^ (p >> 1)
}

/// Decomposes a dense `2^n × 2^n` unitary (row-major, little-endian indices)
/// into gates. The returned circuit equals `matrix` up to a global phase.
///
/// Uses Givens eliminations between Gray-code neighbours, so every two-level
/// step is a fully controlled single-qubit gate, followed by a diagonal of
/// controlled phases.
pub fn synthesize_unitary(matrix: &[Complex64], num_qubits: usize) -> Result<Circuit, CircuitError> {
    let dim = 1usize << num_qubits;
    if matrix.len() != dim * dim {
        return Err(CircuitError::Unsupported(format!(
            "matrix has {} entries, expected {}",
            matrix.len(),
            dim * dim
        )));
    }
    let mut builder = CircuitBuilder::new(num_qubits)?;
    if num_qubits == 1 {
        let m = [[matrix[0], matrix[1]], [matrix[2], matrix[3]]];
        let a = zyz(&m);
        builder.gate(Gate::u(a.theta, a.phi, a.lambda, 0))?;
        return Ok(builder.build());
    }

    let mut a = matrix.to_vec();
    // (row a, row b, 2x2 acting on (a, b))
    let mut steps: Vec<(usize, usize, Mat2)> = Vec::new();
    for p in 0..dim - 1 {
        let col = gray(p);
        for r in (p + 1..dim).rev() {
            let ra = gray(r - 1);
            let rb = gray(r);
            let x = a[ra * dim + col];
            let y = a[rb * dim + col];
            if y.norm() < EXACT {
                continue;
            }
            let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let g: Mat2 = [[x.conj() / n, y.conj() / n], [-y / n, x / n]];
            for j in 0..dim {
                let va = a[ra * dim + j];
                let vb = a[rb * dim + j];
                a[ra * dim + j] = g[0][0] * va + g[0][1] * vb;
                a[rb * dim + j] = g[1][0] * va + g[1][1] * vb;
            }
            steps.push((ra, rb, g));
        }
    }

    // diagonal part, relative to entry 0
    let alpha0 = a[0].arg();
    for x in 1..dim {
        let beta = a[x * dim + x].arg() - alpha0;
        let beta = (beta + PI).rem_euclid(2.0 * PI) - PI;
        if beta.abs() < EXACT {
            continue;
        }
        let target = (usize::BITS - 1 - x.leading_zeros()) as usize;
        let controls: Vec<usize> = (0..num_qubits).filter(|&q| q != target).collect();
        let pattern = controls
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &q)| acc | ((x >> q & 1) << i));
        let phase = [
            [cplx(1.0, 0.0), cplx(0.0, 0.0)],
            [cplx(0.0, 0.0), Complex64::from_polar(1.0, beta)],
        ];
        builder.gates(pattern_controlled(&controls, pattern, target, &phase))?;
    }

    // U = G_1† … G_K† D, so apply the adjoints last-to-first after D
    for (ra, rb, g) in steps.into_iter().rev() {
        let diff = ra ^ rb;
        let q = diff.trailing_zeros() as usize;
        let local = if ra >> q & 1 == 0 {
            g
        } else {
            [[g[1][1], g[1][0]], [g[0][1], g[0][0]]]
        };
        let dag = mat2_adjoint(&local);
        let controls: Vec<usize> = (0..num_qubits).filter(|&c| c != q).collect();
        let pattern = controls
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &c)| acc | ((ra >> c & 1) << i));
        builder.gates(pattern_controlled(&controls, pattern, q, &dag))?;
    }
    Ok(builder.build())
}
