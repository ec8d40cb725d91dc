use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CircuitError;

/// Row-major 2×2 complex matrix.
pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    RX,
    RY,
    RZ,
    P,
    U,
    CX,
    CZ,
    SWAP,
    CCX,
    CP,
}

impl GateKind {
    pub const ALL: [GateKind; 18] = [
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::P,
        GateKind::U,
        GateKind::CX,
        GateKind::CZ,
        GateKind::SWAP,
        GateKind::CCX,
        GateKind::CP,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ | GateKind::SWAP | GateKind::CP => 2,
            GateKind::CCX => 3,
            _ => 1,
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::P | GateKind::CP => 1,
            GateKind::U => 3,
            _ => 0,
        }
    }

    pub(crate) fn tag(self) -> u8 {
        GateKind::ALL.iter().position(|&k| k == self).unwrap() as u8
    }

    /// Name used in QASM output.
    pub fn qasm_name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::RX => "rx",
            GateKind::RY => "ry",
            GateKind::RZ => "rz",
            GateKind::P => "u1",
            GateKind::U => "u3",
            GateKind::CX => "cx",
            GateKind::CZ => "cz",
            GateKind::SWAP => "swap",
            GateKind::CCX => "ccx",
            GateKind::CP => "cu1",
        }
    }

    pub fn from_qasm_name(name: &str) -> Option<GateKind> {
        Some(match name {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "t" => GateKind::T,
            "tdg" => GateKind::Tdg,
            "rx" => GateKind::RX,
            "ry" => GateKind::RY,
            "rz" => GateKind::RZ,
            "u1" | "p" => GateKind::P,
            "u3" | "u" => GateKind::U,
            "cx" | "CX" => GateKind::CX,
            "cz" => GateKind::CZ,
            "swap" => GateKind::SWAP,
            "ccx" => GateKind::CCX,
            "cu1" | "cp" => GateKind::CP,
            _ => return None,
        })
    }

    /// Number of leading control qubits for controlled kinds.
    pub fn num_controls(self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ | GateKind::CP => 1,
            GateKind::CCX => 2,
            _ => 0,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A gate application. For controlled kinds the controls come first in
/// `qubits` and the target last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    kind: GateKind,
    params: Vec<f64>,
    qubits: Vec<usize>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

impl Gate {
    pub fn new(kind: GateKind, params: Vec<f64>, qubits: Vec<usize>) -> Result<Gate, CircuitError> {
        if qubits.len() != kind.arity() {
            return Err(CircuitError::Arity {
                kind,
                expected: kind.arity(),
                got: qubits.len(),
            });
        }
        if params.len() != kind.num_params() {
            return Err(CircuitError::ParamCount {
                kind,
                expected: kind.num_params(),
                got: params.len(),
            });
        }
        if let Some(&p) = params.iter().find(|p| !p.is_finite()) {
            return Err(CircuitError::NonFiniteParam(p));
        }
        if super::has_duplicates(&qubits) {
            return Err(CircuitError::DuplicateQubits(qubits));
        }
        Ok(Gate { kind, params, qubits })
    }

    fn raw(kind: GateKind, params: Vec<f64>, qubits: Vec<usize>) -> Gate {
        Gate::new(kind, params, qubits).expect("valid gate")
    }

    pub fn h(q: usize) -> Gate {
        Gate::raw(GateKind::H, vec![], vec![q])
    }
    pub fn x(q: usize) -> Gate {
        Gate::raw(GateKind::X, vec![], vec![q])
    }
    pub fn y(q: usize) -> Gate {
        Gate::raw(GateKind::Y, vec![], vec![q])
    }
    pub fn z(q: usize) -> Gate {
        Gate::raw(GateKind::Z, vec![], vec![q])
    }
    pub fn s(q: usize) -> Gate {
        Gate::raw(GateKind::S, vec![], vec![q])
    }
    pub fn sdg(q: usize) -> Gate {
        Gate::raw(GateKind::Sdg, vec![], vec![q])
    }
    pub fn t(q: usize) -> Gate {
        Gate::raw(GateKind::T, vec![], vec![q])
    }
    pub fn tdg(q: usize) -> Gate {
        Gate::raw(GateKind::Tdg, vec![], vec![q])
    }
    pub fn rx(theta: f64, q: usize) -> Gate {
        Gate::raw(GateKind::RX, vec![theta], vec![q])
    }
    pub fn ry(theta: f64, q: usize) -> Gate {
        Gate::raw(GateKind::RY, vec![theta], vec![q])
    }
    pub fn rz(theta: f64, q: usize) -> Gate {
        Gate::raw(GateKind::RZ, vec![theta], vec![q])
    }
    pub fn p(lambda: f64, q: usize) -> Gate {
        Gate::raw(GateKind::P, vec![lambda], vec![q])
    }
    pub fn u(theta: f64, phi: f64, lambda: f64, q: usize) -> Gate {
        Gate::raw(GateKind::U, vec![theta, phi, lambda], vec![q])
    }
    /// Panics if `control == target`.
    pub fn cx(control: usize, target: usize) -> Gate {
        Gate::raw(GateKind::CX, vec![], vec![control, target])
    }
    pub fn cz(a: usize, b: usize) -> Gate {
        Gate::raw(GateKind::CZ, vec![], vec![a, b])
    }
    pub fn swap(a: usize, b: usize) -> Gate {
        Gate::raw(GateKind::SWAP, vec![], vec![a, b])
    }
    pub fn ccx(c0: usize, c1: usize, target: usize) -> Gate {
        Gate::raw(GateKind::CCX, vec![], vec![c0, c1, target])
    }
    pub fn cp(lambda: f64, control: usize, target: usize) -> Gate {
        Gate::raw(GateKind::CP, vec![lambda], vec![control, target])
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    /// Same gate on different qubits.
    pub fn on(&self, qubits: Vec<usize>) -> Result<Gate, CircuitError> {
        Gate::new(self.kind, self.params.clone(), qubits)
    }

    /// The 2×2 matrix acted on the target, for single-qubit and controlled kinds.
    /// `None` for SWAP.
    pub fn base_matrix(&self) -> Option<Mat2> {
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        let m = match self.kind {
            GateKind::H => {
                let r = c(FRAC_1_SQRT_2, 0.0);
                [[r, r], [r, -r]]
            }
            GateKind::X | GateKind::CX | GateKind::CCX => [[z, o], [o, z]],
            GateKind::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
            GateKind::Z | GateKind::CZ => [[o, z], [z, -o]],
            GateKind::S => [[o, z], [z, c(0.0, 1.0)]],
            GateKind::Sdg => [[o, z], [z, c(0.0, -1.0)]],
            GateKind::T => [[o, z], [z, cis(FRAC_PI_4)]],
            GateKind::Tdg => [[o, z], [z, cis(-FRAC_PI_4)]],
            GateKind::RX => {
                let (s, co) = (self.params[0] / 2.0).sin_cos();
                [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
            }
            GateKind::RY => {
                let (s, co) = (self.params[0] / 2.0).sin_cos();
                [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
            }
            GateKind::RZ => {
                let h = self.params[0] / 2.0;
                [[cis(-h), z], [z, cis(h)]]
            }
            GateKind::P | GateKind::CP => [[o, z], [z, cis(self.params[0])]],
            GateKind::U => u3_matrix(self.params[0], self.params[1], self.params[2]),
            GateKind::SWAP => return None,
        };
        Some(m)
    }

    /// Full `2^k × 2^k` matrix (row-major) with local index bit `i` ↔ `qubits[i]`.
    pub fn matrix(&self) -> Vec<Complex64> {
        let k = self.qubits.len();
        let dim = 1usize << k;
        let mut m = vec![c(0.0, 0.0); dim * dim];
        if self.kind == GateKind::SWAP {
            for col in 0..dim {
                let row = ((col & 1) << 1) | (col >> 1);
                m[row * dim + col] = c(1.0, 0.0);
            }
            return m;
        }
        let base = self.base_matrix().unwrap();
        let nc = self.kind.num_controls();
        let cmask = (1usize << nc) - 1;
        let tbit = nc;
        for col in 0..dim {
            if col & cmask != cmask {
                m[col * dim + col] = c(1.0, 0.0);
                continue;
            }
            let tin = (col >> tbit) & 1;
            for tout in 0..2 {
                let row = (col & !(1 << tbit)) | (tout << tbit);
                m[row * dim + col] = base[tout][tin];
            }
        }
        m
    }

    pub fn inverse(&self) -> Gate {
        let q = self.qubits.clone();
        let (kind, params) = match self.kind {
            GateKind::S => (GateKind::Sdg, vec![]),
            GateKind::Sdg => (GateKind::S, vec![]),
            GateKind::T => (GateKind::Tdg, vec![]),
            GateKind::Tdg => (GateKind::T, vec![]),
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::P | GateKind::CP => {
                (self.kind, vec![-self.params[0]])
            }
            GateKind::U => (
                GateKind::U,
                vec![-self.params[0], -self.params[2], -self.params[1]],
            ),
            k => (k, vec![]),
        };
        Gate { kind, params, qubits: q }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.qasm_name())?;
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|p| format!("{p:.4}")).collect();
            write!(f, "({})", ps.join(","))?;
        }
        let qs: Vec<String> = self.qubits.iter().map(|q| format!("q[{q}]")).collect();
        write!(f, " {}", qs.join(","))
    }
}

/// U(θ, φ, λ) with the usual convention
/// `[[cos θ/2, −e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(φ+λ)} cos θ/2]]`.
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [
        [c(co, 0.0), -cis(lambda) * s],
        [cis(phi) * s, cis(phi + lambda) * co],
    ]
}
