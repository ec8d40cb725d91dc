//! Dense statevector value type.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the squared norm of a valid state.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("statevector length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("statevector norm squared is {0}, expected 1")]
    NotNormalized(f64),
}

/// Amplitudes of an `n`-qubit pure state, little-endian: bit `j` of the index
/// is the value of qubit `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    num_qubits: usize,
}

impl StateVector {
    /// Validates length and norm (within [`NORM_TOLERANCE`]).
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self, StateError> {
        Self::with_tolerance(amplitudes, NORM_TOLERANCE)
    }

    pub fn with_tolerance(amplitudes: Vec<Complex64>, tol: f64) -> Result<Self, StateError> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(StateError::NotPowerOfTwo(len));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > tol || !norm.is_finite() {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    /// Builds a state from real amplitudes, e.g. `[1.0, 0.0]` for |0⟩.
    pub fn from_real(values: &[f64]) -> Result<Self, StateError> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// The basis state |index⟩ on `num_qubits` qubits.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self {
            amplitudes,
            num_qubits,
        }
    }

    pub(crate) fn from_raw(amplitudes: Vec<Complex64>) -> Self {
        let num_qubits = amplitudes.len().trailing_zeros() as usize;
        Self {
            amplitudes,
            num_qubits,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// True when the two states agree up to a global phase, elementwise within `tol`.
    pub fn equal_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let overlap = self.inner(other);
        if overlap.norm() < 1e-12 {
            return false;
        }
        let phase = overlap / overlap.norm();
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .all(|(a, b)| (a * phase - b).norm() <= tol)
    }
}
