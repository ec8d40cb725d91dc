//! Property-based testing for quantum circuits.
//!
//! Properties generate seeded random inputs, filter them with preconditions,
//! build circuits, and register statistical assertions. All assertions of a
//! suite are evaluated together: circuits are deduplicated, measurements are
//! packed into as few circuit copies as possible, and every p-value enters one
//! Holm–Bonferroni family. A mutation harness measures how well a suite
//! separates faulty from equivalent mutants.

pub mod analysis;
pub mod assertions;
pub mod circuit;
pub mod corpus;
pub mod engine;
pub mod generators;
pub mod mutation;
pub mod program;
pub mod rng;
pub mod simulator;
pub mod state;
pub mod stats;

pub use circuit::{Basis, Circuit, CircuitBuilder, CircuitDigest, CircuitError, Gate, GateKind, Op};
pub use simulator::{Counts, SimError};
pub use state::{StateError, StateVector};
