//! Stochastic series expansion with circuit-evaluated weights.
//!
//! A configuration `(n, b, alpha)` of the expansion is weighted by
//! `beta^n / n!` times a product of term magnitudes times an overlap that a
//! small ancilla circuit produces. The crate builds those circuits, evaluates
//! their overlaps exactly or by simulated sampling, and drives a Metropolis
//! chain over configurations.

pub mod circuit;
pub mod engine;
pub mod error;
pub mod general;
pub mod observables;
pub mod pauli;
pub mod runner;
pub mod weight;

pub use circuit::{AncillaState, BasisState, SignConvention, StateVector};
pub use engine::{run_chain, Chain, ChainParams, ChainTrace, SseConfiguration};
pub use error::{Error, Result};
pub use pauli::{decompose_xx_chain, Hamiltonian, LocalBasis, PauliString, PauliTerm, ShiftMode};
pub use weight::{EstimatorBudget, WeightEstimate, WeightMethod};
