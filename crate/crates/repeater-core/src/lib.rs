//! Simulation and optimization library for a fault-tolerant one-way quantum
//! repeater that concatenates a loss-tolerant photonic tree code (inner code)
//! with a flag-based 5-qubit code (outer code).
//!
//! The crate is organized bottom-up:
//!
//! - [`channels`]: density matrices, Pauli strings and depolarizing channels
//! - [`tree_code`]: branching-vector analytics (photon counts, eta_e, tree time)
//! - [`five_qubit`]: the [[5,1,3]] code, syndromes and correction tables
//! - [`node_sim`]: exact density-matrix simulation of the TYPE II node channel
//! - [`fidelity`]: the recursion-based effective-error model
//! - [`rate`]: secret-key-rate model and timing
//! - [`optimizer`]: constrained search minimizing the hardware cost function
//! - [`reencode_mc`]: Monte Carlo Pauli-frame/loss simulation of tree re-encoding

pub mod channels;
pub mod fidelity;
pub mod five_qubit;
pub mod node_sim;
pub mod optimizer;
pub mod rate;
pub mod reencode_mc;
pub mod tree_code;

mod pauli_prop;

/// Unified error type for the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unsupported tree depth {got}, expected {expected}")]
    UnsupportedDepth { got: usize, expected: usize },
    #[error("degenerate recursion: 4*alpha2 - 3*alpha1^2 = {zeta_sq} < 0 (noise too high for the two-term recursion)")]
    DegenerateRecursion { zeta_sq: f64 },
    #[error("no feasible configuration in the search space")]
    NoFeasibleConfig,
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
