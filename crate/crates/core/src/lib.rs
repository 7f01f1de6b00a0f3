//! Quantum-resource estimation for ground-state energy problems of
//! molecular Hamiltonians.

pub mod analysis;
pub mod cli;
pub mod costs;
pub mod error;
pub mod fermion_frag;
pub mod integrals;
pub mod linalg;
pub mod optimize;
pub mod qcc;
pub mod pauli;
pub mod pauli_frag;
pub mod states;

pub use error::{QresError, Result};
