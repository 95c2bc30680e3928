//! Lindblad dynamics of qubit lattices with vectorized density matrices
//! evolved as matrix-product states.

pub mod error;
pub mod evolution;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod pauli;
pub mod states;
pub mod tensor_core;

pub use error::{LmpoError, Result};
