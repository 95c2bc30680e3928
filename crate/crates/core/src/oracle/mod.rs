//! Brute-force reference: the same Lindbladian on a full 2^N × 2^N density matrix.

mod dense;
mod integrate;

pub use dense::{
    dense_generator_apply, positions_to_qubits, qubits_to_positions, DenseGenerator, DenseState, MAX_DENSE_QUBITS,
};
pub use integrate::{dense_evolve, dense_evolve_with, output_times, DenseTrajectory, OracleOptions};
