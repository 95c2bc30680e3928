//! Matrix-product storage for vectorized density matrices and superoperators.

mod io;
mod mpo;
mod site;
mod state;

pub use io::{read_state, write_state, MAGIC};
pub use mpo::{apply_mpo, apply_mpo_in_place, operator_schmidt, Gate, OpTensor, OperatorMPO};
pub use site::{SiteTensor, PHYS};
pub use state::{canonicalize, inner, schmidt_spectrum, truncate_bond, BondSpectrum, VectorizedState};
