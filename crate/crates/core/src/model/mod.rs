//! Lattices, coefficient sets, the Liouvillian MPO and frame utilities.

mod frame;
mod lattice;
mod liouvillian;
mod params;

pub use frame::{effective_nnn_coupling, lab_to_rotating, LabFrameParams};
pub use lattice::{build_lattice, Lattice, LatticeKind};
pub use liouvillian::{
    bond_generator, build_liouvillian, sigma_minus, sigma_plus, site_generator, BondTerm, LiouvillianMPO, SiteTerm,
};
pub use params::{BondCoupling, Coupling, ModelParams};
