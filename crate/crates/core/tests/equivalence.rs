mod common;

use std::time::Instant;

use common::*;
use lmpo_core::evolution::{evolve, StepperConfig, TrotterOrder};
use lmpo_core::model::{build_liouvillian, Lattice};
use lmpo_core::states::{pauli_product_on, PauliSpec};

#[test]
fn random_chain_matches_oracle() {
    let mut r = rng(7);
    for n in [4, 5] {
        let lat = Lattice::chain(n);
        let p = random_params(&mut r, n, 2.0 * std::f64::consts::PI);
        let gen = build_liouvillian(&lat, &p).unwrap();
        let specs: Vec<PauliSpec> = ["+x", "-z", "+y", "+z", "-x"][..n].iter().map(|s| s.parse().unwrap()).collect();
        let mut state = pauli_product_on(&lat, &specs).unwrap();
        let rho0 = to_dense(&state, &lat);
        let cfg = StepperConfig { tau: 0.005, order: TrotterOrder::Fourth, cutoff: 0.0, max_dim: usize::MAX, output_every: 40, ..Default::default() };
        let start = Instant::now();
        let rec = evolve(&mut state, &gen, 0.0, 2.0, &cfg, &full_request(n)).unwrap();
        let mpo_time = start.elapsed();
        let oracle = oracle_for(&rec, &p, &lat, &rho0, 1e-10, 1e-12);
        let dev = max_deviation(&rec, &oracle);
        eprintln!("n={n} dev={dev:e} mpo {mpo_time:?} total {:?} chi {:?}", start.elapsed(), rec.max_bond_dim.last());
        assert!(dev < 1e-6, "n={n} deviation {dev:e}");
    }
}
