#![allow(dead_code)]

use lmpo_core::linalg::C64;
use lmpo_core::model::{Coupling, Lattice, ModelParams};
use lmpo_core::oracle::{dense_evolve, positions_to_qubits, DenseState, DenseTrajectory, OracleOptions};
use lmpo_core::pauli::Pauli;
use lmpo_core::tensor_core::VectorizedState;
use lmpo_core::observables::{ObservableRequest, TrajectoryRecord};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Every coefficient drawn uniformly from [0, scale].
pub fn random_params<R: Rng>(rng: &mut R, n: usize, scale: f64) -> ModelParams {
    let mut v = || (0..n).map(|_| rng.gen_range(0.0..scale)).collect::<Vec<f64>>();
    let (h_x, h_y, h_z, g_0, g_1, g_2) = (v(), v(), v(), v(), v(), v());
    ModelParams {
        h_x,
        h_y,
        h_z,
        j: Coupling::Uniform(rng.gen_range(0.0..scale)),
        j_z: Coupling::Uniform(rng.gen_range(0.0..scale)),
        g_0,
        g_1,
        g_2,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Dense copy of an MPS laid out along `lattice`.
pub fn to_dense(state: &VectorizedState, lattice: &Lattice) -> DenseState {
    let coeffs = positions_to_qubits(&lattice.mpo_path, &state.to_dense());
    DenseState::from_pauli_coeffs(lattice.n_qubits, &coeffs).unwrap()
}

/// All single-qubit and all ordered-pair two-qubit Pauli observables.
pub fn full_request(n: usize) -> ObservableRequest {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let comps: Vec<(Pauli, Pauli)> = Pauli::XYZ.iter().flat_map(|&a| Pauli::XYZ.map(|b| (a, b))).collect();
    ObservableRequest::from_lists(&(0..n).collect::<Vec<_>>(), &Pauli::XYZ, &pairs, &comps)
}

/// Oracle trajectory at the record's times.
pub fn oracle_for(record: &TrajectoryRecord, params: &ModelParams, lattice: &Lattice, rho0: &DenseState, rtol: f64, atol: f64) -> DenseTrajectory {
    let t0 = record.times[0];
    let t1 = *record.times.last().unwrap();
    let dt = if record.times.len() > 2 { Some(record.times[1] - t0) } else { None };
    let tr = dense_evolve(params, lattice, rho0, t0, t1, &OracleOptions { rtol, atol, output_dt: dt }).unwrap();
    assert_eq!(tr.times.len(), record.times.len(), "oracle and record sample different times");
    tr
}

/// Largest |MPO − oracle| over every recorded one- and two-qubit series.
pub fn max_deviation(record: &TrajectoryRecord, oracle: &DenseTrajectory) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, rho) in oracle.states.iter().enumerate() {
        for (&(q, a), s) in &record.one_q {
            worst = worst.max((s.value[k] - rho.expect(&[(q, a)]).re).abs());
        }
        for (&(i, j, a, b), s) in &record.two_q {
            worst = worst.max((s.value[k] - rho.expect(&[(i, a), (j, b)]).re).abs());
        }
    }
    worst
}

/// Hilbert-Schmidt distance between two density matrices.
pub fn hs_distance(a: &DenseState, b: &DenseState) -> f64 {
    a.rho.iter().zip(&b.rho).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}
