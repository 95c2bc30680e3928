mod common;

use common::*;
use lmpo_core::evolution::{evolve, StepperConfig, TrotterOrder};
use lmpo_core::model::{build_liouvillian, Lattice};
use lmpo_core::observables::ObservableRequest;
use lmpo_core::oracle::{dense_evolve, OracleOptions};
use lmpo_core::states::{pauli_product_on, PauliSpec};

/// Log-log slope of the final-time Hilbert-Schmidt error against τ.
fn slope(order: TrotterOrder, seed: u64) -> (f64, Vec<f64>) {
    let lat = Lattice::chain(3);
    let p = random_params(&mut rng(seed), 3, 2.0 * std::f64::consts::PI);
    let gen = build_liouvillian(&lat, &p).unwrap();
    let specs: Vec<PauliSpec> = ["+x", "-y", "+z"].iter().map(|s| s.parse().unwrap()).collect();
    let init = pauli_product_on(&lat, &specs).unwrap();
    let rho0 = to_dense(&init, &lat);
    let exact = dense_evolve(&p, &lat, &rho0, 0.0, 1.0, &OracleOptions { rtol: 1e-13, atol: 1e-15, output_dt: None }).unwrap();
    let taus = [0.04, 0.02, 0.01];
    let errs: Vec<f64> = taus
        .iter()
        .map(|&tau| {
            let cfg = StepperConfig { tau, order, cutoff: 0.0, max_dim: usize::MAX, hermitize_every: 0, force_trace: false, output_every: 1000, ..Default::default() };
            let mut s = init.clone();
            evolve(&mut s, &gen, 0.0, 1.0, &cfg, &ObservableRequest::default()).unwrap();
            hs_distance(&to_dense(&s, &lat), &exact.states[1])
        })
        .collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = taus.iter().zip(&errs).map(|(t, e)| (t.ln(), e.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / 3.0;
    let my = ly.iter().sum::<f64>() / 3.0;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (num / den, errs)
}

#[test]
fn error_slopes_match_order() {
    for seed in [1, 2, 3] {
        for order in [TrotterOrder::Second, TrotterOrder::Third, TrotterOrder::Fourth] {
            let (s, errs) = slope(order, seed);
            let p = f64::from(order.value());
            eprintln!("seed {seed} order {p}: slope {s:.3} errors {errs:?}");
            assert!(s >= p - 0.5 && s <= p + 0.7, "order {p} slope {s}");
        }
    }
}
