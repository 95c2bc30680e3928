//! Acceptance criteria, one `criterion N: PASS|FAIL|SKIP ...` line each.
//!
//! Criteria 5 and 8 take hours on a single core and run only with
//! `--include-ignored` (or `LMPO_ACCEPTANCE_FULL=1`). Numeric arguments
//! select criteria, e.g. `cargo test --test acceptance -- 2 7`.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lmpo_cli::commands::{compare, setup, SYMMETRY_THRESHOLD};
use lmpo_cli::{Field, PairField, RunSpec};
use lmpo_core::evolution::{evolve, evolve_into, make_propagators, StepperConfig, TrotterOrder};
use lmpo_core::model::{build_lattice, build_liouvillian, Coupling, Lattice, LatticeKind, ModelParams};
use lmpo_core::observables::{
    concurrence, connected_corr, osee_center, reduced_dm_2q, ObservableRequest, TrajectoryRecord,
};
use lmpo_core::oracle::{dense_evolve, dense_evolve_with, positions_to_qubits, DenseGenerator, DenseState, OracleOptions};
use lmpo_core::pauli::Pauli;
use lmpo_core::states::{pauli_product_on, PauliSpec};
use lmpo_core::tensor_core::VectorizedState;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn minutes(d: Duration) -> f64 {
    d.as_secs_f64() / 60.0
}

/// Evolve a spec's setup and return its record.
fn simulate(spec: &RunSpec) -> TrajectoryRecord {
    let mut s = setup(spec).expect("valid spec");
    let gen = build_liouvillian(&s.lattice, &s.params).unwrap();
    let props = make_propagators(&gen, &s.config).unwrap();
    let mut record = TrajectoryRecord::new(&s.request);
    evolve_into(&mut s.state, &s.lattice, &props, spec.t_init, spec.t_final, &s.config, &mut record).unwrap();
    record
}

fn series(rec: &TrajectoryRecord, q: usize, a: Pauli) -> &[f64] {
    &rec.one(q, a).expect("recorded").value
}

fn nearest(times: &[f64], t: f64) -> usize {
    times.iter().enumerate().min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs())).unwrap().0
}

/// Least-squares slope of y against x.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

fn wrap(angle: f64) -> f64 {
    (angle + PI).rem_euclid(TAU) - PI
}

fn random_pauli_state<R: Rng>(rng: &mut R) -> PauliSpec {
    let axis = [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)];
    PauliSpec::new(axis, if rng.gen_bool(0.5) { 1 } else { -1 }).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng: ChaCha8Rng = rand::SeedableRng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for draw in 0..20 {
        let n = 4 + draw % 2;
        let mut spec = RunSpec::new(n, 2.0, 0.005);
        let field = |rng: &mut ChaCha8Rng| Field::PerQubit((0..n).map(|_| rng.gen_range(0.0..TAU)).collect());
        spec.h_x = field(&mut rng);
        spec.h_y = field(&mut rng);
        spec.h_z = field(&mut rng);
        spec.g_0 = field(&mut rng);
        spec.g_1 = field(&mut rng);
        spec.g_2 = field(&mut rng);
        spec.j = PairField::Uniform(rng.gen_range(0.0..TAU));
        spec.j_z = PairField::Uniform(rng.gen_range(0.0..TAU));
        spec.init_pauli_state = Some((0..n).map(|_| random_pauli_state(&mut rng)).collect());
        spec.cut_off_rho = 0.0;
        spec.max_dim_rho = 1 << 12;
        spec.output_step = 20;
        spec.one_q_components = Pauli::XYZ.to_vec();
        spec.two_q_components = Pauli::XYZ.iter().flat_map(|&a| Pauli::XYZ.map(|b| (a, b))).collect();
        worst = worst.max(compare(&spec).expect("compare runs").max_local());
    }
    let elapsed = start.elapsed();
    Outcome::new(
        worst <= 1e-6 && elapsed < Duration::from_secs(300),
        format!("max |MPO - oracle| {worst:.2e} (limit 1e-6) over 20 draws in {:.1} min (limit 5)", minutes(elapsed)),
    )
}

fn light_cone_spec() -> RunSpec {
    let mut spec = RunSpec::new(9, 2.5, 0.01);
    let mut h_x = vec![0.0; 9];
    h_x[0] = TAU;
    spec.h_x = Field::PerQubit(h_x);
    spec.j = PairField::Uniform(TAU);
    spec.one_q_components = Pauli::XYZ.to_vec();
    spec.two_q_components.clear();
    spec
}

/// Dense run of the light-cone scenario: wall time and the largest deviation
/// of the oracle's Z expectations from the MPO record.
fn oracle_light_cone(spec: &RunSpec, rec: &TrajectoryRecord) -> (Duration, f64) {
    let s = setup(spec).expect("valid spec");
    let rho0 = to_dense(&s.state, &s.lattice);
    let start = Instant::now();
    let gen = DenseGenerator::new(&s.params, &s.lattice).unwrap();
    let mut worst: f64 = 0.0;
    let mut k = 0;
    dense_evolve_with(&gen, &rho0, &rec.times, &OracleOptions { rtol: 1e-8, atol: 1e-10, output_dt: None }, |_, rho| {
        for q in 0..spec.n {
            worst = worst.max((rho.expect(&[(q, Pauli::Z)]).re - series(rec, q, Pauli::Z)[k]).abs());
        }
        k += 1;
        Ok(())
    })
    .unwrap();
    (start.elapsed(), worst)
}

fn light_cone(rec: &TrajectoryRecord, elapsed: Duration, oracle: (Duration, f64)) -> Outcome {
    let mut arrivals = Vec::new();
    for q in 0..9 {
        let z = series(rec, q, Pauli::Z);
        match z.iter().position(|v| (v - 1.0).abs() > 0.02) {
            Some(k) => arrivals.push(rec.times[k]),
            None => return Outcome::new(false, format!("front never reaches qubit {q}")),
        }
    }
    let sites: Vec<f64> = (0..9).map(f64::from).collect();
    let v = 1.0 / slope(&sites, &arrivals) / (4.0 * PI);
    let z8 = series(rec, 8, Pauli::Z);
    let min = z8.iter().copied().fold(f64::INFINITY, f64::min);
    let reached = z8.iter().position(|&z| z <= -0.4).map(|k| rec.times[k]);
    let pass = within(v, 0.85, 1.15)
        && within(min, -0.6, -0.4)
        && reached.is_some_and(|t| within(t, 0.9, 1.3))
        && elapsed < Duration::from_secs(600)
        && oracle.0 < Duration::from_secs(120);
    Outcome::new(
        pass,
        format!(
            "front speed {v:.3}x4pi (0.85..1.15), Z8 min {min:.3} (-0.6..-0.4) reached by t = {} (0.9..1.3), MPO {:.1} min (limit 10), oracle {:.1} min (limit 2, max |dZ| vs MPO {:.1e})",
            reached.map_or("never".into(), |t| format!("{t:.2}")),
            minutes(elapsed),
            minutes(oracle.0),
            oracle.1
        ),
    )
}

fn phase_staircase(rec: &TrajectoryRecord) -> Outcome {
    let k = nearest(&rec.times, 1.0);
    let angle = |q| series(rec, q, Pauli::Y)[k].atan2(series(rec, q, Pauli::X)[k]);
    let diffs: Vec<f64> = (0..4).map(|q| wrap(angle(q + 1) - angle(q))).collect();
    let worst = diffs.iter().map(|d| (d + PI / 2.0).abs()).fold(0.0, f64::max);
    Outcome::new(worst <= 0.2, format!("neighbor angle steps {diffs:.3?} at t = 1, worst |step + pi/2| {worst:.2e} (limit 0.2)"))
}

fn hs_distance(a: &DenseState, b: &DenseState) -> f64 {
    a.rho.iter().zip(&b.rho).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn to_dense(state: &VectorizedState, lattice: &Lattice) -> DenseState {
    DenseState::from_pauli_coeffs(lattice.n_qubits, &positions_to_qubits(&lattice.mpo_path, &state.to_dense())).unwrap()
}

fn trotter_order() -> Outcome {
    let mut rng: ChaCha8Rng = rand::SeedableRng::seed_from_u64(4);
    let lattice = Lattice::chain(3);
    let mut field = || (0..3).map(|_| rng.gen_range(0.0..TAU)).collect::<Vec<f64>>();
    let (h_x, h_y, h_z, g_0, g_1, g_2) = (field(), field(), field(), field(), field(), field());
    let (j, j_z) = (field(), field());
    let params = ModelParams { h_x, h_y, h_z, j: Coupling::Uniform(j[0]), j_z: Coupling::Uniform(j_z[0]), g_0, g_1, g_2 };
    let gen = build_liouvillian(&lattice, &params).unwrap();
    let specs: Vec<PauliSpec> = ["+x", "-y", "+z"].iter().map(|s| s.parse().unwrap()).collect();
    let init = pauli_product_on(&lattice, &specs).unwrap();
    let rho0 = to_dense(&init, &lattice);
    let opts = OracleOptions { rtol: 1e-13, atol: 1e-15, output_dt: None };
    let exact = dense_evolve(&params, &lattice, &rho0, 0.0, 1.0, &opts).unwrap();
    let taus = [0.04, 0.02, 0.01];
    let mut pass = true;
    let mut parts = Vec::new();
    for order in [TrotterOrder::Second, TrotterOrder::Third, TrotterOrder::Fourth] {
        let errors: Vec<f64> = taus
            .iter()
            .map(|&tau| {
                let cfg = StepperConfig {
                    tau,
                    order,
                    cutoff: 0.0,
                    max_dim: usize::MAX,
                    hermitize_every: 0,
                    force_trace: false,
                    output_every: 1000,
                    ..Default::default()
                };
                let mut s = init.clone();
                evolve(&mut s, &gen, 0.0, 1.0, &cfg, &ObservableRequest::default()).unwrap();
                hs_distance(&to_dense(&s, &lattice), &exact.states[1])
            })
            .collect();
        let x: Vec<f64> = taus.iter().map(|t: &f64| t.ln()).collect();
        let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
        let s = slope(&x, &y);
        let p = f64::from(order.value());
        pass &= within(s, p - 0.5, p + 0.7);
        parts.push(format!("order {p}: slope {s:.2} ({:.1}..{:.1})", p - 0.5, p + 0.7));
    }
    Outcome::new(pass, parts.join(", "))
}

const RING_BUDGET: Duration = Duration::from_secs(30 * 60);

/// Steady-state local values of the dissipative Ising ring, evolved in unit
/// chunks so the time budget is enforced while running.
fn ising_ring(h_x: f64, max_dim: usize, deadline: Instant) -> Result<(Vec<[f64; 3]>, f64), String> {
    let n = 16;
    let lattice = build_lattice(LatticeKind::Ring, n, 0, 1, true, false).unwrap();
    let params = ModelParams {
        h_x: vec![h_x; n],
        j_z: Coupling::Uniform(1.0),
        g_1: vec![1.0; n],
        ..ModelParams::zeros(n)
    };
    let cfg = StepperConfig {
        tau: 0.05,
        order: TrotterOrder::Second,
        cutoff: 1e-16,
        max_dim,
        output_every: 20,
        ..Default::default()
    };
    let gen = build_liouvillian(&lattice, &params).unwrap();
    let props = make_propagators(&gen, &cfg).unwrap();
    let mut state = pauli_product_on(&lattice, &[PauliSpec::new(Pauli::Z, 1).unwrap()]).unwrap();
    let mut request = ObservableRequest::local(n);
    request.mirror_check = false;
    let mut record = TrajectoryRecord::new(&request);
    let mut osee_max: f64 = 0.0;
    for chunk in 0..20 {
        if Instant::now() > deadline {
            return Err(format!("time budget exhausted at h_x = {h_x}, eta = {max_dim}, t = {chunk}"));
        }
        evolve_into(&mut state, &lattice, &props, chunk as f64, chunk as f64 + 1.0, &cfg, &mut record).unwrap();
        osee_max = osee_max.max(osee_center(&state).unwrap());
    }
    let last = record.times.len() - 1;
    let values = (0..n).map(|q| Pauli::XYZ.map(|a| series(&record, q, a)[last])).collect();
    Ok((values, osee_max))
}

fn dissipative_ring() -> Outcome {
    let start = Instant::now();
    let deadline = start + RING_BUDGET;
    let (mut eta_gap, mut asym, mut osee): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for h_x in [0.5, 1.0, 2.0, 4.0] {
        let mut runs = Vec::new();
        for eta in [50, 200] {
            match ising_ring(h_x, eta, deadline) {
                Ok((values, o)) => {
                    osee = osee.max(o);
                    for c in 0..3 {
                        let mean = values.iter().map(|v| v[c]).sum::<f64>() / values.len() as f64;
                        asym = values.iter().map(|v| (v[c] - mean).abs()).fold(asym, f64::max);
                    }
                    runs.push(values);
                }
                Err(e) => return Outcome::new(false, format!("{e} after {:.1} min (limit 30)", minutes(start.elapsed()))),
            }
        }
        for (a, b) in runs[0].iter().zip(&runs[1]) {
            eta_gap = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(eta_gap, f64::max);
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        eta_gap <= 1e-2 && asym <= 1e-2 && osee <= 0.5 && elapsed < RING_BUDGET,
        format!(
            "eta 50 vs 200 gap {eta_gap:.2e} (1e-2), site spread {asym:.2e} (1e-2), OSEE max {osee:.3} (0.5), {:.1} min (limit 30)",
            minutes(elapsed)
        ),
    )
}

/// Alternating plaquette: drive on qubit 0, detuning on the sublattice not containing it.
fn alternating_plaquette(n: usize) -> RunSpec {
    let lattice = build_lattice(LatticeKind::Plaquette, n, 0, 1, false, false).unwrap();
    let color = lattice.sublattice().expect("plaquettes are bipartite");
    let mut spec = RunSpec::new(n, 10.0, 0.01);
    spec.lattice = Some(LatticeKind::Plaquette);
    let mut h_x = vec![0.0; n];
    h_x[0] = TAU * 10.0;
    spec.h_x = Field::PerQubit(h_x);
    spec.h_z = Field::PerQubit(color.iter().map(|&c| if c == color[0] { 0.0 } else { TAU * 5.0 }).collect());
    spec.j = PairField::Uniform(TAU);
    spec.g_0 = Field::Uniform(0.1);
    spec.max_dim_rho = 100;
    spec
}

fn plaquette_convergence() -> Outcome {
    let start = Instant::now();
    let mut spec = alternating_plaquette(10);
    spec.one_q_components = Pauli::XYZ.to_vec();
    spec.two_q_components = vec![(Pauli::X, Pauli::X), (Pauli::X, Pauli::Y), (Pauli::Z, Pauli::Z)];
    let report = compare(&spec).expect("compare runs");
    let elapsed = start.elapsed();
    let worst = report.max_local();
    Outcome::new(
        worst <= 2e-2 && elapsed < Duration::from_secs(30 * 60),
        format!("max |MPO(eta=100) - oracle| {worst:.2e} (limit 2e-2), {:.1} min (limit 30)", minutes(elapsed)),
    )
}

fn effective_coupling() -> Outcome {
    let (j, detuning) = (TAU, TAU * 10.0);
    let lattice = Lattice::chain(3);
    let params = ModelParams {
        j: Coupling::Uniform(j),
        h_z: vec![0.0, detuning, 0.0],
        ..ModelParams::zeros(3)
    };
    let rho0 = DenseState::pauli_product(&[(Pauli::Z, -1), (Pauli::Z, 1), (Pauli::Z, 1)]).unwrap();
    let gen = DenseGenerator::new(&params, &lattice).unwrap();
    let times: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.005).collect();
    let mut transfer = Vec::new();
    dense_evolve_with(&gen, &rho0, &times, &OracleOptions { rtol: 1e-10, atol: 1e-12, output_dt: None }, |_, rho| {
        transfer.push((1.0 - rho.expect(&[(2, Pauli::Z)]).re) / 2.0);
        Ok(())
    })
    .unwrap();
    let k = transfer.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    // Population on site 2 goes as sin²(ωt/2), peaking first at t = π/ω.
    let measured = PI / times[k];
    let expected = 2.0 * j * j / detuning;
    let rel = (measured - expected).abs() / expected;
    Outcome::new(
        rel <= 0.25,
        format!(
            "transfer peaks at t = {:.3} with P = {:.3}; omega {measured:.4} vs 2J^2/Delta = {expected:.4}, off by {:.1}% (limit 25%)",
            times[k],
            transfer[k],
            100.0 * rel
        ),
    )
}

fn steady_state_phenomenology() -> Outcome {
    let n = 22;
    let mut spec = alternating_plaquette(n);
    spec.t_final = 30.0;
    spec.output_step = 0;
    let mut s = setup(&spec).unwrap();
    let gen = build_liouvillian(&s.lattice, &s.params).unwrap();
    let props = make_propagators(&gen, &s.config).unwrap();
    let mut record = TrajectoryRecord::new(&s.request);
    let edges = (s.lattice.position(0), s.lattice.position(n - 1));
    let mut peak_concurrence: f64 = 0.0;
    for chunk in 0..300 {
        let t0 = chunk as f64 * 0.1;
        evolve_into(&mut s.state, &s.lattice, &props, t0, t0 + 0.1, &s.config, &mut record).unwrap();
        if chunk < 299 {
            peak_concurrence = peak_concurrence.max(concurrence(&reduced_dm_2q(&s.state, edges.0, edges.1).unwrap()).unwrap());
        }
    }
    let final_concurrence = concurrence(&reduced_dm_2q(&s.state, edges.0, edges.1).unwrap()).unwrap();
    let mut best = (0.0f64, (0, 0));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let c = connected_corr(&s.state, s.lattice.position(i), s.lattice.position(j), Pauli::X, Pauli::Y).unwrap().abs();
                if c > best.0 {
                    best = (c, (i, j));
                }
            }
        }
    }
    let edge_pair = best.1 == (0, n - 1) || best.1 == (n - 1, 0);
    Outcome::new(
        edge_pair && final_concurrence <= 1e-6 && peak_concurrence > 0.0,
        format!(
            "largest |XY connected| {:.3e} on {:?}, edge concurrence {final_concurrence:.2e} at t_f, earlier peak {peak_concurrence:.3e}",
            best.0, best.1
        ),
    )
}

fn symmetry_diagnostic() -> Outcome {
    let n = 14;
    let mut spec = RunSpec::new(n, 3.0, 0.02);
    spec.lattice = Some(LatticeKind::Plaquette);
    let mut h_x = vec![0.0; n];
    h_x[0] = TAU;
    spec.h_x = Field::PerQubit(h_x);
    spec.j = PairField::Uniform(TAU);
    spec.g_0 = Field::Uniform(0.1);
    spec.max_dim_rho = 64;
    spec.two_q_components.clear();
    let rec = simulate(&spec);
    let worst = rec.mirror_asymmetry.iter().copied().fold(0.0, f64::max);
    let broke = rec.symmetry_break_time(SYMMETRY_THRESHOLD);
    Outcome::new(
        broke.is_some_and(|t| t < 3.0) && rec.symmetry_flagged(SYMMETRY_THRESHOLD),
        format!(
            "mirror asymmetry max {worst:.2e}, first above {SYMMETRY_THRESHOLD:e} at t = {}",
            broke.map_or("never".into(), |t| format!("{t:.2}"))
        ),
    )
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let full = args.iter().any(|a| a == "--include-ignored" || a == "--ignored")
        || std::env::var("LMPO_ACCEPTANCE_FULL").is_ok_and(|v| v == "1");
    let selected: Vec<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: u32| selected.is_empty() || selected.contains(&k);

    let mut results: Vec<(u32, Option<Outcome>)> = Vec::new();
    let mut report = |k: u32, outcome: Option<Outcome>| {
        match &outcome {
            Some(o) => println!("criterion {k}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail),
            None => println!("criterion {k}: SKIP (hours on one core; pass --include-ignored)"),
        }
        results.push((k, outcome));
    };

    if wanted(1) {
        report(1, Some(oracle_equivalence()));
    }
    if wanted(2) || wanted(3) {
        let start = Instant::now();
        let spec = light_cone_spec();
        let rec = simulate(&spec);
        let elapsed = start.elapsed();
        if wanted(2) {
            report(2, Some(light_cone(&rec, elapsed, oracle_light_cone(&spec, &rec))));
        }
        if wanted(3) {
            report(3, Some(phase_staircase(&rec)));
        }
    }
    if wanted(4) {
        report(4, Some(trotter_order()));
    }
    if wanted(5) {
        report(5, full.then(dissipative_ring));
    }
    if wanted(6) {
        report(6, Some(plaquette_convergence()));
    }
    if wanted(7) {
        report(7, Some(effective_coupling()));
    }
    if wanted(8) {
        report(8, full.then(steady_state_phenomenology));
    }
    if wanted(9) {
        report(9, Some(symmetry_diagnostic()));
    }

    if results.iter().any(|(_, o)| o.as_ref().is_some_and(|o| !o.pass)) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
