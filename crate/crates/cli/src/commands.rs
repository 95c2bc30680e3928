//! The subcommands, callable as library functions.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use lmpo_core::evolution::{evolve_into, make_propagators, StepperConfig};
use lmpo_core::model::{build_liouvillian, Lattice, ModelParams};
use lmpo_core::observables::{
    center_bond, is_hermitian, osee, renyi2, trace_rho, Global, ObservableRequest, TrajectoryRecord,
};
use lmpo_core::oracle::{dense_evolve_with, positions_to_qubits, DenseGenerator, DenseState, OracleOptions, MAX_DENSE_QUBITS};
use lmpo_core::states::{graph_state_on, load_state, pauli_product_on, save_state, state_path};
use lmpo_core::tensor_core::{inner, VectorizedState};
use lmpo_core::LmpoError;

use crate::output::{global_table, one_q_table, two_q_table, write_atomic};
use crate::runspec::{parse_runspec_for, Engine, ParseError, RunSpec};

/// Mirror-pair asymmetry above which a run reports broken symmetry.
pub const SYMMETRY_THRESHOLD: f64 = 5e-3;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    Failure = 1,
    Parse = 2,
    Breakdown = 3,
    ResourceGuard = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError { status: Status::Parse, message: e.to_string() }
    }
}

impl From<LmpoError> for CliError {
    fn from(e: LmpoError) -> Self {
        let status = match e {
            LmpoError::InvalidParameter(_) | LmpoError::Unsupported(_) => Status::Parse,
            LmpoError::Breakdown(_) | LmpoError::Degenerate(_) | LmpoError::Numerical(_) => Status::Breakdown,
            LmpoError::ResourceGuard(_) => Status::ResourceGuard,
            LmpoError::Structure(_) | LmpoError::Format(_) | LmpoError::Io(_) => Status::Failure,
        };
        CliError { status, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { status: Status::Failure, message: e.to_string() }
    }
}

/// Everything a run needs, built from a spec.
pub struct Setup {
    pub lattice: Lattice,
    pub params: ModelParams,
    pub config: StepperConfig,
    pub request: ObservableRequest,
    pub state: VectorizedState,
}

/// Build the lattice, model, stepper settings and initial state.
pub fn setup(spec: &RunSpec) -> Result<Setup, CliError> {
    let lattice = spec.lattice()?;
    let params = spec.model_params();
    params.bond_couplings(&lattice)?;
    let config = spec.stepper_config()?;
    let request = spec.request()?;
    let state = if !spec.load_files_prefix.is_empty() {
        let mut s = load_state(&state_path(&spec.load_files_prefix), Some(spec.n))?;
        if spec.b_initial_rho_compression {
            s.compress(spec.cut_off_rho, spec.max_dim_rho)?;
        }
        s
    } else if !spec.init_graph_state.is_empty() {
        graph_state_on(&lattice, &spec.init_graph_state)?
    } else {
        pauli_product_on(&lattice, &spec.pauli_states())?
    };
    Ok(Setup { lattice, params, config, request, state })
}

/// Evolve the setup's state, returning the record even when evolution fails.
fn evolve_setup(setup: &mut Setup, spec: &RunSpec) -> (TrajectoryRecord, Result<(), LmpoError>) {
    let mut record = TrajectoryRecord::new(&setup.request);
    let result = build_liouvillian(&setup.lattice, &setup.params)
        .and_then(|gen| make_propagators(&gen, &setup.config))
        .and_then(|props| {
            evolve_into(&mut setup.state, &setup.lattice, &props, spec.t_init, spec.t_final, &setup.config, &mut record)
        });
    (record, result)
}

#[derive(Debug)]
pub struct RunSummary {
    /// Path stem shared by the output files.
    pub stem: String,
    pub record: TrajectoryRecord,
    /// First time the mirror-pair asymmetry exceeded [`SYMMETRY_THRESHOLD`].
    pub symmetry_break: Option<f64>,
    pub elapsed: Duration,
}

/// Run one simulation and write its files.
///
/// On breakdown the data files still hold every row up to the failure.
pub fn run(spec: &RunSpec) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let mut setup = setup(spec)?;
    let stem = spec.file_stem();
    let mut echo = String::new();
    if spec.b_unique_id {
        echo.push_str(&format!("# unique_id = {}\n", spec.unique_id()));
    }
    echo.push_str(&spec.emit());
    write_atomic(Path::new(&format!("{stem}.input.txt")), echo.as_bytes())?;

    let (record, result) = evolve_setup(&mut setup, spec);
    write_atomic(Path::new(&format!("{stem}.obs-1q.dat")), one_q_table(&record).as_bytes())?;
    write_atomic(Path::new(&format!("{stem}.obs-2q.dat")), two_q_table(&record).as_bytes())?;
    write_atomic(Path::new(&format!("{stem}.global.dat")), global_table(&record).as_bytes())?;
    result?;
    if spec.b_save_final_state {
        let path = state_path(&stem);
        let tmp = path.with_extension("lmpo.partial");
        save_state(&setup.state, &tmp)?;
        std::fs::rename(&tmp, &path)?;
    }
    let symmetry_break = record.symmetry_break_time(SYMMETRY_THRESHOLD);
    Ok(RunSummary { stem, record, symmetry_break, elapsed: start.elapsed() })
}

/// Parse and run a parameter file.
pub fn run_file(path: &Path) -> Result<RunSummary, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError {
        status: Status::Failure,
        message: format!("{}: {e}", path.display()),
    })?;
    let spec = parse_runspec_for(&text, Engine::Mpo).map_err(|e| CliError {
        status: Status::Parse,
        message: format!("{}: {e}", path.display()),
    })?;
    run(&spec)
}

/// Files matching each pattern, sorted within a pattern; a pattern without
/// glob characters names a file directly.
pub fn expand_inputs(patterns: &[String]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in patterns {
        let mut matches: Vec<PathBuf> = glob::glob(p)
            .map_err(|e| CliError { status: Status::Parse, message: format!("bad pattern {p:?}: {e}") })?
            .filter_map(|r| r.ok())
            .collect();
        matches.sort();
        if matches.is_empty() {
            return Err(CliError { status: Status::Failure, message: format!("no input files match {p:?}") });
        }
        out.extend(matches);
    }
    Ok(out)
}

/// Run every file on a pool of `workers` threads; results are in input order.
pub fn sweep(paths: &[PathBuf], workers: usize) -> Vec<Result<RunSummary, CliError>> {
    let workers = workers.clamp(1, paths.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<RunSummary, CliError>>>> = Mutex::new((0..paths.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= paths.len() {
                    break;
                }
                let result = run_file(&paths[i]);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(result);
            });
        }
    });
    slots.into_inner().expect("workers have finished").into_iter().map(|r| r.expect("every slot is filled")).collect()
}

/// Largest |MPO − oracle| of one observable series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesDeviation {
    pub label: String,
    pub max_abs: f64,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub times: Vec<f64>,
    pub series: Vec<SeriesDeviation>,
}

impl CompareReport {
    /// Largest deviation over the one- and two-qubit series.
    pub fn max_local(&self) -> f64 {
        self.series.iter().filter(|s| s.label.starts_with("1q") || s.label.starts_with("2q")).map(|s| s.max_abs).fold(0.0, f64::max)
    }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# series max_abs_deviation")?;
        for s in &self.series {
            writeln!(f, "{} {:.6e}", s.label, s.max_abs)?;
        }
        write!(f, "# max local deviation {:.6e} over {} times", self.max_local(), self.times.len())
    }
}

/// Run the tensor-network engine and the dense oracle on the same spec.
pub fn compare(spec: &RunSpec) -> Result<CompareReport, CliError> {
    if spec.n > MAX_DENSE_QUBITS {
        return Err(CliError {
            status: Status::ResourceGuard,
            message: format!("compare needs the dense oracle, limited to N ≤ {MAX_DENSE_QUBITS}; got N = {}", spec.n),
        });
    }
    spec.validate(Engine::Oracle)?;
    let mut setup = setup(spec)?;
    let coeffs = positions_to_qubits(&setup.lattice.mpo_path, &setup.state.to_dense());
    let rho0 = DenseState::from_pauli_coeffs(spec.n, &coeffs)?;
    let (record, result) = evolve_setup(&mut setup, spec);
    result?;

    let gen = DenseGenerator::new(&setup.params, &setup.lattice)?;
    let opts = OracleOptions { rtol: 1e-10, atol: 1e-12, output_dt: None };
    let mut one = vec![0.0f64; record.one_q.len()];
    let mut two = vec![0.0f64; record.two_q.len()];
    let (mut trace_dev, mut s2_dev) = (0.0f64, 0.0f64);
    let mut k = 0;
    dense_evolve_with(&gen, &rho0, &record.times, &opts, |_, rho| {
        for (d, (&(q, a), s)) in one.iter_mut().zip(&record.one_q) {
            *d = d.max((s.value[k] - rho.expect(&[(q, a)]).re).abs());
        }
        for (d, (&(i, j, a, b), s)) in two.iter_mut().zip(&record.two_q) {
            *d = d.max((s.value[k] - rho.expect(&[(i, a), (j, b)]).re).abs());
        }
        let tr = rho.trace();
        if let Some(v) = record.global(Global::Trace) {
            trace_dev = trace_dev.max((v[k] - tr.re).abs());
        }
        if let Some(v) = record.global(Global::S2) {
            let exact = -(rho.purity() / tr.norm_sqr()).ln();
            s2_dev = s2_dev.max((v[k] - exact).abs());
        }
        k += 1;
        Ok(())
    })?;

    let mut series = Vec::new();
    for (d, &(q, a)) in one.iter().zip(record.one_q.keys()) {
        series.push(SeriesDeviation { label: format!("1q {q} {a}"), max_abs: *d });
    }
    for (d, &(i, j, a, b)) in two.iter().zip(record.two_q.keys()) {
        series.push(SeriesDeviation { label: format!("2q {i} {j} {a}{b}"), max_abs: *d });
    }
    if record.global(Global::Trace).is_some() {
        series.push(SeriesDeviation { label: "global trace".into(), max_abs: trace_dev });
        series.push(SeriesDeviation { label: "global s2".into(), max_abs: s2_dev });
    }
    Ok(CompareReport { times: record.times.clone(), series })
}

/// Summary of a saved state.
pub fn info(path: &Path) -> Result<String, CliError> {
    let state = load_state(path, None)?;
    let n = state.len();
    let tr = trace_rho(&state);
    let purity = inner(&state, &state)?.re;
    let mut out = String::new();
    out.push_str(&format!("file {}\n", path.display()));
    out.push_str(&format!("qubits {n}\n"));
    out.push_str(&format!("bond_dims {:?}\n", state.bond_dims()));
    out.push_str(&format!("max_bond_dim {}\n", state.max_bond_dim()));
    out.push_str(&format!("trace {tr:.12e}\n"));
    out.push_str(&format!("purity {purity:.12e}\n"));
    out.push_str(&format!("s2 {:.12e}\n", renyi2(&state)?));
    if let Some(b) = center_bond(n) {
        out.push_str(&format!("osee_center {:.12e}\n", osee(&state, b)?));
    }
    out.push_str(&format!("hermitian {}", is_hermitian(&state, 1e-10)));
    Ok(out)
}
