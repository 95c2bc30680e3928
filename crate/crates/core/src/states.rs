//! Initial states and state files.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{LmpoError, Result};
use crate::linalg::{C64, ONE, ZERO};
use crate::model::Lattice;
use crate::pauli::{two_qubit_conjugation, Pauli, SQRT_HALF};
use crate::tensor_core::{apply_mpo_in_place, read_state, write_state, Gate, OperatorMPO, VectorizedState};

/// A single-qubit Pauli eigenstate, written `+z`, `-x`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliSpec {
    pub axis: Pauli,
    pub sign: i8,
}

impl PauliSpec {
    pub fn new(axis: Pauli, sign: i8) -> Result<Self> {
        if axis == Pauli::I || !(sign == 1 || sign == -1) {
            return Err(LmpoError::InvalidParameter(format!("no Pauli eigenstate for axis {axis} sign {sign}")));
        }
        Ok(PauliSpec { axis, sign })
    }

    /// Pauli-basis coefficients of `(I + sign·σ)/2`.
    pub fn coefficients(self) -> [C64; 4] {
        let mut c = [ZERO; 4];
        c[0] = C64::new(SQRT_HALF, 0.0);
        c[self.axis.index()] = C64::new(SQRT_HALF * f64::from(self.sign), 0.0);
        c
    }
}

impl fmt::Display for PauliSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.sign > 0 { '+' } else { '-' };
        write!(f, "{sign}{}", self.axis.symbol().to_ascii_lowercase())
    }
}

impl FromStr for PauliSpec {
    type Err = LmpoError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || LmpoError::InvalidParameter(format!("bad Pauli state {s:?}, expected e.g. +z or -x"));
        let mut chars = t.chars();
        let sign = match chars.next() {
            Some('+') => 1,
            Some('-') => -1,
            _ => return Err(bad()),
        };
        let axis: Pauli = chars.as_str().parse().map_err(|_| bad())?;
        PauliSpec::new(axis, sign).map_err(|_| bad())
    }
}

fn expand(specs: &[PauliSpec], n: usize) -> Result<Vec<PauliSpec>> {
    match specs.len() {
        1 => Ok(vec![specs[0]; n]),
        len if len == n => Ok(specs.to_vec()),
        len => Err(LmpoError::InvalidParameter(format!("{len} Pauli states for {n} qubits"))),
    }
}

/// Product of Pauli eigenstates with qubit `i` at MPS position `i`.
///
/// A single spec applies to every qubit.
pub fn pauli_product(specs: &[PauliSpec], n: usize) -> Result<VectorizedState> {
    if n == 0 {
        return Err(LmpoError::InvalidParameter("at least one qubit is required".into()));
    }
    let specs = expand(specs, n)?;
    Ok(VectorizedState::from_product(&specs.iter().map(|s| s.coefficients()).collect::<Vec<_>>()))
}

/// As [`pauli_product`], laid out along the lattice path.
pub fn pauli_product_on(lattice: &Lattice, specs: &[PauliSpec]) -> Result<VectorizedState> {
    let n = lattice.n_qubits;
    let specs = expand(specs, n)?;
    let by_position: Vec<PauliSpec> = lattice.mpo_path.iter().map(|&q| specs[q]).collect();
    pauli_product(&by_position, n)
}

fn cz_superoperator() -> Vec<C64> {
    let mut u = vec![ZERO; 16];
    for k in 0..4 {
        u[k * 4 + k] = if k == 3 { -ONE } else { ONE };
    }
    two_qubit_conjugation(&u)
}

fn graph_state_at(pairs: &[(usize, usize)], n: usize) -> Result<VectorizedState> {
    let mut seen = std::collections::HashSet::new();
    for &(a, b) in pairs {
        if a >= n || b >= n || a == b {
            return Err(LmpoError::InvalidParameter(format!("graph pair ({a}, {b}) invalid for {n} qubits")));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(LmpoError::InvalidParameter(format!("graph pair ({a}, {b}) listed twice")));
        }
    }
    let plus = PauliSpec::new(Pauli::X, 1)?;
    let mut state = pauli_product(&[plus], n)?;
    let cz = cz_superoperator();
    for &(a, b) in pairs {
        let gate = Gate::Two { first: a.min(b), second: a.max(b), matrix: cz.clone() };
        let op = OperatorMPO::from_gates(n, &[gate])?;
        apply_mpo_in_place(&op, &mut state, 0.0, usize::MAX)?;
    }
    // Sweeps leave round-off in the imaginary parts; the exact state is real.
    let tensors = state.tensors().to_vec();
    let center = state.ortho_center();
    let mut real = VectorizedState::new(
        tensors
            .into_iter()
            .map(|mut t| {
                t.data.iter_mut().for_each(|z| z.im = 0.0);
                t
            })
            .collect(),
    )?;
    if let Some(c) = center {
        real.move_center(c);
    }
    Ok(real)
}

/// Graph state `Π CZ_ab |+x⟩^{⊗n}` as a density matrix, qubit `i` at position `i`.
///
/// A repeated pair is an error rather than a cancelled gate.
pub fn graph_state(pairs: &[(usize, usize)], n: usize) -> Result<VectorizedState> {
    graph_state_at(pairs, n)
}

/// As [`graph_state`], laid out along the lattice path.
pub fn graph_state_on(lattice: &Lattice, pairs: &[(usize, usize)]) -> Result<VectorizedState> {
    let n = lattice.n_qubits;
    for &(a, b) in pairs {
        if a >= n || b >= n {
            return Err(LmpoError::InvalidParameter(format!("graph pair ({a}, {b}) invalid for {n} qubits")));
        }
    }
    let mapped: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (lattice.position(a), lattice.position(b))).collect();
    graph_state_at(&mapped, n)
}

/// Write `state` to `path` in the binary state format.
pub fn save_state(state: &VectorizedState, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_state(state, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Read a state file, checking the qubit count when `expected_len` is given.
pub fn load_state(path: &Path, expected_len: Option<usize>) -> Result<VectorizedState> {
    read_state(BufReader::new(File::open(path)?), expected_len)
}

/// State file name for an output prefix.
pub fn state_path(prefix: &str) -> std::path::PathBuf {
    std::path::PathBuf::from(format!("{prefix}.state.lmpo"))
}
