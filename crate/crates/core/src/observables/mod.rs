//! Expectation values, correlations and global diagnostics of vectorized states.
//!
//! Indices here are MPS positions. [`TrajectoryRecord`] works with qubit
//! labels and maps them through the lattice path.

mod record;

pub use record::{Global, ObservableRequest, Series, TrajectoryRecord};

use crate::error::{LmpoError, Result};
use crate::linalg::{self, C64, ONE, ZERO};
use crate::pauli::Pauli;
use crate::tensor_core::{inner, schmidt_spectrum, SiteTensor, VectorizedState};

/// Identity-traced partial contractions from both ends of a state.
///
/// `left[k]` covers positions `0..k`, `right[k]` covers `k+1..N`, so a Pauli
/// string value is a product of slices sandwiched between them.
#[derive(Debug, Clone)]
pub struct Environments<'a> {
    state: &'a VectorizedState,
    left: Vec<Vec<C64>>,
    right: Vec<Vec<C64>>,
    scale: f64,
}

fn row_times_slice(v: &[C64], t: &SiteTensor, p: usize) -> Vec<C64> {
    let mut out = vec![ZERO; t.right];
    for (l, &x) in v.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        let row = &t.data[t.idx(l, p, 0)..t.idx(l, p, 0) + t.right];
        for (o, y) in out.iter_mut().zip(row) {
            *o += x * y;
        }
    }
    out
}

fn slice_times_col(t: &SiteTensor, p: usize, v: &[C64]) -> Vec<C64> {
    (0..t.left)
        .map(|l| {
            let row = &t.data[t.idx(l, p, 0)..t.idx(l, p, 0) + t.right];
            row.iter().zip(v).map(|(a, b)| a * b).sum()
        })
        .collect()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl<'a> Environments<'a> {
    pub fn new(state: &'a VectorizedState) -> Self {
        let n = state.len();
        let mut left = Vec::with_capacity(n);
        left.push(vec![ONE]);
        for k in 0..n - 1 {
            let next = row_times_slice(&left[k], state.tensor(k), 0);
            left.push(next);
        }
        let mut right = vec![Vec::new(); n];
        right[n - 1] = vec![ONE];
        for k in (1..n).rev() {
            right[k - 1] = slice_times_col(state.tensor(k), 0, &right[k]);
        }
        Environments { state, left, right, scale: 2f64.powf(n as f64 / 2.0) }
    }

    pub fn trace(&self) -> C64 {
        self.one(0, Pauli::I)
    }

    /// tr(ρ σ) for one Pauli at position `i`.
    pub fn one(&self, i: usize, axis: Pauli) -> C64 {
        let v = row_times_slice(&self.left[i], self.state.tensor(i), axis.index());
        dot(&v, &self.right[i]) * self.scale
    }

    /// tr(ρ σ_a σ_b) at positions `i < j`.
    pub fn two(&self, i: usize, j: usize, a: Pauli, b: Pauli) -> C64 {
        let (i, j, a, b) = if i < j { (i, j, a, b) } else { (j, i, b, a) };
        let mut v = row_times_slice(&self.left[i], self.state.tensor(i), a.index());
        for k in i + 1..j {
            v = row_times_slice(&v, self.state.tensor(k), 0);
        }
        let v = row_times_slice(&v, self.state.tensor(j), b.index());
        dot(&v, &self.right[j]) * self.scale
    }

    /// Values of σ_a at `i` with each (position, axis) target, all targets
    /// after `i`, in a single left-to-right sweep.
    pub fn two_many(&self, i: usize, a: Pauli, targets: &[(usize, Pauli)]) -> Vec<C64> {
        let mut order: Vec<usize> = (0..targets.len()).collect();
        order.sort_by_key(|&k| targets[k].0);
        let mut out = vec![ZERO; targets.len()];
        let mut v = row_times_slice(&self.left[i], self.state.tensor(i), a.index());
        let mut at = i + 1;
        for k in order {
            let (j, b) = targets[k];
            assert!(j > i, "targets must follow position {i}");
            while at < j {
                v = row_times_slice(&v, self.state.tensor(at), 0);
                at += 1;
            }
            out[k] = dot(&row_times_slice(&v, self.state.tensor(j), b.index()), &self.right[j]) * self.scale;
        }
        out
    }
}

fn check_position(state: &VectorizedState, i: usize) -> Result<()> {
    if i >= state.len() {
        return Err(LmpoError::InvalidParameter(format!("position {i} out of range for {} sites", state.len())));
    }
    Ok(())
}

/// tr(ρ σ^a_i) including its imaginary residue.
pub fn expect_1q_complex(state: &VectorizedState, i: usize, axis: Pauli) -> Result<C64> {
    check_position(state, i)?;
    Ok(Environments::new(state).one(i, axis))
}

/// tr(ρ σ^a_i).
pub fn expect_1q(state: &VectorizedState, i: usize, axis: Pauli) -> Result<f64> {
    Ok(expect_1q_complex(state, i, axis)?.re)
}

/// tr(ρ σ^a_i σ^b_j) including its imaginary residue.
pub fn expect_2q_complex(state: &VectorizedState, i: usize, j: usize, a: Pauli, b: Pauli) -> Result<C64> {
    check_position(state, i)?;
    check_position(state, j)?;
    if i == j {
        return Err(LmpoError::InvalidParameter("two-point observable needs distinct positions".into()));
    }
    Ok(Environments::new(state).two(i, j, a, b))
}

/// tr(ρ σ^a_i σ^b_j).
pub fn expect_2q(state: &VectorizedState, i: usize, j: usize, a: Pauli, b: Pauli) -> Result<f64> {
    Ok(expect_2q_complex(state, i, j, a, b)?.re)
}

/// ⟨σ^a_i σ^b_j⟩ − ⟨σ^a_i⟩⟨σ^b_j⟩.
pub fn connected_corr(state: &VectorizedState, i: usize, j: usize, a: Pauli, b: Pauli) -> Result<f64> {
    Ok(expect_2q(state, i, j, a, b)? - expect_1q(state, i, a)? * expect_1q(state, j, b)?)
}

pub fn trace_rho(state: &VectorizedState) -> f64 {
    Environments::new(state).trace().re
}

/// −ln tr ρ², with ρ taken at unit trace.
pub fn renyi2(state: &VectorizedState) -> Result<f64> {
    let tr = Environments::new(state).trace();
    if tr.norm() < 1e-300 {
        return Err(LmpoError::Degenerate("trace vanishes".into()));
    }
    let purity = inner(state, state)?.re / tr.norm_sqr();
    Ok(-purity.ln())
}

/// Operator-space entanglement entropy across `bond` (between positions
/// `bond` and `bond + 1`).
pub fn osee(state: &VectorizedState, bond: usize) -> Result<f64> {
    let spec = schmidt_spectrum(state, bond)?;
    Ok(spec
        .singular_values
        .iter()
        .map(|s| s * s)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum())
}

/// The bond at the middle of the chain, ⌊N/2⌋ − 1; `None` for a single site.
pub fn center_bond(n: usize) -> Option<usize> {
    (n >= 2).then(|| n / 2 - 1)
}

/// OSEE at [`center_bond`]; zero for a single site.
pub fn osee_center(state: &VectorizedState) -> Result<f64> {
    match center_bond(state.len()) {
        Some(b) => osee(state, b),
        None => Ok(0.0),
    }
}

/// 4×4 reduced density matrix of positions `i` and `j`, `i` on the high bit,
/// scaled to unit trace.
pub fn reduced_dm_2q(state: &VectorizedState, i: usize, j: usize) -> Result<[C64; 16]> {
    check_position(state, i)?;
    check_position(state, j)?;
    if i == j {
        return Err(LmpoError::InvalidParameter("reduced density matrix needs distinct positions".into()));
    }
    let env = Environments::new(state);
    let tr = env.trace();
    if tr.norm() < 1e-12 {
        return Err(LmpoError::Degenerate("trace vanishes".into()));
    }
    let mut out = [ZERO; 16];
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let value = match (a, b) {
                (Pauli::I, Pauli::I) => tr,
                (a, Pauli::I) => env.one(i, a),
                (Pauli::I, b) => env.one(j, b),
                (a, b) => env.two(i, j, a, b),
            } / tr;
            let m = crate::pauli::kron(2, &a.matrix(), 2, &b.matrix());
            for (o, x) in out.iter_mut().zip(&m) {
                *o += value * x * 0.25;
            }
        }
    }
    Ok(out)
}

/// Wootters concurrence of a two-qubit density matrix.
///
/// Eigenvalues of ρ(Y⊗Y)ρ*(Y⊗Y) below −1e−9 are rejected; smaller negative
/// values from truncation are clipped to zero.
pub fn concurrence(rho2: &[C64; 16]) -> Result<f64> {
    let yy = crate::pauli::kron(2, &Pauli::Y.matrix(), 2, &Pauli::Y.matrix());
    let conj: Vec<C64> = rho2.iter().map(|z| z.conj()).collect();
    let flipped = linalg::matmul(4, 4, 4, &linalg::matmul(4, 4, 4, &yy, &conj), &yy);
    let r = linalg::matmul(4, 4, 4, rho2, &flipped);
    let mut lambda = Vec::with_capacity(4);
    for ev in linalg::eigenvalues(4, &r)? {
        if ev.re < -1e-9 {
            return Err(LmpoError::Numerical(format!("spin-flip product has eigenvalue {ev}")));
        }
        lambda.push(ev.re.max(0.0).sqrt());
    }
    lambda.sort_by(|a, b| b.total_cmp(a));
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0))
}

/// True when every Pauli coefficient is real to within `tol`, relative to the norm.
pub fn is_hermitian(state: &VectorizedState, tol: f64) -> bool {
    let scale = inner(state, state).map(|z| z.re.sqrt()).unwrap_or(0.0);
    let conj = state.conj();
    match inner(&conj, state) {
        // ⟨⟨ψ̄|ψ⟩⟩ = Σ c², equal to Σ|c|² exactly when all c are real
        Ok(z) => (z - C64::new(scale * scale, 0.0)).norm() <= tol * scale * scale.max(1e-300),
        Err(_) => false,
    }
}
