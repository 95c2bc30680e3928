use crate::error::{LmpoError, Result};
use crate::linalg::{C64, ONE, ZERO};
use crate::model::{Lattice, ModelParams};
use crate::pauli::{Pauli, SQRT_HALF};

/// Largest qubit count the dense engine accepts (ρ is 2^N × 2^N).
pub const MAX_DENSE_QUBITS: usize = 10;

/// A full density matrix, row-major, qubit 0 on the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub n: usize,
    pub rho: Vec<C64>,
}

fn bit(q: usize, n: usize) -> usize {
    1 << (n - 1 - q)
}

/// Action of a Pauli string on a basis state: P|s⟩ = phase(s)·|s ⊕ flip⟩.
#[derive(Debug, Clone, Copy)]
struct PauliString {
    flip: usize,
    zmask: usize,
    base_phase: C64,
}

impl PauliString {
    fn new(n: usize, ops: &[(usize, Pauli)]) -> Self {
        let (mut flip, mut zmask, mut ny) = (0, 0, 0);
        for &(q, p) in ops {
            let b = bit(q, n);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= b,
                Pauli::Y => {
                    flip |= b;
                    zmask |= b;
                    ny += 1;
                }
                Pauli::Z => zmask |= b,
            }
        }
        let base_phase = [ONE, C64::new(0.0, 1.0), -ONE, C64::new(0.0, -1.0)][ny % 4];
        PauliString { flip, zmask, base_phase }
    }

    #[inline]
    fn phase(&self, s: usize) -> C64 {
        if (s & self.zmask).count_ones() % 2 == 1 {
            -self.base_phase
        } else {
            self.base_phase
        }
    }
}

impl DenseState {
    pub fn zeros(n: usize) -> Result<Self> {
        guard(n)?;
        let d = 1 << n;
        Ok(DenseState { n, rho: vec![ZERO; d * d] })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// |ψ⟩⟨ψ| from a state vector of length 2^n.
    pub fn from_statevector(n: usize, psi: &[C64]) -> Result<Self> {
        let mut s = DenseState::zeros(n)?;
        let d = s.dim();
        if psi.len() != d {
            return Err(LmpoError::Structure(format!("state vector of length {} for {n} qubits", psi.len())));
        }
        for r in 0..d {
            for c in 0..d {
                s.rho[r * d + c] = psi[r] * psi[c].conj();
            }
        }
        Ok(s)
    }

    /// Tensor product of single-qubit Pauli eigenstates (axis, sign).
    pub fn pauli_product(specs: &[(Pauli, i8)]) -> Result<Self> {
        let n = specs.len();
        let mut s = DenseState::zeros(n)?;
        let d = s.dim();
        s.rho = vec![ONE];
        let mut cur = 1;
        for &(axis, sign) in specs {
            let m = axis.matrix();
            let one: [C64; 4] = std::array::from_fn(|k| {
                let id = if k == 0 || k == 3 { ONE } else { ZERO };
                (id + m[k] * f64::from(sign)) * 0.5
            });
            s.rho = crate::pauli::kron(cur, &s.rho, 2, &one);
            cur *= 2;
        }
        debug_assert_eq!(cur, d);
        Ok(s)
    }

    /// Graph state Π CZ |+⟩^{⊗n}, built on the state vector.
    pub fn graph_state(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        guard(n)?;
        let d = 1usize << n;
        let amp = (d as f64).sqrt().recip();
        let psi: Vec<C64> = (0..d)
            .map(|s| {
                let odd = pairs
                    .iter()
                    .filter(|&&(a, b)| s & bit(a, n) != 0 && s & bit(b, n) != 0)
                    .count()
                    % 2
                    == 1;
                C64::new(if odd { -amp } else { amp }, 0.0)
            })
            .collect();
        DenseState::from_statevector(n, &psi)
    }

    /// Density matrix from Pauli-basis coefficients (length 4^n, qubit 0 most significant).
    pub fn from_pauli_coeffs(n: usize, coeffs: &[C64]) -> Result<Self> {
        guard(n)?;
        if coeffs.len() != 1 << (2 * n) {
            return Err(LmpoError::Structure(format!("expected 4^{n} coefficients")));
        }
        let mut v = coeffs.to_vec();
        transform_sites(n, &mut v, &pauli_to_matrix_units());
        let d = 1 << n;
        let mut rho = vec![ZERO; d * d];
        for (idx, z) in v.iter().enumerate() {
            let (r, c) = deinterleave(n, idx);
            rho[r * d + c] = *z;
        }
        Ok(DenseState { n, rho })
    }

    /// Inverse of [`DenseState::from_pauli_coeffs`].
    pub fn to_pauli_coeffs(&self) -> Vec<C64> {
        let n = self.n;
        let d = self.dim();
        let mut v = vec![ZERO; d * d];
        for (idx, z) in v.iter_mut().enumerate() {
            let (r, c) = deinterleave(n, idx);
            *z = self.rho[r * d + c];
        }
        let t = pauli_to_matrix_units();
        let mut inv = [ZERO; 16];
        for a in 0..4 {
            for b in 0..4 {
                inv[a * 4 + b] = t[b * 4 + a].conj();
            }
        }
        transform_sites(n, &mut v, &inv);
        v
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|i| self.rho[i * d + i]).sum()
    }

    /// tr ρ².
    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut acc = ZERO;
        for r in 0..d {
            for c in 0..d {
                acc += self.rho[r * d + c] * self.rho[c * d + r];
            }
        }
        acc.re
    }

    /// tr(ρ P) for a Pauli string given as (qubit, axis) pairs.
    pub fn expect(&self, ops: &[(usize, Pauli)]) -> C64 {
        let p = PauliString::new(self.n, ops);
        let d = self.dim();
        (0..d).map(|s| self.rho[s * d + (s ^ p.flip)] * p.phase(s)).sum()
    }

    /// Two-qubit reduced density matrix, qubit `i` on the high bit.
    pub fn reduced_2q(&self, i: usize, j: usize) -> [C64; 16] {
        let (n, d) = (self.n, self.dim());
        let (bi, bj) = (bit(i, n), bit(j, n));
        let mut out = [ZERO; 16];
        for s in 0..d {
            if s & (bi | bj) != 0 {
                continue;
            }
            for a in 0..4usize {
                for b in 0..4usize {
                    let ra = s | if a & 2 != 0 { bi } else { 0 } | if a & 1 != 0 { bj } else { 0 };
                    let rb = s | if b & 2 != 0 { bi } else { 0 } | if b & 1 != 0 { bj } else { 0 };
                    out[a * 4 + b] += self.rho[ra * d + rb];
                }
            }
        }
        out
    }

    /// Largest |ρ − ρ†| entry.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..r + 1 {
                worst = worst.max((self.rho[r * d + c] - self.rho[c * d + r].conj()).norm());
            }
        }
        worst
    }
}

pub(crate) fn guard(n: usize) -> Result<()> {
    if n == 0 {
        return Err(LmpoError::InvalidParameter("at least one qubit is required".into()));
    }
    if n > MAX_DENSE_QUBITS {
        return Err(LmpoError::ResourceGuard(format!(
            "the dense oracle is limited to {MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// T[(s s'), a] = (σ_a)_{s s'}/√2.
fn pauli_to_matrix_units() -> [C64; 16] {
    let mut t = [ZERO; 16];
    for a in Pauli::ALL {
        let m = a.matrix();
        for k in 0..4 {
            t[k * 4 + a.index()] = m[k] * SQRT_HALF;
        }
    }
    t
}

/// Apply a 4×4 matrix along every base-4 digit of a 4^n vector.
fn transform_sites(n: usize, v: &mut [C64], m: &[C64; 16]) {
    for site in 0..n {
        let stride = 1 << (2 * (n - 1 - site));
        let block = stride * 4;
        for base in (0..v.len()).step_by(block) {
            for off in 0..stride {
                let idx = |k: usize| base + k * stride + off;
                let x = [v[idx(0)], v[idx(1)], v[idx(2)], v[idx(3)]];
                for r in 0..4 {
                    v[idx(r)] = (0..4).map(|c| m[r * 4 + c] * x[c]).sum();
                }
            }
        }
    }
}

/// Interleaved digit (s_0 s'_0 s_1 s'_1 …) → (row, col).
fn deinterleave(n: usize, idx: usize) -> (usize, usize) {
    let (mut r, mut c) = (0, 0);
    for site in 0..n {
        let digit = (idx >> (2 * (n - 1 - site))) & 3;
        r = (r << 1) | (digit >> 1);
        c = (c << 1) | (digit & 1);
    }
    (r, c)
}

/// Reorder a Pauli coefficient vector from MPS position order to qubit order.
pub fn positions_to_qubits(path: &[usize], coeffs: &[C64]) -> Vec<C64> {
    let n = path.len();
    let mut out = vec![ZERO; coeffs.len()];
    for (idx, z) in coeffs.iter().enumerate() {
        let mut q_idx = 0;
        for (k, &q) in path.iter().enumerate() {
            let digit = (idx >> (2 * (n - 1 - k))) & 3;
            q_idx |= digit << (2 * (n - 1 - q));
        }
        out[q_idx] = *z;
    }
    out
}

/// Reorder a Pauli coefficient vector from qubit order to MPS position order.
pub fn qubits_to_positions(path: &[usize], coeffs: &[C64]) -> Vec<C64> {
    let n = path.len();
    let mut out = vec![ZERO; coeffs.len()];
    for (idx, z) in coeffs.iter().enumerate() {
        let mut p_idx = 0;
        for (k, &q) in path.iter().enumerate() {
            let digit = (idx >> (2 * (n - 1 - q))) & 3;
            p_idx |= digit << (2 * (n - 1 - k));
        }
        out[p_idx] = *z;
    }
    out
}

/// The Lindbladian of a model on a dense density matrix.
///
/// Diagonal Hamiltonian entries and the no-jump part of the dissipator act
/// elementwise and are evaluated on the fly from per-index tables; the
/// off-diagonal Hamiltonian is a sparse row list.
#[derive(Debug, Clone)]
pub struct DenseGenerator {
    n: usize,
    /// Off-diagonal entries of H by row, as (column, −i·value).
    off: Vec<Vec<(usize, C64)>>,
    /// Real diagonal of H.
    diag: Vec<f64>,
    /// Elementwise decay of ρ_{rc}: single[r] + single[c] + pair[r & c].
    single: Vec<f64>,
    pair: Vec<f64>,
    /// (bit, g₀, g₁) per qubit with a jump term.
    jumps: Vec<(usize, f64, f64)>,
}

impl DenseGenerator {
    pub fn new(params: &ModelParams, lattice: &Lattice) -> Result<Self> {
        let n = lattice.n_qubits;
        guard(n)?;
        let couplings = params.bond_couplings(lattice)?;
        let mut terms: Vec<(f64, Vec<(usize, Pauli)>)> = Vec::new();
        for q in 0..n {
            for (axis, h) in [(Pauli::X, params.h_x[q]), (Pauli::Y, params.h_y[q]), (Pauli::Z, params.h_z[q])] {
                if h != 0.0 {
                    terms.push((0.5 * h, vec![(q, axis)]));
                }
            }
        }
        for c in &couplings {
            for (axis, v) in [(Pauli::X, c.j), (Pauli::Y, c.j), (Pauli::Z, c.j_z)] {
                if v != 0.0 {
                    terms.push((0.5 * v, vec![(c.a, axis), (c.b, axis)]));
                }
            }
        }
        let d = 1usize << n;
        let mut diag = vec![0.0; d];
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); d];
        for (coef, ops) in &terms {
            let p = PauliString::new(n, ops);
            for s in 0..d {
                let v = p.phase(s) * *coef;
                if p.flip == 0 {
                    diag[s] += v.re;
                    continue;
                }
                let r = s ^ p.flip;
                match rows[r].iter_mut().find(|(c, _)| *c == s) {
                    Some(entry) => entry.1 += v,
                    None => rows[r].push((s, v)),
                }
            }
        }
        let minus_i = C64::new(0.0, -1.0);
        for row in &mut rows {
            row.retain(|(_, v)| *v != ZERO);
            row.sort_by_key(|(c, _)| *c);
            row.iter_mut().for_each(|(_, v)| *v *= minus_i);
        }
        // Per qubit the no-jump decay of ρ_{rc} with bits (x, y) is
        // a(x) + a(y) + 4·g₂·x·y, where a(1) = −g₀/2 − 2g₂ and a(0) = −g₁/2.
        let mut single = vec![0.0; d];
        let mut pair = vec![0.0; d];
        let mut jumps = Vec::new();
        for q in 0..n {
            let (g0, g1, g2) = (params.g_0[q], params.g_1[q], params.g_2[q]);
            let b = bit(q, n);
            for (x, (s, p)) in single.iter_mut().zip(pair.iter_mut()).enumerate() {
                if x & b != 0 {
                    *s += -0.5 * g0 - 2.0 * g2;
                    *p += 4.0 * g2;
                } else {
                    *s += -0.5 * g1;
                }
            }
            if g0 != 0.0 || g1 != 0.0 {
                jumps.push((b, g0, g1));
            }
        }
        Ok(DenseGenerator { n, off: rows, diag, single, pair, jumps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Write ρ̇ = L(ρ) into `out`.
    pub fn apply_into(&self, rho: &[C64], out: &mut [C64]) {
        let d = 1usize << self.n;
        for (a, out_row) in out.chunks_exact_mut(d).enumerate() {
            let rho_row = &rho[a * d..(a + 1) * d];
            let (sa, ha) = (self.single[a], self.diag[a]);
            for (c, o) in out_row.iter_mut().enumerate() {
                let decay = sa + self.single[c] + self.pair[a & c];
                // −i[H_diag, ρ] plus the no-jump dissipator, then +i ρ H_off.
                let mut acc = rho_row[c] * C64::new(decay, self.diag[c] - ha);
                for &(r, v) in &self.off[c] {
                    // i(ρH)_{ac} = Σ_r ρ_{ar}·conj(−i H_{cr}).
                    acc += rho_row[r] * v.conj();
                }
                *o = acc;
            }
            // −i H_off ρ, row by row.
            for &(r, w) in &self.off[a] {
                let src = &rho[r * d..(r + 1) * d];
                for (o, x) in out_row.iter_mut().zip(src) {
                    *o += w * x;
                }
            }
            for &(b, g0, g1) in &self.jumps {
                // σ⁻ρσ⁺ fills rows and columns with the bit clear from the
                // set block; the pump term does the reverse.
                let (from, g) = if a & b == 0 { (a | b, g0) } else { (a & !b, g1) };
                if g == 0.0 {
                    continue;
                }
                let src = &rho[from * d..(from + 1) * d];
                for start in (0..d).step_by(2 * b) {
                    let (lo, hi) = (start, start + b);
                    if a & b == 0 {
                        for k in 0..b {
                            out_row[lo + k] += src[hi + k] * g;
                        }
                    } else {
                        for k in 0..b {
                            out_row[hi + k] += src[lo + k] * g;
                        }
                    }
                }
            }
        }
    }

    pub fn apply(&self, rho: &DenseState) -> DenseState {
        let mut out = vec![ZERO; rho.rho.len()];
        self.apply_into(&rho.rho, &mut out);
        DenseState { n: rho.n, rho: out }
    }

    /// The generator as a 4^N × 4^N matrix in the Pauli basis (qubit order),
    /// assembled column by column from basis elements. Limited to N ≤ 5.
    pub fn pauli_superoperator(&self) -> Result<Vec<C64>> {
        if self.n > 5 {
            return Err(LmpoError::ResourceGuard("dense superoperators are limited to 5 qubits".into()));
        }
        let dim = 1usize << (2 * self.n);
        let mut out = vec![ZERO; dim * dim];
        let mut e = vec![ZERO; dim];
        for col in 0..dim {
            e.iter_mut().for_each(|z| *z = ZERO);
            e[col] = ONE;
            let rho = DenseState::from_pauli_coeffs(self.n, &e)?;
            let image = self.apply(&rho).to_pauli_coeffs();
            for row in 0..dim {
                out[row * dim + col] = image[row];
            }
        }
        Ok(out)
    }
}

/// ρ̇ for one density matrix.
pub fn dense_generator_apply(params: &ModelParams, lattice: &Lattice, rho: &DenseState) -> Result<DenseState> {
    Ok(DenseGenerator::new(params, lattice)?.apply(rho))
}
