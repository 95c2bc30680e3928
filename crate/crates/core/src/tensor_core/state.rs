use crate::error::{LmpoError, Result};
use crate::linalg::{self, C64, ONE, ZERO};

use super::site::{SiteTensor, PHYS};

/// Schmidt data for one bond of a vectorized state.
#[derive(Debug, Clone, PartialEq)]
pub struct BondSpectrum {
    pub bond: usize,
    pub singular_values: Vec<f64>,
    pub discarded_weight: f64,
}

/// A density matrix stored as an open-boundary MPS over Pauli-basis sites.
///
/// Local basis is {I, X, Y, Z}/√2, so `tr ρ = 2^{N/2}·c(I…I)` and
/// `inner(a, b) = tr(a† b)`. Position `k` of the chain is the `k`-th entry
/// of the lattice path, not necessarily qubit `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedState {
    tensors: Vec<SiteTensor>,
    ortho_center: Option<usize>,
}

impl VectorizedState {
    pub fn new(tensors: Vec<SiteTensor>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(LmpoError::Structure("a state needs at least one site".into()));
        }
        if tensors[0].left != 1 || tensors[tensors.len() - 1].right != 1 {
            return Err(LmpoError::Structure("boundary bond dimensions must be 1".into()));
        }
        for (k, w) in tensors.windows(2).enumerate() {
            if w[0].right != w[1].left {
                return Err(LmpoError::Structure(format!(
                    "bond {k}: right dimension {} does not match left dimension {}",
                    w[0].right, w[1].left
                )));
            }
        }
        for (k, t) in tensors.iter().enumerate() {
            if t.data.len() != t.left * PHYS * t.right {
                return Err(LmpoError::Structure(format!("site {k}: buffer size does not match its shape")));
            }
        }
        let tensors = tensors
            .into_iter()
            .enumerate()
            .map(|(k, mut t)| {
                t.site = k;
                t
            })
            .collect();
        Ok(VectorizedState { tensors, ortho_center: None })
    }

    /// Bond-dimension-1 state from per-position local coefficients.
    pub fn from_product(coeffs: &[[C64; 4]]) -> Self {
        assert!(!coeffs.is_empty(), "a state needs at least one site");
        let tensors = coeffs.iter().enumerate().map(|(k, c)| SiteTensor::product(k, *c)).collect();
        VectorizedState { tensors, ortho_center: None }
    }

    /// Exact MPS of a full coefficient vector of length 4^n (position 0 most significant).
    pub fn from_dense(n: usize, coeffs: &[C64]) -> Result<Self> {
        if coeffs.len() != PHYS.pow(n as u32) || n == 0 {
            return Err(LmpoError::Structure(format!("expected 4^{n} coefficients, got {}", coeffs.len())));
        }
        let mut state = VectorizedState::from_product(&vec![[ONE, ZERO, ZERO, ZERO]; n]);
        state.ortho_center = Some(0);
        state.place_block(0, n, 1, 1, coeffs.to_vec(), 0.0, usize::MAX, true)?;
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensors(&self) -> &[SiteTensor] {
        &self.tensors
    }

    pub fn tensor(&self, k: usize) -> &SiteTensor {
        &self.tensors[k]
    }

    pub fn ortho_center(&self) -> Option<usize> {
        self.ortho_center
    }

    /// Bond dimensions between consecutive positions (length N−1).
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.right).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Multiply every coefficient by `c` (applied to a single tensor).
    pub fn scale(&mut self, c: C64) {
        let k = self.ortho_center.unwrap_or(0);
        self.tensors[k].data.iter_mut().for_each(|x| *x *= c);
    }

    /// Elementwise complex conjugate of all coefficients.
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for t in &mut out.tensors {
            t.data.iter_mut().for_each(|x| *x = x.conj());
        }
        out
    }

    /// Exact sum of two states as a direct-sum MPS (bond dimensions add).
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(LmpoError::Structure(format!(
                "cannot add states of lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        let n = self.len();
        if n == 1 {
            let data = self.tensors[0].data.iter().zip(&other.tensors[0].data).map(|(a, b)| a + b).collect();
            return VectorizedState::new(vec![SiteTensor::new(0, 1, 1, data)?]);
        }
        let mut tensors = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b) = (&self.tensors[k], &other.tensors[k]);
            let left = if k == 0 { 1 } else { a.left + b.left };
            let right = if k == n - 1 { 1 } else { a.right + b.right };
            let mut t = SiteTensor::zeros(k, left, right);
            let (bl_off, br_off) = (if k == 0 { 0 } else { a.left }, if k == n - 1 { 0 } else { a.right });
            for p in 0..PHYS {
                for l in 0..a.left {
                    for r in 0..a.right {
                        let i = t.idx(l, p, r);
                        t.data[i] += a.get(l, p, r);
                    }
                }
                for l in 0..b.left {
                    for r in 0..b.right {
                        let i = t.idx(l + bl_off, p, r + br_off);
                        t.data[i] += b.get(l, p, r);
                    }
                }
            }
            tensors.push(t);
        }
        VectorizedState::new(tensors)
    }

    /// Full coefficient vector (length 4^N, position 0 most significant).
    pub fn to_dense(&self) -> Vec<C64> {
        let mut acc = self.tensors[0].data.clone();
        let mut rows = PHYS;
        for t in &self.tensors[1..] {
            acc = linalg::matmul(rows, t.left, PHYS * t.right, &acc, &t.data);
            rows *= PHYS;
        }
        acc
    }

    /// Orthogonality-center move by QR sweeps; a no-op when already there.
    pub fn move_center(&mut self, target: usize) {
        assert!(target < self.len(), "center {target} out of range");
        match self.ortho_center {
            None => {
                for k in 0..target {
                    self.left_orthonormalize(k);
                }
                for k in (target + 1..self.len()).rev() {
                    self.right_orthonormalize(k);
                }
            }
            Some(c) if c < target => {
                for k in c..target {
                    self.left_orthonormalize(k);
                }
            }
            Some(c) => {
                for k in (target + 1..=c).rev() {
                    self.right_orthonormalize(k);
                }
            }
        }
        self.ortho_center = Some(target);
    }

    fn left_orthonormalize(&mut self, k: usize) {
        let t = &self.tensors[k];
        let (m, n) = (t.left * PHYS, t.right);
        let (q, r, kq) = linalg::qr(m, n, &t.data);
        let left = t.left;
        self.tensors[k] = SiteTensor { site: k, left, right: kq, data: q };
        let next = &self.tensors[k + 1];
        let data = linalg::matmul(kq, n, PHYS * next.right, &r, &next.data);
        let right = next.right;
        self.tensors[k + 1] = SiteTensor { site: k + 1, left: kq, right, data };
    }

    fn right_orthonormalize(&mut self, k: usize) {
        let t = &self.tensors[k];
        let (m, n) = (t.left, PHYS * t.right);
        let (l, q, kq) = linalg::lq(m, n, &t.data);
        let right = t.right;
        self.tensors[k] = SiteTensor { site: k, left: kq, right, data: q };
        let prev = &self.tensors[k - 1];
        let data = linalg::matmul(prev.left * PHYS, m, kq, &prev.data, &l);
        let left = prev.left;
        self.tensors[k - 1] = SiteTensor { site: k - 1, left, right: kq, data };
    }

    /// Contract positions `a..a+len` into one (left, 4^len, right) buffer.
    pub(crate) fn contract_block(&self, a: usize, len: usize) -> (usize, usize, Vec<C64>) {
        let first = &self.tensors[a];
        let mut acc = first.data.clone();
        let mut rows = first.left * PHYS;
        for t in &self.tensors[a + 1..a + len] {
            acc = linalg::matmul(rows, t.left, PHYS * t.right, &acc, &t.data);
            rows *= PHYS;
        }
        (first.left, self.tensors[a + len - 1].right, acc)
    }

    /// Split a (dl, 4^len, dr) block back into `len` tensors with truncated SVDs.
    ///
    /// The center must already lie inside the block. Left-to-right splitting
    /// leaves the center on the last position, right-to-left on the first.
    /// Returns the largest discarded weight.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn place_block(
        &mut self,
        a: usize,
        len: usize,
        dl: usize,
        dr: usize,
        theta: Vec<C64>,
        cutoff: f64,
        max_dim: usize,
        left_to_right: bool,
    ) -> Result<f64> {
        let mut worst: f64 = 0.0;
        if left_to_right {
            let mut rem = theta;
            let mut cur_left = dl;
            for s in 0..len - 1 {
                let rows = cur_left * PHYS;
                let cols = PHYS.pow((len - 1 - s) as u32) * dr;
                let (d, w) = linalg::truncated_svd(rows, cols, &rem, cutoff, max_dim)?;
                let k = d.k;
                worst = worst.max(w);
                let mut u = Vec::with_capacity(rows * k);
                for i in 0..rows {
                    u.extend_from_slice(&d.u[i * d.k..i * d.k + k]);
                }
                self.tensors[a + s] = SiteTensor { site: a + s, left: cur_left, right: k, data: u };
                let mut next = Vec::with_capacity(k * cols);
                for j in 0..k {
                    next.extend(d.vh[j * cols..(j + 1) * cols].iter().map(|x| x * d.s[j]));
                }
                rem = next;
                cur_left = k;
            }
            self.tensors[a + len - 1] = SiteTensor { site: a + len - 1, left: cur_left, right: dr, data: rem };
            self.ortho_center = Some(a + len - 1);
        } else {
            let mut rem = theta;
            let mut cur_right = dr;
            for s in (1..len).rev() {
                let rows = dl * PHYS.pow(s as u32);
                let cols = PHYS * cur_right;
                let (d, w) = linalg::truncated_svd(rows, cols, &rem, cutoff, max_dim)?;
                let k = d.k;
                worst = worst.max(w);
                self.tensors[a + s] =
                    SiteTensor { site: a + s, left: k, right: cur_right, data: d.vh[..k * cols].to_vec() };
                let mut next = Vec::with_capacity(rows * k);
                for i in 0..rows {
                    next.extend((0..k).map(|j| d.u[i * d.k + j] * d.s[j]));
                }
                rem = next;
                cur_right = k;
            }
            self.tensors[a] = SiteTensor { site: a, left: dl, right: cur_right, data: rem };
            self.ortho_center = Some(a);
        }
        Ok(worst)
    }

    pub(crate) fn set_tensors(&mut self, tensors: Vec<SiteTensor>, center: Option<usize>) {
        self.tensors = tensors;
        self.ortho_center = center;
    }

    /// Truncate every bond with a right-to-left SVD sweep; the center ends at 0.
    pub fn compress(&mut self, cutoff: f64, max_dim: usize) -> Result<f64> {
        let n = self.len();
        self.move_center(n - 1);
        let mut worst: f64 = 0.0;
        for k in (1..n).rev() {
            let t = &self.tensors[k];
            let (rows, cols) = (t.left, PHYS * t.right);
            let (d, w) = linalg::truncated_svd(rows, cols, &t.data, cutoff, max_dim)?;
            let r = d.k;
            worst = worst.max(w);
            let right = t.right;
            self.tensors[k] = SiteTensor { site: k, left: r, right, data: d.vh[..r * cols].to_vec() };
            let mut us = Vec::with_capacity(rows * r);
            for i in 0..rows {
                us.extend((0..r).map(|j| d.u[i * d.k + j] * d.s[j]));
            }
            let prev = &self.tensors[k - 1];
            let data = linalg::matmul(prev.left * PHYS, rows, r, &prev.data, &us);
            let left = prev.left;
            self.tensors[k - 1] = SiteTensor { site: k - 1, left, right: r, data };
            self.ortho_center = Some(k - 1);
        }
        Ok(worst)
    }

    /// Same coefficients, gauge-fixed so only the center tensor is non-isometric.
    pub fn canonicalized(&self, center: usize) -> Result<Self> {
        canonicalize(self, center)
    }

    fn check_bond(&self, bond: usize) -> Result<()> {
        if bond + 1 >= self.len() {
            return Err(LmpoError::Structure(format!("bond {bond} out of range for {} sites", self.len())));
        }
        Ok(())
    }

    /// In-place form of [`truncate_bond`].
    pub fn truncate_bond_in_place(&mut self, bond: usize, cutoff: f64, max_dim: usize) -> Result<BondSpectrum> {
        self.check_bond(bond)?;
        self.move_center(bond);
        let t = &self.tensors[bond];
        let (rows, cols) = (t.left * PHYS, t.right);
        let full = linalg::svd(rows, cols, &t.data)?;
        let (k, w) = linalg::choose_rank(&full.s, cutoff, max_dim);
        let d = full.truncated(rows, cols, k);
        let mut u = Vec::with_capacity(rows * k);
        for i in 0..rows {
            u.extend_from_slice(&d.u[i * d.k..i * d.k + k]);
        }
        let left = t.left;
        self.tensors[bond] = SiteTensor { site: bond, left, right: k, data: u };
        let mut svh = Vec::with_capacity(k * cols);
        for j in 0..k {
            svh.extend(d.vh[j * cols..(j + 1) * cols].iter().map(|x| x * d.s[j]));
        }
        let next = &self.tensors[bond + 1];
        let data = linalg::matmul(k, cols, PHYS * next.right, &svh, &next.data);
        let right = next.right;
        self.tensors[bond + 1] = SiteTensor { site: bond + 1, left: k, right, data };
        self.ortho_center = Some(bond + 1);
        Ok(BondSpectrum { bond, singular_values: full.s, discarded_weight: w })
    }
}

/// Copy of `state` with its orthogonality center at `center`.
pub fn canonicalize(state: &VectorizedState, center: usize) -> Result<VectorizedState> {
    if center >= state.len() {
        return Err(LmpoError::Structure(format!("center {center} out of range for {} sites", state.len())));
    }
    let mut out = state.clone();
    out.move_center(center);
    Ok(out)
}

/// Truncate one bond to the tighter of the Schmidt-weight cutoff and `max_dim`.
pub fn truncate_bond(
    state: &VectorizedState,
    bond: usize,
    cutoff: f64,
    max_dim: usize,
) -> Result<(VectorizedState, BondSpectrum)> {
    let mut out = state.clone();
    let spec = out.truncate_bond_in_place(bond, cutoff, max_dim)?;
    Ok((out, spec))
}

/// ⟨⟨a|b⟩⟩ = tr(a† b).
pub fn inner(a: &VectorizedState, b: &VectorizedState) -> Result<C64> {
    if a.len() != b.len() {
        return Err(LmpoError::Structure(format!("inner product of lengths {} and {}", a.len(), b.len())));
    }
    // env is (left bond of a) × (left bond of b)
    let mut env = vec![ONE];
    let (mut da, mut db) = (1, 1);
    for (ta, tb) in a.tensors().iter().zip(b.tensors()) {
        let t = linalg::matmul(da, db, PHYS * tb.right, &env, &tb.data);
        let ah = linalg::adjoint(da * PHYS, ta.right, &ta.data);
        env = linalg::matmul(ta.right, da * PHYS, tb.right, &ah, &t);
        da = ta.right;
        db = tb.right;
    }
    Ok(env[0])
}

/// Schmidt values of the unit-normalized |ρ⟩⟩ across `bond`.
pub fn schmidt_spectrum(state: &VectorizedState, bond: usize) -> Result<BondSpectrum> {
    state.check_bond(bond)?;
    let mut work = state.clone();
    work.move_center(bond);
    let t = work.tensor(bond);
    let mut s = linalg::svd(t.left * PHYS, t.right, &t.data)?.s;
    let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        s.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(BondSpectrum { bond, singular_values: s, discarded_weight: 0.0 })
}
