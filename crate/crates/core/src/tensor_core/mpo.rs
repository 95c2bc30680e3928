use std::sync::OnceLock;

use crate::error::{LmpoError, Result};
use crate::linalg::{self, C64, ONE, ZERO};

use super::site::{SiteTensor, PHYS};
use super::state::VectorizedState;

/// Blocks up to this many sites are applied as one dense operator.
const MAX_DENSE_BLOCK: usize = 3;

/// One MPO tensor, row-major (left, out, in, right).
#[derive(Debug, Clone, PartialEq)]
pub struct OpTensor {
    pub left: usize,
    pub right: usize,
    pub data: Vec<C64>,
}

impl OpTensor {
    pub fn new(left: usize, right: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != left * PHYS * PHYS * right || left == 0 || right == 0 {
            return Err(LmpoError::Structure(format!(
                "operator buffer of {} entries does not fit ({left}, 4, 4, {right})",
                data.len()
            )));
        }
        Ok(OpTensor { left, right, data })
    }

    /// Bond-dimension-1 tensor from a 4×4 (out, in) matrix.
    pub fn local(op: &[C64]) -> Self {
        assert_eq!(op.len(), PHYS * PHYS);
        OpTensor { left: 1, right: 1, data: op.to_vec() }
    }

    pub fn identity() -> Self {
        let mut data = vec![ZERO; PHYS * PHYS];
        for p in 0..PHYS {
            data[p * PHYS + p] = ONE;
        }
        OpTensor { left: 1, right: 1, data }
    }

    #[inline]
    pub fn idx(&self, l: usize, o: usize, i: usize, r: usize) -> usize {
        ((l * PHYS + o) * PHYS + i) * self.right + r
    }

    fn is_identity(&self) -> bool {
        self.left == 1 && self.right == 1 && *self == OpTensor::identity()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Block {
    Dense { start: usize, len: usize, matrix: Vec<C64> },
    Chain { start: usize, len: usize },
}

/// A superoperator on the vectorized chain, as an open-boundary MPO.
#[derive(Debug, Clone)]
pub struct OperatorMPO {
    tensors: Vec<OpTensor>,
    blocks: OnceLock<Vec<Block>>,
}

impl PartialEq for OperatorMPO {
    fn eq(&self, other: &Self) -> bool {
        self.tensors == other.tensors
    }
}

impl OperatorMPO {
    pub fn new(tensors: Vec<OpTensor>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(LmpoError::Structure("an operator needs at least one site".into()));
        }
        if tensors[0].left != 1 || tensors[tensors.len() - 1].right != 1 {
            return Err(LmpoError::Structure("boundary operator bonds must be 1".into()));
        }
        for (k, w) in tensors.windows(2).enumerate() {
            if w[0].right != w[1].left {
                return Err(LmpoError::Structure(format!("operator bond {k}: {} vs {}", w[0].right, w[1].left)));
            }
        }
        Ok(OperatorMPO { tensors, blocks: OnceLock::new() })
    }

    pub fn identity(n: usize) -> Self {
        OperatorMPO { tensors: vec![OpTensor::identity(); n], blocks: OnceLock::new() }
    }

    /// Product of dense operators on disjoint contiguous position ranges.
    ///
    /// Each entry is `(start, len, matrix)` with a 4^len × 4^len (out, in)
    /// matrix, position `start` most significant. Positions not covered act
    /// as the identity.
    pub fn from_blocks(n: usize, blocks: &[(usize, usize, Vec<C64>)]) -> Result<Self> {
        let mut tensors = vec![OpTensor::identity(); n];
        let mut covered = vec![false; n];
        for (start, len, matrix) in blocks {
            let (start, len) = (*start, *len);
            if len == 0 || start + len > n || matrix.len() != PHYS.pow(2 * len as u32) {
                return Err(LmpoError::Structure(format!("block at {start} of length {len} does not fit")));
            }
            if covered[start..start + len].iter().any(|&c| c) {
                return Err(LmpoError::Structure(format!("block at {start} overlaps another block")));
            }
            covered[start..start + len].iter_mut().for_each(|c| *c = true);
            for (k, t) in split_dense_operator(len, matrix).into_iter().enumerate() {
                tensors[start + k] = t;
            }
        }
        OperatorMPO::new(tensors)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensors(&self) -> &[OpTensor] {
        &self.tensors
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.right).collect()
    }

    /// True when every site tensor is exactly the identity.
    pub fn is_identity(&self) -> bool {
        self.tensors.iter().all(OpTensor::is_identity)
    }

    /// Full 4^N × 4^N matrix; only sensible for small N.
    pub fn to_dense(&self) -> Vec<C64> {
        contract_operator(&self.tensors)
    }

    fn blocks(&self) -> &[Block] {
        self.blocks.get_or_init(|| {
            let mut out = Vec::new();
            let mut start = 0;
            for k in 0..self.len() {
                if self.tensors[k].right != 1 {
                    continue;
                }
                let len = k + 1 - start;
                if !(len == 1 && self.tensors[start].is_identity()) {
                    if len <= MAX_DENSE_BLOCK {
                        let matrix = contract_operator(&self.tensors[start..=k]);
                        out.push(Block::Dense { start, len, matrix });
                    } else {
                        out.push(Block::Chain { start, len });
                    }
                }
                start = k + 1;
            }
            out
        })
    }
}

/// A local superoperator acting on one or two MPS positions.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// 4×4 matrix on one position.
    One { position: usize, matrix: Vec<C64> },
    /// 16×16 matrix on (first, second), first most significant, `first < second`.
    Two { first: usize, second: usize, matrix: Vec<C64> },
}

impl Gate {
    fn span(&self) -> (usize, usize) {
        match self {
            Gate::One { position, .. } => (*position, *position),
            Gate::Two { first, second, .. } => (*first, *second),
        }
    }
}

impl OperatorMPO {
    /// Product of gates with pairwise disjoint position spans. Positions
    /// strictly between the ends of a two-site gate carry its operator-Schmidt
    /// channels through an identity.
    pub fn from_gates(n: usize, gates: &[Gate]) -> Result<Self> {
        let mut tensors = vec![OpTensor::identity(); n];
        let mut covered = vec![false; n];
        for g in gates {
            let (a, b) = g.span();
            if b >= n || a > b {
                return Err(LmpoError::Structure(format!("gate span ({a}, {b}) outside 0..{n}")));
            }
            if covered[a..=b].iter().any(|&c| c) {
                return Err(LmpoError::Structure(format!("gate span ({a}, {b}) overlaps another gate")));
            }
            covered[a..=b].iter_mut().for_each(|c| *c = true);
            match g {
                Gate::One { position, matrix } => {
                    if matrix.len() != 16 {
                        return Err(LmpoError::Structure("one-site gates are 4×4".into()));
                    }
                    tensors[*position] = OpTensor::local(matrix);
                }
                Gate::Two { first, second, matrix } => {
                    if matrix.len() != 256 || first == second {
                        return Err(LmpoError::Structure("two-site gates are 16×16 on distinct positions".into()));
                    }
                    let parts = operator_schmidt(matrix);
                    let r = parts.len().max(1);
                    let mut ta = OpTensor { left: 1, right: r, data: vec![ZERO; 16 * r] };
                    let mut tb = OpTensor { left: r, right: 1, data: vec![ZERO; 16 * r] };
                    for (k, (x, y)) in parts.iter().enumerate() {
                        for oi in 0..16 {
                            ta.data[oi * r + k] = x[oi];
                            tb.data[k * 16 + oi] = y[oi];
                        }
                    }
                    tensors[*first] = ta;
                    tensors[*second] = tb;
                    let id = OpTensor::identity().data;
                    for p in first + 1..*second {
                        let mut t = OpTensor { left: r, right: r, data: vec![ZERO; r * 16 * r] };
                        for k in 0..r {
                            for oi in 0..16 {
                                t.data[(k * 16 + oi) * r + k] = id[oi];
                            }
                        }
                        tensors[p] = t;
                    }
                }
            }
        }
        OperatorMPO::new(tensors)
    }
}

/// Split a 16×16 two-site superoperator (first site most significant) into
/// Σ_k A_k ⊗ B_k with 4×4 factors, dropping negligible Schmidt values.
pub fn operator_schmidt(matrix: &[C64]) -> Vec<(Vec<C64>, Vec<C64>)> {
    // rows (o1 i1), cols (o2 i2)
    let mut re = vec![ZERO; 256];
    for o1 in 0..4 {
        for o2 in 0..4 {
            for i1 in 0..4 {
                for i2 in 0..4 {
                    re[(o1 * 4 + i1) * 16 + o2 * 4 + i2] = matrix[(o1 * 4 + o2) * 16 + i1 * 4 + i2];
                }
            }
        }
    }
    let d = linalg::svd(16, 16, &re).expect("svd of a 16x16 matrix");
    let top = d.s.first().copied().unwrap_or(0.0);
    (0..16)
        .filter(|&k| d.s[k] > 0.0 && d.s[k] > 1e-13 * top)
        .map(|k| {
            let a = (0..16).map(|r| d.u[r * 16 + k] * d.s[k]).collect();
            let b = d.vh[k * 16..(k + 1) * 16].to_vec();
            (a, b)
        })
        .collect()
}

/// Contract a run of operator tensors with unit outer bonds into a dense matrix.
fn contract_operator(tensors: &[OpTensor]) -> Vec<C64> {
    // acc[(O, I), w] with O, I the combined out/in indices so far
    let mut acc = vec![ONE];
    let mut dim = 1;
    let mut w = 1;
    for t in tensors {
        let nd = dim * PHYS;
        let mut next = vec![ZERO; nd * nd * t.right];
        for o_hi in 0..dim {
            for i_hi in 0..dim {
                for l in 0..w {
                    let a = acc[(o_hi * dim + i_hi) * w + l];
                    if a == ZERO {
                        continue;
                    }
                    for o in 0..PHYS {
                        for i in 0..PHYS {
                            let row = (o_hi * PHYS + o) * nd + i_hi * PHYS + i;
                            for r in 0..t.right {
                                next[row * t.right + r] += a * t.data[t.idx(l, o, i, r)];
                            }
                        }
                    }
                }
            }
        }
        acc = next;
        dim = nd;
        w = t.right;
    }
    acc
}

/// Operator-Schmidt decomposition of a dense 4^len operator into MPO tensors.
fn split_dense_operator(len: usize, matrix: &[C64]) -> Vec<OpTensor> {
    if len == 1 {
        return vec![OpTensor::local(matrix)];
    }
    let p = PHYS.pow(len as u32);
    // Reorder to interleaved (o1 i1)(o2 i2)... so each site is a contiguous 16-index.
    let mut inter = vec![ZERO; p * p];
    for o in 0..p {
        for i in 0..p {
            let mut idx = 0;
            for s in 0..len {
                let shift = 2 * (len - 1 - s) as u32;
                let os = (o >> shift) & 3;
                let is = (i >> shift) & 3;
                idx = idx * 16 + os * 4 + is;
            }
            inter[idx] = matrix[o * p + i];
        }
    }
    let mut out = Vec::with_capacity(len);
    let mut rem = inter;
    let mut left = 1;
    for s in 0..len - 1 {
        let rows = left * 16;
        let cols = 16usize.pow((len - 1 - s) as u32);
        let d = linalg::svd(rows, cols, &rem).expect("svd of a small gate");
        let (k, _) = linalg::choose_rank(&d.s, 0.0, usize::MAX);
        let mut u = Vec::with_capacity(rows * k);
        for r in 0..rows {
            u.extend_from_slice(&d.u[r * d.k..r * d.k + k]);
        }
        out.push(OpTensor { left, right: k, data: u });
        let mut next = Vec::with_capacity(k * cols);
        for j in 0..k {
            next.extend(d.vh[j * cols..(j + 1) * cols].iter().map(|x| x * d.s[j]));
        }
        rem = next;
        left = k;
    }
    out.push(OpTensor { left, right: 1, data: rem });
    out
}

/// `op · state`, truncated per bond with (`cutoff`, `max_dim`); the result is canonical.
pub fn apply_mpo(op: &OperatorMPO, state: &VectorizedState, cutoff: f64, max_dim: usize) -> Result<VectorizedState> {
    let mut out = state.clone();
    apply_mpo_in_place(op, &mut out, cutoff, max_dim)?;
    Ok(out)
}

/// In-place form of [`apply_mpo`]; returns the largest discarded weight.
pub fn apply_mpo_in_place(op: &OperatorMPO, state: &mut VectorizedState, cutoff: f64, max_dim: usize) -> Result<f64> {
    if op.len() != state.len() {
        return Err(LmpoError::Structure(format!(
            "operator of length {} applied to state of length {}",
            op.len(),
            state.len()
        )));
    }
    let blocks = op.blocks();
    if state.ortho_center().is_none() {
        state.move_center(0);
    }
    if blocks.is_empty() {
        return Ok(0.0);
    }
    let span = |b: &Block| match b {
        Block::Dense { start, len, .. } | Block::Chain { start, len } => (*start, *start + *len - 1),
    };
    let lo = span(&blocks[0]).0;
    let hi = span(&blocks[blocks.len() - 1]).1;
    let center = state.ortho_center().unwrap_or(0);
    let left_to_right = 2 * center <= lo + hi;
    let mut worst: f64 = 0.0;
    let order: Box<dyn Iterator<Item = &Block>> =
        if left_to_right { Box::new(blocks.iter()) } else { Box::new(blocks.iter().rev()) };
    for block in order {
        let w = match block {
            Block::Dense { start, len, matrix } => apply_dense(state, *start, *len, matrix, cutoff, max_dim, left_to_right)?,
            Block::Chain { start, len } => {
                apply_chain(state, &op.tensors[*start..*start + *len], *start, cutoff, max_dim, left_to_right)?
            }
        };
        worst = worst.max(w);
    }
    Ok(worst)
}

fn apply_dense(
    state: &mut VectorizedState,
    start: usize,
    len: usize,
    matrix: &[C64],
    cutoff: f64,
    max_dim: usize,
    left_to_right: bool,
) -> Result<f64> {
    state.move_center(if left_to_right { start } else { start + len - 1 });
    let (dl, dr, theta) = state.contract_block(start, len);
    let p = PHYS.pow(len as u32);
    // (dl, p, dr) -> (p, dl·dr), multiply, and back.
    let cols = dl * dr;
    let mut perm = vec![ZERO; p * cols];
    for l in 0..dl {
        for s in 0..p {
            let src = (l * p + s) * dr;
            let dst = s * cols + l * dr;
            perm[dst..dst + dr].copy_from_slice(&theta[src..src + dr]);
        }
    }
    let prod = linalg::matmul(p, p, cols, matrix, &perm);
    let mut out = vec![ZERO; p * cols];
    for l in 0..dl {
        for s in 0..p {
            let dst = (l * p + s) * dr;
            let src = s * cols + l * dr;
            out[dst..dst + dr].copy_from_slice(&prod[src..src + dr]);
        }
    }
    if len == 1 {
        let mut tensors = state.tensors().to_vec();
        tensors[start] = SiteTensor { site: start, left: dl, right: dr, data: out };
        state.set_tensors(tensors, Some(start));
        return Ok(0.0);
    }
    state.place_block(start, len, dl, dr, out, cutoff, max_dim, left_to_right)
}

fn apply_chain(
    state: &mut VectorizedState,
    ops: &[OpTensor],
    start: usize,
    cutoff: f64,
    max_dim: usize,
    left_to_right: bool,
) -> Result<f64> {
    let len = ops.len();
    let end = start + len - 1;
    state.move_center(if left_to_right { start } else { end });
    let mut tensors = state.tensors().to_vec();
    for (k, w) in ops.iter().enumerate() {
        let a = &tensors[start + k];
        let (left, right) = (a.left * w.left, a.right * w.right);
        let mut t = SiteTensor::zeros(start + k, left, right);
        for wl in 0..w.left {
            for o in 0..PHYS {
                for i in 0..PHYS {
                    for wr in 0..w.right {
                        let c = w.data[w.idx(wl, o, i, wr)];
                        if c == ZERO {
                            continue;
                        }
                        for l in 0..a.left {
                            for r in 0..a.right {
                                let dst = t.idx(l * w.left + wl, o, r * w.right + wr);
                                t.data[dst] += c * a.get(l, i, r);
                            }
                        }
                    }
                }
            }
        }
        tensors[start + k] = t;
    }
    // The block is no longer in canonical form; re-gauge from the entry side
    // with QR, then truncate on the way back.
    let entry = if left_to_right { start } else { end };
    state.set_tensors(tensors, Some(entry));
    let mut worst: f64 = 0.0;
    if left_to_right {
        state.move_center(end);
        for k in (start + 1..=end).rev() {
            let (dl, dr, theta) = state.contract_block(k - 1, 2);
            worst = worst.max(state.place_block(k - 1, 2, dl, dr, theta, cutoff, max_dim, false)?);
        }
        state.move_center(end);
    } else {
        state.move_center(start);
        for k in start..end {
            let (dl, dr, theta) = state.contract_block(k, 2);
            worst = worst.max(state.place_block(k, 2, dl, dr, theta, cutoff, max_dim, true)?);
        }
        state.move_center(start);
    }
    Ok(worst)
}
