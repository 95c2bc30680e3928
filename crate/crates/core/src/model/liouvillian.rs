use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::linalg::{C64, ONE, ZERO};
use crate::pauli::{kron, left_mult, mul2, right_mult, sandwich, Op2, Pauli, Super1};
use crate::tensor_core::{operator_schmidt, OpTensor, OperatorMPO, PHYS};

use super::lattice::Lattice;
use super::params::ModelParams;

const I: C64 = C64::new(0.0, 1.0);

/// σ⁺ = |0⟩⟨1| raises Z from −1 to +1.
pub fn sigma_plus() -> Op2 {
    [ZERO, ONE, ZERO, ZERO]
}

pub fn sigma_minus() -> Op2 {
    [ZERO, ZERO, ONE, ZERO]
}

fn add_scaled(acc: &mut [C64], m: &[C64], c: C64) {
    acc.iter_mut().zip(m).for_each(|(a, b)| *a += c * b);
}

/// `ρ ↦ L ρ L† − ½{L†L, ρ}` for one jump operator.
fn jump(l: &Op2) -> Super1 {
    let ld = crate::pauli::dagger2(l);
    let n = mul2(&ld, l);
    let mut out = sandwich(l, &ld);
    add_scaled(&mut out, &left_mult(&n), C64::new(-0.5, 0.0));
    add_scaled(&mut out, &right_mult(&n), C64::new(-0.5, 0.0));
    out
}

/// One-qubit generator: field commutator plus the three dissipators.
///
/// `field` is (h_x, h_y, h_z) and `rates` is (g_0, g_1, g_2).
pub fn site_generator(field: [f64; 3], rates: [f64; 3]) -> Super1 {
    let mut h: Op2 = [ZERO; 4];
    for (p, c) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().zip(field) {
        let m = p.matrix();
        add_scaled(&mut h, &m, C64::new(0.5 * c, 0.0));
    }
    let mut out = [ZERO; 16];
    add_scaled(&mut out, &left_mult(&h), -I);
    add_scaled(&mut out, &right_mult(&h), I);
    if rates[0] != 0.0 {
        add_scaled(&mut out, &jump(&sigma_plus()), C64::new(rates[0], 0.0));
    }
    if rates[1] != 0.0 {
        add_scaled(&mut out, &jump(&sigma_minus()), C64::new(rates[1], 0.0));
    }
    if rates[2] != 0.0 {
        let z = Pauli::Z.matrix();
        let mut deph = sandwich(&z, &z);
        for p in 0..4 {
            deph[p * 4 + p] -= ONE;
        }
        add_scaled(&mut out, &deph, C64::new(rates[2], 0.0));
    }
    out
}

/// Two-qubit generator `−i[½(J(XX + YY) + J_z ZZ), ·]` as a 16×16 matrix
/// on (first, second) with the first site most significant.
pub fn bond_generator(j: f64, j_z: f64) -> Vec<C64> {
    let mut out = vec![ZERO; 256];
    for (p, c) in [(Pauli::X, j), (Pauli::Y, j), (Pauli::Z, j_z)] {
        if c == 0.0 {
            continue;
        }
        let m = p.matrix();
        let (l, r) = (left_mult(&m), right_mult(&m));
        add_scaled(&mut out, &kron(4, &l, 4, &l), -I * 0.5 * c);
        add_scaled(&mut out, &kron(4, &r, 4, &r), I * 0.5 * c);
    }
    out
}

/// A one-site term of the generator at an MPS position.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTerm {
    pub position: usize,
    pub matrix: Super1,
}

/// A two-site term between MPS positions `first < second`.
#[derive(Debug, Clone, PartialEq)]
pub struct BondTerm {
    pub first: usize,
    pub second: usize,
    pub matrix: Vec<C64>,
}

/// The vectorized Lindbladian as an exact MPO, with the local terms it was built from.
#[derive(Debug, Clone)]
pub struct LiouvillianMPO {
    pub mpo: OperatorMPO,
    pub params_hash: String,
    lattice: Lattice,
    site_terms: Vec<SiteTerm>,
    bond_terms: Vec<BondTerm>,
}

impl LiouvillianMPO {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn len(&self) -> usize {
        self.lattice.n_qubits
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.n_qubits == 0
    }

    pub fn site_terms(&self) -> &[SiteTerm] {
        &self.site_terms
    }

    pub fn bond_terms(&self) -> &[BondTerm] {
        &self.bond_terms
    }

    /// Dense 4^N × 4^N generator in position order; small N only.
    pub fn to_dense(&self) -> Vec<C64> {
        self.mpo.to_dense()
    }
}

/// Assemble the generator of `params` on `lattice` in the lattice's path order.
pub fn build_liouvillian(lattice: &Lattice, params: &ModelParams) -> Result<LiouvillianMPO> {
    let couplings = params.bond_couplings(lattice)?;
    let n = lattice.n_qubits;

    let mut site_terms = Vec::new();
    for q in 0..n {
        let m = site_generator(
            [params.h_x[q], params.h_y[q], params.h_z[q]],
            [params.g_0[q], params.g_1[q], params.g_2[q]],
        );
        if m.iter().any(|z| *z != ZERO) {
            site_terms.push(SiteTerm { position: lattice.position(q), matrix: m });
        }
    }
    site_terms.sort_by_key(|t| t.position);

    let mut bond_terms = Vec::new();
    for c in &couplings {
        let (pa, pb) = (lattice.position(c.a), lattice.position(c.b));
        bond_terms.push(BondTerm { first: pa.min(pb), second: pa.max(pb), matrix: bond_generator(c.j, c.j_z) });
    }
    bond_terms.sort_by_key(|t| (t.first, t.second));

    let mpo = automaton_mpo(n, &site_terms, &bond_terms)?;
    let mut hasher = Sha256::new();
    hasher.update(format!("{} {:?} {:?}\n", lattice.kind, lattice.bonds, lattice.mpo_path));
    hasher.update(params.canonical_text());
    let params_hash = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();

    Ok(LiouvillianMPO { mpo, params_hash, lattice: lattice.clone(), site_terms, bond_terms })
}

/// Lower-triangular automaton MPO: state 0 = nothing placed yet, last state =
/// term complete, one intermediate state per open two-site channel.
fn automaton_mpo(n: usize, site_terms: &[SiteTerm], bond_terms: &[BondTerm]) -> Result<OperatorMPO> {
    let mut local = vec![[ZERO; 16]; n];
    for t in site_terms {
        add_scaled(&mut local[t.position], &t.matrix, ONE);
    }
    if n == 1 {
        return OperatorMPO::new(vec![OpTensor::local(&local[0])]);
    }
    struct Channel {
        first: usize,
        second: usize,
        a: Vec<C64>,
        b: Vec<C64>,
    }
    let mut channels = Vec::new();
    for t in bond_terms {
        for (a, b) in operator_schmidt(&t.matrix) {
            channels.push(Channel { first: t.first, second: t.second, a, b });
        }
    }
    // Channel slot at each cut c (between positions c and c+1).
    let mut slots: Vec<Vec<usize>> = vec![Vec::new(); n - 1];
    let mut slot_of = vec![vec![usize::MAX; channels.len()]; n - 1];
    for (ci, ch) in channels.iter().enumerate() {
        for c in ch.first..ch.second {
            slot_of[c][ci] = slots[c].len() + 1;
            slots[c].push(ci);
        }
    }
    let dim = |cut: isize| -> usize {
        if cut < 0 || cut as usize >= n - 1 {
            2
        } else {
            slots[cut as usize].len() + 2
        }
    };
    let identity = OpTensor::identity().data;
    let mut tensors = Vec::with_capacity(n);
    for p in 0..n {
        let (wl, wr) = (dim(p as isize - 1), dim(p as isize));
        let (done_l, done_r) = (wl - 1, wr - 1);
        let mut t = OpTensor { left: wl, right: wr, data: vec![ZERO; wl * 16 * wr] };
        let mut put = |l: usize, r: usize, m: &[C64]| {
            for oi in 0..16 {
                let idx = ((l * 16) + oi) * wr + r;
                t.data[idx] += m[oi];
            }
        };
        put(0, 0, &identity);
        put(done_l, done_r, &identity);
        put(0, done_r, &local[p]);
        for (ci, ch) in channels.iter().enumerate() {
            if ch.first == p {
                put(0, slot_of[p][ci], &ch.a);
            } else if ch.second == p {
                put(slot_of[p - 1][ci], done_r, &ch.b);
            } else if ch.first < p && p < ch.second {
                put(slot_of[p - 1][ci], slot_of[p][ci], &identity);
            }
        }
        tensors.push(t);
    }
    // Boundaries: the first tensor starts in state 0, the last ends in "done".
    let first = &tensors[0];
    let wr0 = first.right;
    tensors[0] = OpTensor { left: 1, right: wr0, data: first.data[..16 * wr0].to_vec() };
    let last = &tensors[n - 1];
    let (wl, wr) = (last.left, last.right);
    let mut data = Vec::with_capacity(wl * 16);
    for l in 0..wl {
        for oi in 0..16 {
            data.push(last.data[(l * 16 + oi) * wr + wr - 1]);
        }
    }
    tensors[n - 1] = OpTensor { left: wl, right: 1, data };
    debug_assert!(tensors.iter().all(|t| t.data.len() == t.left * PHYS * PHYS * t.right));
    OperatorMPO::new(tensors)
}
