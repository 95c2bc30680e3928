//! Single-qubit Pauli algebra and the normalized local basis {I, X, Y, Z}/√2.
//!
//! A site of a vectorized state carries coefficients `c_a = tr(σ_a A)/√2`,
//! so that `A = Σ_a c_a σ_a/√2` and the vectorized inner product is `tr(A†B)`.

use std::fmt;
use std::str::FromStr;

use crate::error::LmpoError;
use crate::linalg::{C64, ONE, ZERO};

pub const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A 2×2 operator, row-major.
pub type Op2 = [C64; 4];

/// Superoperator on one site in the Pauli basis, row-major 4×4.
pub type Super1 = [C64; 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i]
    }

    pub fn matrix(self) -> Op2 {
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -i, i, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for Pauli {
    type Err = LmpoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" => Ok(Pauli::I),
            "X" => Ok(Pauli::X),
            "Y" => Ok(Pauli::Y),
            "Z" => Ok(Pauli::Z),
            other => Err(LmpoError::InvalidParameter(format!("unknown Pauli component {other:?}"))),
        }
    }
}

pub fn mul2(a: &Op2, b: &Op2) -> Op2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub fn dagger2(a: &Op2) -> Op2 {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

fn trace2(a: &Op2) -> C64 {
    a[0] + a[3]
}

/// Pauli-basis coefficients of a 2×2 operator.
pub fn to_pauli(a: &Op2) -> [C64; 4] {
    let mut out = [ZERO; 4];
    for p in Pauli::ALL {
        out[p.index()] = trace2(&mul2(&p.matrix(), a)) * SQRT_HALF;
    }
    out
}

/// Inverse of [`to_pauli`].
pub fn from_pauli(c: &[C64; 4]) -> Op2 {
    let mut out = [ZERO; 4];
    for p in Pauli::ALL {
        let m = p.matrix();
        for k in 0..4 {
            out[k] += c[p.index()] * m[k] * SQRT_HALF;
        }
    }
    out
}

/// Matrix of `ρ ↦ A ρ B` in the Pauli basis.
pub fn sandwich(a: &Op2, b: &Op2) -> Super1 {
    let mut out = [ZERO; 16];
    for q in Pauli::ALL {
        let image = mul2(&mul2(a, &q.matrix()), b);
        let coeffs = to_pauli(&image);
        for p in 0..4 {
            // image of basis element σ_q/√2
            out[p * 4 + q.index()] = coeffs[p] * SQRT_HALF;
        }
    }
    out
}

pub fn left_mult(a: &Op2) -> Super1 {
    sandwich(a, &Pauli::I.matrix())
}

pub fn right_mult(a: &Op2) -> Super1 {
    sandwich(&Pauli::I.matrix(), a)
}

/// Row-major Kronecker product of two square matrices of sizes n and m.
pub fn kron(n: usize, a: &[C64], m: usize, b: &[C64]) -> Vec<C64> {
    let d = n * m;
    let mut out = vec![ZERO; d * d];
    for i in 0..n {
        for j in 0..n {
            let aij = a[i * n + j];
            if aij == ZERO {
                continue;
            }
            for k in 0..m {
                for l in 0..m {
                    out[(i * m + k) * d + j * m + l] = aij * b[k * m + l];
                }
            }
        }
    }
    out
}

/// Matrix of `ρ ↦ U ρ U†` on two qubits in the product Pauli basis, first
/// qubit most significant. `u` is 4×4 row-major on |q0 q1⟩.
pub fn two_qubit_conjugation(u: &[C64]) -> Vec<C64> {
    let ud = crate::linalg::adjoint(4, 4, u);
    let basis: Vec<Vec<C64>> = (0..16)
        .map(|k| kron(2, &Pauli::from_index(k / 4).matrix(), 2, &Pauli::from_index(k % 4).matrix()))
        .collect();
    let mut out = vec![ZERO; 256];
    for (col, b) in basis.iter().enumerate() {
        let image = crate::linalg::matmul(4, 4, 4, &crate::linalg::matmul(4, 4, 4, u, b), &ud);
        for (row, p) in basis.iter().enumerate() {
            // tr(P·image), P Hermitian; basis elements carry 1/2 each side.
            let tr: C64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| p[i * 4 + j] * image[j * 4 + i]).sum();
            out[row * 16 + col] = tr * 0.25;
        }
    }
    out
}
