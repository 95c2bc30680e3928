use crate::error::{LmpoError, Result};
use crate::linalg::{C64, ZERO};

/// Local dimension of a vectorized qubit: the Pauli basis {I, X, Y, Z}/√2.
pub const PHYS: usize = 4;

/// One MPS tensor, stored row-major as (left, physical, right).
///
/// The same buffer is a (left·4)×right matrix or a left×(4·right) matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    pub site: usize,
    pub left: usize,
    pub right: usize,
    pub data: Vec<C64>,
}

impl SiteTensor {
    pub fn new(site: usize, left: usize, right: usize, data: Vec<C64>) -> Result<Self> {
        if left == 0 || right == 0 || data.len() != left * PHYS * right {
            return Err(LmpoError::Structure(format!(
                "site {site}: buffer of {} entries does not fit shape ({left}, {PHYS}, {right})",
                data.len()
            )));
        }
        Ok(SiteTensor { site, left, right, data })
    }

    pub fn zeros(site: usize, left: usize, right: usize) -> Self {
        SiteTensor { site, left, right, data: vec![ZERO; left * PHYS * right] }
    }

    /// A bond-dimension-1 tensor holding the given local coefficients.
    pub fn product(site: usize, coeffs: [C64; 4]) -> Self {
        SiteTensor { site, left: 1, right: 1, data: coeffs.to_vec() }
    }

    #[inline]
    pub fn idx(&self, l: usize, p: usize, r: usize) -> usize {
        (l * PHYS + p) * self.right + r
    }

    #[inline]
    pub fn get(&self, l: usize, p: usize, r: usize) -> C64 {
        self.data[self.idx(l, p, r)]
    }

    /// The left×right matrix for a fixed physical index.
    pub fn slice(&self, p: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.left * self.right);
        for l in 0..self.left {
            let start = self.idx(l, p, 0);
            out.extend_from_slice(&self.data[start..start + self.right]);
        }
        out
    }

    /// True when the (left·4)×right reshaping has orthonormal columns.
    pub fn is_left_orthonormal(&self, tol: f64) -> bool {
        let (m, n) = (self.left * PHYS, self.right);
        gram_is_identity(n, |i, j| (0..m).map(|k| self.data[k * n + i].conj() * self.data[k * n + j]).sum(), tol)
    }

    /// True when the left×(4·right) reshaping has orthonormal rows.
    pub fn is_right_orthonormal(&self, tol: f64) -> bool {
        let (m, n) = (self.left, PHYS * self.right);
        gram_is_identity(m, |i, j| (0..n).map(|k| self.data[i * n + k] * self.data[j * n + k].conj()).sum(), tol)
    }
}

fn gram_is_identity(n: usize, entry: impl Fn(usize, usize) -> C64, tol: f64) -> bool {
    (0..n).all(|i| {
        (0..n).all(|j| {
            let want = if i == j { 1.0 } else { 0.0 };
            (entry(i, j) - want).norm() <= tol
        })
    })
}
