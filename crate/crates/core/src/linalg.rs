//! Dense kernels on row-major complex buffers, backed by faer.

use faer::linalg::matmul::triangular::{self, BlockStructure};
use faer::{Accum, Mat, MatRef, Par};
use num_complex::Complex64;

use crate::error::{LmpoError, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Singular values below this fraction of the largest are treated as exact zeros.
pub const RANK_FLOOR: f64 = 1e-14;

fn view(m: usize, n: usize, a: &[C64]) -> MatRef<'_, C64> {
    debug_assert_eq!(a.len(), m * n);
    MatRef::from_row_major_slice(a, m, n)
}

fn to_row_major(a: MatRef<'_, C64>) -> Vec<C64> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut out = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            out.push(a[(i, j)]);
        }
    }
    out
}

/// Thin SVD `a = u · diag(s) · vh`, with `u` m×k and `vh` k×n, k = min(m, n).
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Vec<C64>,
    pub s: Vec<f64>,
    pub vh: Vec<C64>,
    pub k: usize,
}

/// Thin SVD with descending singular values. Each left singular vector is
/// rotated so its first non-negligible entry is real and positive, with the
/// compensating phase moved onto the right vector.
pub fn svd(m: usize, n: usize, a: &[C64]) -> Result<Svd> {
    let (u, s, vh) = if is_real(a) {
        let (u, s, vh) = direct_svd_f64(real_view(m, n, &to_real(a)).as_ref(), usize::MAX, -1.0)?;
        (from_real_mat(u.as_ref()), s, from_real_mat(vh.as_ref()))
    } else {
        let (u, s, vh) = direct_svd_c64(view(m, n, a), usize::MAX, -1.0)?;
        (to_row_major(u.as_ref()), s, to_row_major(vh.as_ref()))
    };
    Ok(Svd::with_fixed_phase(m, n, u, s, vh))
}

impl Svd {
    fn with_fixed_phase(m: usize, n: usize, mut u: Vec<C64>, s: Vec<f64>, mut vh: Vec<C64>) -> Self {
        let k = s.len();
        for j in 0..k {
            if let Some(i) = (0..m).find(|&i| u[i * k + j].norm() > 1e-10) {
                let phase = u[i * k + j] / u[i * k + j].norm();
                let back = phase.conj();
                for r in 0..m {
                    u[r * k + j] *= back;
                }
                for c in 0..n {
                    vh[j * n + c] *= phase;
                }
            }
        }
        Svd { u, s, vh, k }
    }
}

/// Number of singular values to keep and the discarded Schmidt weight.
///
/// Keeps the smallest k with dropped squared weight ≤ `cutoff` (relative to the
/// total), never more than `max_dim` and never values below the rank floor.
pub fn choose_rank(s: &[f64], cutoff: f64, max_dim: usize) -> (usize, f64) {
    if s.is_empty() {
        return (0, 0.0);
    }
    let total: f64 = s.iter().map(|x| x * x).sum();
    if total <= 0.0 {
        return (1, 0.0);
    }
    rank_with_remainder(s, 0.0, total, cutoff, max_dim)
}

/// As [`choose_rank`] for a partial spectrum whose unresolved weight is `rest`.
fn rank_with_remainder(s: &[f64], rest: f64, total: f64, cutoff: f64, max_dim: usize) -> (usize, f64) {
    let floor = s[0] * RANK_FLOOR;
    let nonzero = s.iter().take_while(|&&x| x > floor).count().max(1);
    // tail[k] = weight dropped when keeping k values.
    let mut tail = vec![rest; s.len() + 1];
    for i in (0..s.len()).rev() {
        tail[i] = tail[i + 1] + s[i] * s[i];
    }
    let mut k = 1;
    while k < nonzero && tail[k] > cutoff * total {
        k += 1;
    }
    let k = k.min(max_dim.max(1));
    (k, tail[k] / total)
}

/// Matrices with a smaller side up to this size are decomposed directly.
const DIRECT_SVD_MAX: usize = 64;

/// Eigenvalues of the Gram matrix above this fraction of the largest give
/// singular triplets at close to full precision; the rest are refined recursively.
const GRAM_TRUST: f64 = 1e-12;

/// SVD truncated to the smallest rank whose dropped squared weight, relative
/// to the total, is at most `cutoff`; capped at `max_dim`.
///
/// Large blocks go through the eigendecomposition of the smaller Gram matrix,
/// recursing on the orthogonal complement of the trusted directions until the
/// remainder fits the discard budget. Real input is decomposed in real
/// arithmetic. Returns the truncated factors and the discarded weight.
pub fn truncated_svd(m: usize, n: usize, a: &[C64], cutoff: f64, max_dim: usize) -> Result<(Svd, f64)> {
    let max_dim = max_dim.max(1);
    if m.min(n) <= DIRECT_SVD_MAX {
        let full = svd(m, n, a)?;
        let (k, w) = choose_rank(&full.s, cutoff, max_dim);
        return Ok((full.truncated(m, n, k), w));
    }
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        let full = svd(m, n, a)?;
        return Ok((full.truncated(m, n, 1), 0.0));
    }
    let budget = cutoff * total;
    let floor = RANK_FLOOR * total.sqrt();
    let (u, s, vh) = if is_real(a) {
        let (u, s, vh) = gram_svd_f64(real_view(m, n, &to_real(a)).as_ref(), max_dim, budget, floor)?;
        (from_real_mat(u.as_ref()), s, from_real_mat(vh.as_ref()))
    } else {
        let (u, s, vh) = gram_svd_c64(view(m, n, a), max_dim, budget, floor)?;
        (to_row_major(u.as_ref()), s, to_row_major(vh.as_ref()))
    };
    let found = Svd::with_fixed_phase(m, n, u, s, vh);
    if found.k == 0 {
        let full = svd(m, n, a)?;
        return Ok((full.truncated(m, n, 1), 0.0));
    }
    let kept: f64 = found.s.iter().map(|x| x * x).sum();
    let (k, w) = rank_with_remainder(&found.s, (total - kept).max(0.0), total, cutoff, max_dim);
    Ok((found.truncated(m, n, k), w))
}

impl Svd {
    /// Leading `k` triplets.
    pub fn truncated(&self, m: usize, n: usize, k: usize) -> Svd {
        let k = k.min(self.k);
        let mut u = Vec::with_capacity(m * k);
        for i in 0..m {
            u.extend_from_slice(&self.u[i * self.k..i * self.k + k]);
        }
        Svd { u, s: self.s[..k].to_vec(), vh: self.vh[..k * n].to_vec(), k }
    }
}

fn is_real(a: &[C64]) -> bool {
    a.iter().all(|z| z.im == 0.0)
}

fn to_real(a: &[C64]) -> Vec<f64> {
    a.iter().map(|z| z.re).collect()
}

fn real_view(m: usize, n: usize, a: &[f64]) -> Mat<f64> {
    MatRef::from_row_major_slice(a, m, n).to_owned()
}

fn from_real_mat(a: MatRef<'_, f64>) -> Vec<C64> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut out = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            out.push(C64::new(a[(i, j)], 0.0));
        }
    }
    out
}

trait Entry: Copy {
    fn real(self) -> f64;
    fn scaled(self, x: f64) -> Self;
}

impl Entry for f64 {
    fn real(self) -> f64 {
        self
    }
    fn scaled(self, x: f64) -> Self {
        self * x
    }
}

impl Entry for C64 {
    fn real(self) -> f64 {
        self.re
    }
    fn scaled(self, x: f64) -> Self {
        self * x
    }
}

macro_rules! svd_kernels {
    ($direct:ident, $gram:ident, $t:ty) => {
        /// Thin SVD keeping at most `limit` triplets with singular values above `floor`.
        fn $direct(a: MatRef<'_, $t>, limit: usize, floor: f64) -> Result<(Mat<$t>, Vec<f64>, Mat<$t>)> {
            let (m, n) = (a.nrows(), a.ncols());
            let dec = a
                .thin_svd()
                .map_err(|e| LmpoError::Numerical(format!("svd of {m}x{n} did not converge: {e:?}")))?;
            let all: Vec<f64> = dec.S().column_vector().iter().map(|x| x.real()).collect();
            let k = if floor < 0.0 { all.len() } else { all.iter().take_while(|&&x| x > floor).count() }.min(limit);
            let vh: Mat<$t> = dec.V().subcols(0, k).adjoint().to_owned();
            Ok((dec.U().subcols(0, k).to_owned(), all[..k].to_vec(), vh))
        }

        fn $gram(a: MatRef<'_, $t>, limit: usize, budget: f64, floor: f64) -> Result<(Mat<$t>, Vec<f64>, Mat<$t>)> {
            let (m, n) = (a.nrows(), a.ncols());
            if m > n {
                let adj: Mat<$t> = a.adjoint().to_owned();
                let (u, s, vh) = $gram(adj.as_ref(), limit, budget, floor)?;
                return Ok((vh.adjoint().to_owned(), s, u.adjoint().to_owned()));
            }
            if m <= DIRECT_SVD_MAX || limit == 0 {
                return $direct(a, limit, floor);
            }
            // Only the lower triangle is formed; the eigensolver reads no more.
            let mut g = Mat::<$t>::zeros(m, m);
            triangular::matmul(
                g.as_mut(),
                BlockStructure::TriangularLower,
                Accum::Replace,
                a,
                BlockStructure::Rectangular,
                a.adjoint(),
                BlockStructure::Rectangular,
                <$t>::from(1.0),
                Par::Seq,
            );
            let eig = g
                .self_adjoint_eigen(faer::Side::Lower)
                .map_err(|e| LmpoError::Numerical(format!("eigendecomposition of {m}x{m} failed: {e:?}")))?;
            let evals: Vec<f64> = eig.S().column_vector().iter().rev().map(|x| x.real()).collect();
            let vecs = eig.U();
            let lam0 = evals[0].max(0.0);
            let trusted = evals
                .iter()
                .take_while(|&&l| l > 0.0 && l >= GRAM_TRUST * lam0 && l.sqrt() > floor)
                .count()
                .min(limit);
            let top = Mat::<$t>::from_fn(m, trusted, |i, j| vecs[(i, m - 1 - j)]);
            let mut vh: Mat<$t> = top.adjoint() * a;
            let mut s = Vec::with_capacity(trusted);
            for j in 0..trusted {
                let norm = vh.row(j).norm_l2();
                s.push(norm);
                let inv = 1.0 / norm;
                for c in 0..n {
                    vh[(j, c)] = vh[(j, c)].scaled(inv);
                }
            }
            if trusted == limit || trusted == m {
                return Ok((top, s, vh));
            }
            let rest = Mat::<$t>::from_fn(m, m - trusted, |i, j| vecs[(i, m - 1 - trusted - j)]);
            let b: Mat<$t> = rest.adjoint() * a;
            let wb = b.squared_norm_l2();
            if wb <= budget || wb.sqrt() <= floor {
                return Ok((top, s, vh));
            }
            let (ub, sb, vhb) = $gram(b.as_ref(), limit - trusted, budget, floor)?;
            let ub: Mat<$t> = &rest * &ub;
            // Merge and keep singular values in descending order.
            let mut order: Vec<(f64, bool, usize)> =
                s.iter().enumerate().map(|(i, &x)| (x, true, i)).chain(sb.iter().enumerate().map(|(i, &x)| (x, false, i))).collect();
            order.sort_by(|a, b| b.0.total_cmp(&a.0));
            let k = order.len();
            let u_all = Mat::<$t>::from_fn(m, k, |i, j| {
                let (_, first, c) = order[j];
                if first { top[(i, c)] } else { ub[(i, c)] }
            });
            let vh_all = Mat::<$t>::from_fn(k, n, |i, j| {
                let (_, first, r) = order[i];
                if first { vh[(r, j)] } else { vhb[(r, j)] }
            });
            Ok((u_all, order.iter().map(|o| o.0).collect(), vh_all))
        }
    };
}

svd_kernels!(direct_svd_f64, gram_svd_f64, f64);
svd_kernels!(direct_svd_c64, gram_svd_c64, C64);

/// Thin QR: returns (q m×k, r k×n, k).
pub fn qr(m: usize, n: usize, a: &[C64]) -> (Vec<C64>, Vec<C64>, usize) {
    let k = m.min(n);
    if is_real(a) {
        let dec = real_view(m, n, &to_real(a)).qr();
        return (from_real_mat(dec.compute_thin_Q().as_ref()), from_real_mat(dec.thin_R()), k);
    }
    let dec = view(m, n, a).qr();
    let q = to_row_major(dec.compute_thin_Q().as_ref());
    let r = to_row_major(dec.thin_R());
    (q, r, k)
}

/// Thin LQ: returns (l m×k, q k×n, k) with orthonormal rows in q.
pub fn lq(m: usize, n: usize, a: &[C64]) -> (Vec<C64>, Vec<C64>, usize) {
    let adj = adjoint(m, n, a);
    let (q, r, k) = qr(n, m, &adj);
    (adjoint(k, m, &r), adjoint(n, k, &q), k)
}

pub fn adjoint(m: usize, n: usize, a: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; m * n];
    for i in 0..m {
        for j in 0..n {
            out[j * m + i] = a[i * n + j].conj();
        }
    }
    out
}

/// Row-major product of an m×k and a k×n matrix.
pub fn matmul(m: usize, k: usize, n: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    if is_real(a) && is_real(b) {
        let prod: Mat<f64> = real_view(m, k, &to_real(a)) * real_view(k, n, &to_real(b));
        return from_real_mat(prod.as_ref());
    }
    let prod: Mat<C64> = view(m, k, a) * view(k, n, b);
    to_row_major(prod.as_ref())
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(n: usize, a: &[C64]) -> Vec<C64> {
    let a = view(n, n, a);
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm1 * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x: Mat<C64> = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let mut result: Mat<C64> = Mat::identity(n, n);
    let mut term: Mat<C64> = Mat::identity(n, n);
    for k in 1..=20 {
        term = &term * &x;
        let inv = 1.0 / k as f64;
        term = Mat::from_fn(n, n, |i, j| term[(i, j)] * inv);
        result = &result + &term;
        let tnorm = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| term[(i, j)].norm()).fold(0.0, f64::max);
        if tnorm < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    to_row_major(result.as_ref())
}

/// Eigenvalues of a general square matrix.
pub fn eigenvalues(n: usize, a: &[C64]) -> Result<Vec<C64>> {
    view(n, n, a)
        .eigenvalues()
        .map_err(|e| LmpoError::Numerical(format!("eigenvalues did not converge: {e:?}")))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(n: usize, a: &[C64]) -> Result<Vec<f64>> {
    view(n, n, a)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| LmpoError::Numerical(format!("eigenvalues did not converge: {e:?}")))
}
