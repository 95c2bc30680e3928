//! Adaptive Taylor-series integration of the dense Lindblad equation.
//!
//! The equation is linear and autonomous, so a step is the truncated series
//! Σ_k (hL)^k ρ / k!, summed until the last added term drops below the
//! tolerance. The step length adapts to the series length, and outputs that
//! fall inside a step are read off the same terms.

use crate::error::{LmpoError, Result};
use crate::linalg::{C64, ZERO};
use crate::model::{Lattice, ModelParams};

use super::dense::{DenseGenerator, DenseState};

const MAX_TERMS: usize = 60;
/// Step length adapts to keep the series between these lengths. Longer series
/// cost fewer generator applications per unit time, at some loss to
/// cancellation in the growing terms.
const TERMS_LOW: usize = 22;
const TERMS_HIGH: usize = 34;
/// Most outputs evaluated inside one step.
const MAX_INNER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Spacing of recorded states; `None` records only the two endpoints.
    pub output_dt: Option<f64>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { rtol: 1e-9, atol: 1e-11, output_dt: None }
    }
}

#[derive(Debug, Clone)]
pub struct DenseTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DenseState>,
}

/// Largest real or imaginary component, within √2 of the largest modulus.
fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max)
}

/// Output times from `t0` to `t1` spaced by `dt` (the last one is `t1`).
pub fn output_times(t0: f64, t1: f64, dt: Option<f64>) -> Vec<f64> {
    match dt {
        Some(dt) if dt > 0.0 && t1 > t0 => {
            let steps = ((t1 - t0) / dt - 1e-9).ceil().max(1.0) as usize;
            (0..=steps).map(|k| if k == steps { t1 } else { t0 + k as f64 * dt }).collect()
        }
        _ if t1 > t0 => vec![t0, t1],
        _ => vec![t0],
    }
}

/// Integrate from `times[0]` through each later time, calling `visit` at every one.
///
/// Steps are not cut at output times: outputs inside a step are evaluated
/// from the same Taylor terms at the fractional step length.
pub fn dense_evolve_with<F>(gen: &DenseGenerator, rho0: &DenseState, times: &[f64], opts: &OracleOptions, mut visit: F) -> Result<()>
where
    F: FnMut(f64, &DenseState) -> Result<()>,
{
    if rho0.n != gen.n_qubits() {
        return Err(LmpoError::Structure("initial state and generator sizes differ".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(LmpoError::InvalidParameter("output times must be non-decreasing".into()));
    }
    let (Some(&first), Some(&last)) = (times.first(), times.last()) else { return Ok(()) };
    let eps = 1e-14 * last.abs().max(1.0);
    let mut rho = rho0.clone();
    let mut t = first;
    let mut h: f64 = 0.01;
    let len = rho.rho.len();
    let (mut term, mut tmp, mut next) = (vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]);
    let mut inner: Vec<DenseState> = Vec::new();
    let mut pending = 0;
    while pending < times.len() && times[pending] - t <= eps {
        visit(times[pending], &rho)?;
        pending += 1;
    }
    while pending < times.len() {
        let mut step = h.min(last - t);
        // Bound the number of outputs, and so of accumulators, inside one step.
        if let Some(&cap) = times.get(pending + MAX_INNER - 1) {
            step = step.min(cap - t);
        }
        let inside = times[pending..].iter().take_while(|&&x| x - t <= step + eps).count();
        // Outputs strictly inside the step get their own accumulator.
        let fractions: Vec<f64> =
            times[pending..pending + inside].iter().map(|&x| (x - t) / step).take_while(|&f| f < 1.0 - 1e-12).collect();
        while inner.len() < fractions.len() {
            inner.push(rho.clone());
        }
        for acc in &mut inner[..fractions.len()] {
            acc.rho.copy_from_slice(&rho.rho);
        }
        let tol = opts.atol + opts.rtol * max_abs(&rho.rho);
        next.copy_from_slice(&rho.rho);
        term.copy_from_slice(&rho.rho);
        let mut weights = vec![1.0; fractions.len()];
        let mut used = None;
        for k in 1..=MAX_TERMS {
            gen.apply_into(&term, &mut tmp);
            let f = step / k as f64;
            for (dst, src) in term.iter_mut().zip(&tmp) {
                *dst = src * f;
            }
            for (acc, x) in next.iter_mut().zip(&term) {
                *acc += x;
            }
            for ((acc, w), &theta) in inner.iter_mut().zip(&mut weights).zip(&fractions) {
                *w *= theta;
                for (a, x) in acc.rho.iter_mut().zip(&term) {
                    *a += x * *w;
                }
            }
            if max_abs(&term) <= tol * 1e-2 {
                used = Some(k);
                break;
            }
        }
        let Some(k) = used else {
            h = step * 0.5;
            if h < 1e-12 {
                return Err(LmpoError::Numerical("Taylor step collapsed".into()));
            }
            continue;
        };
        for acc in &inner[..fractions.len()] {
            visit(times[pending], acc)?;
            pending += 1;
        }
        std::mem::swap(&mut rho.rho, &mut next);
        t += step;
        while pending < times.len() && times[pending] - t <= eps {
            visit(times[pending], &rho)?;
            pending += 1;
        }
        if step >= h * (1.0 - 1e-12) {
            if k < TERMS_LOW {
                h *= 1.3;
            } else if k > TERMS_HIGH {
                h *= 0.75;
            }
        }
    }
    Ok(())
}

/// Evolve `rho0` from `t0` to `t1` and collect the states at the output times.
pub fn dense_evolve(
    params: &ModelParams,
    lattice: &Lattice,
    rho0: &DenseState,
    t0: f64,
    t1: f64,
    opts: &OracleOptions,
) -> Result<DenseTrajectory> {
    if t1 < t0 {
        return Err(LmpoError::InvalidParameter("t1 must not precede t0".into()));
    }
    let gen = DenseGenerator::new(params, lattice)?;
    let times = output_times(t0, t1, opts.output_dt);
    let mut states = Vec::with_capacity(times.len());
    dense_evolve_with(&gen, rho0, &times, opts, |_, s| {
        states.push(s.clone());
        Ok(())
    })?;
    Ok(DenseTrajectory { times, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, ONE};
    use crate::model::Coupling;
    use crate::pauli::Pauli;

    #[test]
    fn xy_swap_period() {
        let j = 1.7;
        let mut p = ModelParams::zeros(2);
        p.j = Coupling::Uniform(j);
        let rho0 = DenseState::pauli_product(&[(Pauli::Z, 1), (Pauli::Z, -1)]).unwrap();
        let period = std::f64::consts::PI / j;
        let opts = OracleOptions { rtol: 1e-12, atol: 1e-14, output_dt: Some(period / 2.0) };
        let tr = dense_evolve(&p, &Lattice::chain(2), &rho0, 0.0, period, &opts).unwrap();
        let z0 = |s: &DenseState| s.expect(&[(0, Pauli::Z)]).re;
        assert!((z0(&tr.states[1]) + 1.0).abs() < 1e-10, "excitation swapped at half period");
        assert!((z0(&tr.states[2]) - 1.0).abs() < 1e-10, "and back after a full period");
    }

    #[test]
    fn outputs_inside_a_step_match_direct_runs() {
        let mut p = ModelParams::zeros(3);
        p.h_x = vec![9.0, 0.0, 1.0];
        p.h_z = vec![0.0, 5.0, 0.0];
        p.j = Coupling::Uniform(2.0);
        p.g_0 = vec![0.2; 3];
        let lat = Lattice::chain(3);
        let gen = DenseGenerator::new(&p, &lat).unwrap();
        let rho0 = DenseState::pauli_product(&[(Pauli::Z, -1), (Pauli::X, 1), (Pauli::Z, 1)]).unwrap();
        let opts = OracleOptions { rtol: 1e-12, atol: 1e-14, output_dt: None };
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.0173).collect();
        let mut fine = Vec::new();
        dense_evolve_with(&gen, &rho0, &times, &opts, |_, s| {
            fine.push(s.clone());
            Ok(())
        })
        .unwrap();
        assert_eq!(fine.len(), times.len());
        for (k, &t) in times.iter().enumerate().skip(1).step_by(7) {
            let mut direct = None;
            dense_evolve_with(&gen, &rho0, &[0.0, t], &opts, |_, s| {
                direct = Some(s.clone());
                Ok(())
            })
            .unwrap();
            let err = fine[k].rho.iter().zip(&direct.unwrap().rho).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-11, "t = {t}: {err:e}");
        }
    }

    #[test]
    fn matches_matrix_exponential() {
        let mut p = ModelParams::zeros(2);
        p.h_x = vec![1.3, 0.2];
        p.h_z = vec![0.4, -0.7];
        p.j = Coupling::Uniform(0.9);
        p.j_z = Coupling::Uniform(0.5);
        p.g_0 = vec![0.3, 0.1];
        p.g_1 = vec![0.05, 0.2];
        p.g_2 = vec![0.1, 0.4];
        let lat = Lattice::chain(2);
        let gen = DenseGenerator::new(&p, &lat).unwrap();
        let sup = gen.pauli_superoperator().unwrap();
        let t = 1.7;
        let scaled: Vec<C64> = sup.iter().map(|z| z * t).collect();
        let prop = linalg::expm(16, &scaled);
        let rho0 = DenseState::pauli_product(&[(Pauli::Y, 1), (Pauli::Z, -1)]).unwrap();
        let c0 = rho0.to_pauli_coeffs();
        let want = linalg::matmul(16, 16, 1, &prop, &c0);
        let opts = OracleOptions { rtol: 1e-13, atol: 1e-15, output_dt: None };
        let tr = dense_evolve(&p, &lat, &rho0, 0.0, t, &opts).unwrap();
        let got = tr.states[1].to_pauli_coeffs();
        let err = got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "err = {err:e}");
        assert!((tr.states[1].trace() - ONE).norm() < 1e-12);
    }

    #[test]
    fn optical_bloch_steady_state() {
        // Driven qubit with relaxation: null vector of the 4×4 generator.
        let (omega, g0) = (1.1, 0.8);
        let mut p = ModelParams::zeros(1);
        p.h_x = vec![omega];
        p.g_0 = vec![g0];
        let lat = Lattice::chain(1);
        let gen = DenseGenerator::new(&p, &lat).unwrap();
        let sup = gen.pauli_superoperator().unwrap();
        // Solve for the stationary Bloch vector with c_I fixed.
        let a: Vec<C64> = (1..4).flat_map(|r| (1..4).map(move |c| (r, c))).map(|(r, c)| sup[r * 4 + c]).collect();
        let b: Vec<C64> = (1..4).map(|r| -sup[r * 4] * std::f64::consts::FRAC_1_SQRT_2).collect();
        let x = solve3(&a, &b);
        let z_ss = x[2].re * std::f64::consts::SQRT_2;
        let opts = OracleOptions { rtol: 1e-12, atol: 1e-14, output_dt: None };
        let rho0 = DenseState::pauli_product(&[(Pauli::Z, 1)]).unwrap();
        let tr = dense_evolve(&p, &lat, &rho0, 0.0, 60.0, &opts).unwrap();
        let z = tr.states[1].expect(&[(0, Pauli::Z)]).re;
        assert!((z - z_ss).abs() < 1e-9, "{z} vs {z_ss}");
        assert!((z_ss - g0 * g0 / (g0 * g0 + 2.0 * omega * omega)).abs() < 1e-12);
    }

    fn solve3(a: &[C64], b: &[C64]) -> Vec<C64> {
        // Cramer's rule.
        let det = |m: &[C64]| {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])
        };
        let d = det(a);
        (0..3)
            .map(|c| {
                let mut m = a.to_vec();
                for r in 0..3 {
                    m[r * 3 + c] = b[r];
                }
                det(&m) / d
            })
            .collect()
    }
}
