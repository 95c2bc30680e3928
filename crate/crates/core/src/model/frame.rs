//! Lab-frame parameters and the rotating-wave reduction to [`ModelParams`].

use crate::error::{LmpoError, Result};

use super::params::{Coupling, ModelParams};

/// Qubit frequencies and drives in the lab frame.
///
/// Per-qubit drive frequencies are accepted, but all driven qubits must share
/// one; undriven entries (zero amplitude) are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct LabFrameParams {
    pub omega: Vec<f64>,
    pub drive_amp: Vec<f64>,
    pub drive_freq: Vec<f64>,
    pub drive_phase: Vec<f64>,
    /// Frequency step of alternating patterns, ω₁ − ω₀.
    pub delta: f64,
    pub j: Coupling,
    pub j_z: Coupling,
    pub g_0: Vec<f64>,
    pub g_1: Vec<f64>,
    pub g_2: Vec<f64>,
}

impl LabFrameParams {
    /// Qubit 0 driven resonantly with amplitude `drive_amp`; qubit `i` sits at
    /// `omega0 + delta·sublattice[i]`.
    pub fn alternating(omega0: f64, delta: f64, sublattice: &[u8], drive_amp: f64) -> Self {
        let n = sublattice.len();
        let mut amp = vec![0.0; n];
        if n > 0 {
            amp[0] = drive_amp;
        }
        LabFrameParams {
            omega: sublattice.iter().map(|&s| omega0 + delta * f64::from(s)).collect(),
            drive_amp: amp,
            drive_freq: vec![omega0; n],
            drive_phase: vec![0.0; n],
            delta,
            j: Coupling::default(),
            j_z: Coupling::default(),
            g_0: vec![0.0; n],
            g_1: vec![0.0; n],
            g_2: vec![0.0; n],
        }
    }
}

/// Rotating-frame coefficients after the rotating-wave approximation.
///
/// The frame rotates at the common drive frequency ν: `h_z,i = ω_i − ν`,
/// `h_x,i = Ω_i cos φ_i`, `h_y,i = Ω_i sin φ_i`. Couplings and rates carry
/// over unchanged.
pub fn lab_to_rotating(lab: &LabFrameParams) -> Result<ModelParams> {
    let n = lab.omega.len();
    for (name, len) in [
        ("drive_amp", lab.drive_amp.len()),
        ("drive_freq", lab.drive_freq.len()),
        ("drive_phase", lab.drive_phase.len()),
    ] {
        if len != n {
            return Err(LmpoError::InvalidParameter(format!("{name} has {len} entries, expected {n}")));
        }
    }
    let driven: Vec<f64> =
        (0..n).filter(|&i| lab.drive_amp[i] != 0.0).map(|i| lab.drive_freq[i]).collect();
    let frame = match driven.first() {
        Some(&nu) => {
            if driven.iter().any(|&f| (f - nu).abs() > 1e-12 * nu.abs().max(1.0)) {
                return Err(LmpoError::Unsupported(
                    "several distinct drive frequencies leave a time-dependent Hamiltonian".into(),
                ));
            }
            nu
        }
        None => lab.omega.first().copied().unwrap_or(0.0),
    };
    let mut p = ModelParams::zeros(n);
    for i in 0..n {
        p.h_x[i] = lab.drive_amp[i] * lab.drive_phase[i].cos();
        p.h_y[i] = lab.drive_amp[i] * lab.drive_phase[i].sin();
        p.h_z[i] = lab.omega[i] - frame;
    }
    p.j = lab.j.clone();
    p.j_z = lab.j_z.clone();
    p.g_0 = lab.g_0.clone();
    p.g_1 = lab.g_1.clone();
    p.g_2 = lab.g_2.clone();
    p.validate()?;
    Ok(p)
}

/// Second-order elimination of detuned qubits.
///
/// `delta` is the frequency of the resonant qubits minus that of the detuned
/// ones. Returns the induced next-nearest XY coupling `j²/|delta|` and, per
/// qubit, the coefficient of its excitation number: `+degree·j²/delta` on
/// resonant qubits and `−degree·j²/delta` on detuned ones.
pub fn effective_nnn_coupling(j: f64, delta: f64, degree: &[usize], detuned: &[bool]) -> Result<(f64, Vec<f64>)> {
    if delta == 0.0 {
        return Err(LmpoError::InvalidParameter("delta must be non-zero".into()));
    }
    if degree.len() != detuned.len() {
        return Err(LmpoError::InvalidParameter("degree and detuned must have equal length".into()));
    }
    let unit = j * j / delta;
    let shifts = degree
        .iter()
        .zip(detuned)
        .map(|(&d, &off)| if off { -unit * d as f64 } else { unit * d as f64 })
        .collect();
    Ok((j * j / delta.abs(), shifts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn resonant_drive_on_qubit_zero() {
        let mut lab = LabFrameParams::alternating(2.0 * PI * 5000.0, 0.0, &[0, 1, 0], 2.0 * PI);
        lab.g_0 = vec![0.1; 3];
        let p = lab_to_rotating(&lab).unwrap();
        assert_eq!(p.h_x, vec![2.0 * PI, 0.0, 0.0]);
        assert!(p.h_z.iter().all(|&h| h == 0.0));
        assert_eq!(p.g_0, vec![0.1; 3]);
    }

    #[test]
    fn alternating_detuning() {
        let lab = LabFrameParams::alternating(2.0 * PI * 5000.0, 2.0 * PI * 5.0, &[0, 1, 0, 1], 1.0);
        let p = lab_to_rotating(&lab).unwrap();
        for (i, h) in p.h_z.iter().enumerate() {
            let want = if i % 2 == 1 { 2.0 * PI * 5.0 } else { 0.0 };
            assert!((h - want).abs() < 1e-9);
        }
    }

    #[test]
    fn distinct_drive_frequencies_rejected() {
        let mut lab = LabFrameParams::alternating(1.0, 0.5, &[0, 1], 1.0);
        lab.drive_amp[1] = 1.0;
        lab.drive_freq[1] = 1.5;
        assert!(matches!(lab_to_rotating(&lab), Err(LmpoError::Unsupported(_))));
    }

    #[test]
    fn effective_coupling() {
        let (j_eff, shifts) =
            effective_nnn_coupling(2.0 * PI, 2.0 * PI * 5.0, &[1, 2, 1], &[false, true, false]).unwrap();
        assert!((j_eff - 2.0 * PI * 0.2).abs() < 1e-12);
        let unit = 2.0 * PI / 5.0;
        assert!((shifts[0] - unit).abs() < 1e-12 && (shifts[1] + 2.0 * unit).abs() < 1e-12);
        assert!(effective_nnn_coupling(1.0, 0.0, &[1], &[false]).is_err());
        assert!(effective_nnn_coupling(1.0, 1e12, &[1], &[false]).unwrap().0 < 1e-11);
    }
}
