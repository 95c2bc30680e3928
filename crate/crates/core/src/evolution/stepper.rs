use crate::error::{LmpoError, Result};
use crate::linalg::C64;
use crate::model::{Lattice, LiouvillianMPO};
use crate::observables::{Environments, ObservableRequest, TrajectoryRecord};
use crate::tensor_core::{apply_mpo_in_place, VectorizedState};

use super::propagator::{make_propagators, PropagatorSet, StepperConfig};

/// Advance `state` by one step; returns the largest discarded Schmidt weight.
pub fn step(state: &mut VectorizedState, props: &PropagatorSet, cfg: &StepperConfig) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for sub in &props.substeps {
        if sub.mpo.is_identity() {
            continue;
        }
        worst = worst.max(apply_mpo_in_place(&sub.mpo, state, cfg.cutoff, cfg.max_dim)?);
    }
    Ok(worst)
}

/// (ρ + ρ†)/2: the real part of every Pauli coefficient, recompressed.
pub fn hermitize(state: &VectorizedState, cutoff: f64, max_dim: usize) -> Result<VectorizedState> {
    if state.tensors().iter().all(|t| t.data.iter().all(|z| z.im == 0.0)) {
        return Ok(state.clone());
    }
    let mut sum = state.add(&state.conj())?;
    sum.scale(C64::new(0.5, 0.0));
    sum.compress(cutoff, max_dim)?;
    Ok(sum)
}

/// Rescale to unit trace; returns the trace before rescaling.
pub fn force_trace(state: &mut VectorizedState) -> Result<C64> {
    let tr = Environments::new(state).trace();
    if tr.norm() < 1e-12 {
        return Err(LmpoError::Degenerate(format!("trace {tr} is too small to renormalize")));
    }
    state.scale(tr.inv());
    Ok(tr)
}

/// Number of whole steps of `tau` between two times.
pub fn step_count(t_init: f64, t_final: f64, tau: f64) -> Result<usize> {
    if t_final < t_init {
        return Err(LmpoError::InvalidParameter(format!("final time {t_final} precedes initial time {t_init}")));
    }
    let ratio = (t_final - t_init) / tau;
    let rounded = ratio.round();
    if (ratio - rounded).abs() > 1e-9 {
        return Err(LmpoError::InvalidParameter(format!(
            "time span {} is not a whole number of steps of {tau}",
            t_final - t_init
        )));
    }
    Ok(rounded as usize)
}

/// Evolve `state` from `t_init` to `t_final`, appending to `record`.
///
/// Observables are recorded at `t_init`, every `output_every` steps and at
/// `t_final`. The hermitization cadence counts steps from time zero, so a
/// run split at a step boundary hermitizes at the same steps as a whole one.
/// On breakdown the record keeps every row up to the failing time.
#[allow(clippy::too_many_arguments)]
pub fn evolve_into(
    state: &mut VectorizedState,
    lattice: &Lattice,
    props: &PropagatorSet,
    t_init: f64,
    t_final: f64,
    cfg: &StepperConfig,
    record: &mut TrajectoryRecord,
) -> Result<()> {
    cfg.validate()?;
    if (props.tau - cfg.tau).abs() > 1e-15 * cfg.tau {
        return Err(LmpoError::InvalidParameter("propagators were built for another time step".into()));
    }
    if state.len() != lattice.n_qubits {
        return Err(LmpoError::Structure(format!(
            "state of {} sites on a lattice of {} qubits",
            state.len(),
            lattice.n_qubits
        )));
    }
    let steps = step_count(t_init, t_final, cfg.tau)?;
    let offset = (t_init / cfg.tau).round() as usize;
    if cfg.force_trace {
        force_trace(state)?;
    }
    let check = |record: &TrajectoryRecord, t: f64| -> Result<()> {
        match record.max_imag.last() {
            Some(&im) if im > cfg.breakdown_imag => Err(LmpoError::Breakdown(format!(
                "imaginary part {im:.3e} of an expectation value at t = {t}"
            ))),
            _ => Ok(()),
        }
    };
    if record.times.last().is_none_or(|&last| t_init > last + 1e-12 * t_init.abs().max(1.0)) {
        record.record(t_init, state, lattice)?;
        check(record, t_init)?;
    }
    for m in 1..=steps {
        step(state, props, cfg)?;
        if cfg.hermitize_every > 0 && (offset + m) % cfg.hermitize_every == 0 {
            *state = hermitize(state, cfg.cutoff, cfg.max_dim)?;
        }
        if cfg.force_trace {
            force_trace(state)?;
        }
        if m % cfg.output_every == 0 || m == steps {
            let t = if m == steps { t_final } else { t_init + m as f64 * cfg.tau };
            record.record(t, state, lattice)?;
            check(record, t)?;
        }
    }
    Ok(())
}

/// Build propagators for `gen` and evolve, returning a fresh record.
pub fn evolve(
    state: &mut VectorizedState,
    gen: &LiouvillianMPO,
    t_init: f64,
    t_final: f64,
    cfg: &StepperConfig,
    request: &ObservableRequest,
) -> Result<TrajectoryRecord> {
    let props = make_propagators(gen, cfg)?;
    let mut record = TrajectoryRecord::new(request);
    evolve_into(state, gen.lattice(), &props, t_init, t_final, cfg, &mut record)?;
    Ok(record)
}
