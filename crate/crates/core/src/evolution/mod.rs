//! Trotterized time stepping of vectorized density matrices.

mod propagator;
mod stepper;

pub use propagator::{make_propagators, PropagatorSet, StepperConfig, Substep, TrotterOrder};
pub use stepper::{evolve, evolve_into, force_trace, hermitize, step, step_count};
