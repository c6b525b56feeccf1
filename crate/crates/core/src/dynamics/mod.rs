//! Lindblad dynamics with and without error correction, QFI estimation,
//! the linear (SQL) bound and perturbation studies.

mod evolve;
mod qfi;
mod robustness;
mod sql;
mod trajectory;

pub use evolve::{evolve_step, first_order_kraus, liouvillian, Integrator, StepMap, NEGATIVITY_TOL};
pub use qfi::{mixed_state_qfi, qfi_from_derivative, QFI_CUTOFF};
pub use robustness::{
    crossover_slope, effective_jumps, perturbation_strength, rescale_perturbation, robustness_experiment,
    RobustnessGrid, RobustnessReport,
};
pub use sql::{alpha2, beta2, finite_dt_alpha_beta, sql_bound, HCoefficients, SqlBoundReport};
pub use trajectory::{fitted_exponent, free_qfi, one_step_deviation, qec_evolve, SimulationConfig, Spacing, Trajectory};
