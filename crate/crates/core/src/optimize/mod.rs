//! Code optimization: the operator-norm dual over the Lindblad span, a
//! brute-force oracle for it, and primal recovery of the optimal code.

mod dual;
mod oracle;
mod primal;

pub use dual::{dual_minimize, dual_objective, dual_operator, optimal_qfi, DualOptions, DualSolution};
pub use oracle::{brute_force_dual, OracleSpec, ORACLE_MAX_SPAN};
pub use primal::{
    optimal_code, primal_recover, primal_trace_norm, verify_duality, DualityReport, PrimalOptions, PrimalSolution,
};
