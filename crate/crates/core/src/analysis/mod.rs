//! Numerical audit of the qualitative properties of profiles, convergence
//! studies in the truncation radius, parameter-plane sweeps and the
//! self-similar ansatz check against the time-dependent equation.

mod ansatz;
mod convergence;
mod lemmas;
mod sweep;

pub use ansatz::{
    ansatz_residual_check, ansatz_residual_check_with_step, AnsatzCheck, DEFAULT_FD_STEP,
};
pub use convergence::{convergence_study, ConvergenceRow, ConvergenceTable};
pub use lemmas::{
    checkpoints, verify_lemmas, verify_lemmas_with, LemmaEntry, LemmaReport, LemmaTolerances,
};
pub use sweep::{linspace, sweep, sweep_with, CellStatus, SweepCell, THREADS_ENV};
