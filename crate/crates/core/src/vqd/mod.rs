//! Variational quantum deflation on qumode registers.
//!
//! States are found one at a time. Level `n` minimizes
//! `E(psi) + sum_{m<n} beta_m |<psi_m|psi>|^2`, so every `beta_m` must exceed
//! the gap between state `m` and the states still to be found.

mod ansatz;
mod backend;
mod cost;
mod optimize;
mod run;

pub use ansatz::{prepare_state, AnsatzKernel, AnsatzSpec, Trajectory};
pub use backend::{DenseBackend, EnergyBackend, FragmentBackend};
pub use cost::{cost, CostFunction, CostValue, DeflationState};
pub use optimize::{
    lbfgs, minimize, nelder_mead, optimize_state, restart_rng, FiniteDifference, GradientMode, Method, Minimum,
    Objective, OptimizerConfig, StateOptimization, StopReason,
};
pub use run::{merge_levels, run_vqd, Betas, DistinctLevel, StateResult, VqdConfig, VqdResult};
