//! Correlation-budget planning for QKD sources whose pulse correlations
//! never drop to exactly zero.
//!
//! The pulses emitted by a realistic QKD source leak a little of every
//! past setting choice, with a magnitude `epsilon_l` that decays with the
//! pulse separation `l` but has no hard cutoff. Security proofs that
//! assume a bounded correlation length can still be applied: truncate at
//! an *effective* maximum correlation length `l_e`, pay a trace-distance
//! budget `d` for the residual tail, and report the key as
//! `(eps_sec + 2d)`-secure instead of `eps_sec`-secure.
//!
//! This crate holds the pure arithmetic of that plan:
//!
//! - [`corr_model`]: the correlation profile `epsilon_l` (exponential
//!   decay or a measured table) and its tail aggregate `sqrt(delta_le)`.
//! - [`planner`]: the budget `d = min(1, sqrt(N) * sqrt(delta_le))`, the
//!   smallest `l_e` meeting a target budget, and the adjusted security
//!   parameter.
//! - [`fit`]: log-linear least squares recovering `(epsilon_1, C)` from
//!   characterization data.
//!
//! Everything here is `no_std` (with `alloc`); IO, the dense-state
//! verifier and the CLI live in the companion `corrbudget` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod corr_model;
pub mod fit;
pub mod planner;

pub use corr_model::{CorrelationModel, ExponentialModel, ModelError, TabulatedModel};
pub use fit::{fit_exponential, FitError, FitResult, SampleSet};
pub use planner::{
    adjust_security_parameter, effective_length_real, fig2_curve, plan, solve_effective_length,
    trace_distance_budget,
    BudgetPlan, BudgetRequest, Fig2Curve, PlanError, PlanMode, TraceDistanceBudget,
};
