//! Security-parameter budgeting for QKD sources with unbounded pulse
//! correlations, plus an exact desk-scale verifier.
//!
//! The planning arithmetic lives in [`corrbudget_core`] (re-exported as
//! [`core`]). This crate adds what needs `std`:
//!
//! - [`verifier`]: dense-state construction of the actual correlated
//!   global states at small `N`, exact trace distances, the key-swap
//!   channel on classical-quantum final states, and random-channel
//!   contraction checks. This is where the planner's bound is confronted
//!   with exactly built counterexamples-in-waiting.
//! - [`io`]: the CSV and key-value formats the tool reads and writes.
//! - [`cli`]: the `plan | fig2 | fit | verify` subcommands.

#![forbid(unsafe_code)]

pub use corrbudget_core as core;

pub mod cli;
pub mod io;
pub mod verifier;
