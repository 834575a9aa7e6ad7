//! Exact verification of the correlation-budget bound on small instances.
//!
//! Everything here builds states explicitly and measures distances
//! exactly: a rotation-kernel toy source that saturates the correlation
//! definition, dense amplitude vectors for the unbounded and truncated
//! global states, the per-round hybrid chain behind the bound's
//! derivation, the key-swap channel on classical-quantum final states,
//! and random trace-preserving channels for contraction checks.

mod bound;
mod distance;
mod gamma;
mod source;
mod states;

pub use bound::{check_bound, check_chain, BoundCheck, ChainReport, ChainStep};
pub use distance::{
    dpi_property, mixed_trace_distance, partial_trace_env, pure_trace_distance, random_density,
    Channel, DpiCheck,
};
pub use gamma::{cq_trace_distance, gamma_map, ideal_state, random_cq_state, CqEntry, CqFinalState};
pub use source::SourceSpec;
pub use states::{build_states, overlap_by_formula, GlobalStatePair, DIM_CAP};

use corrbudget_core::ModelError;
use thiserror::Error;

pub type C64 = num_complex::Complex64;

#[derive(Debug, Error)]
pub enum VerifierError {
    #[error("setting {setting} outside alphabet of size {alphabet}")]
    SettingOutOfAlphabet { setting: usize, alphabet: usize },

    #[error("dimension mismatch: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },

    #[error("instance too large: dimension {dim} exceeds cap {cap}")]
    ResourceLimit { dim: u128, cap: u128 },

    #[error("matrix not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("weights sum to {0} instead of 1")]
    InvalidWeights(f64),

    #[error("invalid probabilities: sum to {0} instead of 1")]
    InvalidProbabilities(f64),

    #[error("base state {index} has norm {norm}, expected 1")]
    InvalidBaseState { index: usize, norm: f64 },

    #[error("kernel angle {value} at separation {l} outside [0, pi]")]
    InvalidKernelAngle { l: u64, value: f64 },

    #[error("key {key} does not fit in {key_len} bits")]
    KeyOutOfRange { key: u64, key_len: u32 },

    #[error("duplicate classical label (K={key_len}, kA={key_a}, kB={key_b})")]
    DuplicateLabel { key_len: u32, key_a: u64, key_b: u64 },

    #[error(
        "kernel does not realize the model at separation {l}: \
         kernel gives {realized}, model gives {expected}"
    )]
    KernelModelMismatch { l: u64, realized: f64, expected: f64 },

    #[error("invalid chain round: need l_e + 1 < k <= N, got k={k}, l_e={l_e}, n={n}")]
    InvalidChainRound { k: u64, l_e: u64, n: u64 },

    #[error("history has {got} entries, expected {expected}")]
    HistoryLength { got: usize, expected: usize },

    #[error(transparent)]
    Model(#[from] ModelError),
}
