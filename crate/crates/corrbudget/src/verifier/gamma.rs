//! Classical-quantum final states and the key-swap channel that maps them
//! to their ideal counterparts: per key-length sector, trace out the key
//! registers and reattach the uniform identical key, keeping the sector
//! probability and Eve's marginal.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::distance::{hermitian_trace_norm, max_asymmetry};
use super::{C64, VerifierError};

/// One classical branch: key length `K`, Alice's and Bob's keys, the
/// branch probability `p(K) * p(k_A, k_B | K)`, and Eve's conditional
/// state.
#[derive(Debug, Clone)]
pub struct CqEntry {
    pub key_len: u32,
    pub key_a: u64,
    pub key_b: u64,
    pub weight: f64,
    pub eve: DMatrix<C64>,
}

/// A classical-quantum final state: orthogonal classical branches with
/// unit total weight and unit-trace Eve operators.
#[derive(Debug, Clone)]
pub struct CqFinalState {
    entries: Vec<CqEntry>,
    eve_dim: usize,
}

impl CqFinalState {
    pub fn new(entries: Vec<CqEntry>) -> Result<Self, VerifierError> {
        assert!(!entries.is_empty(), "state must have at least one branch");
        let eve_dim = entries[0].eve.nrows();
        let mut total = 0.0;
        let mut seen = std::collections::BTreeSet::new();
        for e in &entries {
            if e.eve.nrows() != eve_dim || !e.eve.is_square() {
                return Err(VerifierError::DimensionMismatch {
                    a: e.eve.nrows(),
                    b: eve_dim,
                });
            }
            // K = 0 branches (aborts) fall out of this too: the only key
            // that fits in zero bits is 0.
            let cap = 1u64 << e.key_len;
            if e.key_a >= cap || e.key_b >= cap {
                return Err(VerifierError::KeyOutOfRange {
                    key: e.key_a.max(e.key_b),
                    key_len: e.key_len,
                });
            }
            if !seen.insert((e.key_len, e.key_a, e.key_b)) {
                return Err(VerifierError::DuplicateLabel {
                    key_len: e.key_len,
                    key_a: e.key_a,
                    key_b: e.key_b,
                });
            }
            let asym = max_asymmetry(&e.eve);
            if asym > 1e-10 {
                return Err(VerifierError::NotHermitian(asym));
            }
            let tr: C64 = e.eve.diagonal().iter().sum();
            if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
                return Err(VerifierError::NotDensity(format!("Eve trace = {tr}")));
            }
            total += e.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(VerifierError::InvalidWeights(total));
        }
        Ok(Self { entries, eve_dim })
    }

    pub fn entries(&self) -> &[CqEntry] {
        &self.entries
    }

    pub fn eve_dim(&self) -> usize {
        self.eve_dim
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }
}

/// The key-swap channel: per sector `K`, the key registers are traced
/// out and replaced with the uniform identical key `tau_K`, so the output
/// carries weight `p(K) / 2^K` on each diagonal key pair `(k, k)` and the
/// sector's Eve marginal on every one of them.
pub fn gamma_map(state: &CqFinalState) -> Result<CqFinalState, VerifierError> {
    let eve_dim = state.eve_dim();
    // Sector accumulation: p(K) and the unnormalized Eve marginal.
    let mut sectors: BTreeMap<u32, (f64, DMatrix<C64>)> = BTreeMap::new();
    for e in state.entries() {
        let slot = sectors
            .entry(e.key_len)
            .or_insert_with(|| (0.0, DMatrix::zeros(eve_dim, eve_dim)));
        slot.0 += e.weight;
        slot.1 += &e.eve * C64::new(e.weight, 0.0);
    }
    let mut entries = Vec::new();
    for (key_len, (p_k, marginal)) in sectors {
        if p_k == 0.0 {
            continue;
        }
        let eve = marginal / C64::new(p_k, 0.0);
        let keys = 1u64 << key_len;
        let w = p_k / keys as f64;
        for k in 0..keys {
            entries.push(CqEntry {
                key_len,
                key_a: k,
                key_b: k,
                weight: w,
                eve: eve.clone(),
            });
        }
    }
    CqFinalState::new(entries)
}

/// Direct construction of the ideal reference state, written out from its
/// definition rather than as a channel: for each key length `K` with
/// probability `p(K)`, attach the uniform identical key and Eve's state
/// conditioned on `K` alone, `sum_{kA,kB} p(kA,kB|K) rho(kA,kB)`.
///
/// Deliberately a second code path from [`gamma_map`] so the two can be
/// checked against each other.
pub fn ideal_state(state: &CqFinalState) -> Result<CqFinalState, VerifierError> {
    let dim = state.eve_dim();
    let key_lens: std::collections::BTreeSet<u32> =
        state.entries().iter().map(|e| e.key_len).collect();
    let mut entries = Vec::new();
    for key_len in key_lens {
        let sector: Vec<&CqEntry> = state
            .entries()
            .iter()
            .filter(|e| e.key_len == key_len)
            .collect();
        let p_k: f64 = sector.iter().map(|e| e.weight).sum();
        if p_k == 0.0 {
            continue;
        }
        let mut conditional = DMatrix::zeros(dim, dim);
        for e in &sector {
            conditional += &e.eve * C64::new(e.weight / p_k, 0.0);
        }
        for k in 0..1u64 << key_len {
            entries.push(CqEntry {
                key_len,
                key_a: k,
                key_b: k,
                weight: p_k / (1u64 << key_len) as f64,
                eve: conditional.clone(),
            });
        }
    }
    CqFinalState::new(entries)
}

/// Random classical-quantum state for verification campaigns: up to eight
/// distinct labels with key lengths 0..=3, random density operators for
/// Eve, weights normalized to one.
pub fn random_cq_state<R: rand::Rng>(eve_dim: usize, rng: &mut R) -> CqFinalState {
    let n_entries = rng.random_range(1..=8usize);
    let mut labels = std::collections::BTreeSet::new();
    while labels.len() < n_entries {
        let key_len: u32 = rng.random_range(0..=3);
        let cap = 1u64 << key_len;
        labels.insert((key_len, rng.random_range(0..cap), rng.random_range(0..cap)));
    }
    let mut weights: Vec<f64> = (0..labels.len()).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    // Renormalization above leaves the sum a few ulp off one; nudge the
    // largest weight so the validator's 1e-12 gate is met exactly.
    let drift: f64 = weights.iter().sum::<f64>() - 1.0;
    weights[0] -= drift;
    let entries = labels
        .into_iter()
        .zip(weights)
        .map(|((key_len, key_a, key_b), weight)| CqEntry {
            key_len,
            key_a,
            key_b,
            weight,
            eve: super::distance::random_density(eve_dim, rng),
        })
        .collect();
    CqFinalState::new(entries).expect("constructed state is valid")
}

/// Exact trace distance between two classical-quantum states: the
/// classical labels are orthogonal, so the trace norm splits into one
/// Hermitian block per label.
pub fn cq_trace_distance(a: &CqFinalState, b: &CqFinalState) -> Result<f64, VerifierError> {
    if a.eve_dim() != b.eve_dim() {
        return Err(VerifierError::DimensionMismatch {
            a: a.eve_dim(),
            b: b.eve_dim(),
        });
    }
    let dim = a.eve_dim();
    let mut blocks: BTreeMap<(u32, u64, u64), DMatrix<C64>> = BTreeMap::new();
    for e in a.entries() {
        let block = blocks
            .entry((e.key_len, e.key_a, e.key_b))
            .or_insert_with(|| DMatrix::zeros(dim, dim));
        *block += &e.eve * C64::new(e.weight, 0.0);
    }
    for e in b.entries() {
        let block = blocks
            .entry((e.key_len, e.key_a, e.key_b))
            .or_insert_with(|| DMatrix::zeros(dim, dim));
        *block -= &e.eve * C64::new(e.weight, 0.0);
    }
    let mut acc = 0.0;
    for (_, diff) in blocks {
        acc += hermitian_trace_norm(diff);
    }
    Ok(0.5 * acc)
}
