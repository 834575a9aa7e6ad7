//! Dense amplitude vectors for the unbounded-history global state and its
//! truncated counterpart, over the joint setting-register/pulse space.
//!
//! Index layout is round-major: round `k` contributes a setting digit
//! (dimension `J`) followed by a pulse qubit digit (dimension 2), with
//! round 1 most significant. Total dimension `(2J)^N`, capped at
//! [`DIM_CAP`].

use super::source::SourceSpec;
use super::{C64, VerifierError};

/// Dense vectors only; anything past this needs a smarter representation
/// than this verifier is meant to have.
pub const DIM_CAP: u128 = 1 << 24;

#[derive(Debug, Clone)]
pub struct GlobalStatePair {
    pub n: u64,
    pub l_e: u64,
    pub dim: usize,
    /// Amplitudes of the unbounded-history state, phases included.
    pub psi_inf: Vec<C64>,
    /// Amplitudes of the state truncated at `l_e`, no phases.
    pub psi_trunc: Vec<C64>,
    /// Phase angles applied to the unbounded state, one per round per
    /// setting sequence (sequence-major).
    pub phases: Vec<f64>,
}

impl GlobalStatePair {
    /// `|<psi_trunc | psi_inf>|`.
    pub fn overlap(&self) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (t, f) in self.psi_trunc.iter().zip(&self.psi_inf) {
            acc += t.conj() * f;
        }
        acc.norm()
    }
}

/// Iterates over all `J^n` setting sequences (round-major odometer).
struct SequenceIter {
    digits: Vec<usize>,
    alphabet: usize,
    done: bool,
}

impl SequenceIter {
    fn new(n: usize, alphabet: usize) -> Self {
        Self {
            digits: vec![0; n],
            alphabet,
            done: false,
        }
    }

    fn advance(&mut self) {
        for d in self.digits.iter_mut().rev() {
            *d += 1;
            if *d < self.alphabet {
                return;
            }
            *d = 0;
        }
        self.done = true;
    }
}

/// Per-round emission data for one setting sequence: the two single-qubit
/// states, the phase angle making their overlap real and positive, and
/// the overlap magnitude.
struct RoundFactors {
    inf: Vec<[C64; 2]>,
    trunc: Vec<[C64; 2]>,
    phases: Vec<f64>,
    overlap_product: f64,
    prob: f64,
}

fn round_factors(
    spec: &SourceSpec,
    seq: &[usize],
    l_e: u64,
) -> Result<RoundFactors, VerifierError> {
    let n = seq.len();
    let mut inf = Vec::with_capacity(n);
    let mut trunc = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);
    let mut overlap_product = 1.0;
    let mut prob = 1.0;
    let mut history = Vec::with_capacity(n);
    for (k, &j_k) in seq.iter().enumerate() {
        // history of round k+1, most recent first
        history.clear();
        history.extend(seq[..k].iter().rev());
        let full = spec.emitted_state(j_k, &history, None)?;
        let cut = spec.emitted_state(j_k, &history, Some(l_e))?;
        let ov = cut[0].conj() * full[0] + cut[1].conj() * full[1];
        // theta = -arg(<trunc|full>); undefined at zero overlap, where any
        // phase works.
        let theta = if ov.norm() == 0.0 { 0.0 } else { -ov.arg() };
        let rot = C64::from_polar(1.0, theta);
        inf.push([rot * full[0], rot * full[1]]);
        trunc.push(cut);
        phases.push(theta);
        overlap_product *= ov.norm();
        prob *= spec.probs()[j_k];
    }
    Ok(RoundFactors {
        inf,
        trunc,
        phases,
        overlap_product,
        prob,
    })
}

/// Builds both global states. The unbounded state carries per-round
/// phases chosen so every per-round inner product against the truncated
/// emission is real and positive.
pub fn build_states(
    spec: &SourceSpec,
    n: u64,
    l_e: u64,
) -> Result<GlobalStatePair, VerifierError> {
    assert!(n >= 1, "need at least one round");
    let j = spec.alphabet_size();
    let dim_wide = (2 * j as u128).pow(n as u32);
    if dim_wide > DIM_CAP {
        return Err(VerifierError::ResourceLimit {
            dim: dim_wide,
            cap: DIM_CAP,
        });
    }
    let dim = dim_wide as usize;
    let n_us = n as usize;
    let mut psi_inf = vec![C64::new(0.0, 0.0); dim];
    let mut psi_trunc = vec![C64::new(0.0, 0.0); dim];
    let mut phases = Vec::new();

    // Stride of round k's digit pair (1-based): (2J)^(n-k).
    let strides: Vec<usize> = (1..=n_us)
        .map(|k| (2 * j).pow((n_us - k) as u32))
        .collect();

    let mut it = SequenceIter::new(n_us, j);
    while !it.done {
        let f = round_factors(spec, &it.digits, l_e)?;
        phases.extend_from_slice(&f.phases);
        let amp = f.prob.sqrt();
        let offset: usize = it
            .digits
            .iter()
            .zip(&strides)
            .map(|(&j_k, &s)| j_k * 2 * s)
            .sum();
        // Scatter the 2^n qubit tensor product under this setting sequence.
        for bits in 0..(1usize << n_us) {
            let mut a_inf = C64::new(amp, 0.0);
            let mut a_trunc = C64::new(amp, 0.0);
            let mut idx = offset;
            for k in 0..n_us {
                let bit = (bits >> (n_us - 1 - k)) & 1;
                a_inf *= f.inf[k][bit];
                a_trunc *= f.trunc[k][bit];
                idx += bit * strides[k];
            }
            psi_inf[idx] += a_inf;
            psi_trunc[idx] += a_trunc;
        }
        it.advance();
    }

    let norm = |v: &[C64]| v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let (ni, nt) = (norm(&psi_inf), norm(&psi_trunc));
    debug_assert!((ni - 1.0).abs() < 1e-10, "psi_inf norm {ni}");
    debug_assert!((nt - 1.0).abs() < 1e-10, "psi_trunc norm {nt}");

    Ok(GlobalStatePair {
        n,
        l_e,
        dim,
        psi_inf,
        psi_trunc,
        phases,
    })
}

/// The product-sum route to the same overlap: sum over setting sequences
/// of the sequence probability times the product of per-round overlap
/// magnitudes. Equality with [`GlobalStatePair::overlap`] is what
/// validates the phase prescription.
pub fn overlap_by_formula(spec: &SourceSpec, n: u64, l_e: u64) -> Result<f64, VerifierError> {
    assert!(n >= 1);
    let j = spec.alphabet_size();
    let seq_count = (j as u128).pow(n as u32);
    if seq_count * n as u128 > DIM_CAP {
        return Err(VerifierError::ResourceLimit {
            dim: seq_count,
            cap: DIM_CAP,
        });
    }
    let mut acc = 0.0;
    let mut it = SequenceIter::new(n as usize, j);
    while !it.done {
        let f = round_factors(spec, &it.digits, l_e)?;
        acc += f.prob * f.overlap_product;
        it.advance();
    }
    Ok(acc)
}
