//! Trace distances (pure and mixed routes) and trace-preserving channels
//! for contraction checks.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{C64, VerifierError};

/// `sqrt(1 - |<phi|psi>|^2)` for unit vectors.
pub fn pure_trace_distance(psi: &[C64], phi: &[C64]) -> Result<f64, VerifierError> {
    if psi.len() != phi.len() {
        return Err(VerifierError::DimensionMismatch {
            a: psi.len(),
            b: phi.len(),
        });
    }
    let mut dot = C64::new(0.0, 0.0);
    for (a, b) in phi.iter().zip(psi) {
        dot += a.conj() * b;
    }
    // sqrt(1 - |<phi|psi>|^2) as the norm of psi's component orthogonal
    // to phi: same value for unit vectors, but no catastrophic
    // cancellation when the states nearly coincide.
    let mut perp_sq = 0.0;
    for (a, b) in phi.iter().zip(psi) {
        perp_sq += (b - dot * a).norm_sqr();
    }
    Ok(perp_sq.sqrt().min(1.0))
}

pub(crate) fn max_asymmetry(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for k in i..m.ncols() {
            worst = worst.max((m[(i, k)] - m[(k, i)].conj()).norm());
        }
    }
    worst
}

/// `sum |eigenvalues|` of a Hermitian matrix. No validation; callers check.
pub(crate) fn hermitian_trace_norm(m: DMatrix<C64>) -> f64 {
    m.symmetric_eigenvalues().iter().map(|v| v.abs()).sum()
}

/// `(1/2) ||rho - sigma||_1` for density matrices.
pub fn mixed_trace_distance(
    rho: &DMatrix<C64>,
    sigma: &DMatrix<C64>,
) -> Result<f64, VerifierError> {
    if rho.nrows() != sigma.nrows() || !rho.is_square() || !sigma.is_square() {
        return Err(VerifierError::DimensionMismatch {
            a: rho.nrows(),
            b: sigma.nrows(),
        });
    }
    for m in [rho, sigma] {
        let asym = max_asymmetry(m);
        if asym > 1e-8 {
            return Err(VerifierError::NotHermitian(asym));
        }
        let tr: C64 = m.diagonal().iter().sum();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(VerifierError::NotDensity(format!("trace = {tr}")));
        }
    }
    Ok(0.5 * hermitian_trace_norm(rho - sigma))
}

/// Partial trace over the environment of a `sys * env` square matrix with
/// system-major index layout (`index = s * env + e`).
pub fn partial_trace_env(m: &DMatrix<C64>, sys: usize, env: usize) -> DMatrix<C64> {
    assert_eq!(m.nrows(), sys * env);
    let mut out = DMatrix::zeros(sys, sys);
    for s1 in 0..sys {
        for s2 in 0..sys {
            let mut acc = C64::new(0.0, 0.0);
            for e in 0..env {
                acc += m[(s1 * env + e, s2 * env + e)];
            }
            out[(s1, s2)] = acc;
        }
    }
    out
}

/// A trace-preserving completely positive map on `dim`-dimensional states.
#[derive(Debug, Clone)]
pub enum Channel {
    Identity,
    /// Everything to the maximally mixed state.
    Depolarizing,
    /// Random isometry into system x environment followed by tracing out
    /// the environment (a Stinespring dilation, so trace preservation and
    /// complete positivity hold by construction).
    Isometry { env: usize, v: DMatrix<C64> },
}

impl Channel {
    pub fn random(dim: usize, env: usize, rng: &mut impl Rng) -> Self {
        // QR of a complex Gaussian matrix: the thin Q is a Haar-ish
        // isometry from dim into dim * env.
        let g = DMatrix::from_fn(dim * env, dim, |_, _| {
            C64::new(standard_normal(rng), standard_normal(rng))
        });
        let q = g.qr().q();
        Channel::Isometry { env, v: q }
    }

    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        match self {
            Channel::Identity => rho.clone(),
            Channel::Depolarizing => {
                let dim = rho.nrows();
                let tr: C64 = rho.diagonal().iter().sum();
                DMatrix::identity(dim, dim) * (tr / C64::new(dim as f64, 0.0))
            }
            Channel::Isometry { env, v } => {
                let dilated = v * rho * v.adjoint();
                partial_trace_env(&dilated, rho.nrows(), *env)
            }
        }
    }
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; avoids ln(0).
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// A random density matrix `G G^dag / tr`.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(standard_normal(rng), standard_normal(rng))
    });
    let m = &g * g.adjoint();
    let tr: C64 = m.diagonal().iter().sum();
    m / tr
}

#[derive(Debug, Clone, Copy)]
pub struct DpiCheck {
    pub before: f64,
    pub after: f64,
    pub pass: bool,
}

/// Trace distance before and after a seeded random trace-preserving
/// channel; data processing says `after <= before`.
pub fn dpi_property(
    rho: &DMatrix<C64>,
    sigma: &DMatrix<C64>,
    channel_seed: u64,
) -> Result<DpiCheck, VerifierError> {
    let mut rng = ChaCha8Rng::seed_from_u64(channel_seed);
    let env = rng.random_range(1..=3usize);
    let channel = Channel::random(rho.nrows(), env, &mut rng);
    let before = mixed_trace_distance(rho, sigma)?;
    let after = mixed_trace_distance(&channel.apply(rho), &channel.apply(sigma))?;
    Ok(DpiCheck {
        before,
        after,
        pass: after <= before + 1e-10,
    })
}
