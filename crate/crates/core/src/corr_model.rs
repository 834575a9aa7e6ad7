//! Correlation-magnitude profiles `epsilon_l` and the tail aggregate
//! `sqrt(delta_le) = sum_{l > l_e} sqrt(epsilon_l)`.

use alloc::vec::Vec;
use core::fmt;

/// Errors raised by model construction and evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// `epsilon_1` outside `(0, 1]`.
    InvalidEpsilon1(f64),
    /// Decay rate `C` not strictly positive (or non-finite).
    InvalidDecayRate(f64),
    /// A tabulated entry outside `[0, 1]`.
    InvalidTableEntry { l: u64, value: f64 },
    /// Pulse separation `l = 0` makes no sense (nearest neighbour is `l = 1`).
    ZeroSeparation,
    /// Query beyond the tabulated range; the characterization data does not
    /// cover this separation and we refuse to extrapolate.
    BeyondTable { l: u64, l_max: u64 },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidEpsilon1(v) => {
                write!(f, "epsilon_1 must be in (0, 1], got {v}")
            }
            ModelError::InvalidDecayRate(v) => {
                write!(f, "decay rate C must be > 0, got {v}")
            }
            ModelError::InvalidTableEntry { l, value } => {
                write!(f, "epsilon_{l} must be in [0, 1], got {value}")
            }
            ModelError::ZeroSeparation => write!(f, "pulse separation l must be >= 1"),
            ModelError::BeyondTable { l, l_max } => write!(
                f,
                "epsilon_{l} requested but the table only covers l <= {l_max}; \
                 characterization data is insufficient for this separation"
            ),
        }
    }
}

impl core::error::Error for ModelError {}

/// `epsilon_l = epsilon_1 * exp(-C * (l - 1))`: nearest-neighbour magnitude
/// `epsilon_1` decaying at rate `C` per unit separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialModel {
    epsilon1: f64,
    decay_c: f64,
}

impl ExponentialModel {
    pub fn new(epsilon1: f64, decay_c: f64) -> Result<Self, ModelError> {
        if !(epsilon1 > 0.0 && epsilon1 <= 1.0) {
            return Err(ModelError::InvalidEpsilon1(epsilon1));
        }
        if !(decay_c > 0.0) || !decay_c.is_finite() {
            return Err(ModelError::InvalidDecayRate(decay_c));
        }
        Ok(Self { epsilon1, decay_c })
    }

    pub fn epsilon1(&self) -> f64 {
        self.epsilon1
    }

    pub fn decay_c(&self) -> f64 {
        self.decay_c
    }

    /// `epsilon_l` for `l >= 1`.
    pub fn epsilon_at(&self, l: u64) -> Result<f64, ModelError> {
        if l == 0 {
            return Err(ModelError::ZeroSeparation);
        }
        // Iterated multiplication by q = e^{-C} keeps the successive ratio
        // epsilon_{l+1} / epsilon_l equal to q to within rounding of a
        // single multiply. Falls back to the closed form for separations
        // far beyond any physical kernel.
        if l > 100_000 {
            return Ok(self.epsilon1 * libm::exp(-self.decay_c * (l - 1) as f64));
        }
        let q = libm::exp(-self.decay_c);
        let mut v = self.epsilon1;
        for _ in 1..l {
            v *= q;
            if v == 0.0 {
                break;
            }
        }
        Ok(v)
    }

    /// Infinite-tail closed form of the aggregate,
    /// `sqrt(epsilon_1 * exp(-C * l_e)) / (1 - sqrt(exp(-C)))`.
    ///
    /// This upper-bounds the finite sum `sum_{l=l_e+1}^{N} sqrt(epsilon_l)`
    /// for every `N`, so using it is always on the safe side of the budget.
    pub fn sqrt_delta_tail(&self, l_e: u64) -> f64 {
        let log_num = 0.5 * (libm::log(self.epsilon1) - self.decay_c * l_e as f64);
        // 1 - e^{-C/2}, via expm1 to keep precision for small C.
        let denom = -libm::expm1(-self.decay_c / 2.0);
        libm::exp(log_num) / denom
    }
}

/// Measured `epsilon_l` values for `l = 1..=L_max`. Queries past the table
/// are an error: assuming zero beyond the measured range is exactly the
/// unjustified assumption this profile exists to avoid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedModel {
    eps: Vec<f64>,
}

impl TabulatedModel {
    pub fn new(eps: Vec<f64>) -> Result<Self, ModelError> {
        for (i, &v) in eps.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(ModelError::InvalidTableEntry {
                    l: (i + 1) as u64,
                    value: v,
                });
            }
        }
        Ok(Self { eps })
    }

    pub fn l_max(&self) -> u64 {
        self.eps.len() as u64
    }

    pub fn epsilon_at(&self, l: u64) -> Result<f64, ModelError> {
        if l == 0 {
            return Err(ModelError::ZeroSeparation);
        }
        self.eps
            .get((l - 1) as usize)
            .copied()
            .ok_or(ModelError::BeyondTable {
                l,
                l_max: self.l_max(),
            })
    }

    /// Direct sum `sum_{l=l_e+1}^{n} sqrt(epsilon_l)`; errors if the table
    /// does not cover all of `l_e+1..=n`.
    pub fn sqrt_delta_sum(&self, l_e: u64, n: u64) -> Result<f64, ModelError> {
        if l_e >= n {
            return Ok(0.0);
        }
        if n > self.l_max() {
            return Err(ModelError::BeyondTable {
                l: n,
                l_max: self.l_max(),
            });
        }
        let mut acc = 0.0;
        for l in (l_e + 1)..=n {
            acc += libm::sqrt(self.eps[(l - 1) as usize]);
        }
        Ok(acc)
    }
}

/// A correlation profile: either a fitted exponential decay or a measured
/// table.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationModel {
    Exponential(ExponentialModel),
    Tabulated(TabulatedModel),
}

impl CorrelationModel {
    /// Correlation magnitude at pulse separation `l >= 1`.
    pub fn epsilon_at(&self, l: u64) -> Result<f64, ModelError> {
        match self {
            CorrelationModel::Exponential(m) => m.epsilon_at(l),
            CorrelationModel::Tabulated(m) => m.epsilon_at(l),
        }
    }

    /// Tail aggregate `sqrt(delta_le)` for `N` emitted signals truncated at
    /// `l_e`. Exponential models use the infinite-tail closed form (an upper
    /// bound on the finite sum); tabulated models sum directly. Empty tail
    /// (`l_e >= N`) is exactly zero.
    pub fn sqrt_delta(&self, l_e: u64, n: u64) -> Result<f64, ModelError> {
        if l_e >= n {
            return Ok(0.0);
        }
        match self {
            CorrelationModel::Exponential(m) => Ok(m.sqrt_delta_tail(l_e)),
            CorrelationModel::Tabulated(m) => m.sqrt_delta_sum(l_e, n),
        }
    }
}

impl From<ExponentialModel> for CorrelationModel {
    fn from(m: ExponentialModel) -> Self {
        CorrelationModel::Exponential(m)
    }
}

impl From<TabulatedModel> for CorrelationModel {
    fn from(m: TabulatedModel) -> Self {
        CorrelationModel::Tabulated(m)
    }
}
