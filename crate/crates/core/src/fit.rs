//! Log-linear least squares recovering `(epsilon_1, C)` from measured
//! correlation strengths: `ln(epsilon_l)` is linear in `l - 1` with slope
//! `-C` and intercept `ln(epsilon_1)`.

use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum FitError {
    /// A least-squares line needs at least two points.
    InsufficientData { got: usize },
    /// `epsilon_l = 0` cannot enter a log-domain fit. Sources with true
    /// zeros should be described by a tabulated model instead.
    ZeroSample { l: u64 },
    /// A sample outside `(0, 1]` or with duplicate/zero separation.
    InvalidSample { l: u64, value: f64 },
    DuplicateSeparation { l: u64 },
    /// Fitted `C <= 0`: the data does not decay, so the exponential model
    /// does not apply. Use a tabulated model.
    NonDecaying { fitted_c: f64 },
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::InsufficientData { got } => {
                write!(f, "fit needs at least 2 samples, got {got}")
            }
            FitError::ZeroSample { l } => write!(
                f,
                "epsilon_{l} = 0 cannot enter a log-linear fit; \
                 use a tabulated model for sources with exact zeros"
            ),
            FitError::InvalidSample { l, value } => {
                write!(f, "sample epsilon_{l} = {value} outside (0, 1] or l = 0")
            }
            FitError::DuplicateSeparation { l } => {
                write!(f, "duplicate sample at separation l = {l}")
            }
            FitError::NonDecaying { fitted_c } => write!(
                f,
                "fitted C = {fitted_c} is not positive: the data does not decay; \
                 use a tabulated model instead"
            ),
        }
    }
}

impl core::error::Error for FitError {}

/// Measured `(l, epsilon_l)` pairs with distinct separations, all strictly
/// positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    samples: Vec<(u64, f64)>,
}

impl SampleSet {
    pub fn new(mut samples: Vec<(u64, f64)>) -> Result<Self, FitError> {
        samples.sort_unstable_by_key(|&(l, _)| l);
        for w in samples.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(FitError::DuplicateSeparation { l: w[0].0 });
            }
        }
        for &(l, v) in &samples {
            if v == 0.0 {
                return Err(FitError::ZeroSample { l });
            }
            if l == 0 || !(v > 0.0 && v <= 1.0) || !v.is_finite() {
                return Err(FitError::InvalidSample { l, value: v });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(u64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub epsilon1: f64,
    pub decay_c: f64,
    /// Worst absolute residual of `ln(epsilon_l)` against the fitted line.
    /// A residual above `ln 2` means the model is off by more than 2x
    /// somewhere, which is unsafe for a security budget.
    pub max_log_residual: f64,
}

/// Unweighted least squares of `ln(epsilon_l)` on `l - 1`.
pub fn fit_exponential(samples: &SampleSet) -> Result<FitResult, FitError> {
    let n = samples.len();
    if n < 2 {
        return Err(FitError::InsufficientData { got: n });
    }
    let nf = n as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(l, eps) in samples.samples() {
        let x = (l - 1) as f64;
        let y = libm::log(eps);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    // Distinct separations guarantee a nonzero denominator.
    let slope = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
    let intercept = (sy - slope * sx) / nf;
    let decay_c = -slope;
    if !(decay_c > 0.0) {
        return Err(FitError::NonDecaying { fitted_c: decay_c });
    }
    let mut max_log_residual = 0.0f64;
    for &(l, eps) in samples.samples() {
        let r = libm::fabs(libm::log(eps) - (intercept + slope * (l - 1) as f64));
        max_log_residual = max_log_residual.max(r);
    }
    Ok(FitResult {
        epsilon1: libm::exp(intercept),
        decay_c,
        max_log_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn noiseless_data_recovers_parameters() {
        let (eps1, c) = (1e-3, 1.0);
        let samples: Vec<_> = (1..=10u64)
            .map(|l| (l, eps1 * libm::exp(-c * (l - 1) as f64)))
            .collect();
        let fit = fit_exponential(&SampleSet::new(samples).unwrap()).unwrap();
        assert!(((fit.epsilon1 - eps1) / eps1).abs() < 1e-10);
        assert!(((fit.decay_c - c) / c).abs() < 1e-10);
        assert!(fit.max_log_residual < 1e-10);
    }

    #[test]
    fn two_point_line() {
        let set = SampleSet::new(vec![(1, 1e-3), (2, 1e-5)]).unwrap();
        let fit = fit_exponential(&set).unwrap();
        let c = 2.0 * libm::log(10.0);
        assert!(((fit.decay_c - c) / c).abs() < 1e-12);
        assert!(((fit.epsilon1 - 1e-3) / 1e-3).abs() < 1e-12);
    }

    #[test]
    fn rejects_insufficient_and_zero_and_duplicates() {
        assert_eq!(
            fit_exponential(&SampleSet::new(vec![(1, 0.5)]).unwrap()),
            Err(FitError::InsufficientData { got: 1 })
        );
        assert_eq!(
            SampleSet::new(vec![(1, 0.5), (2, 0.0)]),
            Err(FitError::ZeroSample { l: 2 })
        );
        assert_eq!(
            SampleSet::new(vec![(3, 0.5), (3, 0.4)]),
            Err(FitError::DuplicateSeparation { l: 3 })
        );
    }

    #[test]
    fn increasing_data_is_non_decaying() {
        let set = SampleSet::new(vec![(1, 1e-4), (2, 1e-3), (3, 1e-2)]).unwrap();
        assert!(matches!(
            fit_exponential(&set),
            Err(FitError::NonDecaying { .. })
        ));
    }

    #[test]
    fn fit_is_deterministic() {
        let set = SampleSet::new(vec![(1, 3e-3), (2, 1.1e-3), (5, 1e-4)]).unwrap();
        assert_eq!(fit_exponential(&set), fit_exponential(&set));
    }
}
