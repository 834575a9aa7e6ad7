//! The budget arithmetic: trace-distance budget `d`, the smallest
//! effective correlation length `l_e` meeting a target budget, and the
//! adjusted security parameter `eps_sec + 2d`.

use alloc::vec::Vec;
use core::fmt;

use crate::corr_model::{CorrelationModel, ExponentialModel, ModelError};

/// Errors from plan assembly.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanError {
    Model(ModelError),
    /// Solving for `l_e` from a target `d` needs the exponential closed
    /// form; tabulated models only support fixed-`l_e` mode.
    UnsupportedMode,
    /// A request field outside its stated range.
    InvalidRequest(&'static str),
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::Model(e) => write!(f, "{e}"),
            PlanError::UnsupportedMode => write!(
                f,
                "unsupported mode: target-d planning requires an exponential model; \
                 use fixed-l_e mode for tabulated data"
            ),
            PlanError::InvalidRequest(what) => write!(f, "invalid request: {what}"),
        }
    }
}

impl core::error::Error for PlanError {}

impl From<ModelError> for PlanError {
    fn from(e: ModelError) -> Self {
        PlanError::Model(e)
    }
}

/// Result of a single budget evaluation. `vacuous` marks a raw bound that
/// reached 1, i.e. a certificate that certifies nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceDistanceBudget {
    pub d: f64,
    pub vacuous: bool,
}

/// How the planner picks `l_e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlanMode {
    /// Solve for the smallest `l_e` with `d <= target` (exponential only).
    TargetD(f64),
    /// Take `l_e` as given and report the resulting `d`.
    FixedLe(u64),
}

/// Input to [`plan`]: signal count, correlation profile, planning mode and
/// the security parameter of the bounded-length proof being extended.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetRequest {
    pub n: u64,
    pub model: CorrelationModel,
    pub mode: PlanMode,
    pub eps_sec: f64,
}

impl BudgetRequest {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.n == 0 {
            return Err(PlanError::InvalidRequest("N must be >= 1"));
        }
        if !(self.eps_sec > 0.0 && self.eps_sec < 1.0) {
            return Err(PlanError::InvalidRequest("eps_sec must be in (0, 1)"));
        }
        if let PlanMode::TargetD(d) = self.mode {
            if !(d > 0.0 && d < 1.0) {
                return Err(PlanError::InvalidRequest("target_d must be in (0, 1)"));
            }
        }
        Ok(())
    }
}

/// The full planning result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetPlan {
    pub n: u64,
    pub l_e: u64,
    pub sqrt_delta_le: f64,
    pub d: f64,
    pub eps_sec: f64,
    /// `eps_sec + 2d`; values >= 1 mean no security claim survives and the
    /// caller must say so loudly.
    pub eps_total: f64,
    pub vacuous: bool,
}

/// One planned curve: `l_e` needed to hold a fixed `d` as `N` grows.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Curve {
    pub decay_c: f64,
    pub points: Vec<(u64, u64)>,
}

/// `d = min(1, sqrt(N) * sqrt(delta_le))`, with the clamp reported as
/// `vacuous` (trace distance never exceeds 1, so a raw value past 1 is a
/// bound with no content).
pub fn trace_distance_budget(
    model: &CorrelationModel,
    n: u64,
    l_e: u64,
) -> Result<TraceDistanceBudget, ModelError> {
    let raw = raw_budget(model, n, l_e)?;
    if raw >= 1.0 {
        Ok(TraceDistanceBudget {
            d: 1.0,
            vacuous: true,
        })
    } else {
        Ok(TraceDistanceBudget {
            d: raw,
            vacuous: false,
        })
    }
}

fn raw_budget(model: &CorrelationModel, n: u64, l_e: u64) -> Result<f64, ModelError> {
    Ok(libm::sqrt(n as f64) * model.sqrt_delta(l_e, n)?)
}

/// Real-valued solution of `sqrt(N eps_1 e^{-C l_e}) / (1 - e^{-C/2}) = d`
/// for `l_e`, i.e. `(1/C) ln(N eps_1 / (d^2 (1 - e^{-C/2})^2))`.
///
/// Evaluated in log space so it stays finite for `N` up to 10^18, `d` down
/// to 10^-30 and `C` down to 10^-6. May be negative (correlations already
/// below budget with no truncation).
pub fn effective_length_real(model: &ExponentialModel, n: u64, target_d: f64) -> f64 {
    let c = model.decay_c();
    let log_denom = libm::log(-libm::expm1(-c / 2.0));
    (libm::log(n as f64) + libm::log(model.epsilon1()) - 2.0 * libm::log(target_d)
        - 2.0 * log_denom)
        / c
}

/// Smallest non-negative integer `l_e` whose budget does not exceed
/// `target_d`: ceiling of [`effective_length_real`], then verified against
/// direct evaluation (the ceiling alone can land one off after rounding).
pub fn solve_effective_length(model: &ExponentialModel, n: u64, target_d: f64) -> u64 {
    let real = effective_length_real(model, n, target_d);
    let mut l_e = if real <= 0.0 { 0 } else { libm::ceil(real) as u64 };
    let sqrt_n = libm::sqrt(n as f64);
    let d_at = |l: u64| sqrt_n * model.sqrt_delta_tail(l);
    while d_at(l_e) > target_d {
        l_e += 1;
    }
    while l_e > 0 && d_at(l_e - 1) <= target_d {
        l_e -= 1;
    }
    l_e
}

/// The theorem's arithmetic: a key proven `eps_sec`-secure for the
/// truncated source is `(eps_sec + 2d)`-secure for the real one.
pub fn adjust_security_parameter(eps_sec: f64, d: f64) -> f64 {
    eps_sec + 2.0 * d
}

/// Runs the whole workflow for one request: solve for `l_e` if asked,
/// evaluate the budget, adjust the security parameter.
pub fn plan(request: &BudgetRequest) -> Result<BudgetPlan, PlanError> {
    request.validate()?;
    let l_e = match (&request.mode, &request.model) {
        (PlanMode::FixedLe(l_e), _) => *l_e,
        (PlanMode::TargetD(d), CorrelationModel::Exponential(m)) => {
            solve_effective_length(m, request.n, *d)
        }
        (PlanMode::TargetD(_), CorrelationModel::Tabulated(_)) => {
            return Err(PlanError::UnsupportedMode)
        }
    };
    let sqrt_delta_le = request.model.sqrt_delta(l_e, request.n)?;
    let budget = trace_distance_budget(&request.model, request.n, l_e)?;
    Ok(BudgetPlan {
        n: request.n,
        l_e,
        sqrt_delta_le,
        d: budget.d,
        eps_sec: request.eps_sec,
        eps_total: adjust_security_parameter(request.eps_sec, budget.d),
        vacuous: budget.vacuous,
    })
}

/// One `(N, l_e)` point per grid entry, at fixed decay rate and target
/// budget. The grid must be non-empty and strictly increasing.
pub fn fig2_curve(
    model: &ExponentialModel,
    target_d: f64,
    n_grid: &[u64],
) -> Result<Fig2Curve, PlanError> {
    if n_grid.is_empty() {
        return Err(PlanError::InvalidRequest("N grid must be non-empty"));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PlanError::InvalidRequest("N grid must be strictly increasing"));
    }
    if !(target_d > 0.0 && target_d < 1.0) {
        return Err(PlanError::InvalidRequest("target_d must be in (0, 1)"));
    }
    let points = n_grid
        .iter()
        .map(|&n| (n, solve_effective_length(model, n, target_d)))
        .collect();
    Ok(Fig2Curve {
        decay_c: model.decay_c(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corr_model::TabulatedModel;
    use alloc::vec;

    fn exp_model(eps1: f64, c: f64) -> ExponentialModel {
        ExponentialModel::new(eps1, c).unwrap()
    }

    #[test]
    fn budget_zero_tail_gives_zero() {
        let model: CorrelationModel = TabulatedModel::new(vec![0.0, 0.0]).unwrap().into();
        let b = trace_distance_budget(&model, 2, 0).unwrap();
        assert_eq!(b.d, 0.0);
        assert!(!b.vacuous);
    }

    #[test]
    fn budget_matches_high_precision_oracle() {
        // eps1 = 1e-3, C = 1, N = 1e12, l_e = 69. Expected value frozen from
        // a 60-digit arithmetic evaluation of the closed form.
        let model: CorrelationModel = exp_model(1e-3, 1.0).into();
        let b = trace_distance_budget(&model, 1_000_000_000_000, 69).unwrap();
        let expected = 8.354_673_400_473_198e-11;
        assert!(
            ((b.d - expected) / expected).abs() < 1e-9,
            "d = {}, expected {expected}",
            b.d
        );
        assert!(!b.vacuous);
    }

    #[test]
    fn budget_clamps_to_one_when_vacuous() {
        let model: CorrelationModel = exp_model(1e-3, 1.0).into();
        let b = trace_distance_budget(&model, 1_000_000_000_000, 0).unwrap();
        assert_eq!(b.d, 1.0);
        assert!(b.vacuous);
    }

    #[test]
    fn solve_matches_oracle_at_n_1e12() {
        // Real-valued solution 68.6404719559617... (60-digit oracle), ceiled.
        let m = exp_model(1e-3, 1.0);
        let real = effective_length_real(&m, 1_000_000_000_000, 1e-10);
        assert!(((real - 68.640_471_955_961_70) / 68.64).abs() < 1e-9, "real {real}");
        assert_eq!(solve_effective_length(&m, 1_000_000_000_000, 1e-10), 69);
    }

    #[test]
    fn solve_minimality_check_resolves_n_1e10() {
        // Real value 64.0353017699736... ceils to 65; the oracle evaluation
        // of the budget gives d(64) = 1.0178e-10 > 1e-10, so 65 is minimal.
        let m = exp_model(1e-3, 1.0);
        let real = effective_length_real(&m, 10_000_000_000, 1e-10);
        assert!(((real - 64.035_301_769_973_61) / 64.0).abs() < 1e-9, "real {real}");
        assert_eq!(solve_effective_length(&m, 10_000_000_000, 1e-10), 65);
    }

    #[test]
    fn solve_clamps_to_zero_for_weak_correlations() {
        // N eps1 well below d^2 (1 - e^{-C/2})^2: no truncation needed.
        let m = exp_model(1e-12, 2.0);
        assert_eq!(solve_effective_length(&m, 1, 0.9), 0);
    }

    #[test]
    fn adjust_examples() {
        assert_eq!(adjust_security_parameter(1e-10, 0.0), 1e-10);
        let v = adjust_security_parameter(1e-10, 1e-10);
        assert!((v - 3e-10).abs() < 1e-25);
        // d = 1 yields eps + 2: arithmetically exact, semantically vacuous;
        // flagging is the caller's job.
        assert_eq!(adjust_security_parameter(0.5, 1.0), 2.5);
    }

    #[test]
    fn plan_uncorrelated_source() {
        let req = BudgetRequest {
            n: 1,
            model: TabulatedModel::new(vec![0.0]).unwrap().into(),
            mode: PlanMode::FixedLe(0),
            eps_sec: 1e-10,
        };
        let p = plan(&req).unwrap();
        assert_eq!(p.d, 0.0);
        assert_eq!(p.eps_total, 1e-10);
        assert!(!p.vacuous);
    }

    #[test]
    fn plan_target_d_composition() {
        let req = BudgetRequest {
            n: 1_000_000_000_000,
            model: exp_model(1e-3, 1.0).into(),
            mode: PlanMode::TargetD(1e-10),
            eps_sec: 1e-10,
        };
        let p = plan(&req).unwrap();
        assert_eq!(p.l_e, 69);
        // eps_total = 1e-10 + 2 * 8.3546734e-11 (frozen oracle value).
        let expected = 2.670_934_680_094_64e-10;
        assert!(((p.eps_total - expected) / expected).abs() < 1e-9);
    }

    #[test]
    fn plan_tabulated_target_d_unsupported() {
        let req = BudgetRequest {
            n: 10,
            model: TabulatedModel::new(vec![0.1; 10]).unwrap().into(),
            mode: PlanMode::TargetD(0.5),
            eps_sec: 1e-10,
        };
        assert_eq!(plan(&req), Err(PlanError::UnsupportedMode));
    }

    #[test]
    fn plan_propagates_short_table() {
        let req = BudgetRequest {
            n: 1_000_000,
            model: TabulatedModel::new(vec![0.1; 100]).unwrap().into(),
            mode: PlanMode::FixedLe(10),
            eps_sec: 1e-10,
        };
        assert!(matches!(plan(&req), Err(PlanError::Model(_))));
    }

    #[test]
    fn fig2_rejects_bad_grids() {
        let m = exp_model(1e-3, 1.0);
        assert!(fig2_curve(&m, 1e-10, &[]).is_err());
        assert!(fig2_curve(&m, 1e-10, &[10, 10]).is_err());
        assert!(fig2_curve(&m, 1e-10, &[20, 10]).is_err());
    }

    #[test]
    fn fig2_single_point_matches_solver() {
        let m = exp_model(1e-3, 1.0);
        let c = fig2_curve(&m, 1e-10, &[1_000_000_000_000]).unwrap();
        assert_eq!(c.points, vec![(1_000_000_000_000, 69)]);
    }
}
