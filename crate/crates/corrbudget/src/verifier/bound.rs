//! Exact confrontation of the planner's bound: build the two global
//! states, measure the true trace distance, compare against
//! `sqrt(N * delta_le)`, and replay every inequality in the derivation on
//! concrete hybrid states.

use corrbudget_core::{trace_distance_budget, CorrelationModel};

use super::source::SourceSpec;
use super::states::build_states;
use super::{distance::pure_trace_distance, VerifierError};

const INEQ_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct BoundCheck {
    pub t_exact: f64,
    pub d_bound: f64,
    /// `d_bound - t_exact`; negative means the bound failed.
    pub margin: f64,
    pub pass: bool,
    pub vacuous: bool,
}

/// Checks that the kernel realizes the model's correlation strengths,
/// then compares the exact trace distance against the planner's bound.
pub fn check_bound(
    spec: &SourceSpec,
    model: &CorrelationModel,
    n: u64,
    l_e: u64,
) -> Result<BoundCheck, VerifierError> {
    for l in 1..=spec.kernel_len() {
        let realized = spec.realized_epsilon(l);
        let expected = model.epsilon_at(l)?;
        if (realized - expected).abs() > 1e-10 {
            return Err(VerifierError::KernelModelMismatch {
                l,
                realized,
                expected,
            });
        }
    }
    let pair = build_states(spec, n, l_e)?;
    let t_exact = pure_trace_distance(&pair.psi_trunc, &pair.psi_inf)?;
    let budget = trace_distance_budget(model, n, l_e)?;
    Ok(BoundCheck {
        t_exact,
        d_bound: budget.d,
        margin: budget.d - t_exact,
        pass: t_exact <= budget.d + INEQ_TOL,
        vacuous: budget.vacuous,
    })
}

/// One restored history entry in the hybrid chain.
#[derive(Debug, Clone, Copy)]
pub struct ChainStep {
    pub separation: u64,
    pub distance: f64,
    /// `sqrt(epsilon_l)` for this separation.
    pub bound: f64,
    pub pass: bool,
}

/// Every intermediate quantity in the derivation for one round: the
/// telescoped per-round chain, the per-round overlap floor, and the
/// global overlap floor recorded under both candidate exponents (the
/// product over rounds `l_e+2..=N` has `N - l_e - 1` factors; the
/// printed exponent uses `N - l_e - 2`; both are evaluated).
#[derive(Debug, Clone)]
pub struct ChainReport {
    pub steps: Vec<ChainStep>,
    pub step_sum: f64,
    pub end_to_end: f64,
    pub triangle_pass: bool,
    pub round_overlap: f64,
    pub round_overlap_floor: f64,
    pub round_pass: bool,
    pub global_overlap: f64,
    pub global_floor_printed: f64,
    pub global_floor_factor_count: f64,
    pub global_pass_printed: bool,
    pub global_pass_factor_count: bool,
}

impl ChainReport {
    /// All inequalities with the factor-count exponent for the global
    /// floor; the printed-exponent variant is recorded but not gating.
    pub fn pass(&self) -> bool {
        self.steps.iter().all(|s| s.pass)
            && self.triangle_pass
            && self.round_pass
            && self.global_pass_factor_count
    }
}

/// Replays the derivation chain for round `k` with the given previous
/// settings (`history[0]` is round `k - 1`). Hybrid state `m` keeps the
/// true history up to separation `m` and the reference setting beyond.
pub fn check_chain(
    spec: &SourceSpec,
    n: u64,
    l_e: u64,
    k: u64,
    j_current: usize,
    history: &[usize],
) -> Result<ChainReport, VerifierError> {
    if !(l_e + 1 < k && k <= n) {
        return Err(VerifierError::InvalidChainRound { k, l_e, n });
    }
    if history.len() != (k - 1) as usize {
        return Err(VerifierError::HistoryLength {
            got: history.len(),
            expected: (k - 1) as usize,
        });
    }

    let hybrid = |m: u64| spec.emitted_state(j_current, history, Some(m));
    let full = spec.emitted_state(j_current, history, None)?;

    let mut steps = Vec::new();
    let mut step_sum = 0.0;
    let mut prev = hybrid(l_e)?;
    for m in (l_e + 1)..k {
        let cur = hybrid(m)?;
        let distance = pure_trace_distance(&prev, &cur)?;
        let bound = spec.realized_epsilon(m).sqrt();
        steps.push(ChainStep {
            separation: m,
            distance,
            bound,
            pass: distance <= bound + INEQ_TOL,
        });
        step_sum += distance;
        prev = cur;
    }

    let truncated = hybrid(l_e)?;
    let end_to_end = pure_trace_distance(&truncated, &full)?;
    let triangle_pass = step_sum + INEQ_TOL >= end_to_end;

    let delta_le = {
        let s = spec.realized_sqrt_delta(l_e, n);
        s * s
    };
    let ov = truncated[0].conj() * full[0] + truncated[1].conj() * full[1];
    let round_overlap = ov.norm();
    let round_overlap_floor = (1.0 - delta_le).max(0.0).sqrt();
    let round_pass = round_overlap + INEQ_TOL >= round_overlap_floor;

    let pair = build_states(spec, n, l_e)?;
    let global_overlap = pair.overlap();
    let base = (1.0 - delta_le).max(0.0);
    let global_floor_printed = base.powf((n - l_e) as f64 / 2.0 - 1.0);
    let global_floor_factor_count = base.powf(((n - l_e) as f64 - 1.0) / 2.0);

    Ok(ChainReport {
        steps,
        step_sum,
        end_to_end,
        triangle_pass,
        round_overlap,
        round_overlap_floor,
        round_pass,
        global_overlap,
        global_floor_printed,
        global_floor_factor_count,
        global_pass_printed: global_overlap + INEQ_TOL >= global_floor_printed,
        global_pass_factor_count: global_overlap + INEQ_TOL >= global_floor_factor_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use corrbudget_core::TabulatedModel;

    fn tab_model(eps: &[f64]) -> CorrelationModel {
        CorrelationModel::from(TabulatedModel::new(eps.to_vec()).unwrap())
    }

    #[test]
    fn uncorrelated_bound_is_exactly_zero() {
        let model = tab_model(&[0.0, 0.0, 0.0]);
        let spec = SourceSpec::from_model(&model, 2, 3).unwrap();
        let check = check_bound(&spec, &model, 3, 0).unwrap();
        assert_eq!(check.t_exact, 0.0);
        assert_eq!(check.d_bound, 0.0);
        assert!(check.pass);
    }

    #[test]
    fn small_tabulated_instance_within_bound() {
        let model = tab_model(&[0.04, 0.01, 0.0]);
        let spec = SourceSpec::from_model(&model, 2, 3).unwrap();
        let check = check_bound(&spec, &model, 3, 1).unwrap();
        // d = sqrt(3) * sqrt(0.01) on this instance.
        assert!((check.d_bound - (3.0f64 * 0.01).sqrt()).abs() < 1e-12);
        assert!(check.t_exact >= 0.0 && check.t_exact <= check.d_bound);
        assert!(check.pass);
    }

    #[test]
    fn mismatched_kernel_is_rejected() {
        let model = tab_model(&[0.04, 0.01]);
        let other = tab_model(&[0.04, 0.02]);
        let spec = SourceSpec::from_model(&other, 2, 2).unwrap();
        assert!(matches!(
            check_bound(&spec, &model, 3, 0),
            Err(VerifierError::KernelModelMismatch { .. })
        ));
    }

    #[test]
    fn reference_history_chain_is_all_zeros() {
        let model = tab_model(&[0.04, 0.01, 0.005]);
        let spec = SourceSpec::from_model(&model, 2, 3).unwrap();
        let report = check_chain(&spec, 4, 0, 4, 1, &[0, 0, 0]).unwrap();
        for s in &report.steps {
            assert_eq!(s.distance, 0.0);
        }
        assert_eq!(report.end_to_end, 0.0);
        assert!(report.pass());
    }

    #[test]
    fn single_differing_entry_matches_closed_form() {
        // One non-reference entry at separation 2: exactly one nonzero
        // step of size sin(g * delta_2 / 2).
        let eps = [0.0, 0.01, 0.0];
        let model = tab_model(&eps);
        let spec = SourceSpec::from_model(&model, 2, 3).unwrap();
        let report = check_chain(&spec, 4, 0, 4, 1, &[0, 1, 0]).unwrap();
        let nonzero: Vec<_> = report.steps.iter().filter(|s| s.distance > 1e-15).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].separation, 2);
        let delta = 2.0 * (0.01f64).sqrt().asin();
        let expected = (delta / 2.0).sin();
        assert!((nonzero[0].distance - expected).abs() < 1e-12);
        assert!(report.pass());
    }

    #[test]
    fn chain_preconditions_enforced() {
        let model = tab_model(&[0.01]);
        let spec = SourceSpec::from_model(&model, 2, 1).unwrap();
        assert!(matches!(
            check_chain(&spec, 3, 2, 3, 0, &[0, 0]),
            Err(VerifierError::InvalidChainRound { .. })
        ));
        assert!(matches!(
            check_chain(&spec, 3, 0, 3, 0, &[0]),
            Err(VerifierError::HistoryLength { .. })
        ));
    }
}
