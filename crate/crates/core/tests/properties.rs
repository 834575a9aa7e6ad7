//! Property tests for the model and planner invariants.

use corrbudget_core::{
    effective_length_real, fit_exponential, solve_effective_length, trace_distance_budget,
    CorrelationModel, ExponentialModel, SampleSet, TabulatedModel,
};
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn exp_model_strategy() -> impl Strategy<Value = ExponentialModel> {
    (log_uniform(1e-8, 1.0), log_uniform(1e-3, 10.0))
        .prop_map(|(e, c)| ExponentialModel::new(e.min(1.0), c).unwrap())
}

proptest! {
    #[test]
    fn sqrt_delta_non_increasing_in_le(m in exp_model_strategy(), n in 2u64..10_000) {
        let model = CorrelationModel::from(m);
        let mut prev = f64::INFINITY;
        for l_e in 0..n.min(200) {
            let v = model.sqrt_delta(l_e, n).unwrap();
            prop_assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn tabulated_sqrt_delta_monotone(eps in prop::collection::vec(0.0..=1.0f64, 1..40)) {
        let l_max = eps.len() as u64;
        let model = CorrelationModel::from(TabulatedModel::new(eps).unwrap());
        // Non-decreasing in N at fixed l_e, non-increasing in l_e at fixed N.
        for l_e in 0..l_max {
            let mut prev = 0.0;
            for n in 1..=l_max {
                let v = model.sqrt_delta(l_e, n).unwrap();
                prop_assert!(v + 1e-15 >= prev);
                prev = v;
            }
        }
        let mut prev = f64::INFINITY;
        for l_e in 0..=l_max {
            let v = model.sqrt_delta(l_e, l_max).unwrap();
            prop_assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn closed_form_dominates_truncated_sum(m in exp_model_strategy(), l_e in 0u64..50) {
        let closed = m.sqrt_delta_tail(l_e);
        // Truncated sum long enough that the remainder is below 1e-30 of
        // the leading term; convergence to 1e-12 relative is then exact.
        let ratio = (-m.decay_c() / 2.0).exp();
        let lead = (m.epsilon1() * (-m.decay_c() * l_e as f64).exp()).sqrt();
        let terms = ((1e-30f64.ln() / ratio.ln()).ceil() as u64).clamp(1, 200_000);
        let mut brute = 0.0;
        for i in (0..terms).rev() {
            brute += lead * ratio.powi(i as i32);
        }
        for n_partial in [1u64, 2, 5, terms / 2 + 1] {
            let mut partial = 0.0;
            for i in 0..n_partial.min(terms) {
                partial += lead * ratio.powi(i as i32);
            }
            prop_assert!(closed + 1e-300 >= partial * (1.0 - 1e-13));
        }
        if brute > 0.0 {
            prop_assert!(((closed - brute) / brute).abs() < 1e-12,
                "closed {closed} brute {brute}");
        }
    }

    #[test]
    fn successive_ratio_is_exp_minus_c(m in exp_model_strategy(), l in 1u64..500) {
        let e_l = m.epsilon_at(l).unwrap();
        let e_next = m.epsilon_at(l + 1).unwrap();
        prop_assume!(e_l > 1e-280); // below that, underflow dominates
        let ratio = e_next / e_l;
        let expected = (-m.decay_c()).exp();
        // 4 ulp at this scale
        prop_assert!((ratio - expected).abs() <= 4.0 * f64::EPSILON * expected);
    }

    #[test]
    fn solver_round_trip_and_minimality(
        m in exp_model_strategy(),
        n in 1u64..1_000_000_000_000_000,
        target_d in log_uniform(1e-20, 0.5),
    ) {
        let model = CorrelationModel::from(m);
        let l_e = solve_effective_length(&m, n, target_d);
        let d = trace_distance_budget(&model, n, l_e).unwrap().d;
        prop_assert!(d <= target_d);
        if l_e > 0 {
            let d_prev = trace_distance_budget(&model, n, l_e - 1).unwrap().d;
            prop_assert!(d_prev > target_d);
        }
    }

    #[test]
    fn solver_monotone_in_n_d_and_c(
        m in exp_model_strategy(),
        n in 1u64..1_000_000_000_000,
        target_d in log_uniform(1e-15, 0.5),
    ) {
        let l_e = solve_effective_length(&m, n, target_d);
        prop_assert!(solve_effective_length(&m, n.saturating_mul(2), target_d) >= l_e);
        prop_assert!(solve_effective_length(&m, n, target_d / 2.0) >= l_e);
        let stiffer = ExponentialModel::new(m.epsilon1(), m.decay_c() * 2.0).unwrap();
        prop_assert!(solve_effective_length(&stiffer, n, target_d) <= l_e);
    }

    #[test]
    fn budget_monotone(m in exp_model_strategy(), n in 1u64..1_000_000_000, l_e in 0u64..100) {
        let model = CorrelationModel::from(m);
        let d = trace_distance_budget(&model, n, l_e).unwrap().d;
        let d_more_n = trace_distance_budget(&model, n * 2, l_e).unwrap().d;
        let d_more_le = trace_distance_budget(&model, n, l_e + 1).unwrap().d;
        prop_assert!(d_more_n + 1e-15 >= d);
        prop_assert!(d_more_le <= d + 1e-15);
    }

    #[test]
    fn degenerate_zero_model(n in 1u64..50, l_e in 0u64..50) {
        let model = CorrelationModel::from(TabulatedModel::new(vec![0.0; 64]).unwrap());
        let b = trace_distance_budget(&model, n, l_e).unwrap();
        prop_assert_eq!(b.d, 0.0);
        prop_assert!(!b.vacuous);
    }

    #[test]
    fn solver_finite_in_extreme_ranges(
        eps1 in log_uniform(1e-8, 1.0),
        c in log_uniform(1e-6, 10.0),
        n in 1u64..1_000_000_000_000_000_000,
        target_d in log_uniform(1e-30, 0.5),
    ) {
        let m = ExponentialModel::new(eps1.min(1.0), c).unwrap();
        let real = effective_length_real(&m, n, target_d);
        prop_assert!(real.is_finite());
        let l_e = solve_effective_length(&m, n, target_d);
        let d = trace_distance_budget(&CorrelationModel::from(m), n, l_e).unwrap().d;
        prop_assert!(d.is_finite() && d <= target_d);
    }

    #[test]
    fn fit_round_trip(eps1 in log_uniform(1e-8, 1.0), c in log_uniform(1e-3, 10.0)) {
        let eps1 = eps1.min(1.0);
        let samples: Vec<_> = (1..=12u64)
            .map(|l| (l, eps1 * (-c * (l - 1) as f64).exp()))
            .filter(|&(_, e)| e > 1e-300)
            .collect();
        prop_assume!(samples.len() >= 2);
        let fit = fit_exponential(&SampleSet::new(samples).unwrap()).unwrap();
        prop_assert!(((fit.epsilon1 - eps1) / eps1).abs() < 1e-10);
        prop_assert!(((fit.decay_c - c) / c).abs() < 1e-10);
    }

    #[test]
    fn fit_scale_equivariance(scale in log_uniform(1e-4, 1.0)) {
        let base = vec![(1u64, 0.9f64), (2, 0.31), (3, 0.09), (5, 0.011)];
        let scaled: Vec<_> = base.iter().map(|&(l, e)| (l, e * scale)).collect();
        let f0 = fit_exponential(&SampleSet::new(base).unwrap()).unwrap();
        let f1 = fit_exponential(&SampleSet::new(scaled).unwrap()).unwrap();
        prop_assert!(((f1.epsilon1 / f0.epsilon1 - scale) / scale).abs() < 1e-9);
        prop_assert!(((f1.decay_c - f0.decay_c) / f0.decay_c).abs() < 1e-9);
    }
}
