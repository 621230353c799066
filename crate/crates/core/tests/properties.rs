use proptest::prelude::*;
use rwre_core::env::{PeriodicEnvironment, ProbVec};
use rwre_core::periodic::{exact_return_probability, periodic_rate0};
use rwre_core::rate::{rate_at_zero_closed, rate_at_zero_numeric};

fn sigma(d: usize) -> impl Strategy<Value = ProbVec> {
    prop::collection::vec(0.05f64..1.0, 2 * d).prop_map(|w| ProbVec::from_weights(w).unwrap())
}

fn table_1d() -> impl Strategy<Value = PeriodicEnvironment> {
    (1usize..5).prop_flat_map(|p| {
        prop::collection::vec(sigma(1), p)
            .prop_map(move |t| PeriodicEnvironment::from_table(vec![p], t).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_and_numeric_rates_agree(s in (1usize..4).prop_flat_map(sigma)) {
        let closed = rate_at_zero_closed(&s).unwrap();
        let numeric = rate_at_zero_numeric(&s).unwrap();
        prop_assert!((closed - numeric).abs() < 1e-9, "{closed} vs {numeric}");
        prop_assert!(closed >= 0.0);
    }

    #[test]
    fn homogeneous_return_obeys_chebyshev(s in sigma(1), half in 1usize..40) {
        let n = 2 * half;
        let i0 = rate_at_zero_closed(&s).unwrap();
        let env = PeriodicEnvironment::homogeneous(s).unwrap();
        let p = exact_return_probability(&env, n).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0);
        prop_assert!(p.ln() <= -(n as f64) * i0 + 1e-10);
        prop_assert_eq!(exact_return_probability(&env, n - 1).unwrap(), 0.0);
    }

    #[test]
    fn periodic_rate_ignores_translation(env in table_1d(), shift in -6i64..6) {
        let a = periodic_rate0(&env, 1e-9).unwrap().rate0;
        let b = periodic_rate0(&env.translated(&[shift]), 1e-9).unwrap().rate0;
        prop_assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        prop_assert!(a >= -1e-12);
    }

    #[test]
    fn periodic_rate_is_at_most_the_best_site(env in table_1d()) {
        // every row of the tilted operator sums to some e^{Lambda_x(theta)},
        // so the spectral radius dominates the smallest of them
        let rate = periodic_rate0(&env, 1e-9).unwrap().rate0;
        let worst = env.table().map(|s| rate_at_zero_closed(s).unwrap()).fold(f64::MIN, f64::max);
        prop_assert!(rate <= worst + 1e-8, "{rate} > {worst}");
    }
}
