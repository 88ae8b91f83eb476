use approx::assert_relative_eq;
use piv_core::ideal::{
    control_saturation, posterior_variance, power_of_ideal_test, treated_saturation,
};
use piv_core::oracle::{build_exact_dataset, SyntheticSpec};
use piv_core::{
    ideal_correlation, ideal_sd, piv, posterior, probit_piv, CounterfactualBelief, EstimateSign,
    ObservedStats, Threshold,
};
use proptest::prelude::*;

fn stats_strategy() -> impl Strategy<Value = ObservedStats> {
    (
        0.0..0.95f64,
        10u64..200_000,
        -100.0..100.0f64,
        -100.0..100.0f64,
        0.1..500.0f64,
        0.1..500.0f64,
        0.01..0.99f64,
    )
        .prop_map(|(r2, n, yt, yc, vt, vc, pi)| {
            ObservedStats::new(r2, n, yt, yc, vt, vc, pi).unwrap()
        })
}

fn belief_strategy() -> impl Strategy<Value = CounterfactualBelief> {
    (-200.0..200.0f64, -200.0..200.0f64).prop_map(|(t, c)| CounterfactualBelief {
        y_t_un: t,
        y_c_un: c,
    })
}

fn sign_strategy() -> impl Strategy<Value = EstimateSign> {
    prop_oneof![Just(EstimateSign::Positive), Just(EstimateSign::Negative)]
}

/// A threshold that is valid for `sign`: a statistical critical value, or a
/// fixed value on the same side of zero as the estimate.
fn threshold_strategy(sign: EstimateSign) -> impl Strategy<Value = Threshold> {
    prop_oneof![
        (0.1..4.0f64).prop_map(|c| Threshold::Statistical {
            critical_magnitude: c
        }),
        (0.0..0.3f64).prop_map(move |m| Threshold::Fixed {
            beta_sharp: sign.unit() * m
        }),
    ]
}

fn case() -> impl Strategy<Value = (ObservedStats, CounterfactualBelief, EstimateSign, Threshold)> {
    sign_strategy().prop_flat_map(|sign| {
        (
            stats_strategy(),
            belief_strategy(),
            Just(sign),
            threshold_strategy(sign),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn negating_means_and_sign_leaves_piv_unchanged((stats, belief, sign, threshold) in case()) {
        let direct = piv(&belief, &stats, sign, &threshold).unwrap();
        let mirrored = piv(&belief.mirrored(), &stats.mirrored(), sign.flipped(), &threshold.mirrored()).unwrap();
        prop_assert!((direct.piv - mirrored.piv).abs() <= 1e-12);
        prop_assert!((direct.probit_piv - mirrored.probit_piv).abs() <= 1e-12 * direct.probit_piv.abs().max(1.0));
    }

    #[test]
    fn statistical_probit_is_t_ratio_beyond_signed_critical(
        stats in stats_strategy(),
        belief in belief_strategy(),
        sign in sign_strategy(),
        critical in 0.1..4.0f64,
    ) {
        let threshold = Threshold::Statistical { critical_magnitude: critical };
        let result = piv(&belief, &stats, sign, &threshold).unwrap();
        let c = threshold.signed_critical(sign).unwrap();
        let expected = match sign {
            EstimateSign::Positive => result.t_ratio - c,
            EstimateSign::Negative => c - result.t_ratio,
        };
        prop_assert!((result.probit_piv - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        prop_assert_eq!(probit_piv(&belief, &stats, sign, &threshold).unwrap(), result.probit_piv);

        // the rejection-region form of the same retest
        let r = ideal_correlation(&belief, &stats).unwrap();
        let power = power_of_ideal_test(r, &stats, sign, critical);
        prop_assert!((power - result.piv).abs() <= 1e-12, "power {} piv {}", power, result.piv);
    }

    #[test]
    fn piv_is_a_probability((stats, belief, sign, threshold) in case()) {
        let result = piv(&belief, &stats, sign, &threshold).unwrap();
        prop_assert!(result.probit_piv.is_finite());
        prop_assert!((0.0..=1.0).contains(&result.piv));
        // away from the tails the value is representably inside the open interval
        if result.probit_piv.abs() < 8.0 {
            prop_assert!(result.piv > 0.0 && result.piv < 1.0);
        }
    }

    #[test]
    fn posterior_variance_ignores_the_belief(
        stats in stats_strategy(),
        a in belief_strategy(),
        b in belief_strategy(),
    ) {
        let pa = posterior(&a, &stats).unwrap();
        let pb = posterior(&b, &stats).unwrap();
        prop_assert_eq!(pa.variance, pb.variance);
        prop_assert_eq!(pa.variance, posterior_variance(&stats));
        let expected = (1.0 - stats.r_squared) / (2.0 * stats.n_ob as f64);
        prop_assert!((pa.variance - expected).abs() <= 1e-15 * expected);
    }

    #[test]
    fn correlation_is_a_correlation(stats in stats_strategy(), belief in belief_strategy()) {
        let r = ideal_correlation(&belief, &stats).unwrap();
        prop_assert!(r.abs() < 1.0, "r {}", r);
    }

    #[test]
    fn correlation_capped_along_axes_of_a_null_observed_sample(
        stats in stats_strategy(),
        offset in -1e5..1e5f64,
    ) {
        // observed arms agree and the other counterfactual mean sits at the
        // common value, so the correlation grows monotonically towards its limit
        let m = stats.y_c_ob;
        let stats = ObservedStats { y_t_ob: m, ..stats };
        let along_t = ideal_correlation(&CounterfactualBelief { y_t_un: m + offset, y_c_un: m }, &stats).unwrap();
        let along_c = ideal_correlation(&CounterfactualBelief { y_t_un: m, y_c_un: m + offset }, &stats).unwrap();
        prop_assert!(along_t.abs() <= treated_saturation(&stats) + 1e-12);
        prop_assert!(along_c.abs() <= control_saturation(&stats) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spread_matches_explicit_ideal_sample(
        half_n in 4usize..200,
        share in 0.05..0.95f64,
        means in prop::array::uniform4(-50.0..50.0f64),
        var_t in 0.1..200.0f64,
        var_c in 0.1..200.0f64,
    ) {
        let n_ob = 2 * half_n;
        let n_treated = (2 * ((share * half_n as f64).round() as usize)).clamp(2, n_ob - 2);
        let spec = SyntheticSpec {
            n_ob,
            n_treated,
            y_t_ob: means[0],
            y_c_ob: means[1],
            y_t_un: means[2],
            y_c_un: means[3],
            var_t,
            var_c,
            covariates: 0,
            seed: 0,
        };
        let dataset = build_exact_dataset(&spec).unwrap();
        let ys: Vec<f64> = dataset.rows.iter().map(|r| r.outcome).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / ys.len() as f64;
        let sd = ideal_sd(&spec.belief(), &spec.observed_stats(0.0).unwrap()).unwrap();
        prop_assert!((sd * sd - var).abs() <= 1e-10 * var, "closed form {} dataset {}", sd * sd, var);
    }
}

#[test]
fn limits_do_not_cap_the_correlation_in_general() {
    // half the sample treated, control counterfactual 20 below the observed
    // mean: the correlation peaks near y_t_un = 20.4, above both limits
    let stats = ObservedStats::new(0.0, 100, 0.0, 0.0, 1.0, 1.0, 0.5).unwrap();
    let r = ideal_correlation(
        &CounterfactualBelief {
            y_t_un: 20.4,
            y_c_un: -20.0,
        },
        &stats,
    )
    .unwrap();
    let cap = treated_saturation(&stats).max(control_saturation(&stats));
    assert_relative_eq!(r, 0.705_362_988_689_375, epsilon = 1e-9);
    assert!(r > cap + 0.1);
}

#[test]
fn saturation_limits_reached_far_out() {
    let stats = piv_core::fixtures::retention_stats();
    let (lim_t, lim_c) = (treated_saturation(&stats), control_saturation(&stats));
    let at = |t, c| {
        ideal_correlation(
            &CounterfactualBelief {
                y_t_un: t,
                y_c_un: c,
            },
            &stats,
        )
        .unwrap()
    };
    let mid = stats.y_c_ob;
    assert_relative_eq!(at(1e6, mid), lim_t, epsilon = 1e-4);
    assert_relative_eq!(at(-1e6, mid), -lim_t, epsilon = 1e-4);
    assert_relative_eq!(at(mid, 1e6), -lim_c, epsilon = 1e-4);
    assert_relative_eq!(at(mid, -1e6), lim_c, epsilon = 1e-4);
}
