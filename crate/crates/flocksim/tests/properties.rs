//! Property-based invariants over the numerics and serialization layers.

use flocksim::analysis::normalize_series;
use flocksim::domain::{
    AuthorProfile, FeatureVector, Group, OutcomeObservation, RoundRecord, TweetCandidate,
};
use flocksim::estimators::{
    fit_lasso, fit_ridge, predict, Dataset, Hypothesis, LASSO_MAX_ITER, LASSO_TOL,
};
use flocksim::features::FeatureSchema;
use proptest::prelude::*;

fn finite_f64(limit: f64) -> impl Strategy<Value = f64> {
    (-limit..limit).prop_map(|v: f64| (v * 1e6).round() / 1e6)
}

prop_compose! {
    fn arb_candidate()(
        id in "[a-z0-9]{1,12}",
        text in ".{0,200}",
        follower_count in 0u64..5_000_000,
        following_count in 0u64..100_000,
        status_count in 0u64..1_000_000,
        account_age_days in 0u64..8_000,
        verified in any::<bool>(),
        created_at in 0u64..2_000,
        favorites_at_obs in 0u64..100_000,
        retweets_at_obs in 0u64..100_000,
    ) -> TweetCandidate {
        TweetCandidate {
            id,
            text,
            author: AuthorProfile {
                follower_count,
                following_count,
                status_count,
                account_age_days,
                verified,
            },
            created_at,
            favorites_at_obs,
            retweets_at_obs,
        }
    }
}

prop_compose! {
    fn arb_record()(
        round_index in 0u64..10_000,
        xs in proptest::collection::vec(
            proptest::collection::vec(finite_f64(1.0), 4), 1..6),
        follow in any::<bool>(),
        delta_agent in finite_f64(50.0),
        delta_poster in finite_f64(50.0),
        favorites in 0.0f64..100.0,
        retweets in 0.0f64..100.0,
        weights in proptest::option::of(
            proptest::collection::vec(finite_f64(10.0), 4)),
    ) -> RoundRecord {
        let n = xs.len();
        RoundRecord {
            agent_id: "GE_00".into(),
            group: Group::GE,
            round_index,
            candidates: xs.into_iter().map(FeatureVector).collect(),
            chosen: 0,
            followed_poster: follow,
            outcome: OutcomeObservation {
                delta_agent_followers: delta_agent,
                delta_poster_followers: delta_poster,
                favorites: (favorites * 1e6).round() / 1e6,
                retweets: (retweets * 1e6).round() / 1e6,
                observed_for_chosen: true,
            },
            adviser_outcomes: (1..n)
                .map(|_| OutcomeObservation::for_unchosen(0.0, 1.0, 0.0))
                .collect(),
            reward: 100.0 * delta_agent + 10.0 * delta_poster,
            adviser_rewards: vec![0.0; n - 1],
            committed_weights: weights,
        }
    }
}

/// A random well-posed regression problem.
fn arb_dataset() -> impl Strategy<Value = Dataset> {
    (
        proptest::collection::vec(proptest::collection::vec(finite_f64(3.0), 3), 20..60),
        proptest::collection::vec(finite_f64(5.0), 3),
    )
        .prop_map(|(rows, w)| {
            let mut data = Dataset::new(3);
            for (i, x) in rows.iter().enumerate() {
                // Small deterministic perturbation keeps the Gram matrix
                // full rank even for adversarial row draws.
                let x = [
                    x[0] + 1e-3 * (i as f64).sin(),
                    x[1] + 1e-3 * (i as f64 * 1.7).cos(),
                    x[2] + 1e-3 * ((i * i) as f64 % 7.0),
                ];
                let y = w[0] * x[0] + w[1] * x[1] + w[2] * x[2];
                data.push(&x, y).unwrap();
            }
            data
        })
}

proptest! {
    #[test]
    fn round_record_json_round_trip(record in arb_record()) {
        let json = serde_json::to_string(&record).unwrap();
        let back: RoundRecord = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, record);
    }

    #[test]
    fn ridge_norm_shrinks_as_lambda_grows(data in arb_dataset()) {
        let norm = |h: &Hypothesis| h.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        let mut previous = f64::INFINITY;
        for lambda in [1e-6, 1e-2, 1.0, 100.0] {
            let fit = fit_ridge(&data, lambda).unwrap();
            let n = norm(&fit);
            prop_assert!(n <= previous + 1e-9, "lambda {lambda}: {n} > {previous}");
            previous = n;
        }
    }

    #[test]
    fn lasso_l1_norm_shrinks_as_lambda_grows(data in arb_dataset()) {
        let l1 = |h: &Hypothesis| h.weights.iter().map(|w| w.abs()).sum::<f64>();
        let mut previous = f64::INFINITY;
        for lambda in [0.0, 0.1, 1.0, 10.0] {
            let fit = fit_lasso(&data, lambda, LASSO_TOL, LASSO_MAX_ITER).unwrap();
            let n = l1(&fit.hypothesis);
            prop_assert!(n <= previous + 1e-6, "lambda {lambda}: {n} > {previous}");
            previous = n;
        }
    }

    #[test]
    fn normalized_series_has_zero_mean_unit_std(
        values in proptest::collection::vec(finite_f64(1e3), 2..200)
    ) {
        let spread = values.iter().cloned().fold(f64::MIN, f64::max)
            - values.iter().cloned().fold(f64::MAX, f64::min);
        prop_assume!(spread > 1e-6);
        let z = normalize_series(&values).unwrap();
        let mean = z.iter().sum::<f64>() / z.len() as f64;
        let var = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / z.len() as f64;
        prop_assert!(mean.abs() < 1e-8, "mean {mean}");
        prop_assert!((var - 1.0).abs() < 1e-8, "var {var}");
    }

    #[test]
    fn greedy_argmax_invariant_to_positive_weight_scaling(
        w in proptest::collection::vec(finite_f64(5.0), 3),
        xs in proptest::collection::vec(proptest::collection::vec(finite_f64(5.0), 3), 2..10),
        alpha in 1e-3f64..1e3,
    ) {
        let argmax = |h: &Hypothesis| {
            let mut best = 0;
            let mut best_v = f64::MIN;
            for (i, x) in xs.iter().enumerate() {
                let v = predict(h, &FeatureVector(x.clone())).unwrap();
                // Strict inequality mirrors lowest-index tie-breaking.
                if v > best_v {
                    best = i;
                    best_v = v;
                }
            }
            best
        };
        let h1 = Hypothesis { weights: w.clone() };
        let h2 = Hypothesis { weights: w.iter().map(|v| v * alpha).collect() };
        // Scaling can flip ties through rounding; skip near-ties.
        let vals: Vec<f64> = xs
            .iter()
            .map(|x| predict(&h1, &FeatureVector(x.clone())).unwrap())
            .collect();
        let top = vals.iter().cloned().fold(f64::MIN, f64::max);
        prop_assume!(vals.iter().filter(|v| (top - **v).abs() < 1e-9).count() == 1);
        prop_assert_eq!(argmax(&h1), argmax(&h2));
    }

    #[test]
    fn feature_extraction_is_deterministic_and_bounded(
        candidate in arb_candidate(),
        round in 0u64..2_000,
    ) {
        let schema = FeatureSchema::new(40, 280).unwrap();
        let a = schema.extract(&candidate, round).unwrap();
        let b = schema.extract(&candidate, round).unwrap();
        prop_assert_eq!(&a, &b);
        for (i, v) in a.as_slice().iter().enumerate() {
            prop_assert!(v.is_finite(), "feature {i} not finite");
            prop_assert!((-1.0..=1.0).contains(v), "feature {i} out of range: {v}");
        }
    }
}
