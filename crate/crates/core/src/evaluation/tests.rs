use super::*;
use crate::learners::{train, LearnerKind, LearnerSpec};
use crate::rng::seeded_rng;
use crate::series::{naive_scale, EmbeddedDataset};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn mase_basics() {
    assert_eq!(mase(&[1.0, 2.0], &[1.0, 2.0], 1.0).unwrap(), 0.0);
    assert_eq!(mase(&[3.0, 0.0], &[1.0, 2.0], 1.0).unwrap(), 2.0);
    assert!(mase(&[1.0], &[1.0], 0.0).is_err());
    assert!(mase(&[1.0], &[1.0, 2.0], 1.0).is_err());
}

#[test]
fn mase_of_naive_forecasts_is_mae_ratio() {
    // Predictions equal to the one-step naive forecast: MASE reduces to the
    // ratio of test naive MAE to train naive MAE, both computed brute force.
    let mut rng = seeded_rng(5);
    let series: Vec<f64> = (0..120)
        .map(|i| (i as f64 * 0.17).sin() * 4.0 + rng.random_range(-0.5..0.5))
        .collect();
    let (train_seg, test_seg) = series.split_at(90);
    let scale = naive_scale(train_seg).unwrap();
    let preds: Vec<f64> = (0..test_seg.len())
        .map(|i| {
            if i == 0 {
                train_seg[89]
            } else {
                test_seg[i - 1]
            }
        })
        .collect();
    let got = mase(&preds, test_seg, scale).unwrap();

    let test_naive_mae: f64 = preds
        .iter()
        .zip(test_seg)
        .map(|(p, a)| (p - a).abs())
        .sum::<f64>()
        / test_seg.len() as f64;
    let train_naive_mae: f64 = train_seg
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .sum::<f64>()
        / (train_seg.len() - 1) as f64;
    assert!((got - test_naive_mae / train_naive_mae).abs() < 1e-12);
}

#[test]
fn score_matrix_round_trips_csv() {
    let mut m = ScoreMatrix::new();
    m.insert("a", "s1", 0, 1.5).unwrap();
    m.insert("b", "s1", 0, 2.5).unwrap();
    m.insert("a", "s2", 1, 0.25).unwrap();
    let csv = m.to_long_csv();
    let parsed = ScoreMatrix::from_long_csv(&csv).unwrap();
    assert_eq!(parsed.get("a", "s1", 0), Some(1.5));
    assert_eq!(parsed.get("b", "s1", 0), Some(2.5));
    assert_eq!(parsed.get("b", "s2", 1), None);
    assert_eq!(csv, parsed.to_long_csv());
}

#[test]
fn score_matrix_rejects_bad_cells() {
    let mut m = ScoreMatrix::new();
    assert!(m.insert("a", "s", 0, f64::NAN).is_err());
    assert!(m.insert("a", "s", 0, -0.5).is_err());
}

#[test]
fn strictly_better_method_ranks_first() {
    let mut m = ScoreMatrix::new();
    for (col, (a, b)) in [(0.5, 1.0), (0.2, 0.9), (0.1, 0.11)].iter().enumerate() {
        m.insert("a", "s", col, *a).unwrap();
        m.insert("b", "s", col, *b).unwrap();
    }
    let ranks = average_ranks(&m, None).unwrap();
    assert_eq!(ranks[0].method, "a");
    assert_eq!(ranks[0].mean_rank, 1.0);
    assert_eq!(ranks[0].sd_rank, 0.0);
    assert_eq!(ranks[1].mean_rank, 2.0);
}

#[test]
fn exact_ties_share_average_rank() {
    let mut m = ScoreMatrix::new();
    m.insert("a", "s", 0, 1.0).unwrap();
    m.insert("b", "s", 0, 1.0).unwrap();
    let ranks = average_ranks(&m, None).unwrap();
    assert_eq!(ranks[0].mean_rank, 1.5);
    assert_eq!(ranks[1].mean_rank, 1.5);
}

#[test]
fn ranks_match_brute_force_oracle() {
    // Hand-built 3-method, 4-column matrix; the oracle sorts each column
    // independently.
    let scores = [
        [0.3, 0.5, 0.1],
        [0.9, 0.2, 0.4],
        [0.6, 0.6, 0.6],
        [0.05, 0.5, 0.5],
    ];
    let mut m = ScoreMatrix::new();
    for (col, row) in scores.iter().enumerate() {
        m.insert("m0", "s", col, row[0]).unwrap();
        m.insert("m1", "s", col, row[1]).unwrap();
        m.insert("m2", "s", col, row[2]).unwrap();
    }

    let mut oracle_sums = [0.0f64; 3];
    for row in &scores {
        for i in 0..3 {
            let less = row.iter().filter(|&&v| v < row[i]).count();
            let equal = row.iter().filter(|&&v| v == row[i]).count();
            // Average of the positions the tied group occupies.
            oracle_sums[i] += less as f64 + (equal as f64 + 1.0) / 2.0;
        }
    }
    let ranks = average_ranks(&m, None).unwrap();
    for (i, summary) in ranks.iter().enumerate() {
        assert!((summary.mean_rank - oracle_sums[i] / 4.0).abs() < 1e-12);
    }
}

#[test]
fn missing_cell_fails_ranking() {
    let mut m = ScoreMatrix::new();
    m.insert("a", "s", 0, 1.0).unwrap();
    m.insert("b", "s", 0, 2.0).unwrap();
    m.insert("a", "s", 1, 1.0).unwrap();
    let err = average_ranks(&m, None).unwrap_err();
    assert!(err.to_string().contains("incomplete column for ranking"));
}

proptest! {
    #[test]
    fn rank_columns_sum_to_triangular_number(
        scores in proptest::collection::vec(0.0f64..10.0, 2..8)
    ) {
        let ranks = ranks_with_ties(&scores);
        let k = scores.len() as f64;
        let sum: f64 = ranks.iter().sum();
        prop_assert!((sum - k * (k + 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn mase_is_scale_equivariant_in_errors(
        errors in proptest::collection::vec(-5.0f64..5.0, 1..20),
        c in 0.1f64..10.0
    ) {
        let actuals = vec![0.0; errors.len()];
        let scaled: Vec<f64> = errors.iter().map(|e| e * c).collect();
        let base = mase(&errors, &actuals, 2.0).unwrap();
        let bigger = mase(&scaled, &actuals, 2.0).unwrap();
        prop_assert!((bigger - c * base).abs() < 1e-9 * (1.0 + base));
    }
}

#[test]
fn bayes_single_win_is_not_certain() {
    let r = bayes_sign_test(&[10.0], (-1.0, 1.0), 20_000, 1.0, 7).unwrap();
    assert!(r.p_win < 1.0);
    assert!(r.p_win > 0.3);
    assert!((r.p_win + r.p_rope + r.p_lose - 1.0).abs() < 1e-9);
    assert_eq!(r.counts, (1, 0, 0));
}

#[test]
fn bayes_is_deterministic_given_seed() {
    let diffs: Vec<f64> = (0..30).map(|i| (i as f64) - 15.0).collect();
    let a = bayes_sign_test(&diffs, (-1.0, 1.0), 50_000, 1.0, 11).unwrap();
    let b = bayes_sign_test(&diffs, (-1.0, 1.0), 50_000, 1.0, 11).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bayes_rejects_empty_rope() {
    let err = bayes_sign_test(&[0.0], (1.0, -1.0), 20_000, 1.0, 0).unwrap_err();
    assert!(err.to_string().contains("empty ROPE"));
}

#[test]
fn bayes_win_probability_is_monotone_in_the_counts() {
    // Moving one diff from the lose region to the win region must not
    // decrease p_win (fixed seed, tolerance for Monte Carlo noise).
    let mut diffs = vec![-5.0; 10];
    diffs.extend(vec![5.0; 10]);
    diffs.extend(vec![0.0; 10]);
    let before = bayes_sign_test(&diffs, (-1.0, 1.0), 100_000, 1.0, 13).unwrap();
    let mut moved = diffs.clone();
    moved[0] = 5.0;
    let after = bayes_sign_test(&moved, (-1.0, 1.0), 100_000, 1.0, 13).unwrap();
    assert!(after.p_win >= before.p_win - 0.01);
}

#[test]
fn cost_profile_of_empty_test_set() {
    let data = EmbeddedDataset {
        features: (0..20).map(|i| vec![i as f64]).collect(),
        targets: (0..20).map(|i| i as f64).collect(),
        lag_order: 1,
    };
    let model = train(
        &LearnerSpec::new("r", LearnerKind::Ridge { penalty: 0.1 }).unwrap(),
        &data,
    )
    .unwrap();
    let profile = profile_cost(&CostSubject::Model(&model), &[]).unwrap();
    assert!(profile.predict_seconds < 0.01);
    assert_eq!(
        profile.size_bytes,
        crate::learners::model_size(&model).unwrap()
    );
}

#[test]
fn cost_profile_size_is_deterministic() {
    let data = EmbeddedDataset {
        features: (0..50).map(|i| vec![i as f64, (i * i) as f64]).collect(),
        targets: (0..50).map(|i| (i as f64).sin()).collect(),
        lag_order: 2,
    };
    let model = train(
        &LearnerSpec::new("k", LearnerKind::Knn { k: 3 }).unwrap(),
        &data,
    )
    .unwrap();
    let a = profile_cost(&CostSubject::Model(&model), &data.features).unwrap();
    let b = profile_cost(&CostSubject::Model(&model), &data.features).unwrap();
    assert_eq!(a.size_bytes, b.size_bytes);
}

#[test]
fn prediction_time_scales_roughly_linearly() {
    // kNN over a large stored set makes per-row cost dominate the loop
    // overhead; doubling the queries should roughly double the time.
    let mut rng = seeded_rng(17);
    let data = EmbeddedDataset {
        features: (0..3000)
            .map(|_| (0..8).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect(),
        targets: (0..3000).map(|_| rng.random_range(-1.0..1.0)).collect(),
        lag_order: 8,
    };
    let model = train(
        &LearnerSpec::new("k", LearnerKind::Knn { k: 5 }).unwrap(),
        &data,
    )
    .unwrap();
    let queries: Vec<Vec<f64>> = (0..600)
        .map(|_| (0..8).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let single = profile_cost(&CostSubject::Model(&model), &queries[..300]).unwrap();
    let double = profile_cost(&CostSubject::Model(&model), &queries).unwrap();
    let ratio = double.predict_seconds / single.predict_seconds.max(1e-9);
    assert!(
        (1.0..=3.0).contains(&ratio),
        "doubling rows gave time ratio {ratio}"
    );
}
