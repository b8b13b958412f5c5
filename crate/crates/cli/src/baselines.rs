//! Classical one-step baselines evaluated alongside teachers and students:
//! naive (last observation), seasonal naive, and simple exponential
//! smoothing with the level coefficient fitted by grid search on the
//! training segment.

use serde::Serialize;

use fcomb_core::series::IndexRange;

/// Absolute series index of the target behind embedded row `row`.
fn target_index(lag_order: usize, row: usize) -> usize {
    lag_order + row
}

/// Predicts each test target as the value immediately before it.
pub fn naive_predictions(values: &[f64], lag_order: usize, test: IndexRange) -> Vec<f64> {
    test.iter()
        .map(|row| values[target_index(lag_order, row) - 1])
        .collect()
}

/// Predicts each test target as the value one seasonal period earlier,
/// falling back to the naive forecast when no period is available or the
/// history is too short.
pub fn seasonal_naive_predictions(
    values: &[f64],
    lag_order: usize,
    period: Option<usize>,
    test: IndexRange,
) -> Vec<f64> {
    let period = period.unwrap_or(1).max(1);
    test.iter()
        .map(|row| {
            let t = target_index(lag_order, row);
            if t >= period {
                values[t - period]
            } else {
                values[t - 1]
            }
        })
        .collect()
}

/// Simple exponential smoothing state after fitting.
#[derive(Debug, Clone, Serialize)]
pub struct SesModel {
    pub alpha: f64,
    pub level: f64,
}

/// Fits the smoothing coefficient on the training targets (grid
/// 0.05..=0.95, lowest one-step SSE wins, ties to the smaller alpha), then
/// rolls the level through the test segment producing one-step forecasts.
pub fn ses_predictions(
    values: &[f64],
    lag_order: usize,
    train: IndexRange,
    test: IndexRange,
) -> (Vec<f64>, SesModel) {
    let first_target = target_index(lag_order, train.start);
    let train_end = target_index(lag_order, train.end);
    let test_start = target_index(lag_order, test.start);
    let test_end = target_index(lag_order, test.end);

    let run = |alpha: f64, until: usize| -> (f64, f64) {
        // Level seeded with the observation before the first training target.
        let mut level = values[first_target - 1];
        let mut sse = 0.0;
        for t in first_target..until {
            if t < train_end {
                let err = level - values[t];
                sse += err * err;
            }
            level = alpha * values[t] + (1.0 - alpha) * level;
        }
        (sse, level)
    };

    let mut best_alpha = 0.05;
    let mut best_sse = f64::INFINITY;
    for step in 1..=19 {
        let alpha = step as f64 * 0.05;
        let (sse, _) = run(alpha, train_end);
        if sse < best_sse {
            best_sse = sse;
            best_alpha = alpha;
        }
    }

    // Roll the fitted recursion forward, emitting the level as the
    // one-step forecast for each test target.
    let mut level = run(best_alpha, test_start).1;
    let mut preds = Vec::with_capacity(test.len());
    for t in test_start..test_end {
        preds.push(level);
        level = best_alpha * values[t] + (1.0 - best_alpha) * level;
    }
    (
        preds,
        SesModel {
            alpha: best_alpha,
            level,
        },
    )
}
