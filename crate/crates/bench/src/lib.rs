//! Shared data builders for the criterion benchmarks.

use rand::Rng;

use fcomb_core::rng::seeded_rng;
use fcomb_core::series::EmbeddedDataset;

/// Synthetic AR-flavoured embedded dataset sized like one holdout training
/// slice of the benchmark protocol.
pub fn bench_dataset(rows: usize, lag_order: usize, seed: u64) -> EmbeddedDataset {
    let mut rng = seeded_rng(seed);
    let mut features = Vec::with_capacity(rows);
    let mut targets = Vec::with_capacity(rows);
    let mut level: f64 = 0.0;
    for _ in 0..rows {
        let row: Vec<f64> = (0..lag_order)
            .map(|j| level * (1.0 - j as f64 * 0.05) + rng.random_range(-1.0..1.0))
            .collect();
        level = 0.8 * level + rng.random_range(-1.0..1.0);
        targets.push(0.6 * row[0] - 0.2 * row[1] + rng.random_range(-0.3..0.3));
        features.push(row);
    }
    EmbeddedDataset {
        features,
        targets,
        lag_order,
    }
}

/// A random prediction stream for combiner benchmarks.
pub fn prediction_stream(m: usize, steps: usize, seed: u64) -> Vec<(Vec<f64>, f64)> {
    let mut rng = seeded_rng(seed);
    (0..steps)
        .map(|_| {
            let preds: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            (preds, rng.random_range(-1.0..1.0))
        })
        .collect()
}
