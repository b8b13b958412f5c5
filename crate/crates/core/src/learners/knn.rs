//! k-nearest-neighbour regression over stored training rows. Euclidean
//! distance; ties resolved by the lower training-row index.

use super::ModelParams;

pub fn fit(k: usize, features: &[Vec<f64>], targets: &[f64]) -> ModelParams {
    ModelParams::Knn {
        k,
        rows: features.to_vec(),
        targets: targets.to_vec(),
    }
}

pub fn predict_row(k: usize, rows: &[Vec<f64>], targets: &[f64], query: &[f64]) -> f64 {
    let mut dists: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let d2: f64 = r.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, i)
        })
        .collect();
    let k = k.min(dists.len());
    dists.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    dists[..k].iter().map(|&(_, i)| targets[i]).sum::<f64>() / k as f64
}
