//! Bagged forest of regression trees: bootstrap rows per tree, random
//! feature subsets per split, predictions averaged. Per-tree seeds are
//! derived from the spec seed so results are independent of scheduling.

use rand::Rng;
use rayon::prelude::*;

use super::tree::{self, TreeConfig};
use super::ModelParams;
use crate::rng::{derive_seed, seeded_rng};

pub fn fit(
    features: &[Vec<f64>],
    targets: &[f64],
    n_trees: usize,
    mtry: Option<usize>,
    max_depth: usize,
    min_leaf: usize,
    seed: u64,
) -> ModelParams {
    let n = targets.len();
    let width = features.first().map_or(0, |r| r.len());
    // Unset mtry falls back to ceil(p / 3) candidate features per split.
    let mtry = mtry.unwrap_or_else(|| width.div_ceil(3).max(1));
    let trees = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded_rng(derive_seed(seed, &format!("tree-{t}")));
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            tree::grow_on_rows(
                features,
                targets,
                rows,
                &TreeConfig {
                    max_depth,
                    min_leaf,
                    mtry: Some(mtry),
                },
                Some(&mut rng),
            )
        })
        .collect();
    ModelParams::Forest { width, trees }
}
