//! M5-style model tree: standard-deviation-reduction splits, a ridge model
//! in every leaf, and bottom-up pruning that collapses a subtree whenever a
//! single ridge fit over the node's rows has no worse penalized error.

use serde::{Deserialize, Serialize};

use crate::linalg::ridge_fit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelTreeNode {
    Leaf {
        weights: Vec<f64>,
        intercept: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

pub fn predict_row(nodes: &[ModelTreeNode], row: &[f64]) -> f64 {
    let mut idx = 0;
    loop {
        match &nodes[idx] {
            ModelTreeNode::Leaf { weights, intercept } => {
                return weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + intercept;
            }
            ModelTreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                idx = if row[*feature] <= *threshold {
                    *left
                } else {
                    *right
                };
            }
        }
    }
}

enum Built {
    Leaf {
        weights: Vec<f64>,
        intercept: f64,
        est_err: f64,
        n: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Built>,
        right: Box<Built>,
        est_err: f64,
        n: usize,
    },
}

impl Built {
    fn est_err(&self) -> f64 {
        match self {
            Built::Leaf { est_err, .. } | Built::Split { est_err, .. } => *est_err,
        }
    }

    fn n(&self) -> usize {
        match self {
            Built::Leaf { n, .. } | Built::Split { n, .. } => *n,
        }
    }
}

fn sd(sum: f64, sumsq: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let var = (sumsq - sum * sum / n as f64) / n as f64;
    var.max(0.0).sqrt()
}

/// Quinlan-style complexity inflation of the training error: models with
/// many parameters relative to their row count look worse.
fn penalized_error(mae: f64, n: usize, k: usize) -> f64 {
    let nf = n as f64;
    let kf = k as f64;
    if nf > kf + 1.0 {
        mae * (nf + kf) / (nf - kf)
    } else {
        mae * (nf + kf)
    }
}

fn fit_leaf(
    features: &[Vec<f64>],
    targets: &[f64],
    rows: &[usize],
    penalty: f64,
) -> (Vec<f64>, f64) {
    let width = features.first().map_or(0, |r| r.len());
    let sub_x: Vec<Vec<f64>> = rows.iter().map(|&i| features[i].clone()).collect();
    let sub_y: Vec<f64> = rows.iter().map(|&i| targets[i]).collect();
    match ridge_fit(&sub_x, &sub_y, penalty) {
        Some(fit) => fit,
        None => {
            let mean = sub_y.iter().sum::<f64>() / sub_y.len().max(1) as f64;
            (vec![0.0; width], mean)
        }
    }
}

fn leaf_mae(
    features: &[Vec<f64>],
    targets: &[f64],
    rows: &[usize],
    model: &(Vec<f64>, f64),
) -> f64 {
    let (weights, intercept) = model;
    rows.iter()
        .map(|&i| {
            let pred: f64 = weights
                .iter()
                .zip(&features[i])
                .map(|(w, x)| w * x)
                .sum::<f64>()
                + intercept;
            (pred - targets[i]).abs()
        })
        .sum::<f64>()
        / rows.len().max(1) as f64
}

struct SdrSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn best_sdr_split(
    features: &[Vec<f64>],
    targets: &[f64],
    rows: &[usize],
    min_leaf: usize,
) -> Option<SdrSplit> {
    let n = rows.len();
    if n < 2 * min_leaf {
        return None;
    }
    let total_sum: f64 = rows.iter().map(|&i| targets[i]).sum();
    let total_sq: f64 = rows.iter().map(|&i| targets[i] * targets[i]).sum();
    let parent_sd = sd(total_sum, total_sq, n);

    let p = features.first().map_or(0, |r| r.len());
    let mut best: Option<SdrSplit> = None;
    let mut order: Vec<usize> = rows.to_vec();
    for feature in 0..p {
        order.sort_unstable_by(|&a, &b| {
            features[a][feature]
                .partial_cmp(&features[b][feature])
                .expect("finite features")
        });
        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for s in 1..n {
            let prev = order[s - 1];
            left_sum += targets[prev];
            left_sq += targets[prev] * targets[prev];
            if s < min_leaf || n - s < min_leaf {
                continue;
            }
            let v_prev = features[prev][feature];
            let v_next = features[order[s]][feature];
            if v_prev >= v_next {
                continue;
            }
            let weighted = (s as f64 / n as f64) * sd(left_sum, left_sq, s)
                + ((n - s) as f64 / n as f64) * sd(total_sum - left_sum, total_sq - left_sq, n - s);
            let score = parent_sd - weighted;
            let better = match &best {
                None => score > 1e-12,
                Some(b) => score > b.score + 1e-12,
            };
            if better {
                best = Some(SdrSplit {
                    feature,
                    threshold: v_prev + (v_next - v_prev) / 2.0,
                    score,
                });
            }
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn build(
    features: &[Vec<f64>],
    targets: &[f64],
    rows: Vec<usize>,
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
    penalty: f64,
    root_sd: f64,
    model_params: usize,
) -> Built {
    let n = rows.len();
    let sum: f64 = rows.iter().map(|&i| targets[i]).sum();
    let sumsq: f64 = rows.iter().map(|&i| targets[i] * targets[i]).sum();
    let node_sd = sd(sum, sumsq, n);

    let make_leaf = |rows: &[usize]| {
        let model = fit_leaf(features, targets, rows, penalty);
        let err = penalized_error(leaf_mae(features, targets, rows, &model), n, model_params);
        Built::Leaf {
            weights: model.0,
            intercept: model.1,
            est_err: err,
            n,
        }
    };

    if depth >= max_depth || n < 2 * min_leaf || node_sd < 0.05 * root_sd {
        return make_leaf(&rows);
    }
    let Some(split) = best_sdr_split(features, targets, &rows, min_leaf) else {
        return make_leaf(&rows);
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&i| features[i][split.feature] <= split.threshold);
    let left = build(
        features,
        targets,
        left_rows,
        depth + 1,
        max_depth,
        min_leaf,
        penalty,
        root_sd,
        model_params,
    );
    let right = build(
        features,
        targets,
        right_rows,
        depth + 1,
        max_depth,
        min_leaf,
        penalty,
        root_sd,
        model_params,
    );

    let subtree_err =
        (left.n() as f64 * left.est_err() + right.n() as f64 * right.est_err()) / n as f64;
    let node_model = fit_leaf(features, targets, &rows, penalty);
    let node_err = penalized_error(
        leaf_mae(features, targets, &rows, &node_model),
        n,
        model_params,
    );
    if node_err <= subtree_err {
        return Built::Leaf {
            weights: node_model.0,
            intercept: node_model.1,
            est_err: node_err,
            n,
        };
    }
    Built::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
        est_err: subtree_err,
        n,
    }
}

fn flatten(built: Built, nodes: &mut Vec<ModelTreeNode>) -> usize {
    match built {
        Built::Leaf {
            weights, intercept, ..
        } => {
            nodes.push(ModelTreeNode::Leaf { weights, intercept });
            nodes.len() - 1
        }
        Built::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } => {
            let idx = nodes.len();
            nodes.push(ModelTreeNode::Split {
                feature,
                threshold,
                left: 0,
                right: 0,
            });
            let l = flatten(*left, nodes);
            let r = flatten(*right, nodes);
            if let ModelTreeNode::Split { left, right, .. } = &mut nodes[idx] {
                *left = l;
                *right = r;
            }
            idx
        }
    }
}

pub fn fit(
    features: &[Vec<f64>],
    targets: &[f64],
    max_depth: usize,
    min_leaf: usize,
    leaf_penalty: f64,
) -> Vec<ModelTreeNode> {
    let n = targets.len();
    let rows: Vec<usize> = (0..n).collect();
    let sum: f64 = targets.iter().sum();
    let sumsq: f64 = targets.iter().map(|y| y * y).sum();
    let root_sd = sd(sum, sumsq, n);
    let width = features.first().map_or(0, |r| r.len());
    let built = build(
        features,
        targets,
        rows,
        0,
        max_depth,
        min_leaf,
        leaf_penalty,
        root_sd,
        width + 1,
    );
    let mut nodes = Vec::new();
    flatten(built, &mut nodes);
    nodes
}
