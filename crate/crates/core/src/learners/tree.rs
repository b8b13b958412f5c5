//! CART-style regression tree: exhaustive threshold search minimizing the
//! summed squared error of the children, with deterministic tie-breaking
//! (lowest feature index, then lowest threshold).

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Flat arena; node 0 is the root. Queries with `x[feature] <= threshold`
/// descend left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
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

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }
}

pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Number of features sampled per split; `None` considers all.
    pub mtry: Option<usize>,
}

pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub sse_reduction: f64,
}

/// Best split of `rows` over the given features, or `None` when no split
/// leaves `min_leaf` rows on both sides with a strict threshold between
/// distinct values.
pub fn best_split(
    features: &[Vec<f64>],
    targets: &[f64],
    rows: &[usize],
    candidates: &[usize],
    min_leaf: usize,
) -> Option<SplitCandidate> {
    let n = rows.len();
    if n < 2 * min_leaf {
        return None;
    }
    let total_sum: f64 = rows.iter().map(|&i| targets[i]).sum();
    let total_sq: f64 = rows.iter().map(|&i| targets[i] * targets[i]).sum();
    let parent_sse = total_sq - total_sum * total_sum / n as f64;

    let mut best: Option<SplitCandidate> = None;
    let mut order: Vec<usize> = rows.to_vec();
    for &feature in candidates {
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
            let right_sum = total_sum - left_sum;
            let right_sq = total_sq - left_sq;
            let sse = (left_sq - left_sum * left_sum / s as f64)
                + (right_sq - right_sum * right_sum / (n - s) as f64);
            let reduction = parent_sse - sse;
            let better = match &best {
                None => reduction > 1e-12,
                Some(b) => reduction > b.sse_reduction + 1e-12,
            };
            if better {
                best = Some(SplitCandidate {
                    feature,
                    threshold: v_prev + (v_next - v_prev) / 2.0,
                    sse_reduction: reduction,
                });
            }
        }
    }
    best
}

/// Grows a tree on the given rows. When `rng` is provided, each split
/// considers a fresh random subset of `mtry` features (bagged-forest mode).
pub fn grow(
    features: &[Vec<f64>],
    targets: &[f64],
    config: &TreeConfig,
    rng: Option<&mut ChaCha8Rng>,
) -> RegressionTree {
    let rows: Vec<usize> = (0..targets.len()).collect();
    let mut nodes = Vec::new();
    let mut rng = rng;
    build(features, targets, rows, config, 0, &mut nodes, &mut rng);
    RegressionTree { nodes }
}

/// Same as [`grow`] but over an explicit row subset (bootstrap samples).
pub fn grow_on_rows(
    features: &[Vec<f64>],
    targets: &[f64],
    rows: Vec<usize>,
    config: &TreeConfig,
    mut rng: Option<&mut ChaCha8Rng>,
) -> RegressionTree {
    let mut nodes = Vec::new();
    build(features, targets, rows, config, 0, &mut nodes, &mut rng);
    RegressionTree { nodes }
}

fn build(
    features: &[Vec<f64>],
    targets: &[f64],
    rows: Vec<usize>,
    config: &TreeConfig,
    depth: usize,
    nodes: &mut Vec<TreeNode>,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> usize {
    let n = rows.len();
    let mean = rows.iter().map(|&i| targets[i]).sum::<f64>() / n.max(1) as f64;
    let make_leaf = |nodes: &mut Vec<TreeNode>| {
        nodes.push(TreeNode::Leaf { value: mean });
        nodes.len() - 1
    };

    if depth >= config.max_depth || n < 2 * config.min_leaf {
        return make_leaf(nodes);
    }

    let p = features.first().map_or(0, |r| r.len());
    let candidates: Vec<usize> = match (config.mtry, rng.as_deref_mut()) {
        (Some(m), Some(r)) if m < p => {
            let mut picked: Vec<usize> = sample(r, p, m).into_iter().collect();
            picked.sort_unstable();
            picked
        }
        _ => (0..p).collect(),
    };

    let Some(split) = best_split(features, targets, &rows, &candidates, config.min_leaf) else {
        return make_leaf(nodes);
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&i| features[i][split.feature] <= split.threshold);

    let idx = nodes.len();
    nodes.push(TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let left = build(features, targets, left_rows, config, depth + 1, nodes, rng);
    let right = build(features, targets, right_rows, config, depth + 1, nodes, rng);
    if let TreeNode::Split {
        left: l, right: r, ..
    } = &mut nodes[idx]
    {
        *l = left;
        *r = right;
    }
    idx
}
