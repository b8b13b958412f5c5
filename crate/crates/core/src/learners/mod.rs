//! The heterogeneous portfolio of base regressors and the student
//! hypothesis classes. Six families, all trained from scratch on embedded
//! datasets: ridge, kernel ridge (RBF / Laplace / polynomial), k-nearest
//! neighbours, regression trees, bagged forests, and model trees with
//! linear leaf models.

mod forest;
mod kernel;
mod knn;
mod model_tree;
mod tree;

pub use kernel::Kernel;
pub use model_tree::ModelTreeNode;
pub use tree::{RegressionTree, TreeNode};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::ridge_fit;
use crate::series::EmbeddedDataset;

/// Current layout of the serialized model container.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A learning algorithm plus its hyperparameters. Validated on construction
/// against family-specific constraints; `mtry` is additionally bounded by
/// the feature width at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum LearnerKind {
    Ridge {
        penalty: f64,
    },
    KernelRidgeRbf {
        kernel: Kernel,
        penalty: f64,
    },
    Knn {
        k: usize,
    },
    RegressionTree {
        max_depth: usize,
        min_leaf: usize,
    },
    BaggedForest {
        n_trees: usize,
        mtry: Option<usize>,
        max_depth: usize,
        min_leaf: usize,
        seed: u64,
    },
    ModelTree {
        max_depth: usize,
        min_leaf: usize,
        leaf_penalty: f64,
    },
}

impl LearnerKind {
    pub fn family(&self) -> &'static str {
        match self {
            LearnerKind::Ridge { .. } => "ridge",
            LearnerKind::KernelRidgeRbf { .. } => "kernel-ridge-rbf",
            LearnerKind::Knn { .. } => "knn",
            LearnerKind::RegressionTree { .. } => "regression-tree",
            LearnerKind::BaggedForest { .. } => "bagged-forest",
            LearnerKind::ModelTree { .. } => "model-tree",
        }
    }
}

/// Identified learner configuration; the portfolio is an ordered list of
/// these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub id: String,
    pub kind: LearnerKind,
}

impl LearnerSpec {
    pub fn new(id: impl Into<String>, kind: LearnerKind) -> Result<Self> {
        let spec = LearnerSpec {
            id: id.into(),
            kind,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Family-specific hyperparameter checks.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidHyperparameter {
                family: self.kind.family().to_string(),
                reason: reason.to_string(),
            })
        };
        match &self.kind {
            LearnerKind::Ridge { penalty } => {
                if !(penalty.is_finite() && *penalty >= 0.0) {
                    return fail("penalty must be finite and >= 0");
                }
            }
            LearnerKind::KernelRidgeRbf { kernel, penalty } => {
                if !(penalty.is_finite() && *penalty >= 0.0) {
                    return fail("penalty must be finite and >= 0");
                }
                kernel
                    .validate()
                    .map_err(|reason| Error::InvalidHyperparameter {
                        family: self.kind.family().to_string(),
                        reason,
                    })?;
            }
            LearnerKind::Knn { k } => {
                if *k < 1 {
                    return fail("k must be >= 1");
                }
            }
            LearnerKind::RegressionTree {
                max_depth,
                min_leaf,
            } => {
                if *max_depth < 1 {
                    return fail("max_depth must be >= 1");
                }
                if *min_leaf < 1 {
                    return fail("min_leaf must be >= 1");
                }
            }
            LearnerKind::BaggedForest {
                n_trees,
                mtry,
                max_depth,
                min_leaf,
                ..
            } => {
                if *n_trees < 1 {
                    return fail("n_trees must be >= 1");
                }
                if mtry == &Some(0) {
                    return fail("mtry must be >= 1");
                }
                if *max_depth < 1 || *min_leaf < 1 {
                    return fail("max_depth and min_leaf must be >= 1");
                }
            }
            LearnerKind::ModelTree {
                max_depth,
                min_leaf,
                leaf_penalty,
            } => {
                if *max_depth < 1 || *min_leaf < 1 {
                    return fail("max_depth and min_leaf must be >= 1");
                }
                if !(leaf_penalty.is_finite() && *leaf_penalty >= 0.0) {
                    return fail("leaf_penalty must be finite and >= 0");
                }
            }
        }
        Ok(())
    }
}

/// Fitted state, one variant per family. Each variant knows the feature
/// width it was trained with so prediction can reject mismatched queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "params")]
pub enum ModelParams {
    Linear {
        weights: Vec<f64>,
        intercept: f64,
    },
    Kernel {
        kernel: Kernel,
        alphas: Vec<f64>,
        support: Vec<Vec<f64>>,
        x_mean: Vec<f64>,
        x_scale: Vec<f64>,
        y_mean: f64,
    },
    Knn {
        k: usize,
        rows: Vec<Vec<f64>>,
        targets: Vec<f64>,
    },
    Tree {
        width: usize,
        tree: RegressionTree,
    },
    Forest {
        width: usize,
        trees: Vec<RegressionTree>,
    },
    ModelTree {
        width: usize,
        nodes: Vec<ModelTreeNode>,
    },
}

impl ModelParams {
    fn width(&self) -> usize {
        match self {
            ModelParams::Linear { weights, .. } => weights.len(),
            ModelParams::Kernel { x_mean, .. } => x_mean.len(),
            ModelParams::Knn { rows, .. } => rows.first().map_or(0, |r| r.len()),
            ModelParams::Tree { width, .. }
            | ModelParams::Forest { width, .. }
            | ModelParams::ModelTree { width, .. } => *width,
        }
    }
}

/// A fitted model: spec, parameters, and a fingerprint of the exact training
/// rows. Immutable after fit; prediction is a pure function of (params, row).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub spec: LearnerSpec,
    pub params: ModelParams,
    pub train_fingerprint: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl TrainedModel {
    pub fn id(&self) -> &str {
        &self.spec.id
    }
}

/// Ordered, index-stable collection of trained models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    pub models: Vec<TrainedModel>,
}

impl Portfolio {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.models.iter().map(|m| m.spec.id.clone()).collect()
    }

    pub fn specs(&self) -> Vec<LearnerSpec> {
        self.models.iter().map(|m| m.spec.clone()).collect()
    }

    /// Predictions of every member on every row: `rows x members`.
    pub fn predict_matrix(&self, features: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut columns = Vec::with_capacity(self.models.len());
        for model in &self.models {
            columns.push(predict(model, features)?);
        }
        let n = features.len();
        let mut rows = vec![Vec::with_capacity(self.models.len()); n];
        for col in &columns {
            for (row, v) in rows.iter_mut().zip(col) {
                row.push(*v);
            }
        }
        Ok(rows)
    }

    /// Predictions of every member on a single row.
    pub fn predict_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.models.iter().map(|m| predict_row(m, row)).collect()
    }

    /// Total canonical serialized size of all members, in bytes.
    pub fn total_size_bytes(&self) -> Result<usize> {
        let mut total = 0;
        for model in &self.models {
            total += model_size(model)?;
        }
        Ok(total)
    }
}

/// SHA-256 over the raw bits of the rows and targets, hex-encoded. Used to
/// pin which data a model actually saw (leakage audits, resumability).
pub fn dataset_fingerprint(features: &[Vec<f64>], targets: &[f64]) -> String {
    let mut hasher = Sha256::new();
    hasher.update((features.len() as u64).to_le_bytes());
    for row in features {
        for v in row {
            hasher.update(v.to_le_bytes());
        }
    }
    for v in targets {
        hasher.update(v.to_le_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Intercept-only fallback used when a design is too degenerate to fit the
/// requested family.
fn intercept_only(width: usize, targets: &[f64]) -> ModelParams {
    let mean = targets.iter().sum::<f64>() / targets.len().max(1) as f64;
    ModelParams::Linear {
        weights: vec![0.0; width],
        intercept: mean,
    }
}

fn all_columns_constant(features: &[Vec<f64>]) -> bool {
    let Some(first) = features.first() else {
        return true;
    };
    let p = first.len();
    (0..p).all(|j| features.iter().all(|r| r[j] == first[j]))
}

/// Fits `spec` on `data`. Degenerate designs fall back to an intercept-only
/// model with a warning instead of failing, so portfolio training never
/// aborts a run.
pub fn train(spec: &LearnerSpec, data: &EmbeddedDataset) -> Result<TrainedModel> {
    spec.validate()?;
    if data.n_rows() == 0 {
        return Err(Error::EmptyTrainingData);
    }
    let width = data.features[0].len();
    let mut warnings = Vec::new();

    let params = if all_columns_constant(&data.features)
        && !matches!(spec.kind, LearnerKind::Knn { .. })
    {
        warnings.push("degenerate design (all-constant features); fitted intercept only".into());
        intercept_only(width, &data.targets)
    } else {
        match &spec.kind {
            LearnerKind::Ridge { penalty } => {
                match ridge_fit(&data.features, &data.targets, *penalty) {
                    Some((weights, intercept)) => ModelParams::Linear { weights, intercept },
                    None => {
                        warnings.push("ridge solve failed; fitted intercept only".into());
                        intercept_only(width, &data.targets)
                    }
                }
            }
            LearnerKind::KernelRidgeRbf { kernel, penalty } => {
                match kernel::fit(kernel, *penalty, &data.features, &data.targets) {
                    Some(params) => params,
                    None => {
                        warnings.push("kernel solve failed; fitted intercept only".into());
                        intercept_only(width, &data.targets)
                    }
                }
            }
            LearnerKind::Knn { k } => knn::fit(*k, &data.features, &data.targets),
            LearnerKind::RegressionTree {
                max_depth,
                min_leaf,
            } => ModelParams::Tree {
                width,
                tree: tree::grow(
                    &data.features,
                    &data.targets,
                    &tree::TreeConfig {
                        max_depth: *max_depth,
                        min_leaf: *min_leaf,
                        mtry: None,
                    },
                    None,
                ),
            },
            LearnerKind::BaggedForest {
                n_trees,
                mtry,
                max_depth,
                min_leaf,
                seed,
            } => {
                if let Some(m) = mtry {
                    if *m > width {
                        return Err(Error::InvalidHyperparameter {
                            family: "bagged-forest".into(),
                            reason: format!("mtry {m} exceeds feature width {width}"),
                        });
                    }
                }
                forest::fit(
                    &data.features,
                    &data.targets,
                    *n_trees,
                    *mtry,
                    *max_depth,
                    *min_leaf,
                    *seed,
                )
            }
            LearnerKind::ModelTree {
                max_depth,
                min_leaf,
                leaf_penalty,
            } => ModelParams::ModelTree {
                width,
                nodes: model_tree::fit(
                    &data.features,
                    &data.targets,
                    *max_depth,
                    *min_leaf,
                    *leaf_penalty,
                ),
            },
        }
    };

    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        spec: spec.clone(),
        params,
        train_fingerprint: dataset_fingerprint(&data.features, &data.targets),
        warnings,
    })
}

/// One prediction per feature row.
pub fn predict(model: &TrainedModel, features: &[Vec<f64>]) -> Result<Vec<f64>> {
    features.iter().map(|row| predict_row(model, row)).collect()
}

/// Prediction for a single feature row.
pub fn predict_row(model: &TrainedModel, row: &[f64]) -> Result<f64> {
    let expected = model.params.width();
    if row.len() != expected {
        return Err(Error::FeatureDimMismatch {
            expected,
            got: row.len(),
        });
    }
    let value = match &model.params {
        ModelParams::Linear { weights, intercept } => {
            weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + intercept
        }
        ModelParams::Kernel {
            kernel,
            alphas,
            support,
            x_mean,
            x_scale,
            y_mean,
        } => kernel::predict_row(kernel, alphas, support, x_mean, x_scale, *y_mean, row),
        ModelParams::Knn { k, rows, targets } => knn::predict_row(*k, rows, targets, row),
        ModelParams::Tree { tree, .. } => tree.predict_row(row),
        ModelParams::Forest { trees, .. } => {
            trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / trees.len() as f64
        }
        ModelParams::ModelTree { nodes, .. } => model_tree::predict_row(nodes, row),
    };
    Ok(value)
}

/// Fits every spec independently (in parallel) and keeps spec order.
pub fn train_portfolio(specs: &[LearnerSpec], data: &EmbeddedDataset) -> Result<Portfolio> {
    if specs.is_empty() {
        return Err(Error::EmptyPortfolio);
    }
    let mut seen = std::collections::HashSet::new();
    for spec in specs {
        if !seen.insert(spec.id.as_str()) {
            return Err(Error::DuplicatePortfolioId {
                id: spec.id.clone(),
            });
        }
    }
    let models: Result<Vec<TrainedModel>> =
        specs.par_iter().map(|spec| train(spec, data)).collect();
    Ok(Portfolio { models: models? })
}

/// Length in bytes of the canonical serialized form (versioned JSON
/// container). Identical parameters always serialize identically.
pub fn model_size(model: &TrainedModel) -> Result<usize> {
    Ok(serde_json::to_vec(model)?.len())
}

/// The default 30-member portfolio: hyperparameter sweeps over the six
/// families. `p` bounds forest `mtry`.
pub fn default_portfolio_specs(p: usize) -> Vec<LearnerSpec> {
    let mut specs = Vec::with_capacity(30);
    let mut push = |id: &str, kind: LearnerKind| {
        specs.push(LearnerSpec {
            id: id.to_string(),
            kind,
        });
    };

    for (i, penalty) in [0.0, 0.1, 1.0, 10.0, 100.0].into_iter().enumerate() {
        push(&format!("ridge_{}", i + 1), LearnerKind::Ridge { penalty });
    }
    for (i, gamma) in [0.05, 0.3].into_iter().enumerate() {
        push(
            &format!("krr_rbf_{}", i + 1),
            LearnerKind::KernelRidgeRbf {
                kernel: Kernel::Rbf { gamma },
                penalty: 1.0,
            },
        );
    }
    for (i, gamma) in [0.05, 0.3].into_iter().enumerate() {
        push(
            &format!("krr_lap_{}", i + 1),
            LearnerKind::KernelRidgeRbf {
                kernel: Kernel::Laplace { gamma },
                penalty: 1.0,
            },
        );
    }
    for (i, degree) in [2u32, 3].into_iter().enumerate() {
        push(
            &format!("krr_poly_{}", i + 1),
            LearnerKind::KernelRidgeRbf {
                kernel: Kernel::Polynomial {
                    degree,
                    offset: 1.0,
                    scale: 1.0 / p.max(1) as f64,
                },
                penalty: 1.0,
            },
        );
    }
    for (i, k) in [1usize, 3, 7, 15, 30].into_iter().enumerate() {
        push(&format!("knn_{}", i + 1), LearnerKind::Knn { k });
    }
    for (i, depth) in [3usize, 6, 12, 20].into_iter().enumerate() {
        push(
            &format!("tree_{}", i + 1),
            LearnerKind::RegressionTree {
                max_depth: depth,
                min_leaf: 5,
            },
        );
    }
    let default_mtry = p.div_ceil(3).max(1);
    for (i, (n_trees, mtry)) in [
        (25usize, default_mtry),
        (25, p.clamp(1, 5)),
        (50, default_mtry),
        (50, p.clamp(1, 10)),
    ]
    .into_iter()
    .enumerate()
    {
        push(
            &format!("forest_{}", i + 1),
            LearnerKind::BaggedForest {
                n_trees,
                mtry: Some(mtry),
                max_depth: 16,
                min_leaf: 5,
                seed: 90 + i as u64,
            },
        );
    }
    let mut mt = 0;
    for min_leaf in [8usize, 16, 30] {
        for leaf_penalty in [1e-3, 1.0] {
            mt += 1;
            push(
                &format!("mtree_{mt}"),
                LearnerKind::ModelTree {
                    max_depth: 12,
                    min_leaf,
                    leaf_penalty,
                },
            );
        }
    }
    debug_assert_eq!(specs.len(), 30);
    specs
}
