//! Online forecast-combination rules. Every rule is a state machine with the
//! same shape: `combine` aggregates the expert predictions for the current
//! observation, `update` records the outcome and re-weights.
//!
//! Convex rules keep their weights on the probability simplex; `Ridge` and
//! `Stacking` combine with unconstrained coefficients. Loss accounting uses
//! squared error for the cumulative/regret quantities and absolute error for
//! the windowed rankings.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{self, LearnerKind, LearnerSpec, TrainedModel};
use crate::linalg::solve_spd;
use crate::series::EmbeddedDataset;

const WL_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CombinerKind {
    Simple,
    SimpleTrim,
    #[serde(rename = "WL")]
    Wl,
    #[serde(rename = "BLAST")]
    Blast,
    #[serde(rename = "AEC")]
    Aec,
    #[serde(rename = "EWA")]
    Ewa,
    #[serde(rename = "FS")]
    Fs,
    #[serde(rename = "MLpol")]
    MlPol,
    #[serde(rename = "OGD")]
    Ogd,
    Ridge,
    Stacking,
    #[serde(rename = "ADE")]
    Ade,
    Best,
}

impl CombinerKind {
    pub const ALL: [CombinerKind; 13] = [
        CombinerKind::Simple,
        CombinerKind::SimpleTrim,
        CombinerKind::Wl,
        CombinerKind::Blast,
        CombinerKind::Aec,
        CombinerKind::Ewa,
        CombinerKind::Fs,
        CombinerKind::MlPol,
        CombinerKind::Ogd,
        CombinerKind::Ridge,
        CombinerKind::Stacking,
        CombinerKind::Ade,
        CombinerKind::Best,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CombinerKind::Simple => "Simple",
            CombinerKind::SimpleTrim => "SimpleTrim",
            CombinerKind::Wl => "WL",
            CombinerKind::Blast => "BLAST",
            CombinerKind::Aec => "AEC",
            CombinerKind::Ewa => "EWA",
            CombinerKind::Fs => "FS",
            CombinerKind::MlPol => "MLpol",
            CombinerKind::Ogd => "OGD",
            CombinerKind::Ridge => "Ridge",
            CombinerKind::Stacking => "Stacking",
            CombinerKind::Ade => "ADE",
            CombinerKind::Best => "Best",
        }
    }

    pub fn parse(label: &str) -> Option<CombinerKind> {
        CombinerKind::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(label))
    }

    /// Rules whose weights live on the probability simplex.
    pub fn is_convex(&self) -> bool {
        !matches!(self, CombinerKind::Ridge | CombinerKind::Stacking)
    }

    /// Rules that cannot start without out-of-bag warmup data.
    pub fn requires_warmup(&self) -> bool {
        matches!(
            self,
            CombinerKind::Stacking | CombinerKind::Ade | CombinerKind::Best
        )
    }
}

impl fmt::Display for CombinerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Configuration for every rule; parameters irrelevant to `kind` are kept
/// as an audit trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinerConfig {
    pub kind: CombinerKind,
    /// Window size for the loss-ranking rules.
    pub lambda_window: usize,
    /// Learning rate for EWA / FS / OGD.
    pub eta: f64,
    /// Share fraction for FS.
    pub alpha: f64,
    /// Discount factor for AEC.
    pub forgetting: f64,
    pub ridge_penalty: f64,
    /// When set, the Ridge rule augments the system with an unweighted
    /// constant regressor and adds its fitted value to every combination.
    #[serde(default)]
    pub ridge_intercept: bool,
    /// Fraction of experts kept by SimpleTrim.
    pub trim_keep: f64,
    /// Meta-learner for Stacking (one model) and ADE (one error predictor
    /// per expert).
    pub meta_spec: LearnerSpec,
}

impl CombinerConfig {
    pub fn new(kind: CombinerKind) -> Self {
        CombinerConfig {
            kind,
            lambda_window: 50,
            eta: 1.0,
            alpha: 0.05,
            forgetting: 0.9,
            ridge_penalty: 1.0,
            ridge_intercept: false,
            trim_keep: 0.5,
            meta_spec: default_meta_spec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| Err(Error::InvalidInput(format!("combiner config: {reason}")));
        if self.lambda_window < 1 {
            return fail("lambda_window must be >= 1");
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return fail("eta must be finite and > 0");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail("alpha must be in [0, 1]");
        }
        if !(self.forgetting > 0.0 && self.forgetting <= 1.0) {
            return fail("forgetting must be in (0, 1]");
        }
        if !(self.ridge_penalty.is_finite() && self.ridge_penalty >= 0.0) {
            return fail("ridge_penalty must be finite and >= 0");
        }
        if !(self.trim_keep > 0.0 && self.trim_keep <= 1.0) {
            return fail("trim_keep must be in (0, 1]");
        }
        self.meta_spec.validate()
    }
}

fn default_meta_spec() -> LearnerSpec {
    LearnerSpec {
        id: "meta_forest".into(),
        kind: LearnerKind::BaggedForest {
            n_trees: 10,
            mtry: None,
            max_depth: 10,
            min_leaf: 5,
            seed: 1,
        },
    }
}

/// Out-of-bag stream used to warm combiner state before test time: original
/// features, the matrix of per-expert predictions (rows x experts), and the
/// observed targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmupData {
    pub features: Vec<Vec<f64>>,
    pub expert_preds: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl WarmupData {
    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }

    fn validate(&self, m: usize) -> Result<()> {
        if self.expert_preds.len() != self.targets.len() {
            return Err(Error::RowCountMismatch {
                left: self.expert_preds.len(),
                right: self.targets.len(),
            });
        }
        if let Some(row) = self.expert_preds.iter().find(|r| r.len() != m) {
            return Err(Error::ExpertCountMismatch {
                expected: m,
                got: row.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum MetaModels {
    None,
    Stacking(Box<TrainedModel>),
    Ade(Vec<TrainedModel>),
}

/// Per-combiner weight vector plus loss and regret accounting, updated
/// online. Single writer: `update` calls must arrive in observation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Combiner {
    config: CombinerConfig,
    m: usize,
    weights: Vec<f64>,
    /// Ring of per-step absolute errors, one row per observation, capacity
    /// `lambda_window`.
    window: VecDeque<Vec<f64>>,
    cumulative_sq: Vec<f64>,
    cumulative_abs: Vec<f64>,
    /// MLpol regret accumulators against the combined forecast.
    regret: Vec<f64>,
    /// AEC discounted absolute errors.
    discounted_abs: Vec<f64>,
    /// Ridge running Gram matrix (row-major, `gram_dim` square) and
    /// cross-moment vector; one extra dimension when the intercept flag is
    /// set.
    gram: Vec<f64>,
    cross: Vec<f64>,
    #[serde(default)]
    ridge_offset: f64,
    /// Warmup cumulative losses retained by Best for deterministic
    /// fallback selection.
    selection_losses: Option<Vec<f64>>,
    meta: MetaModels,
    t: u64,
}

impl Combiner {
    /// Fresh state with uniform weights. Rules that need out-of-bag warmup
    /// (Stacking, ADE, Best) refuse to start this way.
    pub fn new(config: CombinerConfig, m: usize) -> Result<Self> {
        config.validate()?;
        if m < 1 {
            return Err(Error::InvalidInput(
                "combiner needs at least one expert".into(),
            ));
        }
        if config.kind.requires_warmup() {
            return Err(Error::WarmupRequired);
        }
        Ok(Self::bare(config, m))
    }

    /// Deployment initialization: meta-learners are fitted on the warmup
    /// data and the online rules replay the warmup stream in order, so
    /// weights arrive at test time already adapted.
    pub fn warmed(config: CombinerConfig, m: usize, warmup: &WarmupData) -> Result<Self> {
        let mut combiner = Self::with_meta(config, m, warmup)?;
        for (preds, &y) in warmup.expert_preds.iter().zip(&warmup.targets) {
            combiner.update(preds, y)?;
        }
        Ok(combiner)
    }

    /// Initialization for teaching-target generation: meta-learners and the
    /// Best selection are fitted on the warmup data, but the stream is NOT
    /// replayed — online weights start uniform so a subsequent replay over
    /// the same rows does not see them twice.
    pub fn with_meta(config: CombinerConfig, m: usize, warmup: &WarmupData) -> Result<Self> {
        config.validate()?;
        if m < 1 {
            return Err(Error::InvalidInput(
                "combiner needs at least one expert".into(),
            ));
        }
        warmup.validate(m)?;
        let mut combiner = Self::bare(config, m);
        combiner.fit_meta(warmup)?;
        Ok(combiner)
    }

    fn bare(config: CombinerConfig, m: usize) -> Self {
        let dim = m + usize::from(config.kind == CombinerKind::Ridge && config.ridge_intercept);
        Combiner {
            config,
            m,
            weights: vec![1.0 / m as f64; m],
            window: VecDeque::new(),
            cumulative_sq: vec![0.0; m],
            cumulative_abs: vec![0.0; m],
            regret: vec![0.0; m],
            discounted_abs: vec![0.0; m],
            gram: vec![0.0; dim * dim],
            cross: vec![0.0; dim],
            ridge_offset: 0.0,
            selection_losses: None,
            meta: MetaModels::None,
            t: 0,
        }
    }

    fn gram_dim(&self) -> usize {
        self.m + usize::from(self.config.kind == CombinerKind::Ridge && self.config.ridge_intercept)
    }

    fn fit_meta(&mut self, warmup: &WarmupData) -> Result<()> {
        match self.config.kind {
            CombinerKind::Stacking => {
                if warmup.n_rows() == 0 {
                    return Err(Error::WarmupRequired);
                }
                let data = EmbeddedDataset {
                    features: warmup.expert_preds.clone(),
                    targets: warmup.targets.clone(),
                    lag_order: self.m,
                };
                let model = learners::train(&self.config.meta_spec, &data)?;
                self.meta = MetaModels::Stacking(Box::new(model));
            }
            CombinerKind::Ade => {
                if warmup.n_rows() == 0 || warmup.features.len() != warmup.n_rows() {
                    return Err(Error::WarmupRequired);
                }
                let mut predictors = Vec::with_capacity(self.m);
                for expert in 0..self.m {
                    let features: Vec<Vec<f64>> = warmup
                        .features
                        .iter()
                        .zip(&warmup.expert_preds)
                        .map(|(f, preds)| {
                            let mut row = f.clone();
                            row.push(preds[expert]);
                            row
                        })
                        .collect();
                    let targets: Vec<f64> = warmup
                        .expert_preds
                        .iter()
                        .zip(&warmup.targets)
                        .map(|(preds, y)| (preds[expert] - y).abs())
                        .collect();
                    let width = features.first().map_or(0, |r| r.len());
                    let spec = LearnerSpec {
                        id: format!("{}_e{}", self.config.meta_spec.id, expert),
                        kind: self.config.meta_spec.kind.clone(),
                    };
                    let data = EmbeddedDataset {
                        features,
                        targets,
                        lag_order: width,
                    };
                    predictors.push(learners::train(&spec, &data)?);
                }
                self.meta = MetaModels::Ade(predictors);
            }
            CombinerKind::Best => {
                if warmup.n_rows() == 0 {
                    return Err(Error::WarmupRequired);
                }
                let mut losses = vec![0.0; self.m];
                for (preds, &y) in warmup.expert_preds.iter().zip(&warmup.targets) {
                    for (loss, &p) in losses.iter_mut().zip(preds) {
                        *loss += (p - y) * (p - y);
                    }
                }
                let best = argmin(&losses);
                self.weights = vec![0.0; self.m];
                self.weights[best] = 1.0;
                self.selection_losses = Some(losses);
            }
            _ => {}
        }
        Ok(())
    }

    pub fn kind(&self) -> CombinerKind {
        self.config.kind
    }

    pub fn n_experts(&self) -> usize {
        self.m
    }

    pub fn update_count(&self) -> u64 {
        self.t
    }

    pub fn config(&self) -> &CombinerConfig {
        &self.config
    }

    /// Snapshot of the current weight vector.
    pub fn weights(&self) -> Vec<f64> {
        self.weights.clone()
    }

    fn check_preds(&self, expert_preds: &[f64]) -> Result<Vec<bool>> {
        if expert_preds.len() != self.m {
            return Err(Error::ExpertCountMismatch {
                expected: self.m,
                got: expert_preds.len(),
            });
        }
        let finite: Vec<bool> = expert_preds.iter().map(|p| p.is_finite()).collect();
        if finite.iter().all(|f| !f) {
            return Err(Error::AllExpertsNonFinite);
        }
        Ok(finite)
    }

    /// Mean absolute error per expert over the current window. Before the
    /// first update every expert ties at zero (lowest index wins rankings).
    fn windowed_mean_abs(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.m];
        for row in &self.window {
            for (s, e) in sums.iter_mut().zip(row) {
                *s += e;
            }
        }
        let n = self.window.len().max(1) as f64;
        sums.iter_mut().for_each(|s| *s /= n);
        sums
    }

    /// Indices of the `ceil(trim_keep * m)` experts with the lowest windowed
    /// loss, restricted to `eligible` ones.
    fn trimmed_set(&self, eligible: &[bool]) -> Vec<usize> {
        let keep = ((self.config.trim_keep * self.m as f64).ceil() as usize).clamp(1, self.m);
        let losses = self.windowed_mean_abs();
        let mut order: Vec<usize> = (0..self.m).filter(|&i| eligible[i]).collect();
        order.sort_by(|&a, &b| {
            losses[a]
                .partial_cmp(&losses[b])
                .expect("finite windowed losses")
                .then(a.cmp(&b))
        });
        order.truncate(keep.min(order.len()));
        order
    }

    fn ranked_best(&self, eligible: &[bool], losses: &[f64]) -> usize {
        let mut best = usize::MAX;
        for i in 0..self.m {
            if !eligible[i] {
                continue;
            }
            if best == usize::MAX || losses[i] < losses[best] {
                best = i;
            }
        }
        best
    }

    /// Weighted aggregate over the eligible experts, renormalizing the
    /// weight mass. Falls back to the plain mean of eligible predictions
    /// when no eligible expert carries weight.
    fn weighted_over(&self, expert_preds: &[f64], eligible: &[bool]) -> f64 {
        let mut mass = 0.0;
        let mut dot = 0.0;
        for i in 0..self.m {
            if eligible[i] {
                mass += self.weights[i];
                dot += self.weights[i] * expert_preds[i];
            }
        }
        if mass > 0.0 {
            return dot / mass;
        }
        let count = eligible.iter().filter(|&&e| e).count().max(1);
        (0..self.m)
            .filter(|&i| eligible[i])
            .map(|i| expert_preds[i])
            .sum::<f64>()
            / count as f64
    }

    fn ade_weights(
        &self,
        expert_preds: &[f64],
        features: &[f64],
        eligible: &[bool],
    ) -> Result<Vec<f64>> {
        let MetaModels::Ade(predictors) = &self.meta else {
            return Err(Error::WarmupRequired);
        };
        let mut predicted = vec![f64::INFINITY; self.m];
        for i in 0..self.m {
            if !eligible[i] {
                continue;
            }
            let mut row = features.to_vec();
            row.push(expert_preds[i]);
            // Absolute errors cannot be negative; clamp the meta prediction.
            predicted[i] = learners::predict_row(&predictors[i], &row)?.max(0.0);
        }
        let min = predicted
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min);
        let mut weights = vec![0.0; self.m];
        let mut z = 0.0;
        for i in 0..self.m {
            if eligible[i] {
                weights[i] = (-(predicted[i] - min)).exp();
                z += weights[i];
            }
        }
        weights.iter_mut().for_each(|w| *w /= z);
        Ok(weights)
    }

    /// Aggregates the expert predictions for one observation. Non-finite
    /// expert predictions are excluded for this step (with the weight mass
    /// renormalized over the rest); if all are non-finite this errors.
    /// `features` carries the original feature row, needed by ADE.
    pub fn combine(&self, expert_preds: &[f64], features: Option<&[f64]>) -> Result<f64> {
        let eligible = self.check_preds(expert_preds)?;
        match self.config.kind {
            CombinerKind::Simple
            | CombinerKind::Wl
            | CombinerKind::Aec
            | CombinerKind::Ewa
            | CombinerKind::Fs
            | CombinerKind::MlPol
            | CombinerKind::Ogd => Ok(self.weighted_over(expert_preds, &eligible)),
            CombinerKind::Best => {
                // The eligible expert with the best warmup loss; falls back
                // to the runner-up when the selected one is excluded.
                match &self.selection_losses {
                    Some(losses) => Ok(expert_preds[self.ranked_best(&eligible, losses)]),
                    None => Ok(self.weighted_over(expert_preds, &eligible)),
                }
            }
            CombinerKind::SimpleTrim => {
                let kept = self.trimmed_set(&eligible);
                Ok(kept.iter().map(|&i| expert_preds[i]).sum::<f64>() / kept.len() as f64)
            }
            CombinerKind::Blast => {
                let losses = self.windowed_mean_abs();
                Ok(expert_preds[self.ranked_best(&eligible, &losses)])
            }
            CombinerKind::Ridge => Ok((0..self.m)
                .filter(|&i| eligible[i])
                .map(|i| self.weights[i] * expert_preds[i])
                .sum::<f64>()
                + self.ridge_offset),
            CombinerKind::Stacking => {
                let MetaModels::Stacking(model) = &self.meta else {
                    return Err(Error::WarmupRequired);
                };
                // Impute excluded entries with the mean of the finite ones so
                // the meta-model sees a full-width row.
                let mean = self.weighted_over(expert_preds, &eligible);
                let row: Vec<f64> = (0..self.m)
                    .map(|i| if eligible[i] { expert_preds[i] } else { mean })
                    .collect();
                learners::predict_row(model, &row)
            }
            CombinerKind::Ade => {
                let features = features.ok_or_else(|| {
                    Error::InvalidInput("ADE combine requires the feature row".into())
                })?;
                let weights = self.ade_weights(expert_preds, features, &eligible)?;
                Ok((0..self.m).map(|i| weights[i] * expert_preds[i]).sum())
            }
        }
    }

    /// EWA multiplicative step (shifted by the step's minimum loss for
    /// numeric range), followed by the fixed-share mix. `alpha = 0` is
    /// exactly EWA.
    fn exp_share_update(&mut self, losses: &[f64], alpha: f64) {
        let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
        let mut z = 0.0;
        for (w, &l) in self.weights.iter_mut().zip(losses) {
            *w *= (-self.config.eta * (l - min)).exp();
            z += *w;
        }
        for w in self.weights.iter_mut() {
            *w /= z;
            if alpha > 0.0 {
                *w = (1.0 - alpha) * *w + alpha / self.m as f64;
            }
        }
    }

    /// Records the outcome and applies the rule-specific re-weighting.
    /// A non-finite expert prediction is substituted with the combined
    /// forecast of the finite experts, so its recorded loss for this step
    /// equals the ensemble's own.
    pub fn update(&mut self, expert_preds: &[f64], actual: f64) -> Result<()> {
        let eligible = self.check_preds(expert_preds)?;
        if !actual.is_finite() {
            return Err(Error::InvalidInput(
                "update requires a finite outcome".into(),
            ));
        }
        let combined = self.weighted_over(expert_preds, &eligible);
        let preds: Vec<f64> = (0..self.m)
            .map(|i| {
                if eligible[i] {
                    expert_preds[i]
                } else {
                    combined
                }
            })
            .collect();

        self.t += 1;
        let abs_errors: Vec<f64> = preds.iter().map(|p| (p - actual).abs()).collect();
        let sq_losses: Vec<f64> = abs_errors.iter().map(|e| e * e).collect();

        self.window.push_back(abs_errors.clone());
        while self.window.len() > self.config.lambda_window {
            self.window.pop_front();
        }
        for i in 0..self.m {
            self.cumulative_abs[i] += abs_errors[i];
            self.cumulative_sq[i] += sq_losses[i];
            self.discounted_abs[i] =
                self.config.forgetting * self.discounted_abs[i] + abs_errors[i];
        }
        let combined_loss = (combined - actual) * (combined - actual);
        for i in 0..self.m {
            self.regret[i] += combined_loss - sq_losses[i];
        }

        match self.config.kind {
            CombinerKind::Simple
            | CombinerKind::Stacking
            | CombinerKind::Best
            | CombinerKind::Ade => {}
            CombinerKind::Ewa => self.exp_share_update(&sq_losses, 0.0),
            CombinerKind::Fs => self.exp_share_update(&sq_losses, self.config.alpha),
            CombinerKind::Wl => {
                let windowed = self.windowed_mean_abs();
                let mut z = 0.0;
                for (w, &l) in self.weights.iter_mut().zip(&windowed) {
                    *w = 1.0 / (WL_EPSILON + l);
                    z += *w;
                }
                self.weights.iter_mut().for_each(|w| *w /= z);
            }
            CombinerKind::Blast => {
                let windowed = self.windowed_mean_abs();
                let best = argmin(&windowed);
                self.weights.iter_mut().for_each(|w| *w = 0.0);
                self.weights[best] = 1.0;
            }
            CombinerKind::SimpleTrim => {
                let everyone = vec![true; self.m];
                let kept = self.trimmed_set(&everyone);
                self.weights.iter_mut().for_each(|w| *w = 0.0);
                for &i in &kept {
                    self.weights[i] = 1.0 / kept.len() as f64;
                }
            }
            CombinerKind::Aec => {
                let min = self
                    .discounted_abs
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                let mut z = 0.0;
                for (w, &e) in self.weights.iter_mut().zip(&self.discounted_abs) {
                    *w = (-(e - min)).exp();
                    z += *w;
                }
                self.weights.iter_mut().for_each(|w| *w /= z);
            }
            CombinerKind::MlPol => {
                // Quadratic potential (q = 2): weight proportional to the
                // positive part of the cumulative regret.
                let total: f64 = self.regret.iter().map(|r| r.max(0.0)).sum();
                if total > 0.0 {
                    for (w, r) in self.weights.iter_mut().zip(&self.regret) {
                        *w = r.max(0.0) / total;
                    }
                } else {
                    self.weights
                        .iter_mut()
                        .for_each(|w| *w = 1.0 / self.m as f64);
                }
            }
            CombinerKind::Ogd => {
                let step = self.config.eta / (self.t as f64).sqrt();
                let grad_scale = 2.0 * (combined - actual);
                let moved: Vec<f64> = self
                    .weights
                    .iter()
                    .zip(&preds)
                    .map(|(w, p)| w - step * grad_scale * p)
                    .collect();
                self.weights = project_simplex(&moved);
            }
            CombinerKind::Ridge => {
                let dim = self.gram_dim();
                let mut augmented = preds.clone();
                if dim > self.m {
                    augmented.push(1.0);
                }
                for i in 0..dim {
                    self.cross[i] += actual * augmented[i];
                    for j in 0..dim {
                        self.gram[i * dim + j] += augmented[i] * augmented[j];
                    }
                }
                let mut a = DMatrix::from_row_slice(dim, dim, &self.gram);
                for i in 0..dim {
                    a[(i, i)] += self.config.ridge_penalty;
                }
                let b = DVector::from_column_slice(&self.cross);
                if let Some(solution) = solve_spd(a, b) {
                    if solution.iter().all(|w| w.is_finite()) {
                        self.weights = solution.as_slice()[..self.m].to_vec();
                        if dim > self.m {
                            self.ridge_offset = solution[self.m];
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Euclidean projection onto the probability simplex (sort-and-threshold).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite input"));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Weight trajectory recorder for audit exports: one `(t, expert, weight)`
/// triple per expert per recorded step.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct WeightLog {
    pub entries: Vec<(u64, usize, f64)>,
}

impl WeightLog {
    pub fn record(&mut self, t: u64, weights: &[f64]) {
        for (i, &w) in weights.iter().enumerate() {
            self.entries.push((t, i, w));
        }
    }

    pub fn to_csv(&self, expert_ids: Option<&[String]>) -> String {
        let mut out = String::from("t,expert_id,weight\n");
        for (t, idx, w) in &self.entries {
            let id = expert_ids
                .and_then(|ids| ids.get(*idx).cloned())
                .unwrap_or_else(|| idx.to_string());
            out.push_str(&format!("{t},{id},{w}\n"));
        }
        out
    }
}
