//! Student-teacher compression: generate teaching targets from an ensemble
//! teacher, train a student on them, and measure how closely the student
//! tracks the teacher.

use serde::{Deserialize, Serialize};

use crate::combiners::{Combiner, CombinerConfig, WarmupData};
use crate::error::{Error, Result};
use crate::learners::{self, LearnerSpec, Portfolio, TrainedModel};
use crate::series::{blocked_prequential, EmbeddedDataset};

/// Where the teacher's predictions come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeachingStrategy {
    /// Predictions of models fitted on all training rows, on those same rows.
    Resubstitution,
    /// Out-of-bag predictions from growing-window refits over contiguous
    /// blocks; block 1 yields no rows.
    PrequentialOob,
}

impl TeachingStrategy {
    pub fn label(&self) -> &'static str {
        match self {
            TeachingStrategy::Resubstitution => "resub",
            TeachingStrategy::PrequentialOob => "oob",
        }
    }

    pub fn parse(label: &str) -> Option<Self> {
        match label {
            "resub" | "resubstitution" => Some(TeachingStrategy::Resubstitution),
            "oob" | "prequential_oob" => Some(TeachingStrategy::PrequentialOob),
            _ => None,
        }
    }
}

/// Features paired with combined teacher predictions in place of the
/// original target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeachingSet {
    pub features: Vec<Vec<f64>>,
    pub teacher_targets: Vec<f64>,
    pub strategy: TeachingStrategy,
    pub teacher_id: String,
}

impl TeachingSet {
    pub fn n_rows(&self) -> usize {
        self.teacher_targets.len()
    }

    /// CSV export: one feature column per lag plus the teacher target.
    pub fn to_csv(&self) -> String {
        let width = self.features.first().map_or(0, |r| r.len());
        let mut out = String::new();
        for j in 0..width {
            out.push_str(&format!("lag{},", j + 1));
        }
        out.push_str("teacher_target\n");
        for (row, target) in self.features.iter().zip(&self.teacher_targets) {
            for v in row {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{target}\n"));
        }
        out
    }
}

/// A student trained to emulate a teacher; predicts with no access to the
/// teacher after training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistilledModel {
    pub student: TrainedModel,
    pub teacher_id: String,
    pub strategy: TeachingStrategy,
}

/// Out-of-bag expert predictions over blocks 2..B of a growing-window plan:
/// for each fold the portfolio is refitted on the earlier blocks and
/// predicts its own block. The result doubles as combiner warmup data.
pub fn oob_expert_predictions(
    specs: &[LearnerSpec],
    data: &EmbeddedDataset,
    n_blocks: usize,
) -> Result<WarmupData> {
    let plan = blocked_prequential(data.n_rows(), n_blocks)?;
    let mut features = Vec::new();
    let mut expert_preds = Vec::new();
    let mut targets = Vec::new();
    for fold in &plan.folds {
        let train = data.slice(fold.train);
        let portfolio = learners::train_portfolio(specs, &train)?;
        for i in fold.predict.iter() {
            expert_preds.push(portfolio.predict_row(&data.features[i])?);
            features.push(data.features[i].clone());
            targets.push(data.targets[i]);
        }
    }
    Ok(WarmupData {
        features,
        expert_preds,
        targets,
    })
}

/// Generates teaching targets by replaying the training stream through the
/// combiner in observation order, updating weights as in deployment.
///
/// Under resubstitution the expert predictions come from `portfolio` (fitted
/// on all of `data`); under the prequential strategy they are out-of-bag
/// predictions from per-fold refits, and the rows exclude block 1. Rules
/// that need warmup (Stacking, ADE, Best) fit their meta state on the
/// out-of-bag stream, which requires `prequential_blocks` either way.
pub fn generate_teaching_targets(
    portfolio: &Portfolio,
    combiner_config: &CombinerConfig,
    data: &EmbeddedDataset,
    strategy: TeachingStrategy,
    prequential_blocks: Option<usize>,
) -> Result<TeachingSet> {
    let needs_oob =
        combiner_config.kind.requires_warmup() || strategy == TeachingStrategy::PrequentialOob;
    let oob = if needs_oob {
        let blocks = prequential_blocks.ok_or(Error::BlockCountRequired)?;
        Some(oob_expert_predictions(&portfolio.specs(), data, blocks)?)
    } else {
        None
    };
    generate_teaching_targets_with_oob(portfolio, combiner_config, data, strategy, oob.as_ref())
}

/// Like [`generate_teaching_targets`] but reusing an already-computed
/// out-of-bag stream (the per-fold refits are the expensive part, and the
/// same stream also serves as combiner warmup elsewhere).
pub fn generate_teaching_targets_with_oob(
    portfolio: &Portfolio,
    combiner_config: &CombinerConfig,
    data: &EmbeddedDataset,
    strategy: TeachingStrategy,
    oob: Option<&WarmupData>,
) -> Result<TeachingSet> {
    let m = portfolio.len();
    if m == 0 {
        return Err(Error::EmptyPortfolio);
    }
    if (combiner_config.kind.requires_warmup() || strategy == TeachingStrategy::PrequentialOob)
        && oob.is_none()
    {
        return Err(Error::BlockCountRequired);
    }

    let mut combiner = match oob {
        Some(warmup) if combiner_config.kind.requires_warmup() => {
            Combiner::with_meta(combiner_config.clone(), m, warmup)?
        }
        _ => Combiner::new(combiner_config.clone(), m)?,
    };

    let (features, preds, actuals) = match strategy {
        TeachingStrategy::Resubstitution => {
            let preds = portfolio.predict_matrix(&data.features)?;
            (data.features.clone(), preds, data.targets.clone())
        }
        TeachingStrategy::PrequentialOob => {
            let oob = oob.expect("prequential strategy checked the OOB stream");
            (
                oob.features.clone(),
                oob.expert_preds.clone(),
                oob.targets.clone(),
            )
        }
    };

    let mut teacher_targets = Vec::with_capacity(actuals.len());
    for ((row, pred_row), &actual) in features.iter().zip(&preds).zip(&actuals) {
        teacher_targets.push(combiner.combine(pred_row, Some(row))?);
        combiner.update(pred_row, actual)?;
    }

    Ok(TeachingSet {
        features,
        teacher_targets,
        strategy,
        teacher_id: combiner_config.kind.label().to_string(),
    })
}

/// Trains the student on the teacher-labelled rows. The original targets are
/// nowhere in scope: only `teaching.teacher_targets` are used.
pub fn distill(student_spec: &LearnerSpec, teaching: &TeachingSet) -> Result<DistilledModel> {
    if teaching.n_rows() == 0 {
        return Err(Error::EmptyTeachingSet);
    }
    if let Some(bad) = teaching.teacher_targets.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "teaching targets must be finite, got {bad}"
        )));
    }
    let width = teaching.features.first().map_or(0, |r| r.len());
    let data = EmbeddedDataset {
        features: teaching.features.clone(),
        targets: teaching.teacher_targets.clone(),
        lag_order: width,
    };
    let student = learners::train(student_spec, &data)?;
    Ok(DistilledModel {
        student,
        teacher_id: teaching.teacher_id.clone(),
        strategy: teaching.strategy,
    })
}

/// Mean and maximum absolute student–teacher discrepancy over the given rows.
pub fn fidelity(
    distilled: &DistilledModel,
    teacher_predictions: &[f64],
    student_features: &[Vec<f64>],
) -> Result<(f64, f64)> {
    if teacher_predictions.len() != student_features.len() {
        return Err(Error::RowCountMismatch {
            left: teacher_predictions.len(),
            right: student_features.len(),
        });
    }
    if teacher_predictions.is_empty() {
        return Ok((0.0, 0.0));
    }
    let student_preds = learners::predict(&distilled.student, student_features)?;
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for (s, t) in student_preds.iter().zip(teacher_predictions) {
        let d = (s - t).abs();
        sum += d;
        max = max.max(d);
    }
    Ok((sum / teacher_predictions.len() as f64, max))
}
