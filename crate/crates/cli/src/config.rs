//! Experiment configuration: TOML on disk, CLI flags override file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fcomb_core::combiners::{CombinerConfig, CombinerKind};
use fcomb_core::compression::TeachingStrategy;
use fcomb_core::learners::{LearnerKind, LearnerSpec};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus_path: PathBuf,
    pub output_dir: PathBuf,
    /// Embedding lag order p.
    pub lag_order: usize,
    /// Window size lambda for loss-ranking combiners.
    pub lambda_window: usize,
    /// Number of repeated-holdout cut points per series.
    pub repetitions: usize,
    pub train_frac: f64,
    pub test_frac: f64,
    /// Series shorter than this are rejected at ingestion.
    pub min_series_length: usize,
    /// Blocks of the growing-window pass that warms combiners and supplies
    /// out-of-bag teaching data.
    pub warmup_blocks: usize,
    pub seed: u64,
    /// Combination rules to evaluate as teachers, by label.
    pub combiners: Vec<String>,
    /// Base-learner portfolio; `None` uses the default 30-member sweep.
    pub portfolio: Option<Vec<LearnerSpec>>,
    /// Student specs distilled from every teacher and also trained on the
    /// raw targets as controls.
    pub students: Vec<LearnerSpec>,
    pub teaching_strategies: Vec<TeachingStrategy>,
    /// Write per-teacher weight trajectories (t, expert_id, weight)
    /// under `<output_dir>/weights/` during test evaluation.
    pub log_weights: bool,
    /// Combiner hyperparameters shared across kinds.
    pub eta: f64,
    pub alpha: f64,
    pub forgetting: f64,
    pub ridge_penalty: f64,
    pub ridge_intercept: bool,
    pub trim_keep: f64,
    pub meta_spec: Option<LearnerSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus_path: PathBuf::from("corpus"),
            output_dir: PathBuf::from("results"),
            lag_order: 15,
            lambda_window: 50,
            repetitions: 10,
            train_frac: 0.60,
            test_frac: 0.10,
            min_series_length: 1000,
            warmup_blocks: 10,
            seed: 1,
            combiners: CombinerKind::ALL
                .iter()
                .map(|k| k.label().to_string())
                .collect(),
            portfolio: None,
            students: vec![default_student_spec()],
            teaching_strategies: vec![TeachingStrategy::Resubstitution],
            log_weights: false,
            eta: 1.0,
            alpha: 0.05,
            forgetting: 0.9,
            ridge_penalty: 1.0,
            ridge_intercept: false,
            trim_keep: 0.5,
            meta_spec: None,
        }
    }
}

pub fn default_student_spec() -> LearnerSpec {
    LearnerSpec {
        id: "mtree_student".into(),
        kind: LearnerKind::ModelTree {
            max_depth: 12,
            min_leaf: 30,
            leaf_penalty: 1.0,
        },
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("cannot parse {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| HarnessError::Config(format!("cannot serialize config: {e}")))?;
        std::fs::write(path, text)
            .map_err(|e| HarnessError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.repetitions < 1 {
            return fail("repetitions must be >= 1".into());
        }
        if self.lag_order < 1 {
            return fail("lag_order must be >= 1".into());
        }
        if self.warmup_blocks < 2 {
            return fail("warmup_blocks must be >= 2".into());
        }
        if !(self.train_frac > 0.0
            && self.test_frac > 0.0
            && self.train_frac + self.test_frac <= 1.0)
        {
            return fail("train_frac and test_frac must be positive and sum to <= 1".into());
        }
        if self.combiners.is_empty() {
            return fail("at least one combiner is required".into());
        }
        for label in &self.combiners {
            if CombinerKind::parse(label).is_none() {
                return fail(format!("unknown combiner '{label}'"));
            }
        }
        for spec in self.students.iter().chain(self.portfolio.iter().flatten()) {
            spec.validate().map_err(|e| {
                HarnessError::Config(format!("bad learner spec '{}': {e}", spec.id))
            })?;
        }
        // Surface bad combiner hyperparameters early.
        self.combiner_config(CombinerKind::Simple)
            .validate()
            .map_err(|e| HarnessError::Config(format!("bad combiner parameters: {e}")))?;
        Ok(())
    }

    pub fn combiner_kinds(&self) -> Vec<CombinerKind> {
        self.combiners
            .iter()
            .filter_map(|label| CombinerKind::parse(label))
            .collect()
    }

    pub fn combiner_config(&self, kind: CombinerKind) -> CombinerConfig {
        let mut config = CombinerConfig::new(kind);
        config.lambda_window = self.lambda_window;
        config.eta = self.eta;
        config.alpha = self.alpha;
        config.forgetting = self.forgetting;
        config.ridge_penalty = self.ridge_penalty;
        config.ridge_intercept = self.ridge_intercept;
        config.trim_keep = self.trim_keep;
        if let Some(spec) = &self.meta_spec {
            config.meta_spec = spec.clone();
        }
        config
    }

    pub fn portfolio_specs(&self) -> Vec<LearnerSpec> {
        match &self.portfolio {
            Some(specs) => specs.clone(),
            None => fcomb_core::learners::default_portfolio_specs(self.lag_order),
        }
    }

    /// Content hash of the configuration, with the output location blanked
    /// so a run can be relocated without invalidating its records.
    pub fn config_hash(&self) -> String {
        let mut normalized = self.clone();
        normalized.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&normalized).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
