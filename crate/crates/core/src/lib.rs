//! Dynamic heterogeneous ensembles for one-step univariate forecasting,
//! compressed into single student models via teacher-labelled training.
//!
//! The crate is organised around the pipeline stages:
//!
//! * [`series`] — series ingestion, time-delay embedding, and the holdout /
//!   blocked-prequential partition plans;
//! * [`learners`] — the from-scratch portfolio of base regressors (ridge,
//!   kernel ridge, kNN, trees, bagged forests, model trees);
//! * [`combiners`] — online forecast-combination rules, from the simple
//!   average to regret-minimising aggregation and meta-learning;
//! * [`compression`] — teacher-labelled training sets and student
//!   distillation;
//! * [`evaluation`] — MASE scoring, rank aggregation, the Bayes sign test
//!   with a ROPE, and cost profiling.

pub mod combiners;
pub mod compression;
pub mod error;
pub mod evaluation;
pub mod learners;
pub mod linalg;
pub mod rng;
pub mod series;

pub use error::{Error, Result};
pub use series::{
    blocked_prequential, embed, naive_scale, repeated_holdout, EmbeddedDataset, HoldoutPlan,
    IndexRange, PrequentialFold, PrequentialPlan, TimeSeries,
};

pub use combiners::{Combiner, CombinerConfig, CombinerKind, WarmupData};
pub use compression::{
    distill, fidelity, generate_teaching_targets, generate_teaching_targets_with_oob,
    oob_expert_predictions, DistilledModel, TeachingSet, TeachingStrategy,
};
pub use evaluation::{
    average_ranks, bayes_sign_test, mase, profile_cost, BayesResult, CostProfile, CostSubject,
    RankSummary, ScoreMatrix,
};
pub use learners::{
    default_portfolio_specs, model_size, predict, predict_row, train, train_portfolio, LearnerKind,
    LearnerSpec, ModelParams, Portfolio, TrainedModel,
};
