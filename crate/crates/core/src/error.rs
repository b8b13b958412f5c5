use thiserror::Error;

/// Errors produced by series handling, learners, combiners, and evaluation.
#[derive(Error, Debug)]
pub enum Error {
    #[error("series too short for lag order (length {length}, lag order {lag_order})")]
    SeriesTooShort { length: usize, lag_order: usize },

    #[error("series contains a non-finite value at row {row}")]
    NonFiniteValue { row: usize },

    #[error("holdout fractions infeasible (n_rows {n_rows}, train {train_len}, test {test_len})")]
    HoldoutInfeasible {
        n_rows: usize,
        train_len: usize,
        test_len: usize,
    },

    #[error("prequential needs at least two blocks (requested {requested})")]
    PrequentialBlocks { requested: usize },

    #[error("zero naive error; MASE undefined")]
    ZeroNaiveError,

    #[error("MASE undefined (scale {scale} must be positive)")]
    MaseUndefined { scale: f64 },

    #[error("feature dimension mismatch (expected {expected}, got {got})")]
    FeatureDimMismatch { expected: usize, got: usize },

    #[error("portfolio ids must be unique (duplicate: {id})")]
    DuplicatePortfolioId { id: String },

    #[error("portfolio must be non-empty")]
    EmptyPortfolio,

    #[error("invalid hyperparameter for {family}: {reason}")]
    InvalidHyperparameter { family: String, reason: String },

    #[error("combiner requires out-of-bag warmup data")]
    WarmupRequired,

    #[error("all expert predictions are non-finite")]
    AllExpertsNonFinite,

    #[error("expert count mismatch (expected {expected}, got {got})")]
    ExpertCountMismatch { expected: usize, got: usize },

    #[error("block count required")]
    BlockCountRequired,

    #[error("teaching set must be non-empty")]
    EmptyTeachingSet,

    #[error("row count mismatch (left {left}, right {right})")]
    RowCountMismatch { left: usize, right: usize },

    #[error("empty ROPE (lo {lo} must be below hi {hi})")]
    EmptyRope { lo: f64, hi: f64 },

    #[error("incomplete column for ranking (method {method}, column {column})")]
    IncompleteColumn { method: String, column: String },

    #[error("not enough samples: {0}")]
    NotEnoughSamples(String),

    #[error("training data must be non-empty")]
    EmptyTrainingData,

    #[error("{0}")]
    InvalidInput(String),

    #[error("failed to read series: {0}")]
    Io(#[from] std::io::Error),

    #[error("failed to parse series file {path} row {row}: {reason}")]
    SeriesParse {
        path: String,
        row: usize,
        reason: String,
    },

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
