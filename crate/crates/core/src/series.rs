//! Univariate series representation, time-delay embedding, and the data
//! partition plans (repeated holdout, blocked prequential) used by every
//! downstream stage.

use std::ops::Range;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Half-open index interval `[start, end)`, serialized as a two-element
/// `[start, end]` array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct IndexRange {
    pub start: usize,
    pub end: usize,
}

impl From<(usize, usize)> for IndexRange {
    fn from((start, end): (usize, usize)) -> Self {
        IndexRange { start, end }
    }
}

impl From<IndexRange> for (usize, usize) {
    fn from(r: IndexRange) -> Self {
        (r.start, r.end)
    }
}

impl IndexRange {
    pub fn new(start: usize, end: usize) -> Self {
        IndexRange { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, idx: usize) -> bool {
        idx >= self.start && idx < self.end
    }

    pub fn iter(&self) -> Range<usize> {
        self.start..self.end
    }
}

/// An ordered sequence of finite real observations, optionally tagged with a
/// seasonal period (observations per cycle).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub id: String,
    pub values: Vec<f64>,
    pub period: Option<usize>,
}

impl TimeSeries {
    /// Builds a series, rejecting non-finite observations and zero periods.
    pub fn new(id: impl Into<String>, values: Vec<f64>, period: Option<usize>) -> Result<Self> {
        if let Some(row) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { row });
        }
        if period == Some(0) {
            return Err(Error::InvalidInput(
                "seasonal period must be positive".into(),
            ));
        }
        Ok(TimeSeries {
            id: id.into(),
            values,
            period,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Supervised view of a series: each row holds the `p` most recent lagged
/// values (newest lag first) and the target is the next observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedDataset {
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub lag_order: usize,
}

impl EmbeddedDataset {
    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }

    /// Returns the rows selected by `range` as a standalone dataset.
    pub fn slice(&self, range: IndexRange) -> EmbeddedDataset {
        EmbeddedDataset {
            features: self.features[range.start..range.end].to_vec(),
            targets: self.targets[range.start..range.end].to_vec(),
            lag_order: self.lag_order,
        }
    }

    /// Like [`slice`](Self::slice) but gathers arbitrary row indices.
    pub fn gather(&self, indices: impl Iterator<Item = usize>) -> EmbeddedDataset {
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for i in indices {
            features.push(self.features[i].clone());
            targets.push(self.targets[i]);
        }
        EmbeddedDataset {
            features,
            targets,
            lag_order: self.lag_order,
        }
    }
}

/// Train/test intervals for repeated-holdout evaluation, one pair per
/// sampled cut point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldoutPlan {
    pub repetitions: Vec<(IndexRange, IndexRange)>,
    pub seed: u64,
}

/// One growing-window fold: train on everything before the block, predict
/// the block itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrequentialFold {
    pub train: IndexRange,
    pub predict: IndexRange,
}

/// Contiguous near-equal blocks plus the growing-window folds over them.
/// Block 1 is never predicted; it only seeds the first fold's training set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrequentialPlan {
    pub blocks: Vec<IndexRange>,
    pub folds: Vec<PrequentialFold>,
}

/// Transforms a series into lagged rows. Row `i` (0-based) has feature
/// column `j` equal to `values[p + i - 1 - j]` and target `values[p + i]`,
/// so column 0 is the most recent lag.
pub fn embed(series: &TimeSeries, p: usize) -> Result<EmbeddedDataset> {
    if p == 0 {
        return Err(Error::InvalidInput("lag order must be positive".into()));
    }
    let n = series.len();
    if n <= p {
        return Err(Error::SeriesTooShort {
            length: n,
            lag_order: p,
        });
    }
    let rows = n - p;
    let mut features = Vec::with_capacity(rows);
    let mut targets = Vec::with_capacity(rows);
    for i in 0..rows {
        let mut row = Vec::with_capacity(p);
        for j in 0..p {
            row.push(series.values[p + i - 1 - j]);
        }
        features.push(row);
        targets.push(series.values[p + i]);
    }
    Ok(EmbeddedDataset {
        features,
        targets,
        lag_order: p,
    })
}

/// Samples `reps` cut points uniformly from the feasible interval and pairs
/// each with the `floor(train_frac * n)` rows before it and the
/// `floor(test_frac * n)` rows from it onward. Deterministic given `seed`.
pub fn repeated_holdout(
    n_rows: usize,
    reps: usize,
    train_frac: f64,
    test_frac: f64,
    seed: u64,
) -> Result<HoldoutPlan> {
    if reps == 0 {
        return Err(Error::InvalidInput(
            "holdout needs at least one repetition".into(),
        ));
    }
    if !(train_frac > 0.0 && test_frac > 0.0 && train_frac + test_frac <= 1.0) {
        return Err(Error::HoldoutInfeasible {
            n_rows,
            train_len: 0,
            test_len: 0,
        });
    }
    let train_len = (train_frac * n_rows as f64).floor() as usize;
    let test_len = (test_frac * n_rows as f64).floor() as usize;
    if train_len == 0 || test_len == 0 || train_len + test_len > n_rows {
        return Err(Error::HoldoutInfeasible {
            n_rows,
            train_len,
            test_len,
        });
    }
    // Cut point c uses rows [c - train_len, c) for training and
    // [c, c + test_len) for testing; both segments must fit inside the data.
    let lo = train_len;
    let hi = n_rows - test_len;
    let mut rng: ChaCha8Rng = seeded_rng(seed);
    let mut repetitions = Vec::with_capacity(reps);
    for _ in 0..reps {
        let c = rng.random_range(lo..=hi);
        repetitions.push((
            IndexRange::new(c - train_len, c),
            IndexRange::new(c, c + test_len),
        ));
    }
    Ok(HoldoutPlan { repetitions, seed })
}

/// Partitions `[0, n_rows)` into `n_blocks` contiguous blocks whose sizes
/// differ by at most one, and derives the growing-window folds.
pub fn blocked_prequential(n_rows: usize, n_blocks: usize) -> Result<PrequentialPlan> {
    if n_blocks < 2 {
        return Err(Error::PrequentialBlocks {
            requested: n_blocks,
        });
    }
    if n_blocks > n_rows {
        return Err(Error::InvalidInput(format!(
            "cannot split {n_rows} rows into {n_blocks} blocks"
        )));
    }
    let base = n_rows / n_blocks;
    let extra = n_rows % n_blocks;
    let mut blocks = Vec::with_capacity(n_blocks);
    let mut start = 0;
    for b in 0..n_blocks {
        let size = base + usize::from(b < extra);
        blocks.push(IndexRange::new(start, start + size));
        start += size;
    }
    let folds = blocks
        .iter()
        .skip(1)
        .map(|block| PrequentialFold {
            train: IndexRange::new(0, block.start),
            predict: *block,
        })
        .collect();
    Ok(PrequentialPlan { blocks, folds })
}

/// Mean absolute one-step difference of the training targets — the MASE
/// denominator. Constant targets make the scale zero, which is reported as
/// an error rather than an infinite score.
pub fn naive_scale(train_targets: &[f64]) -> Result<f64> {
    if train_targets.len() < 2 {
        return Err(Error::NotEnoughSamples(
            "naive scale needs at least two targets".into(),
        ));
    }
    let sum: f64 = train_targets.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let scale = sum / (train_targets.len() - 1) as f64;
    if scale <= 0.0 {
        return Err(Error::ZeroNaiveError);
    }
    Ok(scale)
}

/// Sidecar metadata for a CSV series file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SeriesManifest {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub period: Option<usize>,
}

/// Reads a one-column CSV of values (optional `value` header). If a sidecar
/// manifest `<stem>.json` exists it supplies `id` and `period`; otherwise the
/// file stem names the series.
pub fn read_series_csv(path: &Path) -> Result<TimeSeries> {
    let text = std::fs::read_to_string(path)?;
    let display = path.display().to_string();
    let mut values = Vec::new();
    for (row, line) in text.lines().enumerate() {
        let cell = line.trim();
        if cell.is_empty() {
            continue;
        }
        if row == 0 && cell.eq_ignore_ascii_case("value") {
            continue;
        }
        let v: f64 = cell.parse().map_err(|e| Error::SeriesParse {
            path: display.clone(),
            row: row + 1,
            reason: format!("{e}"),
        })?;
        if !v.is_finite() {
            return Err(Error::SeriesParse {
                path: display.clone(),
                row: row + 1,
                reason: format!("non-finite value {v}"),
            });
        }
        values.push(v);
    }

    let manifest_path = path.with_extension("json");
    let manifest: SeriesManifest = if manifest_path.is_file() {
        serde_json::from_str(&std::fs::read_to_string(&manifest_path)?)?
    } else {
        SeriesManifest::default()
    };
    let id = manifest.id.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| display.clone())
    });
    TimeSeries::new(id, values, manifest.period)
}
