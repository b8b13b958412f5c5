//! Forecast scoring (MASE), rank aggregation across series, the Bayes sign
//! test with a region of practical equivalence, and cost profiling.

use std::time::Instant;

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::combiners::Combiner;
use crate::error::{Error, Result};
use crate::learners::{self, Portfolio, TrainedModel};
use crate::rng::seeded_rng;

/// Mean absolute scaled error: mean |prediction - actual| divided by the
/// naive one-step MAE of the training segment (see
/// [`naive_scale`](crate::series::naive_scale)).
pub fn mase(predictions: &[f64], actuals: &[f64], scale: f64) -> Result<f64> {
    if predictions.len() != actuals.len() {
        return Err(Error::RowCountMismatch {
            left: predictions.len(),
            right: actuals.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::NotEnoughSamples(
            "MASE needs at least one prediction".into(),
        ));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::MaseUndefined { scale });
    }
    let mae = predictions
        .iter()
        .zip(actuals)
        .map(|(p, a)| (p - a).abs())
        .sum::<f64>()
        / predictions.len() as f64;
    Ok(mae / scale)
}

/// method x (series, repetition) MASE scores. Missing cells stay explicit
/// (`None`); scored cells must be finite and non-negative.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    methods: Vec<String>,
    columns: Vec<(String, usize)>,
    cells: Vec<Vec<Option<f64>>>,
}

impl ScoreMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn methods(&self) -> &[String] {
        &self.methods
    }

    pub fn columns(&self) -> &[(String, usize)] {
        &self.columns
    }

    fn method_index(&mut self, method: &str) -> usize {
        if let Some(i) = self.methods.iter().position(|m| m == method) {
            return i;
        }
        self.methods.push(method.to_string());
        self.cells.push(vec![None; self.columns.len()]);
        self.methods.len() - 1
    }

    fn column_index(&mut self, series: &str, repetition: usize) -> usize {
        if let Some(i) = self
            .columns
            .iter()
            .position(|(s, r)| s == series && *r == repetition)
        {
            return i;
        }
        self.columns.push((series.to_string(), repetition));
        for row in &mut self.cells {
            row.push(None);
        }
        self.columns.len() - 1
    }

    pub fn insert(
        &mut self,
        method: &str,
        series: &str,
        repetition: usize,
        score: f64,
    ) -> Result<()> {
        if !(score.is_finite() && score >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "score for {method}/{series}/{repetition} must be finite and >= 0, got {score}"
            )));
        }
        let mi = self.method_index(method);
        let ci = self.column_index(series, repetition);
        self.cells[mi][ci] = Some(score);
        Ok(())
    }

    pub fn get(&self, method: &str, series: &str, repetition: usize) -> Option<f64> {
        let mi = self.methods.iter().position(|m| m == method)?;
        let ci = self
            .columns
            .iter()
            .position(|(s, r)| s == series && *r == repetition)?;
        self.cells[mi][ci]
    }

    /// Mean score per series for one method, in series order of first
    /// appearance. `None` if the method misses every repetition of a series.
    pub fn per_series_means(&self, method: &str) -> Vec<(String, Option<f64>)> {
        let Some(mi) = self.methods.iter().position(|m| m == method) else {
            return Vec::new();
        };
        let mut order: Vec<String> = Vec::new();
        for (s, _) in &self.columns {
            if !order.contains(s) {
                order.push(s.clone());
            }
        }
        order
            .into_iter()
            .map(|series| {
                let scores: Vec<f64> = self
                    .columns
                    .iter()
                    .enumerate()
                    .filter(|(_, (s, _))| *s == series)
                    .filter_map(|(ci, _)| self.cells[mi][ci])
                    .collect();
                let mean = if scores.is_empty() {
                    None
                } else {
                    Some(scores.iter().sum::<f64>() / scores.len() as f64)
                };
                (series, mean)
            })
            .collect()
    }

    /// Long-format CSV `(method,series,repetition,mase)` sorted
    /// lexicographically, so identical matrices serialize byte-identically.
    pub fn to_long_csv(&self) -> String {
        let mut rows: Vec<(String, String, usize, f64)> = Vec::new();
        for (mi, method) in self.methods.iter().enumerate() {
            for (ci, (series, rep)) in self.columns.iter().enumerate() {
                if let Some(score) = self.cells[mi][ci] {
                    rows.push((method.clone(), series.clone(), *rep, score));
                }
            }
        }
        rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut out = String::from("method,series,repetition,mase\n");
        for (method, series, rep, score) in rows {
            out.push_str(&format!("{method},{series},{rep},{score}\n"));
        }
        out
    }

    /// Parses the long-format CSV produced by [`to_long_csv`].
    pub fn from_long_csv(text: &str) -> Result<Self> {
        let mut matrix = ScoreMatrix::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(Error::InvalidInput(format!(
                    "score CSV line {} has {} fields",
                    i + 1,
                    parts.len()
                )));
            }
            let rep: usize = parts[2]
                .parse()
                .map_err(|e| Error::InvalidInput(format!("bad repetition: {e}")))?;
            let score: f64 = parts[3]
                .parse()
                .map_err(|e| Error::InvalidInput(format!("bad score: {e}")))?;
            matrix.insert(parts[0], parts[1], rep, score)?;
        }
        Ok(matrix)
    }
}

/// Mean rank and its standard deviation for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub method: String,
    pub mean_rank: f64,
    pub sd_rank: f64,
}

/// Ranks within each `(series, repetition)` column (ascending score, ties
/// averaged), then averages across columns. Every ranked method must have a
/// score in every column.
pub fn average_ranks(scores: &ScoreMatrix, methods: Option<&[String]>) -> Result<Vec<RankSummary>> {
    let selected: Vec<String> = match methods {
        Some(m) => m.to_vec(),
        None => scores.methods().to_vec(),
    };
    if selected.is_empty() || scores.columns().is_empty() {
        return Err(Error::NotEnoughSamples(
            "ranking needs methods and columns".into(),
        ));
    }
    let mut rank_sums = vec![0.0; selected.len()];
    let mut rank_sqs = vec![0.0; selected.len()];
    let n_cols = scores.columns().len();

    for (series, rep) in scores.columns().to_vec() {
        let mut column = Vec::with_capacity(selected.len());
        for method in &selected {
            match scores.get(method, &series, rep) {
                Some(v) => column.push(v),
                None => {
                    return Err(Error::IncompleteColumn {
                        method: method.clone(),
                        column: format!("{series}/{rep}"),
                    })
                }
            }
        }
        let ranks = ranks_with_ties(&column);
        for (i, r) in ranks.iter().enumerate() {
            rank_sums[i] += r;
            rank_sqs[i] += r * r;
        }
    }

    Ok(selected
        .into_iter()
        .enumerate()
        .map(|(i, method)| {
            let mean = rank_sums[i] / n_cols as f64;
            let sd = if n_cols > 1 {
                ((rank_sqs[i] - rank_sums[i] * rank_sums[i] / n_cols as f64)
                    / (n_cols as f64 - 1.0))
                    .max(0.0)
                    .sqrt()
            } else {
                0.0
            };
            RankSummary {
                method,
                mean_rank: mean,
                sd_rank: sd,
            }
        })
        .collect())
}

/// Ascending ranks starting at 1; tied values share the average of their
/// positions.
pub fn ranks_with_ties(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite scores"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Posterior win/rope/lose probabilities from the Bayes sign test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesResult {
    pub p_win: f64,
    pub p_rope: f64,
    pub p_lose: f64,
    pub rope: (f64, f64),
    pub samples: usize,
    pub counts: (usize, usize, usize),
}

/// Bayes sign test over per-task percentage differences. Positive
/// differences count as wins, values inside `[rope.0, rope.1]` as practical
/// ties, and the prior places `prior_strength` pseudo-observations on the
/// ROPE category. Each Monte Carlo draw samples Dirichlet category weights
/// and the reported probabilities are how often each category's weight is
/// the maximum. Deterministic given `seed`.
pub fn bayes_sign_test(
    pct_diffs: &[f64],
    rope: (f64, f64),
    mc_samples: usize,
    prior_strength: f64,
    seed: u64,
) -> Result<BayesResult> {
    let (lo, hi) = rope;
    if lo >= hi {
        return Err(Error::EmptyRope { lo, hi });
    }
    if mc_samples < 10_000 {
        return Err(Error::NotEnoughSamples(
            "bayes sign test needs at least 10000 Monte Carlo samples".into(),
        ));
    }
    if !(prior_strength >= 0.0 && prior_strength.is_finite()) {
        return Err(Error::InvalidInput(
            "prior_strength must be finite and >= 0".into(),
        ));
    }
    let mut n_win = 0usize;
    let mut n_rope = 0usize;
    let mut n_lose = 0usize;
    for &d in pct_diffs {
        if !d.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite difference {d}")));
        }
        if d > hi {
            n_win += 1;
        } else if d < lo {
            n_lose += 1;
        } else {
            n_rope += 1;
        }
    }
    let alphas = [n_win as f64, n_rope as f64 + prior_strength, n_lose as f64];
    if alphas.iter().all(|&a| a <= 0.0) {
        return Err(Error::NotEnoughSamples(
            "bayes sign test needs data or a positive prior".into(),
        ));
    }

    let mut rng = seeded_rng(seed);
    let gammas: Vec<Option<Gamma<f64>>> = alphas
        .iter()
        .map(|&a| {
            if a > 0.0 {
                Gamma::new(a, 1.0).ok()
            } else {
                None
            }
        })
        .collect();
    let mut hits = [0usize; 3];
    for _ in 0..mc_samples {
        let mut draw = [0.0f64; 3];
        for (slot, gamma) in draw.iter_mut().zip(&gammas) {
            if let Some(g) = gamma {
                *slot = g.sample(&mut rng);
            }
        }
        let mut best = 0;
        for i in 1..3 {
            if draw[i] > draw[best] {
                best = i;
            }
        }
        hits[best] += 1;
    }
    let total = mc_samples as f64;
    Ok(BayesResult {
        p_win: hits[0] as f64 / total,
        p_rope: hits[1] as f64 / total,
        p_lose: hits[2] as f64 / total,
        rope,
        samples: mc_samples,
        counts: (n_win, n_rope, n_lose),
    })
}

/// Prediction wall time and serialized size for one predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostProfile {
    pub predict_seconds: f64,
    pub size_bytes: usize,
}

/// What to profile: a single model, or a portfolio plus combiner replayed
/// over the test stream (per-row predict, combine, and weight update).
pub enum CostSubject<'a> {
    Model(&'a TrainedModel),
    Ensemble {
        portfolio: &'a Portfolio,
        combiner: &'a Combiner,
        actuals: &'a [f64],
    },
}

/// Median wall-clock of `repeats` runs of `f`, on a monotonic clock.
pub fn median_seconds(repeats: usize, mut f: impl FnMut()) -> f64 {
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        f();
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    times[times.len() / 2]
}

/// Times prediction over `test_features` (median of 5 passes) and measures
/// the canonical serialized size. The ensemble path replays combine+update
/// per row, as deployment would, on a scratch copy of the combiner state.
pub fn profile_cost(subject: &CostSubject, test_features: &[Vec<f64>]) -> Result<CostProfile> {
    match subject {
        CostSubject::Model(model) => {
            // Surface prediction errors once before timing.
            learners::predict(model, test_features)?;
            let predict_seconds = median_seconds(5, || {
                let _ = learners::predict(model, test_features);
            });
            Ok(CostProfile {
                predict_seconds,
                size_bytes: learners::model_size(model)?,
            })
        }
        CostSubject::Ensemble {
            portfolio,
            combiner,
            actuals,
        } => {
            if actuals.len() != test_features.len() {
                return Err(Error::RowCountMismatch {
                    left: actuals.len(),
                    right: test_features.len(),
                });
            }
            let replay = |state: &mut Combiner| -> Result<()> {
                for (row, &y) in test_features.iter().zip(*actuals) {
                    let preds = portfolio.predict_row(row)?;
                    state.combine(&preds, Some(row))?;
                    state.update(&preds, y)?;
                }
                Ok(())
            };
            replay(&mut (*combiner).clone())?;
            let predict_seconds = median_seconds(5, || {
                let mut state = (*combiner).clone();
                let _ = replay(&mut state);
            });
            let size_bytes = portfolio.total_size_bytes()? + serde_json::to_vec(*combiner)?.len();
            Ok(CostProfile {
                predict_seconds,
                size_bytes,
            })
        }
    }
}

#[cfg(test)]
mod tests;
