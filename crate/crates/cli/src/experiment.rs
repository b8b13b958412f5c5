//! Experiment orchestration: for every series and holdout repetition, fit
//! the portfolio, warm and evaluate every combiner on the test window,
//! distill students, evaluate raw-target controls and classical baselines,
//! and persist one JSON record per (method, series, repetition).
//!
//! Records are content-addressed by (config hash, series, repetition,
//! method), which makes reruns resumable: existing records are loaded, not
//! recomputed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fcomb_core::combiners::{Combiner, WeightLog};
use fcomb_core::compression::{generate_teaching_targets_with_oob, oob_expert_predictions};
use fcomb_core::evaluation::{
    mase, median_seconds, profile_cost, CostProfile, CostSubject, ScoreMatrix,
};
use fcomb_core::learners::{self, dataset_fingerprint};
use fcomb_core::rng::derive_seed;
use fcomb_core::series::{
    embed, naive_scale, repeated_holdout, EmbeddedDataset, IndexRange, TimeSeries,
};

use crate::baselines;
use crate::config::ExperimentConfig;
use crate::corpus::load_corpus;
use crate::error::{HarnessError, Result};
use crate::labels;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
}

/// One scored method on one (series, repetition) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub method: String,
    pub series: String,
    pub repetition: usize,
    pub mase: f64,
    pub cost: CostProfile,
    /// Embedded-row intervals of this repetition, half-open.
    pub train_range: (usize, usize),
    pub test_range: (usize, usize),
    /// Fingerprint of the training slice every fitted artifact derives from.
    pub train_fingerprint: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuarantineReport {
    pub series: String,
    pub repetition: usize,
    pub reason: String,
}

#[derive(Debug)]
pub struct RunSummary {
    pub records: Vec<ResultRecord>,
    pub quarantined: Vec<QuarantineReport>,
    pub computed_groups: usize,
    pub skipped_groups: usize,
}

/// Re-derives the training-slice fingerprint from the embedded data and
/// checks the train window ends before the test window begins.
pub fn leakage_guard(record: &ResultRecord, embedded: &EmbeddedDataset) -> Result<()> {
    let (train_start, train_end) = record.train_range;
    let (test_start, test_end) = record.test_range;
    if train_end > test_start {
        return Err(HarnessError::Leakage(format!(
            "{}/{}/{}: train range [{train_start},{train_end}) overlaps test [{test_start},{test_end})",
            record.method, record.series, record.repetition
        )));
    }
    if test_end > embedded.n_rows() {
        return Err(HarnessError::Leakage(format!(
            "{}/{}/{}: test range exceeds {} rows",
            record.method,
            record.series,
            record.repetition,
            embedded.n_rows()
        )));
    }
    let slice = embedded.slice(IndexRange::new(train_start, train_end));
    let expected = dataset_fingerprint(&slice.features, &slice.targets);
    if expected != record.train_fingerprint {
        return Err(HarnessError::Leakage(format!(
            "{}/{}/{}: training fingerprint mismatch",
            record.method, record.series, record.repetition
        )));
    }
    Ok(())
}

/// Every method label one (series, repetition) group produces, in
/// deterministic order.
pub fn expected_labels(config: &ExperimentConfig) -> Vec<String> {
    let mut out = Vec::new();
    for kind in config.combiner_kinds() {
        out.push(kind.label().to_string());
    }
    for kind in config.combiner_kinds() {
        for strategy in &config.teaching_strategies {
            for student in &config.students {
                out.push(labels::student_label(kind.label(), &student.id, *strategy));
            }
        }
    }
    for student in &config.students {
        out.push(student.id.clone());
    }
    out.push(labels::BASELINE_NAIVE.to_string());
    out.push(labels::BASELINE_SEASONAL_NAIVE.to_string());
    out.push(labels::BASELINE_SES.to_string());
    out
}

fn record_filename(config_hash: &str, series: &str, repetition: usize, method: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config_hash.as_bytes());
    hasher.update(b"|");
    hasher.update(series.as_bytes());
    hasher.update(b"|");
    hasher.update(repetition.to_le_bytes());
    hasher.update(b"|");
    hasher.update(method.as_bytes());
    let digest = hasher.finalize();
    let hex: String = digest.iter().take(12).map(|b| format!("{b:02x}")).collect();
    format!("{hex}.json")
}

pub fn records_dir(output_dir: &Path) -> PathBuf {
    output_dir.join("records")
}

pub fn scores_csv_path(output_dir: &Path) -> PathBuf {
    output_dir.join("scores.csv")
}

pub fn costs_csv_path(output_dir: &Path) -> PathBuf {
    output_dir.join("costs.csv")
}

/// Runs the full experiment described by `config`. Completed records are
/// skipped; per-group failures are quarantined and the rest continues.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    let (series_list, _report) = load_corpus(&config.corpus_path, config.min_series_length)?;
    let rec_dir = records_dir(&config.output_dir);
    std::fs::create_dir_all(&rec_dir)?;
    let quarantine_dir = config.output_dir.join("quarantine");
    std::fs::create_dir_all(&quarantine_dir)?;
    let config_hash = config.config_hash();
    let method_labels = expected_labels(config);

    let mut records = Vec::new();
    let mut quarantined = Vec::new();
    let mut computed_groups = 0;
    let mut skipped_groups = 0;

    for series in &series_list {
        let embedded = match embed(series, config.lag_order) {
            Ok(e) => e,
            Err(e) => {
                for rep in 0..config.repetitions {
                    quarantined.push(QuarantineReport {
                        series: series.id.clone(),
                        repetition: rep,
                        reason: e.to_string(),
                    });
                }
                continue;
            }
        };
        let plan = match repeated_holdout(
            embedded.n_rows(),
            config.repetitions,
            config.train_frac,
            config.test_frac,
            derive_seed(config.seed, &format!("holdout/{}", series.id)),
        ) {
            Ok(p) => p,
            Err(e) => {
                for rep in 0..config.repetitions {
                    quarantined.push(QuarantineReport {
                        series: series.id.clone(),
                        repetition: rep,
                        reason: e.to_string(),
                    });
                }
                continue;
            }
        };

        for (rep, (train_range, test_range)) in plan.repetitions.iter().enumerate() {
            let paths: Vec<PathBuf> = method_labels
                .iter()
                .map(|m| rec_dir.join(record_filename(&config_hash, &series.id, rep, m)))
                .collect();
            let existing: Vec<Option<ResultRecord>> = paths
                .iter()
                .map(|p| {
                    std::fs::read_to_string(p)
                        .ok()
                        .and_then(|text| serde_json::from_str(&text).ok())
                })
                .collect();
            if existing.iter().all(|r| r.is_some()) {
                records.extend(existing.into_iter().flatten());
                skipped_groups += 1;
                continue;
            }

            match compute_group(
                config,
                &config_hash,
                series,
                &embedded,
                *train_range,
                *test_range,
                rep,
            ) {
                Ok(group) => {
                    for record in &group {
                        leakage_guard(record, &embedded)?;
                    }
                    // Keep already-persisted records (their timing fields
                    // are historical); only missing files are written.
                    for ((record, path), loaded) in group.into_iter().zip(&paths).zip(existing) {
                        debug_assert_eq!(
                            *path,
                            rec_dir.join(record_filename(
                                &config_hash,
                                &record.series,
                                rep,
                                &record.method
                            ))
                        );
                        match loaded {
                            Some(kept) => records.push(kept),
                            None => {
                                std::fs::write(path, serde_json::to_string_pretty(&record)?)?;
                                records.push(record);
                            }
                        }
                    }
                    computed_groups += 1;
                }
                Err(e) => {
                    let report = QuarantineReport {
                        series: series.id.clone(),
                        repetition: rep,
                        reason: e.to_string(),
                    };
                    let name = record_filename(&config_hash, &series.id, rep, "quarantine");
                    std::fs::write(
                        quarantine_dir.join(name),
                        serde_json::to_string_pretty(&report)?,
                    )?;
                    quarantined.push(report);
                }
            }
        }
    }

    write_tables(&config.output_dir, &records)?;
    let summary = RunSummary {
        records,
        quarantined,
        computed_groups,
        skipped_groups,
    };
    let summary_json = serde_json::json!({
        "records": summary.records.len(),
        "quarantined": summary.quarantined,
        "computed_groups": summary.computed_groups,
        "skipped_groups": summary.skipped_groups,
        "config_hash": config_hash,
    });
    std::fs::write(
        config.output_dir.join("run_summary.json"),
        serde_json::to_string_pretty(&summary_json)?,
    )?;
    Ok(summary)
}

/// Writes the long-format score table (timing-free, so identical runs are
/// byte-identical) and the cost table.
pub fn write_tables(output_dir: &Path, records: &[ResultRecord]) -> Result<()> {
    let matrix = score_matrix(records)?;
    std::fs::write(scores_csv_path(output_dir), matrix.to_long_csv())?;

    let mut rows: Vec<&ResultRecord> = records.iter().collect();
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.series.cmp(&b.series))
            .then(a.repetition.cmp(&b.repetition))
    });
    let mut csv = String::from("method,series,repetition,predict_seconds,size_bytes\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.method, r.series, r.repetition, r.cost.predict_seconds, r.cost.size_bytes
        ));
    }
    std::fs::write(costs_csv_path(output_dir), csv)?;
    Ok(())
}

pub fn score_matrix(records: &[ResultRecord]) -> Result<ScoreMatrix> {
    let mut matrix = ScoreMatrix::new();
    for r in records {
        matrix.insert(&r.method, &r.series, r.repetition, r.mase)?;
    }
    Ok(matrix)
}

/// Loads every record under `output_dir/records`.
pub fn load_records(output_dir: &Path) -> Result<Vec<ResultRecord>> {
    let dir = records_dir(output_dir);
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    let mut records = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(&path)?;
        records.push(serde_json::from_str(&text)?);
    }
    Ok(records)
}

#[allow(clippy::too_many_arguments)]
fn compute_group(
    config: &ExperimentConfig,
    config_hash: &str,
    series: &TimeSeries,
    embedded: &EmbeddedDataset,
    train_range: IndexRange,
    test_range: IndexRange,
    repetition: usize,
) -> Result<Vec<ResultRecord>> {
    let train = embedded.slice(train_range);
    let test = embedded.slice(test_range);
    let scale = naive_scale(&train.targets)?;
    let specs = config.portfolio_specs();
    let portfolio = learners::train_portfolio(&specs, &train)?;
    let m = portfolio.len();
    let oob = oob_expert_predictions(&specs, &train, config.warmup_blocks)?;
    let test_preds = portfolio.predict_matrix(&test.features)?;
    let train_fp = dataset_fingerprint(&train.features, &train.targets);

    let provenance = Provenance {
        config_hash: config_hash.to_string(),
        seed: config.seed,
        code_version: CODE_VERSION.to_string(),
    };
    let make_record = |method: String, score: f64, cost: CostProfile| ResultRecord {
        method,
        series: series.id.clone(),
        repetition,
        mase: score,
        cost,
        train_range: (train_range.start, train_range.end),
        test_range: (test_range.start, test_range.end),
        train_fingerprint: train_fp.clone(),
        provenance: provenance.clone(),
    };

    // Keyed by label so the output order below can follow expected_labels.
    let mut by_label: BTreeMap<String, ResultRecord> = BTreeMap::new();

    // Teachers: warm on the out-of-bag stream, then walk the test window.
    for kind in config.combiner_kinds() {
        let combiner_config = config.combiner_config(kind);
        let state = Combiner::warmed(combiner_config, m, &oob)?;
        let mut eval_state = state.clone();
        let mut weight_log = config.log_weights.then(WeightLog::default);
        let mut preds = Vec::with_capacity(test.n_rows());
        for (i, row) in test.features.iter().enumerate() {
            preds.push(eval_state.combine(&test_preds[i], Some(row))?);
            eval_state.update(&test_preds[i], test.targets[i])?;
            if let Some(log) = weight_log.as_mut() {
                log.record(eval_state.update_count(), &eval_state.weights());
            }
        }
        if let Some(log) = weight_log {
            let dir = config.output_dir.join("weights");
            std::fs::create_dir_all(&dir)?;
            std::fs::write(
                dir.join(format!("{}-{}-{}.csv", series.id, repetition, kind.label())),
                log.to_csv(Some(&portfolio.ids())),
            )?;
        }
        let score = mase(&preds, &test.targets, scale)?;
        let cost = profile_cost(
            &CostSubject::Ensemble {
                portfolio: &portfolio,
                combiner: &state,
                actuals: &test.targets,
            },
            &test.features,
        )?;
        by_label.insert(
            kind.label().to_string(),
            make_record(kind.label().to_string(), score, cost),
        );
    }

    // Students: one teaching set per (teacher, strategy), one distilled
    // model per student spec.
    for kind in config.combiner_kinds() {
        if config.students.is_empty() {
            break;
        }
        let combiner_config = config.combiner_config(kind);
        for strategy in &config.teaching_strategies {
            let teaching = generate_teaching_targets_with_oob(
                &portfolio,
                &combiner_config,
                &train,
                *strategy,
                Some(&oob),
            )?;
            for student_spec in &config.students {
                let distilled = fcomb_core::compression::distill(student_spec, &teaching)?;
                let preds = learners::predict(&distilled.student, &test.features)?;
                let score = mase(&preds, &test.targets, scale)?;
                let cost = profile_cost(&CostSubject::Model(&distilled.student), &test.features)?;
                let label = labels::student_label(kind.label(), &student_spec.id, *strategy);
                by_label.insert(label.clone(), make_record(label, score, cost));
            }
        }
    }

    // Raw-target controls: the same student specs fitted on the original
    // training targets.
    for student_spec in &config.students {
        let model = learners::train(student_spec, &train)?;
        let preds = learners::predict(&model, &test.features)?;
        let score = mase(&preds, &test.targets, scale)?;
        let cost = profile_cost(&CostSubject::Model(&model), &test.features)?;
        by_label.insert(
            student_spec.id.clone(),
            make_record(student_spec.id.clone(), score, cost),
        );
    }

    // Classical baselines computed from the raw series values.
    let p = config.lag_order;
    let naive_preds = baselines::naive_predictions(&series.values, p, test_range);
    let naive_cost = CostProfile {
        predict_seconds: median_seconds(5, || {
            let _ = baselines::naive_predictions(&series.values, p, test_range);
        }),
        size_bytes: serde_json::to_vec(&serde_json::json!({"baseline": "naive"}))?.len(),
    };
    by_label.insert(
        labels::BASELINE_NAIVE.to_string(),
        make_record(
            labels::BASELINE_NAIVE.to_string(),
            mase(&naive_preds, &test.targets, scale)?,
            naive_cost,
        ),
    );

    let snaive_preds =
        baselines::seasonal_naive_predictions(&series.values, p, series.period, test_range);
    let snaive_cost = CostProfile {
        predict_seconds: median_seconds(5, || {
            let _ =
                baselines::seasonal_naive_predictions(&series.values, p, series.period, test_range);
        }),
        size_bytes: serde_json::to_vec(&serde_json::json!({
            "baseline": "snaive",
            "period": series.period,
        }))?
        .len(),
    };
    by_label.insert(
        labels::BASELINE_SEASONAL_NAIVE.to_string(),
        make_record(
            labels::BASELINE_SEASONAL_NAIVE.to_string(),
            mase(&snaive_preds, &test.targets, scale)?,
            snaive_cost,
        ),
    );

    let (ses_preds, ses_model) =
        baselines::ses_predictions(&series.values, p, train_range, test_range);
    let ses_cost = CostProfile {
        predict_seconds: median_seconds(5, || {
            let _ = baselines::ses_predictions(&series.values, p, train_range, test_range);
        }),
        size_bytes: serde_json::to_vec(&ses_model)?.len(),
    };
    by_label.insert(
        labels::BASELINE_SES.to_string(),
        make_record(
            labels::BASELINE_SES.to_string(),
            mase(&ses_preds, &test.targets, scale)?,
            ses_cost,
        ),
    );

    // Emit in the canonical label order.
    let mut out = Vec::new();
    for label in expected_labels(config) {
        if let Some(record) = by_label.remove(&label) {
            out.push(record);
        }
    }
    debug_assert!(
        by_label.is_empty(),
        "unexpected labels: {:?}",
        by_label.keys()
    );
    Ok(out)
}
