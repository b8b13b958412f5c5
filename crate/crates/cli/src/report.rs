//! Report bundle: average-rank table and chart, pairwise Bayes sign-test
//! matrix, and student/teacher cost-ratio distributions. Tables are CSV;
//! charts are self-contained SVG.

use std::collections::BTreeMap;
use std::path::Path;

use fcomb_core::evaluation::{average_ranks, bayes_sign_test, RankSummary, ScoreMatrix};

use crate::error::Result;
use crate::experiment::{score_matrix, ResultRecord};
use crate::labels;

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub rope: (f64, f64),
    pub mc_samples: usize,
    pub prior_strength: f64,
    pub seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            rope: (-1.0, 1.0),
            mc_samples: 100_000,
            prior_strength: 1.0,
            seed: 17,
        }
    }
}

/// Drops columns that are not fully populated across all methods, so ranking
/// is well-defined. Returns the filtered matrix and how many columns fell.
fn complete_columns(matrix: &ScoreMatrix) -> (ScoreMatrix, usize) {
    let methods = matrix.methods().to_vec();
    let mut filtered = ScoreMatrix::new();
    let mut dropped = 0;
    for (series, rep) in matrix.columns().to_vec() {
        if methods
            .iter()
            .all(|m| matrix.get(m, &series, rep).is_some())
        {
            for m in &methods {
                filtered
                    .insert(m, &series, rep, matrix.get(m, &series, rep).unwrap())
                    .expect("scores already validated");
            }
        } else {
            dropped += 1;
        }
    }
    (filtered, dropped)
}

/// Per-series mean scores for one method, aligned with `series_order`.
fn per_series_vector(matrix: &ScoreMatrix, method: &str) -> BTreeMap<String, f64> {
    matrix
        .per_series_means(method)
        .into_iter()
        .filter_map(|(s, v)| v.map(|v| (s, v)))
        .collect()
}

/// Percentage differences per series: positive means `method_a` wins.
pub fn percentage_differences(matrix: &ScoreMatrix, method_a: &str, method_b: &str) -> Vec<f64> {
    let a = per_series_vector(matrix, method_a);
    let b = per_series_vector(matrix, method_b);
    let mut diffs = Vec::new();
    for (series, b_score) in &b {
        if let Some(a_score) = a.get(series) {
            if *b_score > 0.0 {
                diffs.push(100.0 * (b_score - a_score) / b_score);
            }
        }
    }
    diffs
}

pub fn emit_report(
    records: &[ResultRecord],
    out_dir: &Path,
    options: &ReportOptions,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let matrix = score_matrix(records)?;
    let (filtered, dropped_columns) = complete_columns(&matrix);
    let mut notices: Vec<String> = Vec::new();
    if dropped_columns > 0 {
        notices.push(format!(
            "{dropped_columns} incomplete (series, repetition) columns excluded from ranking"
        ));
    }

    // Average ranks.
    if !filtered.columns().is_empty() && !filtered.methods().is_empty() {
        let mut ranks: Vec<RankSummary> = average_ranks(&filtered, None)?;
        ranks.sort_by(|a, b| a.mean_rank.partial_cmp(&b.mean_rank).unwrap());
        let mut csv = String::from("method,mean_rank,sd_rank\n");
        for r in &ranks {
            csv.push_str(&format!("{},{},{}\n", r.method, r.mean_rank, r.sd_rank));
        }
        std::fs::write(out_dir.join("ranks.csv"), csv)?;
        std::fs::write(
            out_dir.join("ranks.json"),
            serde_json::to_string_pretty(&ranks)?,
        )?;
        let entries: Vec<(String, f64, f64, bool)> = ranks
            .iter()
            .map(|r| {
                (
                    r.method.clone(),
                    r.mean_rank,
                    r.sd_rank,
                    labels::is_student_label(&r.method),
                )
            })
            .collect();
        std::fs::write(
            out_dir.join("ranks.svg"),
            svg_bar_chart("Average rank (lower is better)", &entries),
        )?;
    } else {
        notices.push("no complete columns; rank table skipped".into());
    }

    // Pairwise Bayes sign test over per-series mean MASE.
    let methods = filtered.methods().to_vec();
    let mut bayes_csv = String::from("method_a,method_b,p_a_wins,p_rope,p_b_wins,n_tasks\n");
    let mut bayes_json: Vec<serde_json::Value> = Vec::new();
    let mut st_rows: Vec<(String, f64, f64, f64)> = Vec::new();
    if methods.len() >= 2 {
        for i in 0..methods.len() {
            for j in (i + 1)..methods.len() {
                let diffs = percentage_differences(&filtered, &methods[i], &methods[j]);
                if diffs.is_empty() {
                    continue;
                }
                let result = bayes_sign_test(
                    &diffs,
                    options.rope,
                    options.mc_samples,
                    options.prior_strength,
                    options.seed,
                )?;
                bayes_csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    methods[i],
                    methods[j],
                    result.p_win,
                    result.p_rope,
                    result.p_lose,
                    diffs.len()
                ));
                bayes_json.push(serde_json::json!({
                    "method_a": methods[i],
                    "method_b": methods[j],
                    "result": result,
                }));
            }
        }
        // Student-vs-its-teacher summary rows (the headline comparison).
        for method in &methods {
            if let Some((teacher, _, _)) = labels::parse_student_label(method) {
                if methods.contains(&teacher) {
                    let diffs = percentage_differences(&filtered, method, &teacher);
                    if !diffs.is_empty() {
                        let result = bayes_sign_test(
                            &diffs,
                            options.rope,
                            options.mc_samples,
                            options.prior_strength,
                            options.seed,
                        )?;
                        st_rows.push((
                            format!("{method} vs {teacher}"),
                            result.p_win,
                            result.p_rope,
                            result.p_lose,
                        ));
                    }
                }
            }
        }
    } else {
        notices.push("fewer than two methods; Bayes matrix empty".into());
    }
    std::fs::write(out_dir.join("bayes_matrix.csv"), bayes_csv)?;
    std::fs::write(
        out_dir.join("bayes_matrix.json"),
        serde_json::to_string_pretty(&bayes_json)?,
    )?;
    if !st_rows.is_empty() {
        std::fs::write(
            out_dir.join("students_vs_teachers.svg"),
            svg_stacked_bars("P(student wins / rope / teacher wins)", &st_rows),
        )?;
    }

    // Cost ratios: student versus its teacher on the same cell.
    let mut by_cell: BTreeMap<(String, String, usize), &ResultRecord> = BTreeMap::new();
    for r in records {
        by_cell.insert((r.method.clone(), r.series.clone(), r.repetition), r);
    }
    let mut cost_csv = String::from("student,teacher,series,repetition,time_ratio,size_ratio\n");
    let mut ratio_groups: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let Some((teacher, _, _)) = labels::parse_student_label(&r.method) else {
            continue;
        };
        let Some(teacher_rec) = by_cell.get(&(teacher.clone(), r.series.clone(), r.repetition))
        else {
            continue;
        };
        let time_ratio = r.cost.predict_seconds / teacher_rec.cost.predict_seconds.max(1e-12);
        let size_ratio = r.cost.size_bytes as f64 / (teacher_rec.cost.size_bytes as f64).max(1.0);
        cost_csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.method, teacher, r.series, r.repetition, time_ratio, size_ratio
        ));
        let entry = ratio_groups.entry(r.method.clone()).or_default();
        entry.0.push(time_ratio);
        entry.1.push(size_ratio);
    }
    std::fs::write(out_dir.join("cost_ratios.csv"), cost_csv)?;
    if !ratio_groups.is_empty() {
        let time_groups: Vec<(String, Vec<f64>)> = ratio_groups
            .iter()
            .map(|(k, (t, _))| (k.clone(), t.clone()))
            .collect();
        let size_groups: Vec<(String, Vec<f64>)> = ratio_groups
            .iter()
            .map(|(k, (_, s))| (k.clone(), s.clone()))
            .collect();
        std::fs::write(
            out_dir.join("cost_time_ratio.svg"),
            svg_strip("Student / teacher prediction-time ratio", &time_groups),
        )?;
        std::fs::write(
            out_dir.join("cost_size_ratio.svg"),
            svg_strip("Student / teacher size ratio", &size_groups),
        )?;
    }

    let meta = serde_json::json!({
        "sign_convention": "percentage difference is 100*(MASE_b - MASE_a)/MASE_b; positive means method_a wins",
        "rope_percent": [options.rope.0, options.rope.1],
        "mc_samples": options.mc_samples,
        "prior_strength": options.prior_strength,
        "seed": options.seed,
        "baselines": "classical baselines are naive, seasonal-naive, and simple exponential smoothing",
        "notices": notices,
    });
    std::fs::write(
        out_dir.join("report_meta.json"),
        serde_json::to_string_pretty(&meta)?,
    )?;
    Ok(())
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Horizontal bar chart with whiskers; highlighted (student) bars use the
/// accent colour.
fn svg_bar_chart(title: &str, entries: &[(String, f64, f64, bool)]) -> String {
    let row_height = 22.0;
    let label_width = 230.0;
    let chart_width = 420.0;
    let height = 50.0 + row_height * entries.len() as f64;
    let max_value = entries
        .iter()
        .map(|(_, mean, sd, _)| mean + sd)
        .fold(1.0f64, f64::max);
    let scale = chart_width / max_value;

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"12\">\n<text x=\"10\" y=\"20\" font-size=\"14\">{}</text>\n",
        escape_xml(title),
        w = label_width + chart_width + 40.0,
    );
    for (i, (label, mean, sd, highlight)) in entries.iter().enumerate() {
        let y = 40.0 + i as f64 * row_height;
        let bar = mean * scale;
        let color = if *highlight { "#e08214" } else { "#74a9cf" };
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            label_width - 6.0,
            y + 12.0,
            escape_xml(label)
        ));
        svg.push_str(&format!(
            "<rect x=\"{label_width}\" y=\"{y}\" width=\"{bar:.2}\" height=\"16\" fill=\"{color}\"/>\n"
        ));
        // sd whisker
        let lo = (mean - sd).max(0.0) * scale;
        let hi = (mean + sd) * scale;
        let cy = y + 8.0;
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{cy}\" x2=\"{:.2}\" y2=\"{cy}\" stroke=\"#333\"/>\n",
            label_width + lo,
            label_width + hi
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{}\" font-size=\"10\">{mean:.2}</text>\n",
            label_width + bar + 6.0,
            y + 12.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Win / rope / lose horizontal stacked bars, one row per comparison.
fn svg_stacked_bars(title: &str, rows: &[(String, f64, f64, f64)]) -> String {
    let row_height = 22.0;
    let label_width = 280.0;
    let chart_width = 360.0;
    let height = 50.0 + row_height * rows.len() as f64;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"12\">\n<text x=\"10\" y=\"20\" font-size=\"14\">{}</text>\n",
        escape_xml(title),
        w = label_width + chart_width + 40.0,
    );
    for (i, (label, win, rope, lose)) in rows.iter().enumerate() {
        let y = 40.0 + i as f64 * row_height;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            label_width - 6.0,
            y + 12.0,
            escape_xml(label)
        ));
        let mut x = label_width;
        for (value, color) in [(win, "#1b7837"), (rope, "#cccccc"), (lose, "#b2182b")] {
            let w = value * chart_width;
            svg.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y}\" width=\"{w:.2}\" height=\"16\" fill=\"{color}\"/>\n"
            ));
            x += w;
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// One row of dots per group on a shared axis, with a median tick.
fn svg_strip(title: &str, groups: &[(String, Vec<f64>)]) -> String {
    let row_height = 24.0;
    let label_width = 280.0;
    let chart_width = 360.0;
    let height = 50.0 + row_height * groups.len() as f64;
    let max_value = groups
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .fold(0.1f64, f64::max);
    let scale = chart_width / max_value;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"12\">\n<text x=\"10\" y=\"20\" font-size=\"14\">{}</text>\n",
        escape_xml(title),
        w = label_width + chart_width + 40.0,
    );
    for (i, (label, values)) in groups.iter().enumerate() {
        let y = 40.0 + i as f64 * row_height + 8.0;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            label_width - 6.0,
            y + 4.0,
            escape_xml(label)
        ));
        for v in values {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{y}\" r=\"3\" fill=\"#74a9cf\" fill-opacity=\"0.6\"/>\n",
                label_width + v * scale
            ));
        }
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if !sorted.is_empty() {
            let median = sorted[sorted.len() / 2];
            svg.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#b2182b\" stroke-width=\"2\"/>\n",
                y - 8.0,
                y + 8.0,
                x = label_width + median * scale
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Convenience for the `bayes` subcommand: compares two methods from a score
/// matrix.
pub fn bayes_pair(
    matrix: &ScoreMatrix,
    method_a: &str,
    method_b: &str,
    options: &ReportOptions,
) -> Result<fcomb_core::evaluation::BayesResult> {
    let diffs = percentage_differences(matrix, method_a, method_b);
    if diffs.is_empty() {
        return Err(crate::error::HarnessError::Config(format!(
            "no overlapping series for {method_a} and {method_b}"
        )));
    }
    Ok(bayes_sign_test(
        &diffs,
        options.rope,
        options.mc_samples,
        options.prior_strength,
        options.seed,
    )?)
}
