//! Corpus ingestion: every `.csv` under the corpus directory is one series,
//! optionally described by a `<stem>.json` sidecar manifest. Series that are
//! too short or contain non-finite values are rejected with per-file
//! diagnostics; an unreadable file is skipped, an empty result is fatal.

use std::path::Path;

use fcomb_core::series::{read_series_csv, TimeSeries};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone)]
pub struct IngestReport {
    pub accepted: Vec<String>,
    pub rejected: Vec<(String, String)>,
}

impl IngestReport {
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for id in &self.accepted {
            out.push_str(&format!("OK   {id}\n"));
        }
        for (file, reason) in &self.rejected {
            out.push_str(&format!("SKIP {file}: {reason}\n"));
        }
        out.push_str(&format!(
            "{} accepted, {} rejected\n",
            self.accepted.len(),
            self.rejected.len()
        ));
        out
    }
}

pub fn load_corpus(path: &Path, min_length: usize) -> Result<(Vec<TimeSeries>, IngestReport)> {
    if !path.is_dir() {
        return Err(HarnessError::Corpus(format!(
            "{} is not a directory",
            path.display()
        )));
    }
    let mut files: Vec<_> = std::fs::read_dir(path)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    files.sort();

    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    let mut series_list = Vec::new();
    for file in files {
        let name = file
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| file.display().to_string());
        match read_series_csv(&file) {
            Ok(series) => {
                if series.len() < min_length {
                    rejected.push((
                        name,
                        format!("below minimum length ({} < {min_length})", series.len()),
                    ));
                } else {
                    accepted.push(series.id.clone());
                    series_list.push(series);
                }
            }
            Err(e) => rejected.push((name, e.to_string())),
        }
    }
    if series_list.is_empty() {
        return Err(HarnessError::EmptyCorpus(path.to_path_buf()));
    }
    Ok((series_list, IngestReport { accepted, rejected }))
}
