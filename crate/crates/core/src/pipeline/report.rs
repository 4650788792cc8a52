use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{run_pipeline, Detector, PipelineError, Stages};
use crate::ingest::{read_capture, CaptureFormat};

pub const LABELS_FILE: &str = "labels.txt";
pub const BENIGN: &str = "benign";

/// Stage combinations compared by the report.
pub const CONFIGURATIONS: [(&str, Stages); 3] = [
    ("header", Stages::HEADER_ONLY),
    ("header+payload", Stages::HEADER_PAYLOAD),
    ("header+payload+fuzzy", Stages::ALL),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub configuration: String,
    /// Attack class, or `benign`.
    pub label: String,
    pub scenarios: usize,
    pub flagged: usize,
    /// Detection rate for attack classes, false-positive rate for benign.
    pub rate: f64,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusReport {
    pub rows: Vec<ReportRow>,
    pub diagnostics: Vec<String>,
}

impl CorpusReport {
    pub fn row(&self, configuration: &str, label: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.configuration == configuration && r.label == label)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("configuration,label,scenarios,flagged,rate\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.3}",
                r.configuration, r.label, r.scenarios, r.flagged, r.rate
            );
        }
        out
    }
}

/// Runs each labeled scenario file of `dir` under every configuration.
///
/// `labels.txt` lists `<file> <label>` per line (`#` comments allowed). A
/// scenario counts as flagged when it raises at least one alert. Files that
/// are not labeled, or labels naming missing files, are skipped with a
/// diagnostic.
pub fn corpus_report(dir: &Path, detector: &mut Detector) -> Result<CorpusReport, PipelineError> {
    let labels_path = dir.join(LABELS_FILE);
    let text = std::fs::read_to_string(&labels_path).map_err(|e| PipelineError::Io(labels_path.clone(), e))?;
    let mut report = CorpusReport::default();
    let mut labels = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_whitespace().collect::<Vec<_>>()[..] {
            [file, label] => {
                labels.insert(file.to_string(), label.to_string());
            }
            _ => report
                .diagnostics
                .push(format!("{LABELS_FILE}:{}: expected `<file> <label>`", i + 1)),
        }
    }

    let mut listed: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| PipelineError::Io(dir.to_path_buf(), e))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".jsonl"))
        .collect();
    listed.sort();
    for name in &listed {
        if !labels.contains_key(name) {
            report.diagnostics.push(format!("{name}: unlabeled, skipped"));
        }
    }

    let mut captures = Vec::new();
    for (file, label) in &labels {
        if !listed.contains(file) {
            report.diagnostics.push(format!("{file}: labeled but not found"));
            continue;
        }
        match read_capture(&dir.join(file), CaptureFormat::Jsonl) {
            Ok(c) => captures.push((file, label, c)),
            Err(e) => report.diagnostics.push(format!("{file}: {e}")),
        }
    }

    let saved = detector.stages;
    for (name, stages) in CONFIGURATIONS {
        detector.stages = stages;
        let mut tally: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for (_, label, capture) in &captures {
            let flagged = !run_pipeline(capture, detector).alerts.is_empty();
            let t = tally.entry(label.as_str()).or_default();
            t.0 += 1;
            t.1 += usize::from(flagged);
        }
        for (label, (scenarios, flagged)) in tally {
            report.rows.push(ReportRow {
                configuration: name.to_string(),
                label: label.to_string(),
                scenarios,
                flagged,
                rate: flagged as f64 / scenarios as f64,
            });
        }
    }
    detector.stages = saved;
    Ok(report)
}
