//! Stage wiring: header rules and payload scanning on every transaction,
//! fuzzy analysis on whatever neither of them flagged.

pub mod bench;
pub mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::fuzzy::{fcm_evaluate, Consequent, FuzzyEngine, FuzzyError, LogEvent, MetricStream, MetricWindow};
use crate::ingest::{
    dispatch, parse_header, read_capture, serialize_records, Capture, CaptureFormat, IngestError, ViolationSeverity,
};
use crate::payload::{body_records, PayloadAnalyzer, PayloadError, ScriptConfig, SignatureTable};
use crate::rules::{interpret, parse_rule_file, RuleBase, RuleError, ValueMode};

pub use bench::{bench_objects, bench_payload, BenchRow};
pub use report::{corpus_report, ReportRow};

/// Bundled header rule-base.
pub const DEFAULT_RULES: &str = include_str!("../../../../rules/default.rules");

/// Body bytes kept in a fuzzy log event.
pub const LOG_BODY_CAP: usize = 64 * 1024;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{}: {source}", path.display())]
    Rules { path: PathBuf, source: RuleError },
    #[error(transparent)]
    Payload(#[from] PayloadError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlertSource {
    HeaderRule,
    Payload,
    Fuzzy,
}

/// Ordered from least to most severe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Severity {
    #[serde(rename = "info")]
    Info,
    #[serde(rename = "LP")]
    Lp,
    #[serde(rename = "HP")]
    Hp,
    #[serde(rename = "intrusive")]
    Intrusive,
}

impl From<Consequent> for Severity {
    fn from(c: Consequent) -> Self {
        match c {
            Consequent::NonIntrusive => Severity::Info,
            Consequent::Lp => Severity::Lp,
            Consequent::Hp => Severity::Hp,
            Consequent::Intrusive => Severity::Intrusive,
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Lp => "LP",
            Severity::Hp => "HP",
            Severity::Intrusive => "intrusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alert {
    pub source: AlertSource,
    /// Rule number, payload alert kind, or fuzzy event name.
    pub id: String,
    pub severity: Severity,
    pub session_id: String,
    pub timestamp: f64,
    pub message: String,
    pub evidence: String,
    /// Position of the originating transaction in time order.
    #[serde(skip)]
    pub transaction: usize,
}

/// Which analyzers run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    pub header: bool,
    pub payload: bool,
    pub fuzzy: bool,
}

impl Default for Stages {
    fn default() -> Self {
        Self::ALL
    }
}

impl Stages {
    pub const ALL: Stages = Stages {
        header: true,
        payload: true,
        fuzzy: true,
    };
    pub const HEADER_ONLY: Stages = Stages {
        header: true,
        payload: false,
        fuzzy: false,
    };
    pub const HEADER_PAYLOAD: Stages = Stages {
        header: true,
        payload: true,
        fuzzy: false,
    };
}

/// Loaded analyzers.
#[derive(Debug)]
pub struct Detector {
    pub rules: RuleBase,
    pub payload: PayloadAnalyzer,
    pub fuzzy: FuzzyEngine,
    pub stages: Stages,
    /// Render header-rule evidence with the original record names.
    pub legacy_record_names: bool,
}

impl Default for Detector {
    fn default() -> Self {
        Self {
            rules: parse_rule_file(DEFAULT_RULES, ValueMode::Relaxed).expect("bundled rules are valid"),
            payload: PayloadAnalyzer::default(),
            fuzzy: FuzzyEngine::default(),
            stages: Stages::ALL,
            legacy_record_names: false,
        }
    }
}

/// Paths and switches for one run. Unset paths fall back to bundled defaults.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub rules: Option<PathBuf>,
    pub signatures: Option<PathBuf>,
    pub script_patterns: Option<PathBuf>,
    pub fuzzy: Option<PathBuf>,
    pub input: PathBuf,
    pub format: Option<CaptureFormat>,
    /// `None` writes to standard output.
    pub out: Option<PathBuf>,
    pub legacy_record_names: bool,
    pub value_mode: ValueMode,
    pub stages: Stages,
    pub alert_threshold: Option<Consequent>,
    pub loop_bound_threshold: Option<u64>,
}

fn read(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|e| PipelineError::Io(path.to_path_buf(), e))
}

impl RunConfig {
    pub fn detector(&self) -> Result<Detector, PipelineError> {
        let rules = match &self.rules {
            Some(p) => parse_rule_file(&read(p)?, self.value_mode).map_err(|source| PipelineError::Rules {
                path: p.clone(),
                source,
            })?,
            None => parse_rule_file(DEFAULT_RULES, self.value_mode).map_err(|source| PipelineError::Rules {
                path: "<bundled rules>".into(),
                source,
            })?,
        };
        let mut payload = PayloadAnalyzer::default();
        if let Some(p) = &self.signatures {
            payload.signatures = SignatureTable::parse(&read(p)?)?;
        }
        let threshold = self
            .loop_bound_threshold
            .unwrap_or(payload.scripts.loop_bound_threshold);
        payload.scripts = match &self.script_patterns {
            Some(p) => ScriptConfig::parse(&read(p)?, threshold)?,
            None => ScriptConfig {
                loop_bound_threshold: threshold,
                ..payload.scripts
            },
        };
        let mut fuzzy = match &self.fuzzy {
            Some(p) => FuzzyEngine::load(p)?,
            None => FuzzyEngine::default(),
        };
        if let Some(t) = self.alert_threshold {
            fuzzy.alert_threshold = t;
        }
        Ok(Detector {
            rules,
            payload,
            fuzzy,
            stages: self.stages,
            legacy_record_names: self.legacy_record_names,
        })
    }

    pub fn capture(&self) -> Result<Capture, PipelineError> {
        let format = match self.format {
            Some(f) => f,
            None if self.input.is_dir() => CaptureFormat::Raw,
            None => CaptureFormat::Jsonl,
        };
        Ok(read_capture(&self.input, format)?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub transactions: usize,
    pub rejected: usize,
    pub alerts_by_source: BTreeMap<String, usize>,
    pub alerts_by_severity: BTreeMap<String, usize>,
    /// Last verdict per fuzzy event across all closed windows.
    pub fuzzy_verdicts: BTreeMap<String, BTreeMap<String, usize>>,
    pub folded: usize,
    pub windows_closed: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub alerts: Vec<Alert>,
    pub summary: Summary,
    /// Time-ordered positions of transactions that fed the fuzzy metrics.
    pub folded: BTreeSet<usize>,
    pub diagnostics: Vec<String>,
}

impl RunReport {
    /// Transactions that raised a header-rule or payload alert.
    pub fn flagged(&self) -> BTreeSet<usize> {
        self.alerts
            .iter()
            .filter(|a| a.source != AlertSource::Fuzzy)
            .map(|a| a.transaction)
            .collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for alert in &self.alerts {
            serde_json::to_writer(&mut out, alert)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }
}

struct FuzzyState<'a> {
    streams: Vec<MetricStream>,
    latest: BTreeMap<String, MetricWindow>,
    engine: &'a FuzzyEngine,
    /// (session, timestamp) -> transaction position, to anchor alerts.
    positions: BTreeMap<(String, u64), usize>,
}

impl FuzzyState<'_> {
    fn closed(&mut self, closed: crate::fuzzy::ClosedWindow, report: &mut RunReport) {
        report.summary.windows_closed += 1;
        let metric = closed.window.metric.clone();
        self.latest.insert(metric.clone(), closed.window.clone());
        let Some(last) = closed.last_event else { return };
        let outcome = fcm_evaluate(&self.engine.graph, &self.engine.model, &self.latest);
        for event in self.engine.graph.events() {
            if !event.edges.iter().any(|e| e.from == metric) {
                continue;
            }
            let Some(v) = outcome.verdicts.get(&event.name) else {
                report.diagnostics.push(format!(
                    "fuzzy event `{}` not evaluated at window close of `{metric}`",
                    event.name
                ));
                continue;
            };
            *report
                .summary
                .fuzzy_verdicts
                .entry(event.name.clone())
                .or_default()
                .entry(v.verdict.as_str().to_string())
                .or_default() += 1;
            if v.verdict < self.engine.alert_threshold {
                continue;
            }
            let w = &closed.window;
            report.alerts.push(Alert {
                source: AlertSource::Fuzzy,
                id: event.name.clone(),
                severity: v.verdict.into(),
                session_id: last.session_id.clone(),
                timestamp: last.timestamp,
                message: format!("{}: {} (score {:.3})", event.name, v.verdict, v.score),
                evidence: format!(
                    "metric={} x={} t={:.3}s window_start={}",
                    w.metric, w.x_count, w.t_interval, closed.start
                ),
                transaction: self
                    .positions
                    .get(&(last.session_id.clone(), last.timestamp.to_bits()))
                    .copied()
                    .unwrap_or(usize::MAX),
            });
        }
    }
}

/// Runs every transaction of `capture` through the enabled stages.
///
/// Per transaction: header records go through the rule interpreter (with
/// body records appended), the body goes through the payload analyzer, and
/// only if neither raised an alert is the transaction folded into the
/// metric windows. Closed windows are evaluated on the cognitive map.
/// Failures are isolated to their transaction.
pub fn run_pipeline(capture: &Capture, detector: &Detector) -> RunReport {
    let mut report = RunReport {
        diagnostics: capture.diagnostics.clone(),
        ..Default::default()
    };
    let mut fuzzy = FuzzyState {
        streams: detector.fuzzy.metrics.iter().cloned().map(MetricStream::new).collect(),
        latest: BTreeMap::new(),
        engine: &detector.fuzzy,
        positions: BTreeMap::new(),
    };

    for (pos, entry) in capture.entries_by_time().into_iter().enumerate() {
        report.summary.transactions += 1;
        fuzzy
            .positions
            .entry((entry.session_id.clone(), entry.timestamp.to_bits()))
            .or_insert(pos);
        if detector.stages.fuzzy {
            let closed: Vec<_> = fuzzy
                .streams
                .iter_mut()
                .filter_map(|s| s.advance(entry.timestamp))
                .collect();
            for c in closed {
                fuzzy.closed(c, &mut report);
            }
        }

        let txn = match dispatch(entry) {
            Ok(t) => t,
            Err(v) => {
                report.summary.rejected += 1;
                report
                    .diagnostics
                    .push(format!("session `{}` at {}: {v}", entry.session_id, entry.timestamp));
                continue;
            }
        };
        let (mut records, violations) = parse_header(&txn);
        for v in violations {
            if v.severity == ViolationSeverity::Reject {
                report.diagnostics.push(format!("session `{}`: {v}", txn.session_id));
            }
        }

        let mut flagged = false;
        let payload = detector.stages.payload.then(|| {
            detector
                .payload
                .analyze(&txn.body, txn.content_encoding, txn.header("content-type"))
        });
        if let Some(p) = &payload {
            for d in &p.diagnostics {
                report.diagnostics.push(format!("session `{}`: {d}", txn.session_id));
            }
            for a in &p.alerts {
                flagged = true;
                report.alerts.push(Alert {
                    source: AlertSource::Payload,
                    id: a.kind.as_str().to_string(),
                    severity: Severity::Intrusive,
                    session_id: txn.session_id.clone(),
                    timestamp: txn.timestamp,
                    message: a.detail.clone(),
                    evidence: a.evidence.clone(),
                    transaction: pos,
                });
            }
            records.extend(body_records(&p.events));
        }

        if detector.stages.header {
            let interp = interpret(&records, &detector.rules);
            for t in &interp.triggers {
                flagged = true;
                let witness: Vec<_> = t.witness.iter().map(|h| records[h.record_index].clone()).collect();
                report.alerts.push(Alert {
                    source: AlertSource::HeaderRule,
                    id: t.rule_number.to_string(),
                    severity: Severity::Intrusive,
                    session_id: txn.session_id.clone(),
                    timestamp: txn.timestamp,
                    message: t.message.clone(),
                    evidence: serialize_records(&witness, detector.legacy_record_names)
                        .trim_end()
                        .replace('\n', " | "),
                    transaction: pos,
                });
            }
        }

        if detector.stages.fuzzy && !flagged {
            report.folded.insert(pos);
            let body = payload.as_ref().map_or(&txn.body[..], |p| &p.payload[..]);
            let mut text = serialize_records(&records, false);
            text.push_str(&String::from_utf8_lossy(&body[..body.len().min(LOG_BODY_CAP)]));
            let event = LogEvent {
                timestamp: txn.timestamp,
                session_id: txn.session_id.clone(),
                text,
            };
            let closed: Vec<_> = fuzzy
                .streams
                .iter_mut()
                .filter_map(|s| s.observe(event.clone()))
                .collect();
            for c in closed {
                fuzzy.closed(c, &mut report);
            }
        }
    }

    if detector.stages.fuzzy {
        let closed: Vec<_> = fuzzy.streams.iter_mut().filter_map(MetricStream::flush).collect();
        for c in closed {
            fuzzy.closed(c, &mut report);
        }
    }

    // Fuzzy alerts surface at window close; put everything back in event order.
    report.alerts.sort_by(|a, b| {
        a.timestamp
            .total_cmp(&b.timestamp)
            .then(a.transaction.cmp(&b.transaction))
    });
    report.summary.folded = report.folded.len();
    for a in &report.alerts {
        let source = serde_json::to_value(a.source)
            .ok()
            .and_then(|v| v.as_str().map(String::from));
        *report
            .summary
            .alerts_by_source
            .entry(source.unwrap_or_default())
            .or_default() += 1;
        *report
            .summary
            .alerts_by_severity
            .entry(a.severity.to_string())
            .or_default() += 1;
    }
    report
}
