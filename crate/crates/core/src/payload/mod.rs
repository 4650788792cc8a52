//! Payload analysis: decompression, tag/attribute signatures, and script
//! heuristics over HTML bodies.

pub mod decompress;
pub mod html;
pub mod script;
pub mod signature;

use serde::Serialize;
use thiserror::Error;

use crate::ingest::{ContentEncoding, FieldRecord, MessageLine};

pub use decompress::{decompress_if_needed, Decompressed, DEFAULT_OUTPUT_CAP};
pub use html::{is_binary, tokenize_html, TagAttribute, TagEvent, Tokens};
pub use script::{extract_scripts, scan_script, ScriptBlock, ScriptConfig, ScriptOrigin};
pub use signature::{is_javascript_url, scan_tag_attributes, SignatureEntry, SignatureTable};

/// Longest evidence excerpt kept on an alert, in bytes.
pub const MAX_EVIDENCE: usize = 256;

#[derive(Debug, Error)]
pub enum PayloadError {
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadAlertKind {
    TagAttributeInjection,
    SqlInjection,
    DosLoop,
    SuspiciousScript,
}

impl PayloadAlertKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PayloadAlertKind::TagAttributeInjection => "tag-attribute-injection",
            PayloadAlertKind::SqlInjection => "sql-injection",
            PayloadAlertKind::DosLoop => "dos-loop",
            PayloadAlertKind::SuspiciousScript => "suspicious-script",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PayloadAlert {
    pub kind: PayloadAlertKind,
    /// Verbatim payload excerpt starting at `byte_offset`.
    pub evidence: String,
    pub byte_offset: usize,
    pub detail: String,
}

impl PayloadAlert {
    pub fn new(kind: PayloadAlertKind, evidence: &str, byte_offset: usize, detail: String) -> Self {
        let mut end = evidence.len().min(MAX_EVIDENCE);
        while !evidence.is_char_boundary(end) {
            end -= 1;
        }
        Self {
            kind,
            evidence: evidence[..end].to_string(),
            byte_offset,
            detail,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PayloadReport {
    pub alerts: Vec<PayloadAlert>,
    pub events: Vec<TagEvent>,
    pub diagnostics: Vec<String>,
    /// Decompressed payload the offsets refer to.
    pub payload: Vec<u8>,
}

/// Signature table, script patterns, and the inflate cap, bundled.
#[derive(Debug, Clone)]
pub struct PayloadAnalyzer {
    pub signatures: SignatureTable,
    pub scripts: ScriptConfig,
    pub output_cap: usize,
}

impl Default for PayloadAnalyzer {
    fn default() -> Self {
        Self {
            signatures: SignatureTable::default(),
            scripts: ScriptConfig::default(),
            output_cap: DEFAULT_OUTPUT_CAP,
        }
    }
}

fn is_non_markup(content_type: &str) -> bool {
    let ct = content_type.trim().to_ascii_lowercase();
    [
        "image/",
        "audio/",
        "video/",
        "font/",
        "application/octet-stream",
        "application/zip",
    ]
    .iter()
    .any(|p| ct.starts_with(p))
}

impl PayloadAnalyzer {
    pub fn analyze(&self, body: &[u8], encoding: ContentEncoding, content_type: Option<&str>) -> PayloadReport {
        let mut report = PayloadReport::default();
        if body.is_empty() || content_type.is_some_and(is_non_markup) {
            return report;
        }
        let inflated = decompress_if_needed(body, encoding, self.output_cap);
        report.diagnostics.extend(inflated.diagnostics);
        let payload = inflated.bytes;
        let tokens = tokenize_html(&payload);
        report.diagnostics.extend(tokens.diagnostics);
        report.alerts = scan_tag_attributes(&tokens.events, &self.signatures);
        for block in extract_scripts(&payload, &tokens.events) {
            report.alerts.extend(scan_script(&block, &self.scripts));
        }
        report.alerts.sort_by_key(|a| (a.byte_offset, a.kind));
        report.events = tokens.events;
        report.payload = payload;
        report
    }
}

/// Body records for the rule interpreter: section is the tag, value the
/// attribute list rendered as `name="value"` pairs on one line.
pub fn body_records(events: &[TagEvent]) -> Vec<FieldRecord> {
    events
        .iter()
        .map(|e| {
            let value = e
                .attributes
                .iter()
                .map(|a| format!("{}=\"{}\"", a.name, a.raw_value))
                .collect::<Vec<_>>()
                .join(" ")
                .replace(['\r', '\n'], " ");
            FieldRecord::new(MessageLine::Body, e.tag.replace('$', ""), value)
        })
        .filter(|r| !r.section.is_empty())
        .collect()
}
