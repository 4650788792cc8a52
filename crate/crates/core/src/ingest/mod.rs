//! Capture reading, message dispatch, and header parsing into field records.

pub mod capture;
pub mod dispatch;
pub mod header;
pub mod record;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use capture::{read_capture, read_jsonl, Capture, CaptureFormat, Direction, RawCapture, Session};
pub use dispatch::{dispatch, ContentEncoding, HttpTransaction};
pub use header::{classify_header, parse_header};
pub use record::{read_records, serialize_records, FieldRecord, MessageLine};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {0}: {1}")]
    Unreadable(String, #[source] std::io::Error),
    #[error("unknown capture format `{0}` (expected raw or jsonl)")]
    UnknownFormat(String),
    #[error("bad record text: {0}")]
    Record(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationSeverity {
    Warn,
    Reject,
}

/// A deviation from RFC 2616 found while parsing. `location` is a 1-based
/// line number in the raw message, or 0 when it applies to a header field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpecViolation {
    pub location: usize,
    pub description: String,
    pub severity: ViolationSeverity,
}

impl SpecViolation {
    pub fn new(location: usize, description: impl Into<String>, severity: ViolationSeverity) -> Self {
        let description = description.into();
        debug_assert!(!description.is_empty());
        Self {
            location,
            description,
            severity,
        }
    }
}

impl fmt::Display for SpecViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at line {}: {}", self.severity, self.location, self.description)
    }
}
