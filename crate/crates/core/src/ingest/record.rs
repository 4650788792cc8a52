use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::IngestError;

/// Which part of an HTTP message a field came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageLine {
    RequestLine,
    StatusLine,
    GenericHeader,
    RequestHeader,
    ResponseHeader,
    EntityHeader,
    Body,
}

impl MessageLine {
    pub const ALL: [MessageLine; 7] = [
        MessageLine::RequestLine,
        MessageLine::StatusLine,
        MessageLine::GenericHeader,
        MessageLine::RequestHeader,
        MessageLine::ResponseHeader,
        MessageLine::EntityHeader,
        MessageLine::Body,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MessageLine::RequestLine => "request-line",
            MessageLine::StatusLine => "status-line",
            MessageLine::GenericHeader => "generic-header",
            MessageLine::RequestHeader => "request-header",
            MessageLine::ResponseHeader => "response-header",
            MessageLine::EntityHeader => "entity-header",
            MessageLine::Body => "body",
        }
    }

    /// Spelling used by the original parser output: `Request_Method$GET`, and
    /// every header class written as `generic-header`.
    pub fn legacy_str(self) -> &'static str {
        match self {
            MessageLine::RequestLine => "Request",
            MessageLine::StatusLine => "Response",
            MessageLine::GenericHeader
            | MessageLine::RequestHeader
            | MessageLine::ResponseHeader
            | MessageLine::EntityHeader => "generic-header",
            MessageLine::Body => "body",
        }
    }

    pub fn is_header(self) -> bool {
        matches!(
            self,
            MessageLine::GenericHeader
                | MessageLine::RequestHeader
                | MessageLine::ResponseHeader
                | MessageLine::EntityHeader
        )
    }

    pub fn is_start_line(self) -> bool {
        matches!(self, MessageLine::RequestLine | MessageLine::StatusLine)
    }
}

impl fmt::Display for MessageLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MessageLine {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ml = match s {
            "request-line" | "Request" => MessageLine::RequestLine,
            "status-line" | "Response" => MessageLine::StatusLine,
            "generic-header" => MessageLine::GenericHeader,
            "request-header" => MessageLine::RequestHeader,
            "response-header" => MessageLine::ResponseHeader,
            "entity-header" => MessageLine::EntityHeader,
            "body" => MessageLine::Body,
            other => return Err(IngestError::Record(format!("unknown message line `{other}`"))),
        };
        Ok(ml)
    }
}

/// One parsed field of an HTTP message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub message_line: MessageLine,
    pub section: String,
    pub value: String,
}

impl FieldRecord {
    pub fn new(message_line: MessageLine, section: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            message_line,
            section: section.into(),
            value: value.into(),
        }
    }

    pub fn to_line(&self, legacy: bool) -> String {
        let ml = if legacy {
            self.message_line.legacy_str()
        } else {
            self.message_line.as_str()
        };
        format!("{ml}_{}${}", self.section, self.value)
    }
}

/// Renders records as `<message_line>_<section>$<value>` lines.
pub fn serialize_records(records: &[FieldRecord], legacy: bool) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&record.to_line(legacy));
        out.push('\n');
    }
    out
}

/// Inverse of [`serialize_records`]. Accepts both canonical and legacy names.
pub fn read_records(text: &str) -> Result<Vec<FieldRecord>, IngestError> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| IngestError::Record(format!("line {}: {what}", idx + 1));
        // message-line names never contain '_' and sections never contain '$'
        let (ml, rest) = line.split_once('_').ok_or_else(|| bad("missing `_`"))?;
        let (section, value) = rest.split_once('$').ok_or_else(|| bad("missing `$`"))?;
        let message_line = ml.parse().map_err(|_| bad("unknown message line"))?;
        records.push(FieldRecord::new(message_line, section, value));
    }
    Ok(records)
}
