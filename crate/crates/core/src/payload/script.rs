use regex::bytes::Regex;
use serde::Serialize;

use super::html::{find_ci, TagEvent};
use super::signature::is_javascript_url;
use super::{PayloadAlert, PayloadAlertKind, PayloadError};

pub const DEFAULT_SCRIPT_PATTERNS: &str = include_str!("../../../../signatures/script_patterns.txt");
pub const DEFAULT_LOOP_BOUND_THRESHOLD: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScriptOrigin {
    ScriptElement,
    EventAttribute,
    JavascriptUrl,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScriptBlock {
    pub source: String,
    #[serde(skip)]
    pub bytes: Vec<u8>,
    pub origin: ScriptOrigin,
    pub byte_offset: usize,
}

impl ScriptBlock {
    fn new(payload: &[u8], start: usize, end: usize, origin: ScriptOrigin) -> Option<Self> {
        let bytes = payload.get(start..end)?;
        if bytes.iter().all(u8::is_ascii_whitespace) {
            return None;
        }
        Some(Self {
            source: String::from_utf8_lossy(bytes).into_owned(),
            bytes: bytes.to_vec(),
            origin,
            byte_offset: start,
        })
    }
}

/// Script element bodies, `on*` handler values, and `javascript:` URL bodies.
pub fn extract_scripts(body: &[u8], events: &[TagEvent]) -> Vec<ScriptBlock> {
    let mut blocks = Vec::new();
    for event in events {
        if event.tag == "script" {
            let end = find_ci(body, event.end_offset, b"</script").unwrap_or(body.len());
            blocks.extend(ScriptBlock::new(
                body,
                event.end_offset,
                end,
                ScriptOrigin::ScriptElement,
            ));
        }
        for attr in &event.attributes {
            let value_end = attr.value_offset + attr.value_len;
            if attr.name.len() > 2 && attr.name.starts_with("on") {
                blocks.extend(ScriptBlock::new(
                    body,
                    attr.value_offset,
                    value_end,
                    ScriptOrigin::EventAttribute,
                ));
            } else if is_javascript_url(&attr.raw_value) {
                let raw = &body[attr.value_offset..value_end];
                if let Some(colon) = raw.iter().position(|&b| b == b':') {
                    blocks.extend(ScriptBlock::new(
                        body,
                        attr.value_offset + colon + 1,
                        value_end,
                        ScriptOrigin::JavascriptUrl,
                    ));
                }
            }
        }
    }
    blocks.sort_by_key(|b| b.byte_offset);
    blocks
}

#[derive(Debug, Clone)]
pub struct ScriptPattern {
    pub kind: PatternKind,
    pub regex: Regex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    SqlInjection,
    DosLoop,
    /// Group 1 holds a loop bound compared against the threshold.
    DosLoopBound,
    SuspiciousScript,
}

#[derive(Debug, Clone)]
pub struct ScriptConfig {
    pub patterns: Vec<ScriptPattern>,
    pub loop_bound_threshold: u64,
}

impl Default for ScriptConfig {
    fn default() -> Self {
        Self::parse(DEFAULT_SCRIPT_PATTERNS, DEFAULT_LOOP_BOUND_THRESHOLD).expect("bundled patterns parse")
    }
}

impl ScriptConfig {
    pub fn parse(text: &str, loop_bound_threshold: u64) -> Result<Self, PayloadError> {
        if loop_bound_threshold == 0 {
            return Err(PayloadError::Config("loop bound threshold must be positive".into()));
        }
        let mut patterns = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| PayloadError::Config(format!("pattern line {}: {m}", idx + 1));
            let (kind, source) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| err("expected `<kind> <regex>`".into()))?;
            let kind = match kind {
                "sql-injection" => PatternKind::SqlInjection,
                "dos-loop" => PatternKind::DosLoop,
                "dos-loop-bound" => PatternKind::DosLoopBound,
                "suspicious-script" => PatternKind::SuspiciousScript,
                other => return Err(err(format!("unknown kind `{other}`"))),
            };
            let regex = Regex::new(source.trim()).map_err(|e| err(e.to_string()))?;
            if kind == PatternKind::DosLoopBound && regex.captures_len() < 2 {
                return Err(err("dos-loop-bound pattern needs a capture group".into()));
            }
            patterns.push(ScriptPattern { kind, regex });
        }
        Ok(Self {
            patterns,
            loop_bound_threshold,
        })
    }
}

/// Applies every configured pattern to the block's raw bytes.
pub fn scan_script(block: &ScriptBlock, config: &ScriptConfig) -> Vec<PayloadAlert> {
    let mut alerts = Vec::new();
    for pattern in &config.patterns {
        for caps in pattern.regex.captures_iter(&block.bytes) {
            let whole = caps.get(0).expect("group 0");
            let kind = match pattern.kind {
                PatternKind::SqlInjection => PayloadAlertKind::SqlInjection,
                PatternKind::DosLoop => PayloadAlertKind::DosLoop,
                PatternKind::SuspiciousScript => PayloadAlertKind::SuspiciousScript,
                PatternKind::DosLoopBound => {
                    let bound = caps
                        .get(1)
                        .and_then(|m| std::str::from_utf8(m.as_bytes()).ok())
                        .and_then(|s| s.parse::<u64>().ok())
                        // digits beyond u64 are certainly above any threshold
                        .unwrap_or(u64::MAX);
                    if bound < config.loop_bound_threshold {
                        continue;
                    }
                    PayloadAlertKind::DosLoop
                }
            };
            let evidence = String::from_utf8_lossy(whole.as_bytes());
            alerts.push(PayloadAlert::new(
                kind,
                &evidence,
                block.byte_offset + whole.start(),
                format!("{} in {:?} block", kind.as_str(), block.origin),
            ));
        }
    }
    alerts.sort_by_key(|a| a.byte_offset);
    alerts
}
