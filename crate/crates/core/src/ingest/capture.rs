use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use base64::Engine;
use serde::{Deserialize, Serialize};

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Request,
    Response,
}

/// Supported capture encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaptureFormat {
    /// One file per HTTP message (or a single message file).
    Raw,
    /// One JSON object per line: `ts`, `session`, `dir`, `data_b64`.
    Jsonl,
}

impl FromStr for CaptureFormat {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(CaptureFormat::Raw),
            "jsonl" => Ok(CaptureFormat::Jsonl),
            other => Err(IngestError::UnknownFormat(other.to_string())),
        }
    }
}

/// One captured HTTP message.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCapture {
    pub timestamp: f64,
    pub direction: Direction,
    pub session_id: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Session {
    pub id: String,
    pub entries: Vec<RawCapture>,
}

/// Captured traffic grouped by session, in order of first appearance.
#[derive(Debug, Clone, Default)]
pub struct Capture {
    pub sessions: Vec<Session>,
    pub diagnostics: Vec<String>,
}

impl Capture {
    pub fn is_empty(&self) -> bool {
        self.sessions.iter().all(|s| s.entries.is_empty())
    }

    pub fn len(&self) -> usize {
        self.sessions.iter().map(|s| s.entries.len()).sum()
    }

    /// All entries merged by timestamp; ties keep capture order.
    pub fn entries_by_time(&self) -> Vec<&RawCapture> {
        let mut all: Vec<(usize, &RawCapture)> = Vec::with_capacity(self.len());
        let mut seq = 0;
        for session in &self.sessions {
            for entry in &session.entries {
                all.push((seq, entry));
                seq += 1;
            }
        }
        // Session grouping loses the original interleaving; recover it by timestamp.
        all.sort_by(|a, b| a.1.timestamp.total_cmp(&b.1.timestamp).then(a.0.cmp(&b.0)));
        all.into_iter().map(|(_, e)| e).collect()
    }
}

#[derive(Default)]
struct Grouper {
    capture: Capture,
    index: HashMap<String, usize>,
    seen_request: HashMap<String, bool>,
}

impl Grouper {
    fn push(&mut self, entry: RawCapture, origin: &str) {
        let slot = match self.index.get(&entry.session_id) {
            Some(&i) => i,
            None => {
                self.capture.sessions.push(Session {
                    id: entry.session_id.clone(),
                    entries: Vec::new(),
                });
                let i = self.capture.sessions.len() - 1;
                self.index.insert(entry.session_id.clone(), i);
                i
            }
        };
        let session = &mut self.capture.sessions[slot];
        if let Some(last) = session.entries.last() {
            if entry.timestamp < last.timestamp {
                self.capture.diagnostics.push(format!(
                    "{origin}: timestamp {} goes backwards in session `{}`, skipped",
                    entry.timestamp, entry.session_id
                ));
                return;
            }
        }
        let seen = self.seen_request.entry(entry.session_id.clone()).or_default();
        match entry.direction {
            Direction::Request => *seen = true,
            Direction::Response if !*seen => {
                self.capture.diagnostics.push(format!(
                    "{origin}: response before any request in session `{}`, skipped",
                    entry.session_id
                ));
                return;
            }
            Direction::Response => {}
        }
        session.entries.push(entry);
    }

    fn finish(mut self) -> Capture {
        self.capture.sessions.retain(|s| !s.entries.is_empty());
        self.capture
    }
}

#[derive(Deserialize)]
struct JsonlEntry {
    ts: f64,
    session: String,
    dir: String,
    data_b64: String,
}

/// Reads a capture from a file or (for raw captures) a directory.
pub fn read_capture(path: &Path, format: CaptureFormat) -> Result<Capture, IngestError> {
    let unreadable = |e: std::io::Error| IngestError::Unreadable(path.display().to_string(), e);
    match format {
        CaptureFormat::Jsonl => {
            let file = fs::File::open(path).map_err(unreadable)?;
            read_jsonl(BufReader::new(file))
        }
        CaptureFormat::Raw if path.is_dir() => read_raw_dir(path),
        CaptureFormat::Raw => {
            let bytes = fs::read(path).map_err(unreadable)?;
            Ok(read_raw_messages(vec![(path.display().to_string(), bytes)]))
        }
    }
}

/// Parses the line-framed JSON capture format. Malformed lines become diagnostics.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Capture, IngestError> {
    let mut grouper = Grouper::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| IngestError::Unreadable("capture stream".into(), e))?;
        let origin = format!("line {}", idx + 1);
        if line.trim().is_empty() {
            continue;
        }
        let parsed: JsonlEntry = match serde_json::from_str(&line) {
            Ok(p) => p,
            Err(e) => {
                grouper.capture.diagnostics.push(format!("{origin}: {e}"));
                continue;
            }
        };
        let direction = match parsed.dir.as_str() {
            "req" => Direction::Request,
            "resp" => Direction::Response,
            other => {
                grouper
                    .capture
                    .diagnostics
                    .push(format!("{origin}: unknown dir `{other}`"));
                continue;
            }
        };
        if !parsed.ts.is_finite() || parsed.ts < 0.0 {
            grouper.capture.diagnostics.push(format!("{origin}: invalid ts"));
            continue;
        }
        let bytes = match base64::engine::general_purpose::STANDARD.decode(parsed.data_b64.trim()) {
            Ok(b) => b,
            Err(e) => {
                grouper.capture.diagnostics.push(format!("{origin}: bad base64: {e}"));
                continue;
            }
        };
        grouper.push(
            RawCapture {
                timestamp: (parsed.ts * 1000.0).round() / 1000.0,
                direction,
                session_id: parsed.session,
                bytes,
            },
            &origin,
        );
    }
    Ok(grouper.finish())
}

/// Reads every regular file in `dir`, sorted by name, as one raw HTTP message.
pub fn read_raw_dir(dir: &Path) -> Result<Capture, IngestError> {
    let unreadable = |e: std::io::Error| IngestError::Unreadable(dir.display().to_string(), e);
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(unreadable)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    let mut messages = Vec::with_capacity(paths.len());
    for path in paths {
        let mut bytes = Vec::new();
        fs::File::open(&path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| IngestError::Unreadable(path.display().to_string(), e))?;
        messages.push((path.display().to_string(), bytes));
    }
    Ok(read_raw_messages(messages))
}

/// Raw messages share session `raw`; timestamps are their ordinal positions.
pub fn read_raw_messages(messages: Vec<(String, Vec<u8>)>) -> Capture {
    let mut grouper = Grouper::default();
    for (i, (origin, bytes)) in messages.into_iter().enumerate() {
        if bytes.iter().all(|b| b.is_ascii_whitespace()) {
            continue;
        }
        let direction = if leading_trimmed(&bytes).starts_with(b"HTTP/") {
            Direction::Response
        } else {
            Direction::Request
        };
        grouper.push(
            RawCapture {
                timestamp: i as f64,
                direction,
                session_id: "raw".to_string(),
                bytes,
            },
            &origin,
        );
    }
    grouper.finish()
}

fn leading_trimmed(bytes: &[u8]) -> &[u8] {
    let start = bytes
        .iter()
        .position(|b| !b.is_ascii_whitespace())
        .unwrap_or(bytes.len());
    &bytes[start..]
}
