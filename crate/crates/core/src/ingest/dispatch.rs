use serde::Serialize;

use super::capture::{Direction, RawCapture};
use super::{SpecViolation, ViolationSeverity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ContentEncoding {
    Identity,
    Gzip,
}

/// One HTTP message split into start line, headers, and body.
#[derive(Debug, Clone, PartialEq)]
pub struct HttpTransaction {
    pub session_id: String,
    pub kind: Direction,
    pub start_line: String,
    /// Well-formed header fields in wire order; folded lines are joined.
    pub headers: Vec<(String, String)>,
    /// Header lines without a `:` separator, with their 1-based line numbers.
    pub malformed_headers: Vec<(usize, String)>,
    pub body: Vec<u8>,
    pub content_encoding: ContentEncoding,
    pub timestamp: f64,
}

impl HttpTransaction {
    /// First header with the given name, case-insensitively.
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    pub fn status_code(&self) -> Option<u16> {
        match self.kind {
            Direction::Response => self.start_line.split_whitespace().nth(1)?.parse().ok(),
            Direction::Request => None,
        }
    }
}

/// Splits a captured message into header and payload parts.
pub fn dispatch(entry: &RawCapture) -> Result<HttpTransaction, SpecViolation> {
    let bytes = entry.bytes.as_slice();
    let (head, body) = split_head(bytes);
    let head = String::from_utf8_lossy(head);

    let mut lines = head.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).enumerate();
    // RFC 2616 4.1: ignore empty lines before the start line.
    let (start_idx, start_line) = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((i, l)) => break (i, l.to_string()),
            None => {
                return Err(SpecViolation::new(1, "empty message", ViolationSeverity::Reject));
            }
        }
    };
    let kind = classify_start_line(&start_line).ok_or_else(|| {
        SpecViolation::new(
            start_idx + 1,
            format!("unparseable start line `{}`", truncate(&start_line, 80)),
            ViolationSeverity::Reject,
        )
    })?;

    let mut headers: Vec<(String, String)> = Vec::new();
    let mut malformed = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        if line.starts_with([' ', '\t']) {
            if let Some((_, value)) = headers.last_mut() {
                value.push(' ');
                value.push_str(line.trim());
                continue;
            }
        }
        match line.split_once(':') {
            Some((name, value)) if !name.is_empty() && !name.ends_with([' ', '\t']) => {
                headers.push((name.to_string(), value.trim().to_string()));
            }
            _ => malformed.push((i + 1, line.to_string())),
        }
    }

    let find = |name: &str| {
        headers
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    };
    let content_encoding = match find("Content-Encoding").map(|v| v.trim().to_ascii_lowercase()) {
        Some(v) if v == "gzip" || v == "x-gzip" => ContentEncoding::Gzip,
        _ => ContentEncoding::Identity,
    };
    let chunked = find("Transfer-Encoding")
        .map(|v| v.to_ascii_lowercase().contains("chunked"))
        .unwrap_or(false);
    let mut body = if chunked { dechunk(body) } else { body.to_vec() };
    if !chunked {
        if let Some(len) = find("Content-Length").and_then(|v| v.trim().parse::<usize>().ok()) {
            body.truncate(len);
        }
    }

    Ok(HttpTransaction {
        session_id: entry.session_id.clone(),
        kind,
        start_line,
        headers,
        malformed_headers: malformed,
        body,
        content_encoding,
        timestamp: entry.timestamp,
    })
}

fn split_head(bytes: &[u8]) -> (&[u8], &[u8]) {
    let crlf = find_seq(bytes, b"\r\n\r\n").map(|i| (i, 4));
    let lf = find_seq(bytes, b"\n\n").map(|i| (i, 2));
    match (crlf, lf) {
        (Some(a), Some(b)) => {
            let (i, n) = if a.0 <= b.0 { a } else { b };
            (&bytes[..i], &bytes[i + n..])
        }
        (Some((i, n)), None) | (None, Some((i, n))) => (&bytes[..i], &bytes[i + n..]),
        (None, None) => (bytes, &[]),
    }
}

pub(crate) fn find_seq(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}

fn classify_start_line(line: &str) -> Option<Direction> {
    let mut parts = line.split_whitespace();
    let first = parts.next()?;
    if first.starts_with("HTTP/") {
        let code = parts.next()?;
        if code.len() == 3 && code.bytes().all(|b| b.is_ascii_digit()) {
            return Some(Direction::Response);
        }
        return None;
    }
    let is_token = first.bytes().all(|b| b.is_ascii_alphabetic() || b == b'-' || b == b'_');
    let uri = parts.next()?;
    let version = parts.next()?;
    (is_token && !uri.is_empty() && version.starts_with("HTTP/") && parts.next().is_none())
        .then_some(Direction::Request)
}

/// Best-effort chunked decoding; stops at the last-chunk or the first malformed size.
fn dechunk(mut data: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    while let Some(eol) = find_seq(data, b"\n") {
        let size_line = String::from_utf8_lossy(&data[..eol]);
        let size_str = size_line.trim().split(';').next().unwrap_or("");
        let Ok(size) = usize::from_str_radix(size_str, 16) else {
            break;
        };
        data = &data[eol + 1..];
        if size == 0 {
            break;
        }
        let take = size.min(data.len());
        out.extend_from_slice(&data[..take]);
        data = &data[take..];
        if data.starts_with(b"\r\n") {
            data = &data[2..];
        } else if data.starts_with(b"\n") {
            data = &data[1..];
        }
    }
    out
}

pub(crate) fn truncate(s: &str, max: usize) -> &str {
    if s.len() <= max {
        return s;
    }
    let mut end = max;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    &s[..end]
}
