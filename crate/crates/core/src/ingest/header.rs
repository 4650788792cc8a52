//! RFC 2616 header analysis: start-line decomposition and header taxonomy.

use super::capture::Direction;
use super::dispatch::HttpTransaction;
use super::record::{FieldRecord, MessageLine};
use super::{SpecViolation, ViolationSeverity};

const GENERAL: &[&str] = &[
    "Cache-Control",
    "Connection",
    "Date",
    "Pragma",
    "Trailer",
    "Transfer-Encoding",
    "Upgrade",
    "Via",
    "Warning",
];

const REQUEST: &[&str] = &[
    "Accept",
    "Accept-Charset",
    "Accept-Encoding",
    "Accept-Language",
    "Authorization",
    "Expect",
    "From",
    "Host",
    "If-Match",
    "If-Modified-Since",
    "If-None-Match",
    "If-Range",
    "If-Unmodified-Since",
    "Max-Forwards",
    "Proxy-Authorization",
    "Range",
    "Referer",
    "TE",
    "User-Agent",
];

const RESPONSE: &[&str] = &[
    "Accept-Ranges",
    "Age",
    "ETag",
    "Location",
    "Proxy-Authenticate",
    "Retry-After",
    "Server",
    "Vary",
    "WWW-Authenticate",
];

const ENTITY: &[&str] = &[
    "Allow",
    "Content-Encoding",
    "Content-Language",
    "Content-Length",
    "Content-Location",
    "Content-MD5",
    "Content-Range",
    "Content-Type",
    "Expires",
    "Last-Modified",
];

/// Headers that must appear at most once.
const SINGLETON: &[&str] = &["Host", "Content-Length", "Content-Type", "Authorization"];

/// Classifies a header name. `None` means the name is not in RFC 2616.
pub fn classify_header(name: &str) -> Option<MessageLine> {
    let table: [(&[&str], MessageLine); 4] = [
        (GENERAL, MessageLine::GenericHeader),
        (REQUEST, MessageLine::RequestHeader),
        (RESPONSE, MessageLine::ResponseHeader),
        (ENTITY, MessageLine::EntityHeader),
    ];
    table
        .iter()
        .find(|(names, _)| names.iter().any(|n| n.eq_ignore_ascii_case(name)))
        .map(|(_, ml)| *ml)
}

fn is_token(s: &str) -> bool {
    const SEPARATORS: &[u8] = b"()<>@,;:\\\"/[]?={} \t";
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_graphic() && !SEPARATORS.contains(&b))
}

/// Turns a dispatched transaction into field records, reporting every
/// deviation from RFC 2616 as a violation rather than failing.
pub fn parse_header(txn: &HttpTransaction) -> (Vec<FieldRecord>, Vec<SpecViolation>) {
    let mut records = Vec::with_capacity(txn.headers.len() + 3);
    let mut violations = Vec::new();
    let warn = |line: usize, msg: String| SpecViolation::new(line, msg, ViolationSeverity::Warn);

    let parts: Vec<&str> = txn.start_line.split_whitespace().collect();
    match txn.kind {
        Direction::Request => {
            let [method, uri, version] = parts[..] else {
                violations.push(warn(1, "request line does not have three parts".into()));
                return (records, violations);
            };
            if !is_token(method) || method.bytes().any(|b| b.is_ascii_lowercase()) {
                violations.push(warn(1, format!("non-standard method `{method}`")));
            }
            records.push(FieldRecord::new(MessageLine::RequestLine, "Method", method));
            records.push(FieldRecord::new(MessageLine::RequestLine, "Request-URI", uri));
            records.push(FieldRecord::new(MessageLine::RequestLine, "HTTP-version", version));
            check_version(version, &mut violations);
        }
        Direction::Response => {
            let mut it = txn.start_line.trim().splitn(3, ' ');
            let version = it.next().unwrap_or_default();
            let code = it.next().unwrap_or_default();
            let reason = it.next().unwrap_or_default().trim();
            records.push(FieldRecord::new(MessageLine::StatusLine, "HTTP-version", version));
            records.push(FieldRecord::new(MessageLine::StatusLine, "Status-code", code));
            records.push(FieldRecord::new(MessageLine::StatusLine, "Reason-Phrase", reason));
            check_version(version, &mut violations);
        }
    }

    for (line, raw) in &txn.malformed_headers {
        violations.push(warn(
            *line,
            format!(
                "header line without `:` skipped: `{}`",
                super::dispatch::truncate(raw, 80)
            ),
        ));
    }

    let mut seen_singletons: Vec<&str> = Vec::new();
    for (name, value) in &txn.headers {
        if !is_token(name) || name.contains('$') {
            violations.push(warn(0, format!("invalid header field name `{name}` skipped")));
            continue;
        }
        let message_line = classify_header(name).unwrap_or_else(|| {
            violations.push(warn(0, format!("unknown header `{name}` treated as generic-header")));
            MessageLine::GenericHeader
        });
        if let Some(s) = SINGLETON.iter().find(|s| s.eq_ignore_ascii_case(name)) {
            if seen_singletons.contains(s) {
                violations.push(warn(0, format!("duplicate `{s}` header")));
            }
            seen_singletons.push(s);
        }
        let mismatched = matches!(
            (txn.kind, message_line),
            (Direction::Request, MessageLine::ResponseHeader) | (Direction::Response, MessageLine::RequestHeader)
        );
        if mismatched {
            violations.push(warn(0, format!("`{name}` is not valid in a {:?}", txn.kind)));
        }
        records.push(FieldRecord::new(message_line, name.as_str(), value.as_str()));
    }

    if txn.kind == Direction::Request && txn.start_line.ends_with("HTTP/1.1") && !seen_singletons.contains(&"Host") {
        violations.push(warn(1, "HTTP/1.1 request without Host header".into()));
    }
    (records, violations)
}

fn check_version(version: &str, violations: &mut Vec<SpecViolation>) {
    let ok = version
        .strip_prefix("HTTP/")
        .and_then(|v| v.split_once('.'))
        .map(|(a, b)| !a.is_empty() && !b.is_empty() && a.bytes().chain(b.bytes()).all(|c| c.is_ascii_digit()))
        .unwrap_or(false);
    if !ok {
        violations.push(SpecViolation::new(
            1,
            format!("malformed HTTP-version `{version}`"),
            ViolationSeverity::Warn,
        ));
    }
}
