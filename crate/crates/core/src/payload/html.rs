//! Error-tolerant tag scanner. Produces start-tag events only; text,
//! comments, end tags, and raw-text element bodies are skipped.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TagAttribute {
    /// Lowercased.
    pub name: String,
    pub raw_value: String,
    /// Byte offset of the value's first byte (inside any quotes).
    pub value_offset: usize,
    pub value_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TagEvent {
    /// Lowercased.
    pub tag: String,
    pub attributes: Vec<TagAttribute>,
    /// Offset of the opening `<`.
    pub byte_offset: usize,
    /// Offset just past the closing `>`.
    pub end_offset: usize,
}

impl TagEvent {
    pub fn attribute(&self, name: &str) -> Option<&TagAttribute> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tokens {
    pub events: Vec<TagEvent>,
    pub diagnostics: Vec<String>,
}

const IMAGE_MAGIC: &[&[u8]] = &[
    b"\xff\xd8\xff",
    b"\x89PNG\r\n\x1a\n",
    b"GIF87a",
    b"GIF89a",
    b"\x00\x00\x01\x00",
    b"BM",
];

/// Image signatures, or NUL bytes near the start, mark non-markup payloads.
pub fn is_binary(body: &[u8]) -> bool {
    if IMAGE_MAGIC.iter().any(|m| body.starts_with(m)) {
        return true;
    }
    if body.starts_with(b"RIFF") && body.get(8..12) == Some(b"WEBP") {
        return true;
    }
    body.iter().take(1024).any(|&b| b == 0)
}

pub fn tokenize_html(body: &[u8]) -> Tokens {
    let mut tokens = Tokens::default();
    if is_binary(body) {
        return tokens;
    }
    let n = body.len();
    let mut i = 0;
    while let Some(rel) = body[i..].iter().position(|&b| b == b'<') {
        let lt = i + rel;
        let rest = &body[lt + 1..];
        if rest.starts_with(b"!--") {
            i = match find_from(body, lt + 4, b"-->") {
                Some(p) => p + 3,
                None => n,
            };
        } else if rest.first().is_some_and(|&b| b == b'!' || b == b'?' || b == b'/') {
            i = match body[lt..].iter().position(|&b| b == b'>') {
                Some(p) => lt + p + 1,
                None => n,
            };
        } else if rest.first().is_some_and(u8::is_ascii_alphabetic) {
            match scan_tag(body, lt, &mut tokens.diagnostics) {
                Some(event) => {
                    i = event.end_offset;
                    if matches!(event.tag.as_str(), "script" | "style" | "textarea" | "title") {
                        let close = format!("</{}", event.tag);
                        i = find_ci(body, i, close.as_bytes()).unwrap_or(n);
                    }
                    tokens.events.push(event);
                }
                None => {
                    tokens
                        .diagnostics
                        .push(format!("unterminated tag at offset {lt} dropped"));
                    break;
                }
            }
        } else {
            i = lt + 1;
        }
        if i >= n {
            break;
        }
    }
    tokens
}

fn scan_tag(body: &[u8], lt: usize, diagnostics: &mut Vec<String>) -> Option<TagEvent> {
    let n = body.len();
    let mut i = lt + 1;
    let name_start = i;
    while i < n && (body[i].is_ascii_alphanumeric() || body[i] == b'-' || body[i] == b':') {
        i += 1;
    }
    let tag = String::from_utf8_lossy(&body[name_start..i]).to_ascii_lowercase();
    let mut attributes: Vec<TagAttribute> = Vec::new();
    loop {
        while i < n && (body[i].is_ascii_whitespace() || body[i] == b'/') {
            i += 1;
        }
        if i >= n {
            return None;
        }
        if body[i] == b'>' {
            i += 1;
            break;
        }
        let attr_start = i;
        while i < n && !body[i].is_ascii_whitespace() && !matches!(body[i], b'=' | b'>' | b'/') {
            i += 1;
        }
        // a stray `=` with no name; consume it so the loop progresses
        if i == attr_start {
            i += 1;
            continue;
        }
        let name = String::from_utf8_lossy(&body[attr_start..i]).to_ascii_lowercase();
        let mut j = i;
        while j < n && body[j].is_ascii_whitespace() {
            j += 1;
        }
        let (value_offset, value_len) = if j < n && body[j] == b'=' {
            j += 1;
            while j < n && body[j].is_ascii_whitespace() {
                j += 1;
            }
            if j >= n {
                return None;
            }
            if body[j] == b'"' || body[j] == b'\'' {
                let quote = body[j];
                let start = j + 1;
                let end = start + body[start..].iter().position(|&b| b == quote)?;
                i = end + 1;
                (start, end - start)
            } else {
                let start = j;
                while j < n && !body[j].is_ascii_whitespace() && body[j] != b'>' {
                    j += 1;
                }
                i = j;
                (start, j - start)
            }
        } else {
            (i, 0)
        };
        if attributes.iter().any(|a| a.name == name) {
            diagnostics.push(format!(
                "duplicate attribute `{name}` on <{tag}> at offset {lt}, first kept"
            ));
            continue;
        }
        attributes.push(TagAttribute {
            name,
            raw_value: String::from_utf8_lossy(&body[value_offset..value_offset + value_len]).into_owned(),
            value_offset,
            value_len,
        });
    }
    Some(TagEvent {
        tag,
        attributes,
        byte_offset: lt,
        end_offset: i,
    })
}

pub(crate) fn find_from(hay: &[u8], from: usize, needle: &[u8]) -> Option<usize> {
    hay.get(from..)?
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|p| p + from)
}

/// ASCII case-insensitive search.
pub(crate) fn find_ci(hay: &[u8], from: usize, needle: &[u8]) -> Option<usize> {
    hay.get(from..)?
        .windows(needle.len())
        .position(|w| w.eq_ignore_ascii_case(needle))
        .map(|p| p + from)
}
