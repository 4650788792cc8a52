use std::borrow::Cow;

use serde::Serialize;

use super::html::TagEvent;
use super::{PayloadAlert, PayloadAlertKind, PayloadError};

pub const DEFAULT_SIGNATURES: &str = include_str!("../../../../signatures/tag_attributes.sig");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContentPredicate {
    JavascriptUrl,
}

impl ContentPredicate {
    pub fn matches(self, value: &str) -> bool {
        match self {
            ContentPredicate::JavascriptUrl => is_javascript_url(&decode_char_refs(value)),
        }
    }
}

/// Decodes numeric character references and the few named ones that can
/// hide a URL scheme (`&Tab;`, `&NewLine;`, `&colon;`). Attribute values
/// reach the browser decoded, so the predicate must see them decoded too.
pub fn decode_char_refs(value: &str) -> Cow<'_, str> {
    if !value.contains('&') {
        return Cow::Borrowed(value);
    }
    let mut out = String::with_capacity(value.len());
    let mut rest = value;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        match decode_one(rest) {
            Some((c, used)) => {
                out.push(c);
                rest = &rest[used..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    Cow::Owned(out)
}

fn decode_one(s: &str) -> Option<(char, usize)> {
    // Named references are case-sensitive: `&Colon;` is U+2237, not `:`.
    for (name, c) in [("&Tab;", '\t'), ("&NewLine;", '\n'), ("&colon;", ':')] {
        if s.starts_with(name) {
            return Some((c, name.len()));
        }
    }
    let body = s.strip_prefix("&#")?;
    let (radix, digits_at) = match body.as_bytes().first()? {
        b'x' | b'X' => (16, 1),
        _ => (10, 0),
    };
    let digits = &body[digits_at..];
    let len = digits.bytes().take_while(|b| (*b as char).is_digit(radix)).count();
    if len == 0 {
        return None;
    }
    let code = u32::from_str_radix(&digits[..len.min(8)], radix).ok()?;
    let mut used = 2 + digits_at + len;
    // The terminating semicolon is optional, as in browsers.
    if digits[len..].starts_with(';') {
        used += 1;
    }
    Some((char::from_u32(code).unwrap_or('\u{fffd}'), used))
}

/// True when the value, with ASCII whitespace and control characters removed
/// and case folded, starts with `javascript:`.
pub fn is_javascript_url(value: &str) -> bool {
    const SCHEME: &[u8] = b"javascript:";
    let mut matched = 0;
    for b in value.bytes() {
        if b <= b' ' || b == 0x7f {
            continue;
        }
        if b.to_ascii_lowercase() != SCHEME[matched] {
            return false;
        }
        matched += 1;
        if matched == SCHEME.len() {
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignatureEntry {
    pub tag: String,
    pub attribute: String,
    pub predicate: ContentPredicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignatureTable {
    pub entries: Vec<SignatureEntry>,
}

impl Default for SignatureTable {
    fn default() -> Self {
        Self::parse(DEFAULT_SIGNATURES).expect("bundled signature table parses")
    }
}

impl SignatureTable {
    pub fn parse(text: &str) -> Result<Self, PayloadError> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| PayloadError::Config(format!("signature line {}: {m}", idx + 1));
            let mut parts = line.split_whitespace();
            let (Some(tag), Some(attribute)) = (parts.next(), parts.next()) else {
                return Err(err("expected `<tag> <attribute>`".into()));
            };
            let mut predicate = ContentPredicate::JavascriptUrl;
            for extra in parts {
                predicate = match extra {
                    "predicate=javascript-url" => ContentPredicate::JavascriptUrl,
                    other => return Err(err(format!("unknown option `{other}`"))),
                };
            }
            entries.push(SignatureEntry {
                tag: tag.to_ascii_lowercase(),
                attribute: attribute.to_ascii_lowercase(),
                predicate,
            });
        }
        Ok(Self { entries })
    }

    pub fn lookup(&self, tag: &str, attribute: &str) -> Option<&SignatureEntry> {
        self.entries.iter().find(|e| e.tag == tag && e.attribute == attribute)
    }
}

/// One alert per (event, attribute) that sits in a signature slot and
/// carries the slot's content predicate.
pub fn scan_tag_attributes(events: &[TagEvent], table: &SignatureTable) -> Vec<PayloadAlert> {
    let mut alerts = Vec::new();
    for event in events {
        for attr in &event.attributes {
            let Some(entry) = table.lookup(&event.tag, &attr.name) else {
                continue;
            };
            if entry.predicate.matches(&attr.raw_value) {
                alerts.push(PayloadAlert::new(
                    PayloadAlertKind::TagAttributeInjection,
                    &attr.raw_value,
                    attr.value_offset,
                    format!("{} {} carries a script URL", event.tag, attr.name),
                ));
            }
        }
    }
    alerts
}
