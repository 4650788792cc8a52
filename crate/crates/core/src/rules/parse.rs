//! Line-oriented rule language.
//!
//! ```text
//! # comment
//! object 1: request-line method parameter = GET
//! object 2: header user-agent regex = "(?i)sqlmap|nikto"
//! rule 1: objects={1,2} ordered=true msg="scanner probe"
//! ```

use std::collections::HashMap;

use super::object::{Feature, MatchObject, MessageLineSpec, Operator, Rule, RuleBase};
use super::RuleError;

/// How object values are lexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueMode {
    /// Any non-whitespace token or a double-quoted string.
    #[default]
    Relaxed,
    /// Only `1*(Alpha | Digit)` with Digit in `[1-9]`, exactly as the grammar reads.
    Strict,
}

pub fn parse_rule_file(text: &str, mode: ValueMode) -> Result<RuleBase, RuleError> {
    if text.trim().is_empty() {
        return Err(RuleError::Empty);
    }
    let mut objects = Vec::new();
    let mut rules = Vec::new();
    let mut lines = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| RuleError::Syntax { line: line_no, message };
        let (head, body) = line
            .split_once(':')
            .ok_or_else(|| err("expected `object <n>:` or `rule <n>:`".into()))?;
        let mut head_parts = head.split_whitespace();
        let kind = head_parts.next().unwrap_or_default();
        let number: u32 = head_parts
            .next()
            .and_then(|n| n.parse().ok())
            .filter(|n| *n > 0)
            .ok_or_else(|| err(format!("`{kind}` needs a positive number")))?;
        if head_parts.next().is_some() {
            return Err(err("unexpected text before `:`".into()));
        }
        match kind {
            "object" => {
                objects.push(parse_object(number, body, mode).map_err(err)?);
                lines.insert((false, number), line_no);
            }
            "rule" => {
                rules.push(parse_rule(number, body).map_err(err)?);
                lines.insert((true, number), line_no);
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    RuleBase::build(objects, rules, text.to_string(), &lines)
}

fn canonical_section(section: &str) -> String {
    match section.to_ascii_lowercase().as_str() {
        "method" => "Method".into(),
        "uri" | "request-uri" => "Request-URI".into(),
        "version" | "http-version" => "HTTP-version".into(),
        "status-code" => "Status-code".into(),
        "reason" | "reason-phrase" => "Reason-Phrase".into(),
        _ => section.to_string(),
    }
}

fn parse_object(number: u32, body: &str, mode: ValueMode) -> Result<MatchObject, String> {
    let mut rest = body.trim_start();
    let mut next_word = || -> Result<&str, String> {
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let (word, tail) = rest.split_at(end);
        rest = tail.trim_start();
        if word.is_empty() {
            Err("object needs: message-line section feature operator value".into())
        } else {
            Ok(word)
        }
    };
    let ml = next_word()?;
    let message_line = MessageLineSpec::parse(ml).ok_or_else(|| format!("unknown message-line `{ml}`"))?;
    let section = canonical_section(next_word()?);
    let feat = next_word()?;
    let feature = Feature::parse(feat).ok_or_else(|| format!("unknown feature `{feat}`"))?;
    let op = next_word()?;
    let operator = Operator::parse(op).ok_or_else(|| format!("unknown operator `{op}`"))?;
    let (content, tail) = lex_value(rest, mode)?;
    if !tail.trim().is_empty() {
        return Err(format!("trailing text after value: `{}`", tail.trim()));
    }
    let object = MatchObject {
        object_number: number,
        message_line,
        section,
        feature,
        operator,
        content,
    };
    object.validate()?;
    Ok(object)
}

fn lex_value(input: &str, mode: ValueMode) -> Result<(String, &str), String> {
    match mode {
        ValueMode::Strict => {
            let end = input.find(char::is_whitespace).unwrap_or(input.len());
            let (word, tail) = input.split_at(end);
            let valid = !word.is_empty()
                && word
                    .bytes()
                    .all(|b| b.is_ascii_alphabetic() || (b'1'..=b'9').contains(&b));
            if valid {
                Ok((word.to_string(), tail))
            } else {
                Err(format!("value `{word}` is not 1*(Alpha|Digit) (strict mode)"))
            }
        }
        ValueMode::Relaxed if input.starts_with('"') => lex_quoted(&input[1..]),
        ValueMode::Relaxed => {
            let end = input.find(char::is_whitespace).unwrap_or(input.len());
            let (word, tail) = input.split_at(end);
            if word.is_empty() {
                Err("missing value".into())
            } else {
                Ok((word.to_string(), tail))
            }
        }
    }
}

/// Reads up to the closing quote; `\"` and `\\` are the only escapes.
fn lex_quoted(input: &str) -> Result<(String, &str), String> {
    let mut out = String::new();
    let mut chars = input.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '"' => return Ok((out, &input[i + 1..])),
            '\\' => match chars.next() {
                Some((_, e @ ('"' | '\\'))) => out.push(e),
                Some((_, other)) => {
                    out.push('\\');
                    out.push(other);
                }
                None => break,
            },
            c => out.push(c),
        }
    }
    Err("unterminated quoted string".into())
}

fn parse_rule(number: u32, body: &str) -> Result<Rule, String> {
    let body = body.trim();
    let open = body.find("objects={").ok_or("rule needs objects={...}")?;
    let after = &body[open + "objects={".len()..];
    let close = after.find('}').ok_or("unclosed objects={")?;
    let object_list = after[..close]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().map_err(|_| format!("bad object number `{s}`")))
        .collect::<Result<Vec<_>, _>>()?;
    if object_list.is_empty() {
        return Err("rule has no objects".into());
    }
    let mut rest = format!("{} {}", &body[..open], &after[close + 1..]);
    let mut message = format!("rule {number}");
    if let Some(m) = rest.find("msg=\"") {
        let (msg, tail) = lex_quoted(&rest[m + 5..])?;
        message = msg;
        rest = format!("{}{}", &rest[..m], tail);
    }
    let mut in_order = false;
    let mut count = None;
    for item in rest.split_whitespace() {
        match item.split_once('=') {
            Some(("ordered", v)) => {
                in_order = v
                    .parse()
                    .map_err(|_| format!("ordered must be true or false, got `{v}`"))?
            }
            Some(("count", v)) => count = Some(v.parse::<usize>().map_err(|_| format!("bad count `{v}`"))?),
            _ => return Err(format!("unexpected `{item}` in rule")),
        }
    }
    if let Some(c) = count {
        if c != object_list.len() {
            return Err(format!("count={c} but {} objects listed", object_list.len()));
        }
    }
    Ok(Rule {
        rule_number: number,
        object_list,
        in_order,
        message,
    })
}
