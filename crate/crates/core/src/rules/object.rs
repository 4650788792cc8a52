use std::collections::{BTreeMap, HashMap};
use std::fmt;

use regex::Regex;
use serde::Serialize;

use super::RuleError;
use crate::ingest::MessageLine;

/// The message-line production of the rule grammar, including the abstract
/// `start-line` and `header` alternatives that cover several concrete lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageLineSpec {
    StartLine,
    Header,
    Exact(MessageLine),
}

impl MessageLineSpec {
    pub fn parse(s: &str) -> Option<Self> {
        let spec = match s.to_ascii_lowercase().as_str() {
            "start-line" => MessageLineSpec::StartLine,
            "header" => MessageLineSpec::Header,
            "request-line" => MessageLineSpec::Exact(MessageLine::RequestLine),
            "status-line" => MessageLineSpec::Exact(MessageLine::StatusLine),
            "generic-header" | "general-header" | "generic-hdr" => MessageLineSpec::Exact(MessageLine::GenericHeader),
            "request-header" | "request-hdr" => MessageLineSpec::Exact(MessageLine::RequestHeader),
            "response-header" | "response-hdr" => MessageLineSpec::Exact(MessageLine::ResponseHeader),
            "entity-header" | "entity-hdr" => MessageLineSpec::Exact(MessageLine::EntityHeader),
            "body" => MessageLineSpec::Exact(MessageLine::Body),
            _ => return None,
        };
        Some(spec)
    }

    pub fn covers(self, ml: MessageLine) -> bool {
        match self {
            MessageLineSpec::StartLine => ml.is_start_line(),
            MessageLineSpec::Header => ml.is_header(),
            MessageLineSpec::Exact(m) => m == ml,
        }
    }
}

impl fmt::Display for MessageLineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MessageLineSpec::StartLine => f.write_str("start-line"),
            MessageLineSpec::Header => f.write_str("header"),
            MessageLineSpec::Exact(m) => f.write_str(m.as_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    /// Literal value test. `type` is accepted as an alias.
    Parameter,
    Size,
    Regex,
    Occurrence,
}

impl Feature {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "parameter" | "type" => Some(Feature::Parameter),
            "size" => Some(Feature::Size),
            "regex" => Some(Feature::Regex),
            "occurrence" => Some(Feature::Occurrence),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Parameter => "parameter",
            Feature::Size => "size",
            Feature::Regex => "regex",
            Feature::Occurrence => "occurrence",
        }
    }

    fn is_numeric(self) -> bool {
        matches!(self, Feature::Size | Feature::Occurrence)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Eq,
    Gt,
    Lt,
}

impl Operator {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "=" => Some(Operator::Eq),
            ">" => Some(Operator::Gt),
            "<" => Some(Operator::Lt),
            _ => None,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Operator::Eq => "=",
            Operator::Gt => ">",
            Operator::Lt => "<",
        }
    }

    pub fn compare(self, lhs: u64, rhs: u64) -> bool {
        match self {
            Operator::Eq => lhs == rhs,
            Operator::Gt => lhs > rhs,
            Operator::Lt => lhs < rhs,
        }
    }
}

/// One elementary pattern: ⟨message-line, section, feature, operator, content⟩.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchObject {
    pub object_number: u32,
    pub message_line: MessageLineSpec,
    pub section: String,
    pub feature: Feature,
    pub operator: Operator,
    pub content: String,
}

impl MatchObject {
    /// Checks the feature/operator/content constraints.
    pub fn validate(&self) -> Result<(), String> {
        if self.object_number == 0 {
            return Err("object numbers start at 1".into());
        }
        if self.section.is_empty() || self.section.contains('$') {
            return Err(format!("invalid section `{}`", self.section));
        }
        match self.feature {
            Feature::Parameter | Feature::Regex if self.operator != Operator::Eq => Err(format!(
                "operator `{}` is only valid for size and occurrence",
                self.operator.symbol()
            )),
            f if f.is_numeric() && self.content.parse::<u64>().is_err() => {
                Err(format!("{} needs a numeric value, got `{}`", f.as_str(), self.content))
            }
            Feature::Regex => Regex::new(&self.content).map(|_| ()).map_err(|e| e.to_string()),
            _ => Ok(()),
        }
    }

    fn predicate_key(&self) -> (MessageLineSpec, String, Feature, Operator, &str) {
        (
            self.message_line,
            self.section.to_ascii_lowercase(),
            self.feature,
            self.operator,
            &self.content,
        )
    }
}

impl fmt::Display for MatchObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let plain = !self.content.is_empty()
            && !self
                .content
                .contains(|c: char| c.is_whitespace() || c == '"' || c == '#');
        write!(
            f,
            "object {}: {} {} {} {} ",
            self.object_number,
            self.message_line,
            self.section,
            self.feature.as_str(),
            self.operator.symbol()
        )?;
        if plain {
            f.write_str(&self.content)
        } else {
            write!(f, "\"{}\"", self.content.replace('\\', "\\\\").replace('"', "\\\""))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rule {
    pub rule_number: u32,
    /// Object numbers; repetition is allowed.
    pub object_list: Vec<u32>,
    pub in_order: bool,
    pub message: String,
}

impl Rule {
    pub fn no_of_objects(&self) -> usize {
        self.object_list.len()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list: Vec<String> = self.object_list.iter().map(u32::to_string).collect();
        write!(
            f,
            "rule {}: objects={{{}}} ordered={} msg=\"{}\"",
            self.rule_number,
            list.join(","),
            self.in_order,
            self.message.replace('\\', "\\\\").replace('"', "\\\"")
        )
    }
}

/// Interpreter state for a record: its concrete message line plus the
/// case-folded section name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateKey {
    pub message_line: MessageLine,
    pub section: String,
}

impl StateKey {
    pub fn new(message_line: MessageLine, section: &str) -> Self {
        Self {
            message_line,
            section: section.to_ascii_lowercase(),
        }
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.message_line {
            MessageLine::RequestLine => "REQLINE",
            MessageLine::StatusLine => "STATLINE",
            MessageLine::GenericHeader => "GENHDR",
            MessageLine::RequestHeader => "REQHDR",
            MessageLine::ResponseHeader => "RESPHDR",
            MessageLine::EntityHeader => "ENTHDR",
            MessageLine::Body => "BODY",
        };
        let section = match self.section.as_str() {
            "request-uri" => "URI".to_string(),
            s => s.to_ascii_uppercase().replace('-', "_"),
        };
        write!(f, "{prefix}_{section}")
    }
}

/// A distinct predicate shared by every object with the same five-tuple.
#[derive(Debug)]
pub(crate) struct Predicate {
    pub feature: Feature,
    pub operator: Operator,
    pub content: String,
    pub number: u64,
    pub regex: Option<Regex>,
    /// Ascending object numbers sharing this predicate.
    pub objects: Vec<u32>,
}

#[derive(Debug, Default)]
pub(crate) struct StateIndex {
    pub predicates: Vec<Predicate>,
    pub by_state: HashMap<StateKey, Vec<usize>>,
}

/// Immutable, validated set of objects and rules.
#[derive(Debug)]
pub struct RuleBase {
    objects: BTreeMap<u32, MatchObject>,
    rules: BTreeMap<u32, Rule>,
    source_text: String,
    pub(crate) index: StateIndex,
}

impl RuleBase {
    pub fn new(objects: Vec<MatchObject>, rules: Vec<Rule>) -> Result<Self, RuleError> {
        let mut text = String::new();
        for o in &objects {
            text.push_str(&o.to_string());
            text.push('\n');
        }
        for r in &rules {
            text.push_str(&r.to_string());
            text.push('\n');
        }
        Self::build(objects, rules, text, &HashMap::new())
    }

    pub(crate) fn build(
        objects: Vec<MatchObject>,
        rules: Vec<Rule>,
        source_text: String,
        lines: &HashMap<(bool, u32), usize>,
    ) -> Result<Self, RuleError> {
        let line_of = |is_rule: bool, n: u32| lines.get(&(is_rule, n)).copied().unwrap_or(0);
        let mut object_map = BTreeMap::new();
        for object in objects {
            let n = object.object_number;
            object.validate().map_err(|message| RuleError::Syntax {
                line: line_of(false, n),
                message,
            })?;
            if object_map.insert(n, object).is_some() {
                return Err(RuleError::DuplicateObject(n));
            }
        }
        let mut rule_map = BTreeMap::new();
        for rule in rules {
            let n = rule.rule_number;
            if n == 0 || rule.object_list.is_empty() {
                return Err(RuleError::Syntax {
                    line: line_of(true, n),
                    message: "rules need a positive number and at least one object".into(),
                });
            }
            if let Some(missing) = rule.object_list.iter().find(|o| !object_map.contains_key(o)) {
                return Err(RuleError::DanglingObject {
                    rule: n,
                    object: *missing,
                });
            }
            if rule_map.insert(n, rule).is_some() {
                return Err(RuleError::DuplicateRule(n));
            }
        }
        let index = build_index(&object_map);
        Ok(Self {
            objects: object_map,
            rules: rule_map,
            source_text,
            index,
        })
    }

    pub fn objects(&self) -> impl Iterator<Item = &MatchObject> {
        self.objects.values()
    }

    pub fn object(&self, n: u32) -> Option<&MatchObject> {
        self.objects.get(&n)
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.values()
    }

    pub fn rule(&self, n: u32) -> Option<&Rule> {
        self.rules.get(&n)
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    /// Number of distinct predicates after merging identical objects.
    pub fn distinct_predicates(&self) -> usize {
        self.index.predicates.len()
    }

    /// Interpreter states in which at least one object is looked up.
    pub fn states(&self) -> Vec<String> {
        let mut states: Vec<String> = self.index.by_state.keys().map(ToString::to_string).collect();
        states.sort();
        states
    }
}

fn build_index(objects: &BTreeMap<u32, MatchObject>) -> StateIndex {
    let mut index = StateIndex::default();
    let mut seen: HashMap<(MessageLineSpec, String, Feature, Operator, &str), usize> = HashMap::new();
    for object in objects.values() {
        if let Some(&p) = seen.get(&object.predicate_key()) {
            index.predicates[p].objects.push(object.object_number);
            continue;
        }
        let p = index.predicates.len();
        index.predicates.push(Predicate {
            feature: object.feature,
            operator: object.operator,
            content: object.content.clone(),
            number: object.content.parse().unwrap_or(0),
            regex: (object.feature == Feature::Regex).then(|| Regex::new(&object.content).expect("validated")),
            objects: vec![object.object_number],
        });
        seen.insert(object.predicate_key(), p);
        for ml in MessageLine::ALL
            .into_iter()
            .filter(|ml| object.message_line.covers(*ml))
        {
            index
                .by_state
                .entry(StateKey::new(ml, &object.section))
                .or_default()
                .push(p);
        }
    }
    index
}
