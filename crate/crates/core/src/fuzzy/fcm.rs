//! Fuzzy cognitive map: metric concepts activate suspicious-event concepts
//! through FAM or IF/THEN rule relations, in a single forward pass.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::Serialize;

use super::defuzz::{classify, defuzzify_mom, ConsequentScale};
use super::fam::{Consequent, FamMatrix, LabelStrengths};
use super::membership::{fuzzify, LinguisticVariable};
use super::ops::{and, not, or};
use super::window::MetricWindow;
use super::FuzzyError;

/// Input variables, output scale, and sampling resolution.
#[derive(Debug, Clone)]
pub struct FuzzyModel {
    /// Pattern count.
    pub x: LinguisticVariable,
    /// Time interval.
    pub t: LinguisticVariable,
    pub scale: ConsequentScale,
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Input {
    X,
    T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Is { input: Input, label: usize },
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    fn eval(&self, mu_x: &[f64; 5], mu_t: &[f64; 5]) -> f64 {
        match self {
            Condition::Is { input: Input::X, label } => mu_x[*label],
            Condition::Is { input: Input::T, label } => mu_t[*label],
            Condition::And(a, b) => and(a.eval(mu_x, mu_t), b.eval(mu_x, mu_t)),
            Condition::Or(a, b) => or(a.eval(mu_x, mu_t), b.eval(mu_x, mu_t)),
            Condition::Not(a) => not(a.eval(mu_x, mu_t)),
        }
    }
}

/// `IF <condition> THEN <consequent>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyRule {
    pub condition: Condition,
    pub consequent: Consequent,
    pub source: String,
}

const KEYWORDS: [&str; 5] = ["and", "or", "not", "then", "if"];

struct RuleParser<'a> {
    tokens: Vec<&'a str>,
    pos: usize,
    model: &'a FuzzyModel,
}

impl<'a> RuleParser<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).copied()
    }

    fn peek_is(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.eq_ignore_ascii_case(kw))
    }

    fn expect(&mut self, kw: &str) -> Result<(), String> {
        if self.peek_is(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!(
                "expected `{kw}`, found `{}`",
                self.peek().unwrap_or("end of rule")
            ))
        }
    }

    fn or_expr(&mut self) -> Result<Condition, String> {
        let mut lhs = self.and_expr()?;
        while self.peek_is("or") {
            self.pos += 1;
            lhs = Condition::Or(Box::new(lhs), Box::new(self.and_expr()?));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Condition, String> {
        let mut lhs = self.unary()?;
        while self.peek_is("and") {
            self.pos += 1;
            lhs = Condition::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Condition, String> {
        if self.peek_is("not") {
            self.pos += 1;
            return Ok(Condition::Not(Box::new(self.unary()?)));
        }
        if self.peek() == Some("(") {
            self.pos += 1;
            let inner = self.or_expr()?;
            self.expect(")")?;
            return Ok(inner);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Condition, String> {
        let name = self.peek().ok_or("missing variable")?;
        self.pos += 1;
        let (input, var) = match name.to_ascii_lowercase().as_str() {
            // "y" appears for the count in some rule write-ups
            "x" | "y" => (Input::X, &self.model.x),
            "t" => (Input::T, &self.model.t),
            other => return Err(format!("unknown variable `{other}` (expected x or t)")),
        };
        self.expect("is")?;
        let negated = self.peek_is("not");
        if negated {
            self.pos += 1;
        }
        let mut words = Vec::new();
        while let Some(tok) = self.peek() {
            if tok == ")" || KEYWORDS.iter().any(|k| tok.eq_ignore_ascii_case(k)) {
                break;
            }
            words.push(tok);
            self.pos += 1;
        }
        let label = words.join(" ");
        let idx = var
            .label_index(&label)
            .ok_or_else(|| format!("`{label}` is not a label of {}", var.name))?;
        let atom = Condition::Is { input, label: idx };
        Ok(if negated { Condition::Not(Box::new(atom)) } else { atom })
    }
}

impl FuzzyRule {
    pub fn parse(source: &str, model: &FuzzyModel) -> Result<Self, FuzzyError> {
        let spaced = source.replace('(', " ( ").replace(')', " ) ");
        let mut parser = RuleParser {
            tokens: spaced.split_whitespace().collect(),
            pos: 0,
            model,
        };
        let err = |m: String| FuzzyError::Config(format!("rule `{source}`: {m}"));
        parser.expect("if").map_err(err)?;
        let condition = parser.or_expr().map_err(err)?;
        parser.expect("then").map_err(err)?;
        let rest = &parser.tokens[parser.pos..];
        // accept both `THEN HP` and `THEN Intrusion is HP`
        let label = match rest.iter().position(|t| t.eq_ignore_ascii_case("is")) {
            Some(p) => rest[p + 1..].join(" "),
            None => rest.join(" "),
        };
        Ok(Self {
            condition,
            consequent: label.parse()?,
            source: source.to_string(),
        })
    }

    pub fn fire(&self, mu_x: &[f64; 5], mu_t: &[f64; 5]) -> f64 {
        self.condition.eval(mu_x, mu_t)
    }
}

#[derive(Debug, Clone)]
pub enum Relation {
    Fam(Arc<FamMatrix>),
    Rules(Vec<FuzzyRule>),
}

impl Relation {
    pub fn evaluate(&self, mu_x: &[f64; 5], mu_t: &[f64; 5]) -> LabelStrengths {
        match self {
            Relation::Fam(fam) => fam.evaluate_named("x", mu_x, mu_t),
            Relation::Rules(rules) => {
                let mut out = LabelStrengths::default();
                for rule in rules {
                    out.raise(rule.consequent, rule.fire(mu_x, mu_t));
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct FcmEdge {
    pub from: String,
    pub relation: Relation,
}

#[derive(Debug, Clone)]
pub struct EventNode {
    pub name: String,
    pub edges: Vec<FcmEdge>,
}

/// Metric concepts feed event concepts; edges only run metric -> event, so
/// the graph is acyclic by construction.
#[derive(Debug, Clone)]
pub struct FcmGraph {
    metrics: Vec<String>,
    events: Vec<EventNode>,
}

impl FcmGraph {
    pub fn new(metrics: Vec<String>, events: Vec<EventNode>) -> Result<Self, FuzzyError> {
        let metric_set: HashSet<&str> = metrics.iter().map(String::as_str).collect();
        let mut names = HashSet::new();
        for event in &events {
            if !names.insert(event.name.as_str()) || metric_set.contains(event.name.as_str()) {
                return Err(FuzzyError::Config(format!("duplicate concept `{}`", event.name)));
            }
            if event.edges.is_empty() {
                return Err(FuzzyError::Config(format!(
                    "suspicious event `{}` has no incoming edge",
                    event.name
                )));
            }
            if let Some(e) = event.edges.iter().find(|e| !metric_set.contains(e.from.as_str())) {
                return Err(FuzzyError::Config(format!(
                    "event `{}` depends on undefined metric `{}`",
                    event.name, e.from
                )));
            }
        }
        Ok(Self { metrics, events })
    }

    pub fn metrics(&self) -> &[String] {
        &self.metrics
    }

    pub fn events(&self) -> &[EventNode] {
        &self.events
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventVerdict {
    pub score: f64,
    pub verdict: Consequent,
    pub strengths: LabelStrengths,
    pub no_rule_fired: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FcmOutcome {
    pub verdicts: BTreeMap<String, EventVerdict>,
    pub diagnostics: Vec<String>,
}

/// Normalizes and fuzzifies each supplied window, fires every edge, ORs the
/// strengths arriving at each event, then defuzzifies and classifies.
/// Events with an input missing from `inputs` are skipped.
pub fn fcm_evaluate(graph: &FcmGraph, model: &FuzzyModel, inputs: &BTreeMap<String, MetricWindow>) -> FcmOutcome {
    let mut outcome = FcmOutcome::default();
    'events: for event in &graph.events {
        let mut strengths = LabelStrengths::default();
        for edge in &event.edges {
            let Some(window) = inputs.get(&edge.from) else {
                outcome.diagnostics.push(format!(
                    "event `{}` skipped: metric `{}` not supplied",
                    event.name, edge.from
                ));
                continue 'events;
            };
            let (ux, ut) = match window.normalized() {
                Ok(v) => v,
                Err(e) => {
                    outcome.diagnostics.push(format!("event `{}` skipped: {e}", event.name));
                    continue 'events;
                }
            };
            let mu_x = fuzzify(ux, &model.x);
            let mu_t = fuzzify(ut, &model.t);
            strengths.merge(&edge.relation.evaluate(&mu_x, &mu_t));
        }
        let d = defuzzify_mom(&strengths, &model.scale, model.resolution);
        outcome.verdicts.insert(
            event.name.clone(),
            EventVerdict {
                score: d.score,
                verdict: classify(d.score, &model.scale),
                strengths,
                no_rule_fired: d.no_rule_fired,
            },
        );
    }
    outcome
}
