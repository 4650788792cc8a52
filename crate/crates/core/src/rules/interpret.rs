use serde::Serialize;

use super::evaluate::{evaluate_rules, RuleTrigger};
use super::matcher::match_objects;
use super::object::RuleBase;
use crate::ingest::FieldRecord;

/// A transaction the rule-base found nothing in, handed on for frequency
/// analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissReport {
    pub records: Vec<FieldRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interpretation {
    pub triggers: Vec<RuleTrigger>,
    /// Present only when no rule triggered.
    pub residual: Option<MissReport>,
}

pub fn interpret(records: &[FieldRecord], rulebase: &RuleBase) -> Interpretation {
    let hits = match_objects(records, rulebase);
    let triggers = evaluate_rules(&hits, rulebase);
    let residual = triggers.is_empty().then(|| MissReport {
        records: records.to_vec(),
    });
    Interpretation { triggers, residual }
}
