//! Semantic rule-base: five-tuple match objects grouped into ordered or
//! unordered rules, and the state-driven interpreter that applies them.

pub mod evaluate;
pub mod interpret;
pub mod matcher;
pub mod object;
pub mod parse;

use thiserror::Error;

pub use evaluate::{evaluate_rules, find_witness, RuleTrigger};
pub use interpret::{interpret, Interpretation, MissReport};
pub use matcher::{match_objects, ObjectHit};
pub use object::{Feature, MatchObject, MessageLineSpec, Operator, Rule, RuleBase, StateKey};
pub use parse::{parse_rule_file, ValueMode};

/// The bundled illustrative rule-base.
pub const EXAMPLE_RULES: &str = include_str!("../../../../rules/examples.rules");

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("rule file is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("rule {rule} references undefined object {object}")]
    DanglingObject { rule: u32, object: u32 },
    #[error("object {0} defined twice")]
    DuplicateObject(u32),
    #[error("rule {0} defined twice")]
    DuplicateRule(u32),
}
