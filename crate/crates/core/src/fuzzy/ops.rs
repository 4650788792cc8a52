use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FuzzyOp {
    And,
    Or,
    Not,
}

pub fn and(a: f64, b: f64) -> f64 {
    a.min(b)
}

pub fn or(a: f64, b: f64) -> f64 {
    a.max(b)
}

pub fn not(a: f64) -> f64 {
    1.0 - a
}

/// `b` is ignored for `Not`; a missing `b` for a binary operator is treated
/// as the operator's identity (1 for AND, 0 for OR).
pub fn apply_operator(op: FuzzyOp, a: f64, b: Option<f64>) -> f64 {
    match op {
        FuzzyOp::And => and(a, b.unwrap_or(1.0)),
        FuzzyOp::Or => or(a, b.unwrap_or(0.0)),
        FuzzyOp::Not => not(a),
    }
}
