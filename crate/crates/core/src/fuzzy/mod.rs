//! Fuzzy intrusion detection for traffic the rule-base lets through:
//! pattern counts over time windows are normalized, fuzzified over five
//! trapezoids, pushed through a fuzzy associative map inside a cognitive
//! map, and defuzzified by mean of maxima.

pub mod config;
pub mod defuzz;
pub mod fam;
pub mod fcm;
pub mod membership;
pub mod ops;
pub mod window;

use thiserror::Error;

pub use config::{FuzzyEngine, DEFAULT_FUZZY_CONFIG};
pub use defuzz::{classify, defuzzify_mom, ConsequentScale, Defuzzified, DEFAULT_RESOLUTION};
pub use fam::{evaluate_fam, Consequent, FamMatrix, LabelStrengths, DEFAULT_FAM};
pub use fcm::{fcm_evaluate, EventNode, EventVerdict, FcmEdge, FcmGraph, FcmOutcome, FuzzyModel, FuzzyRule, Relation};
pub use membership::{fuzzify, FuzzySet, LinguisticVariable, COUNT_LABELS, DEFAULT_BREAKPOINTS, INTERVAL_LABELS};
pub use ops::{and, apply_operator, not, or, FuzzyOp};
pub use window::{count_pattern, normalize, ClosedWindow, LogEvent, MetricSpec, MetricStream, MetricWindow};

#[derive(Debug, Error)]
pub enum FuzzyError {
    #[error("fuzzy configuration: {0}")]
    Config(String),
}
