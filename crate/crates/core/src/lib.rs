//! Application-layer HTTP misuse detection.
//!
//! Traffic flows through [`ingest`] (capture reading and header parsing),
//! [`rules`] (semantic header rules), [`payload`] (HTML and script scanning),
//! and [`fuzzy`] (frequency analysis for traffic the rules let through).
//! [`pipeline`] wires the stages together.

pub mod fuzzy;
pub mod ingest;
pub mod payload;
pub mod pipeline;
pub mod rules;
