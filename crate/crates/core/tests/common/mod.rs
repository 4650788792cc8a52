//! Independent reference implementations the library is checked against.
#![allow(dead_code)]

use std::path::PathBuf;

use fasids::ingest::{FieldRecord, MessageLine};
use fasids::rules::{Feature, MatchObject, MessageLineSpec, Operator, Rule};

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

/// Whether `object` matches `record` on its own (per-record features only).
pub fn object_matches(object: &MatchObject, record: &FieldRecord) -> bool {
    let line_ok = match object.message_line {
        MessageLineSpec::StartLine => {
            matches!(record.message_line, MessageLine::RequestLine | MessageLine::StatusLine)
        }
        MessageLineSpec::Header => matches!(
            record.message_line,
            MessageLine::GenericHeader
                | MessageLine::RequestHeader
                | MessageLine::ResponseHeader
                | MessageLine::EntityHeader
        ),
        MessageLineSpec::Exact(m) => m == record.message_line,
    };
    if !line_ok || !object.section.eq_ignore_ascii_case(&record.section) {
        return false;
    }
    let n: u64 = object.content.parse().unwrap_or(0);
    let len = record.value.len() as u64;
    match object.feature {
        Feature::Parameter => record.value == object.content,
        Feature::Size => match object.operator {
            Operator::Eq => len == n,
            Operator::Gt => len > n,
            Operator::Lt => len < n,
        },
        Feature::Regex => regex::Regex::new(&object.content).unwrap().is_match(&record.value),
        Feature::Occurrence => unimplemented!("occurrence is not per-record"),
    }
}

/// Brute force over record assignments.
///
/// Ordered: some strictly increasing record indices r_1 < ... < r_k with
/// object_list[j] matching r_j. Unordered: an injective map from list
/// positions to (object, record) matches with the same object.
pub fn rule_satisfied(rule: &Rule, objects: &[MatchObject], records: &[FieldRecord]) -> bool {
    let obj = |n: u32| objects.iter().find(|o| o.object_number == n).unwrap();
    if rule.in_order {
        fn search(list: &[&MatchObject], records: &[FieldRecord], from: usize) -> bool {
            let Some((first, rest)) = list.split_first() else {
                return true;
            };
            (from..records.len()).any(|r| object_matches(first, &records[r]) && search(rest, records, r + 1))
        }
        let list: Vec<&MatchObject> = rule.object_list.iter().map(|&n| obj(n)).collect();
        search(&list, records, 0)
    } else {
        // each list position needs its own (object, record) pair
        fn assign(
            list: &[u32],
            objects: &[MatchObject],
            records: &[FieldRecord],
            used: &mut Vec<(u32, usize)>,
        ) -> bool {
            let Some((&first, rest)) = list.split_first() else {
                return true;
            };
            let o = objects.iter().find(|o| o.object_number == first).unwrap();
            for r in 0..records.len() {
                if used.contains(&(first, r)) || !object_matches(o, &records[r]) {
                    continue;
                }
                used.push((first, r));
                if assign(rest, objects, records, used) {
                    return true;
                }
                used.pop();
            }
            false
        }
        assign(&rule.object_list, objects, records, &mut Vec::new())
    }
}

/// Trapezoid written out piece by piece.
pub fn trapezoid(u: f64, a: f64, b: f64, c: f64, d: f64) -> f64 {
    if u < a || u > d {
        0.0
    } else if u < b {
        (u - a) / (b - a)
    } else if u <= c {
        1.0
    } else {
        (d - u) / (d - c)
    }
}

/// Mean of maxima on a fine grid: each label's strength is spread over its
/// closed anchor interval and the output membership is the pointwise max.
pub fn mom_oracle(strengths: &[f64; 4], anchors: &[(f64, f64); 4], samples: usize) -> Option<f64> {
    let mut best = 0.0_f64;
    let mut at: Vec<f64> = Vec::new();
    for i in 0..samples {
        let u = i as f64 / (samples - 1) as f64;
        let mu = (0..4)
            .filter(|&k| anchors[k].0 <= u && u <= anchors[k].1)
            .map(|k| strengths[k])
            .fold(0.0, f64::max);
        if mu > best {
            best = mu;
            at.clear();
        }
        if mu == best && mu > 0.0 {
            at.push(u);
        }
    }
    (best > 0.0).then(|| at.iter().sum::<f64>() / at.len() as f64)
}
