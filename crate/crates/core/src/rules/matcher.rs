use serde::Serialize;

use super::object::{Feature, RuleBase, StateKey};
use crate::ingest::FieldRecord;

/// One object matching one record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObjectHit {
    pub object_number: u32,
    pub record_index: usize,
    pub matched_value: String,
}

/// Scans `records` once, looking objects up only in the state each record
/// puts the interpreter in. Hits are ordered by record index, then object
/// number.
///
/// Occurrence objects are decided after the scan. Their hit sits on the
/// appearance where the running count first satisfies the test (`>`: the
/// n+1-th, `=`: the n-th); `<` uses the last appearance, or `records.len()`
/// when the section never appears. Their matched value is the final count.
pub fn match_objects(records: &[FieldRecord], rulebase: &RuleBase) -> Vec<ObjectHit> {
    let index = &rulebase.index;
    let mut hits = Vec::new();
    let mut appearances: Vec<Vec<usize>> = vec![Vec::new(); index.predicates.len()];

    for (i, record) in records.iter().enumerate() {
        let state = StateKey::new(record.message_line, &record.section);
        let Some(candidates) = index.by_state.get(&state) else {
            continue;
        };
        for &p in candidates {
            let pred = &index.predicates[p];
            let matched = match pred.feature {
                Feature::Parameter => record.value == pred.content,
                Feature::Size => pred.operator.compare(record.value.len() as u64, pred.number),
                Feature::Regex => pred.regex.as_ref().is_some_and(|re| re.is_match(&record.value)),
                Feature::Occurrence => {
                    appearances[p].push(i);
                    false
                }
            };
            if matched {
                hits.extend(pred.objects.iter().map(|&n| ObjectHit {
                    object_number: n,
                    record_index: i,
                    matched_value: record.value.clone(),
                }));
            }
        }
    }

    for (p, pred) in index.predicates.iter().enumerate() {
        if pred.feature != Feature::Occurrence {
            continue;
        }
        let seen = &appearances[p];
        let count = seen.len() as u64;
        if !pred.operator.compare(count, pred.number) {
            continue;
        }
        let at = match pred.operator {
            super::Operator::Gt => seen[pred.number as usize],
            super::Operator::Eq if pred.number > 0 => seen[pred.number as usize - 1],
            _ => seen.last().copied().unwrap_or(records.len()),
        };
        hits.extend(pred.objects.iter().map(|&n| ObjectHit {
            object_number: n,
            record_index: at,
            matched_value: count.to_string(),
        }));
    }

    hits.sort_by_key(|h| (h.record_index, h.object_number));
    hits
}
