use std::collections::HashMap;

use serde::Serialize;

use super::matcher::ObjectHit;
use super::object::{Rule, RuleBase};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleTrigger {
    pub rule_number: u32,
    pub witness: Vec<ObjectHit>,
    pub message: String,
}

/// Finds the leftmost-earliest witness for `rule` in `hits`, if any.
///
/// Ordered rules need the object list as a subsequence with strictly
/// increasing record indices. Unordered rules need the object list's
/// multiset inside the hit multiset, each hit used at most once.
pub fn find_witness(rule: &Rule, hits: &[ObjectHit]) -> Option<Vec<ObjectHit>> {
    if rule.in_order {
        let mut witness = Vec::with_capacity(rule.object_list.len());
        let mut pos = 0;
        let mut last_record: Option<usize> = None;
        for &wanted in &rule.object_list {
            let found = hits[pos..]
                .iter()
                .position(|h| h.object_number == wanted && last_record.is_none_or(|r| h.record_index > r))?;
            let hit = &hits[pos + found];
            last_record = Some(hit.record_index);
            witness.push(hit.clone());
            pos += found + 1;
        }
        Some(witness)
    } else {
        let mut needed: HashMap<u32, usize> = HashMap::new();
        for &n in &rule.object_list {
            *needed.entry(n).or_default() += 1;
        }
        let mut witness = Vec::with_capacity(rule.object_list.len());
        for hit in hits {
            if let Some(left) = needed.get_mut(&hit.object_number) {
                if *left > 0 {
                    *left -= 1;
                    witness.push(hit.clone());
                }
            }
        }
        (witness.len() == rule.object_list.len()).then_some(witness)
    }
}

/// Every rule in the rule-base that `hits` satisfies, by rule number.
pub fn evaluate_rules(hits: &[ObjectHit], rulebase: &RuleBase) -> Vec<RuleTrigger> {
    if hits.is_empty() {
        return Vec::new();
    }
    let mut per_object: HashMap<u32, usize> = HashMap::new();
    for h in hits {
        *per_object.entry(h.object_number).or_default() += 1;
    }
    rulebase
        .rules()
        // cheap count check first; most rules in a large base have no hits at all
        .filter(|rule| {
            rule.object_list.iter().all(|n| per_object.contains_key(n))
                && (rule.in_order || {
                    let mut need: HashMap<u32, usize> = HashMap::new();
                    rule.object_list.iter().for_each(|n| *need.entry(*n).or_default() += 1);
                    need.iter().all(|(n, k)| per_object[n] >= *k)
                })
        })
        .filter_map(|rule| {
            find_witness(rule, hits).map(|witness| RuleTrigger {
                rule_number: rule.rule_number,
                witness,
                message: rule.message.clone(),
            })
        })
        .collect()
}
