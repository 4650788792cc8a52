mod common;

use proptest::prelude::*;

use common::{object_matches, rule_satisfied};
use fasids::ingest::{dispatch, parse_header, Direction, FieldRecord, MessageLine, RawCapture};
use fasids::pipeline::DEFAULT_RULES;
use fasids::rules::{
    interpret, match_objects, parse_rule_file, Feature, MatchObject, MessageLineSpec, Operator, Rule, RuleBase,
    RuleError, ValueMode, EXAMPLE_RULES,
};

fn records(raw: &str) -> Vec<FieldRecord> {
    let txn = dispatch(&RawCapture {
        timestamp: 0.0,
        direction: Direction::Request,
        session_id: "s".into(),
        bytes: raw.as_bytes().to_vec(),
    })
    .unwrap();
    parse_header(&txn).0
}

fn fired(rb: &RuleBase, raw: &str) -> Vec<u32> {
    interpret(&records(raw), rb)
        .triggers
        .iter()
        .map(|t| t.rule_number)
        .collect()
}

#[test]
fn bundled_rule_files_parse_in_both_modes() {
    for text in [DEFAULT_RULES, EXAMPLE_RULES] {
        parse_rule_file(text, ValueMode::Relaxed).unwrap();
    }
    // strict mode takes values as 1*(Alpha|Digit) only
    assert!(parse_rule_file(EXAMPLE_RULES, ValueMode::Strict).is_err());
    parse_rule_file("object 1: header host size > 255\nobject 2: request-line method parameter = POST\nrule 1: objects={1,2} ordered=false msg=\"m\"\n", ValueMode::Strict).unwrap();
    assert!(parse_rule_file(
        "object 1: header host size > 0\nrule 1: objects={1} ordered=false msg=\"m\"\n",
        ValueMode::Strict
    )
    .is_err());
}

#[test]
fn default_rules_on_requests() {
    let rb = parse_rule_file(DEFAULT_RULES, ValueMode::Relaxed).unwrap();
    assert_eq!(
        fired(
            &rb,
            "GET /index.html HTTP/1.1\r\nHost: a\r\nUser-Agent: Mozilla/5.0\r\n\r\n"
        ),
        Vec::<u32>::new()
    );
    assert_eq!(
        fired(&rb, "GET /a/../../etc/passwd HTTP/1.1\r\nHost: a\r\n\r\n"),
        vec![1, 2]
    );
    assert_eq!(fired(&rb, "GET / HTTP/1.1\r\nHost: a\r\nHost: b\r\n\r\n"), vec![10]);
    assert_eq!(fired(&rb, "TRACE / HTTP/1.1\r\nHost: a\r\n\r\n"), vec![6]);
    assert_eq!(
        fired(
            &rb,
            "GET / HTTP/1.1\r\nHost: a\r\nUser-Agent: () { :; }; /bin/sh\r\n\r\n"
        ),
        vec![15]
    );
    assert_eq!(
        fired(
            &rb,
            "GET / HTTP/1.1\r\nHost: a\r\nCookie: id=1' or 1=1\r\nCookie: u=x' and 2=2\r\n\r\n"
        ),
        vec![12]
    );
    // one tautology is not enough for the doubled object list
    assert_eq!(
        fired(&rb, "GET / HTTP/1.1\r\nHost: a\r\nCookie: id=1' or 1=1\r\n\r\n"),
        Vec::<u32>::new()
    );
}

#[test]
fn example_rule_shapes_on_requests() {
    let rb = parse_rule_file(EXAMPLE_RULES, ValueMode::Relaxed).unwrap();
    let ordered =
        "GET / HTTP/1.1\r\nHost: a\r\nCookie: x=' or 1\r\nReferer: <script>\r\nUser-Agent: sqlmap/1.0\r\n\r\n";
    assert_eq!(fired(&rb, ordered), vec![1]);
    let reversed =
        "GET / HTTP/1.1\r\nHost: a\r\nUser-Agent: sqlmap/1.0\r\nReferer: <script>\r\nCookie: x=' or 1\r\n\r\n";
    assert_eq!(fired(&rb, reversed), Vec::<u32>::new());
    let post = "POST / HTTP/1.1\r\nHost: a\r\nCookie: a=' or 1\r\nCookie: b=' or 2\r\nCookie: c=' and 3\r\nCookie: d=' or 4\r\nContent-Length: 0\r\n\r\n";
    assert_eq!(fired(&rb, post), vec![2]);
}

#[test]
fn syntax_errors_carry_line_numbers() {
    let err = parse_rule_file(
        "object 1: header host size > 1\n\nobject 2: header host regex > x\n",
        ValueMode::Relaxed,
    )
    .unwrap_err();
    assert!(matches!(err, RuleError::Syntax { line: 3, .. }), "{err}");
    assert!(matches!(
        parse_rule_file(
            "object 1: header host size > 1\nrule 1: objects={1,9} ordered=true msg=\"m\"\n",
            ValueMode::Relaxed
        ),
        Err(RuleError::DanglingObject { rule: 1, object: 9 })
    ));
    assert!(matches!(
        parse_rule_file("  \n", ValueMode::Relaxed),
        Err(RuleError::Empty)
    ));
}

#[test]
fn identical_objects_share_a_predicate() {
    let text = "object 1: header host size > 3\nobject 2: header HOST size > 3\nobject 3: header host size > 4\n\
                rule 1: objects={1,2} ordered=false msg=\"m\"\nrule 2: objects={3} ordered=false msg=\"n\"\n";
    let rb = parse_rule_file(text, ValueMode::Relaxed).unwrap();
    assert_eq!(rb.distinct_predicates(), 2);
    let hits = match_objects(&records("GET / HTTP/1.1\r\nHost: abcd\r\n\r\n"), &rb);
    let objects: Vec<u32> = hits.iter().map(|h| h.object_number).collect();
    assert_eq!(objects, vec![1, 2]);
}

#[test]
fn display_round_trips_through_the_parser() {
    for text in [DEFAULT_RULES, EXAMPLE_RULES] {
        let rb = parse_rule_file(text, ValueMode::Relaxed).unwrap();
        let again = parse_rule_file(rb.source_text(), ValueMode::Relaxed).unwrap();
        let rendered: String = rb
            .objects()
            .map(|o| format!("{o}\n"))
            .chain(rb.rules().map(|r| format!("{r}\n")))
            .collect();
        let reparsed = parse_rule_file(&rendered, ValueMode::Relaxed).unwrap();
        assert_eq!(
            reparsed.objects().collect::<Vec<_>>(),
            again.objects().collect::<Vec<_>>()
        );
        assert_eq!(reparsed.rules().collect::<Vec<_>>(), again.rules().collect::<Vec<_>>());
    }
}

const SECTIONS: [&str; 3] = ["Host", "Cookie", "Referer"];

fn arb_object(n: u32) -> impl Strategy<Value = MatchObject> {
    (
        prop::sample::select(vec![
            MessageLineSpec::Header,
            MessageLineSpec::Exact(MessageLine::RequestHeader),
        ]),
        prop::sample::select(SECTIONS.to_vec()),
        prop_oneof![
            "[ab]{1,2}".prop_map(|v| (Feature::Parameter, Operator::Eq, v)),
            (
                prop::sample::select(vec![Operator::Eq, Operator::Gt, Operator::Lt]),
                0u64..4
            )
                .prop_map(|(op, k)| (Feature::Size, op, k.to_string())),
            prop::sample::select(vec!["^a", "b$", "ab"]).prop_map(|p| (Feature::Regex, Operator::Eq, p.to_string())),
        ],
    )
        .prop_map(
            move |(message_line, section, (feature, operator, content))| MatchObject {
                object_number: n,
                message_line,
                section: section.to_string(),
                feature,
                operator,
                content,
            },
        )
}

fn arb_instance() -> impl Strategy<Value = (Vec<MatchObject>, Vec<Rule>, Vec<FieldRecord>)> {
    (1u32..=4)
        .prop_flat_map(|n| {
            let objects: Vec<_> = (1..=n).map(arb_object).collect();
            let rules = prop::collection::vec((prop::collection::vec(1..=n, 1..4), any::<bool>()), 1..4);
            let records = prop::collection::vec(
                (prop::sample::select(SECTIONS.to_vec()), "[ab]{0,3}")
                    .prop_map(|(s, v)| FieldRecord::new(MessageLine::RequestHeader, s, v)),
                0..7,
            );
            (objects, rules, records)
        })
        .prop_map(|(objects, rules, records)| {
            let rules = rules
                .into_iter()
                .enumerate()
                .map(|(i, (object_list, in_order))| Rule {
                    rule_number: i as u32 + 1,
                    object_list,
                    in_order,
                    message: String::new(),
                })
                .collect();
            (objects, rules, records)
        })
}

proptest! {
    #[test]
    fn triggers_equal_enumeration((objects, rules, records) in arb_instance()) {
        let rb = RuleBase::new(objects.clone(), rules.clone()).unwrap();
        let got: Vec<u32> = interpret(&records, &rb).triggers.iter().map(|t| t.rule_number).collect();
        let want: Vec<u32> = rules.iter().filter(|r| rule_satisfied(r, &objects, &records)).map(|r| r.rule_number).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn hits_are_exactly_the_matching_pairs((objects, rules, records) in arb_instance()) {
        let rb = RuleBase::new(objects.clone(), rules).unwrap();
        let got: Vec<(usize, u32)> = match_objects(&records, &rb).iter().map(|h| (h.record_index, h.object_number)).collect();
        let mut want = Vec::new();
        for (i, r) in records.iter().enumerate() {
            for o in &objects {
                if object_matches(o, r) {
                    want.push((i, o.object_number));
                }
            }
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn appending_records_never_untriggers((objects, rules, records) in arb_instance(), extra in "[ab]{0,3}") {
        let rb = RuleBase::new(objects, rules).unwrap();
        let before: Vec<u32> = interpret(&records, &rb).triggers.iter().map(|t| t.rule_number).collect();
        let mut more = records.clone();
        more.push(FieldRecord::new(MessageLine::RequestHeader, "Cookie", extra));
        let after: Vec<u32> = interpret(&more, &rb).triggers.iter().map(|t| t.rule_number).collect();
        prop_assert!(before.iter().all(|r| after.contains(r)));
    }

    #[test]
    fn residual_only_without_triggers((objects, rules, records) in arb_instance()) {
        let rb = RuleBase::new(objects, rules).unwrap();
        let i = interpret(&records, &rb);
        prop_assert_eq!(i.residual.is_some(), i.triggers.is_empty());
        if let Some(miss) = i.residual {
            prop_assert_eq!(miss.records, records);
        }
    }
}
