//! Acceptance gate: one PASS/FAIL line per criterion. Exits non-zero if any
//! hard criterion fails; the bench trend only warns.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{mom_oracle, object_matches, repo_path, rule_satisfied};
use fasids::fuzzy::{
    and, defuzzify_mom, evaluate_fam, fuzzify, not, or, ConsequentScale, FamMatrix, LabelStrengths, LinguisticVariable,
    COUNT_LABELS, DEFAULT_BREAKPOINTS, INTERVAL_LABELS,
};
use fasids::ingest::ContentEncoding;
use fasids::ingest::{
    dispatch, parse_header, read_capture, serialize_records, CaptureFormat, Direction, FieldRecord, MessageLine,
    RawCapture,
};
use fasids::payload::{PayloadAlertKind, PayloadAnalyzer, SignatureTable};
use fasids::pipeline::{bench_objects, run_pipeline, AlertSource, Detector, Severity, Stages};
use fasids::rules::{
    evaluate_rules, interpret, parse_rule_file, Feature, MatchObject, MessageLineSpec, ObjectHit, Operator, Rule,
    RuleBase, ValueMode, EXAMPLE_RULES,
};

enum Outcome {
    Pass(String),
    Fail(String),
    Warn(String),
}

fn check(failures: &mut Vec<String>, detail: String) {
    failures.push(detail);
}

fn verdict(failures: Vec<String>, pass: String) -> Outcome {
    if failures.is_empty() {
        Outcome::Pass(pass)
    } else {
        let shown: Vec<_> = failures.iter().take(5).cloned().collect();
        Outcome::Fail(format!("{} problem(s): {}", failures.len(), shown.join("; ")))
    }
}

// 1. All 25 one-hot label pairs reproduce the grid cell by name.
fn fam_fidelity() -> Outcome {
    let text = std::fs::read_to_string(repo_path("fuzzy/default.fam")).unwrap();
    // The grid read independently: first line is the column header.
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').map(str::trim).collect())
        .collect();
    let fam = FamMatrix::bundled();
    let mut failures = Vec::new();
    for r in 0..5 {
        for c in 0..5 {
            let mut mu_row = [0.0; 5];
            let mut mu_col = [0.0; 5];
            mu_row[r] = 1.0;
            mu_col[c] = 1.0;
            let fired: Vec<_> = evaluate_fam(&mu_row, &mu_col, &fam).nonzero().collect();
            let expected = rows[r + 1][c + 1];
            let (row_label, col_label) = (rows[r + 1][0], rows[0][c + 1]);
            match fired.as_slice() {
                [(label, s)] if label.as_str() == expected && *s == 1.0 => {}
                other => check(
                    &mut failures,
                    format!("({row_label}, {col_label}) gave {other:?}, grid says {expected}"),
                ),
            }
        }
    }
    verdict(failures, "25/25 cells".into())
}

// 2. The sample GET request serializes to the 9-line listing.
fn parser_fidelity() -> Outcome {
    let raw = std::fs::read(repo_path("corpus/sample_get.http")).unwrap();
    let expected = std::fs::read_to_string(repo_path("corpus/sample_get.records")).unwrap();
    let txn = dispatch(&RawCapture {
        timestamp: 0.0,
        direction: Direction::Request,
        session_id: "sample".into(),
        bytes: raw,
    })
    .unwrap();
    let (records, _) = parse_header(&txn);
    let got = serialize_records(&records, true);
    if got == expected {
        Outcome::Pass(format!("{} lines byte-identical", got.lines().count()))
    } else {
        let diff = got
            .lines()
            .zip(expected.lines())
            .find(|(a, b)| a != b)
            .map(|(a, b)| format!("got `{a}`, want `{b}`"))
            .unwrap_or_else(|| "line count differs".into());
        Outcome::Fail(diff)
    }
}

fn hits(stream: &[(u32, usize)]) -> Vec<ObjectHit> {
    stream
        .iter()
        .map(|&(object_number, record_index)| ObjectHit {
            object_number,
            record_index,
            matched_value: String::new(),
        })
        .collect()
}

const VALUES: [&str; 5] = ["a", "ab", "abc", "b", "ba"];
const SECTIONS: [&str; 3] = ["Host", "Cookie", "Method"];
const LINES: [MessageLine; 3] = [
    MessageLine::RequestLine,
    MessageLine::RequestHeader,
    MessageLine::GenericHeader,
];
const PATTERNS: [&str; 4] = ["^a", "b$", "c", "^b"];

fn random_instance(rng: &mut StdRng) -> (Vec<MatchObject>, Vec<Rule>, Vec<FieldRecord>) {
    let n_obj = rng.random_range(1..=5u32);
    let objects: Vec<MatchObject> = (1..=n_obj)
        .map(|n| {
            let (feature, operator, content) = match rng.random_range(0..3) {
                0 => (
                    Feature::Parameter,
                    Operator::Eq,
                    VALUES[rng.random_range(0..5)].to_string(),
                ),
                1 => (
                    Feature::Size,
                    [Operator::Eq, Operator::Gt, Operator::Lt][rng.random_range(0..3)],
                    rng.random_range(0..4).to_string(),
                ),
                _ => (
                    Feature::Regex,
                    Operator::Eq,
                    PATTERNS[rng.random_range(0..4)].to_string(),
                ),
            };
            let message_line = match rng.random_range(0..4) {
                0 => MessageLineSpec::Header,
                1 => MessageLineSpec::StartLine,
                _ => MessageLineSpec::Exact(LINES[rng.random_range(0..3)]),
            };
            let section = SECTIONS[rng.random_range(0..3)];
            let section = if rng.random_bool(0.3) {
                section.to_ascii_lowercase()
            } else {
                section.to_string()
            };
            MatchObject {
                object_number: n,
                message_line,
                section,
                feature,
                operator,
                content,
            }
        })
        .collect();
    let rules = (1..=rng.random_range(1..=4u32))
        .map(|r| Rule {
            rule_number: r,
            object_list: (0..rng.random_range(1..=4))
                .map(|_| rng.random_range(1..=n_obj))
                .collect(),
            in_order: rng.random_bool(0.5),
            message: format!("rule {r}"),
        })
        .collect();
    let records = (0..rng.random_range(0..=8))
        .map(|_| {
            FieldRecord::new(
                LINES[rng.random_range(0..3)],
                SECTIONS[rng.random_range(0..3)],
                VALUES[rng.random_range(0..5)],
            )
        })
        .collect();
    (objects, rules, records)
}

// 3. Example rule shapes on hand-built streams, then random instances
// against the brute-force enumerator.
fn rule_semantics() -> Outcome {
    let rb = parse_rule_file(EXAMPLE_RULES, ValueMode::Relaxed).unwrap();
    // (hit stream as (object, record) pairs, rules expected to trigger)
    type Case = (&'static [(u32, usize)], &'static [u32]);
    let cases: [Case; 12] = [
        (&[(1, 0), (3, 1), (4, 2)], &[1]),
        (&[(4, 0), (3, 1), (1, 2)], &[]),
        (&[(1, 0), (3, 0), (4, 1)], &[]),
        (&[(1, 0), (2, 1), (3, 2), (2, 3), (4, 4)], &[1]),
        (&[(2, 0), (1, 1), (1, 2), (1, 3), (1, 4)], &[2]),
        (&[(1, 0), (1, 1), (2, 2), (1, 3)], &[]),
        (&[(1, 0), (1, 1), (1, 2), (1, 3), (1, 4), (2, 5)], &[2]),
        (&[(3, 0), (6, 1), (4, 2)], &[3, 4]),
        (&[(6, 0), (3, 1), (4, 2)], &[4]),
        (&[], &[]),
        (&[(6, 0)], &[4]),
        (&[(1, 0), (3, 1), (6, 2), (4, 3)], &[1, 3, 4]),
    ];
    let mut failures = Vec::new();
    for (i, (stream, expected)) in cases.iter().enumerate() {
        let got: Vec<u32> = evaluate_rules(&hits(stream), &rb)
            .iter()
            .map(|t| t.rule_number)
            .collect();
        if got != *expected {
            check(
                &mut failures,
                format!("case {}: triggered {got:?}, want {expected:?}", i + 1),
            );
        }
    }

    let mut rng = StdRng::seed_from_u64(0x5eed_0003);
    for instance in 0..1000 {
        let (objects, rules, records) = random_instance(&mut rng);
        let rb = RuleBase::new(objects.clone(), rules.clone()).unwrap();
        let interp = interpret(&records, &rb);
        let got: BTreeSet<u32> = interp.triggers.iter().map(|t| t.rule_number).collect();
        let want: BTreeSet<u32> = rules
            .iter()
            .filter(|r| rule_satisfied(r, &objects, &records))
            .map(|r| r.rule_number)
            .collect();
        if got != want {
            check(
                &mut failures,
                format!("random instance {instance}: got {got:?}, enumerator {want:?}"),
            );
            continue;
        }
        for t in &interp.triggers {
            let rule = &rules[t.rule_number as usize - 1];
            let sound = t.witness.len() == rule.object_list.len()
                && t.witness.iter().all(|h| {
                    let o = &objects[h.object_number as usize - 1];
                    object_matches(o, &records[h.record_index])
                })
                && (!rule.in_order
                    || (t
                        .witness
                        .iter()
                        .map(|h| h.object_number)
                        .eq(rule.object_list.iter().copied())
                        && t.witness.windows(2).all(|w| w[0].record_index < w[1].record_index)));
            if !sound {
                check(
                    &mut failures,
                    format!("random instance {instance}: unsound witness for rule {}", t.rule_number),
                );
            }
        }
    }
    verdict(failures, "12/12 cases, 1000/1000 random instances agree".into())
}

// 4. Partition of unity, operator laws, MoM against a 10x grid.
fn fuzzy_math() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = StdRng::seed_from_u64(0x5eed_0004);
    for (name, labels) in [("x", COUNT_LABELS), ("t", INTERVAL_LABELS)] {
        let var = LinguisticVariable::new(name, labels, DEFAULT_BREAKPOINTS).unwrap();
        for i in 0..10_000 {
            let u = if i < 1001 {
                i as f64 / 1000.0
            } else {
                rng.random::<f64>()
            };
            let sum: f64 = fuzzify(u, &var).iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                check(&mut failures, format!("{name}: memberships at {u} sum to {sum}"));
            }
        }
    }
    for _ in 0..1000 {
        let (a, b, c): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        let laws = [
            ("and commutes", and(a, b) == and(b, a)),
            ("or commutes", or(a, b) == or(b, a)),
            ("and associates", and(and(a, b), c) == and(a, and(b, c))),
            ("or associates", or(or(a, b), c) == or(a, or(b, c))),
            ("and identity", and(a, 1.0) == a),
            ("or identity", or(a, 0.0) == a),
            ("idempotence", and(a, a) == a && or(a, a) == a),
            ("absorption", and(a, or(a, b)) == a && or(a, and(a, b)) == a),
            ("distributes", and(a, or(b, c)) == or(and(a, b), and(a, c))),
            ("involution", (not(not(a)) - a).abs() < 1e-12),
            ("De Morgan", (not(and(a, b)) - or(not(a), not(b))).abs() < 1e-12),
        ];
        for (law, ok) in laws {
            if !ok {
                check(&mut failures, format!("{law} fails at ({a}, {b}, {c})"));
            }
        }
    }
    let scale = ConsequentScale::default();
    for i in 0..500 {
        let mut s = [0.0; 4];
        for v in s.iter_mut() {
            if rng.random_bool(0.6) {
                // coarse values make ties between labels common
                *v = if rng.random_bool(0.3) {
                    0.5
                } else {
                    rng.random_range(0.01..=1.0)
                };
            }
        }
        if s.iter().all(|&v| v == 0.0) {
            s[i % 4] = 0.7;
        }
        let got = defuzzify_mom(&LabelStrengths(s), &scale, 1001).score;
        let want = mom_oracle(&s, &scale.anchors, 10_001).unwrap();
        if (got - want).abs() > 1e-3 {
            check(&mut failures, format!("MoM {s:?}: {got} vs oracle {want}"));
        }
    }
    verdict(
        failures,
        "20000 partition samples, 1000 operator triples, 500 MoM maps".into(),
    )
}

// 5. One page per signature slot; the benign pages stay quiet.
fn signature_coverage() -> Outcome {
    let analyzer = PayloadAnalyzer::default();
    let table = SignatureTable::default();
    let mut failures = Vec::new();
    for entry in &table.entries {
        let page = format!(
            "<html><head><title>t</title></head><body><p>comment</p><{} {}=\"javascript:alert(document.cookie)\">text</body></html>",
            entry.tag, entry.attribute
        );
        let report = analyzer.analyze(page.as_bytes(), ContentEncoding::Identity, Some("text/html"));
        let tag_alerts = report
            .alerts
            .iter()
            .filter(|a| a.kind == PayloadAlertKind::TagAttributeInjection)
            .count();
        if tag_alerts != 1 {
            check(
                &mut failures,
                format!("{} {}: {tag_alerts} tag-attribute alerts", entry.tag, entry.attribute),
            );
        }
    }
    let mut benign = 0;
    for dir_entry in std::fs::read_dir(repo_path("corpus/benign_pages")).unwrap() {
        let path = dir_entry.unwrap().path();
        let body = std::fs::read(&path).unwrap();
        benign += 1;
        let report = analyzer.analyze(&body, ContentEncoding::Identity, Some("text/html"));
        if !report.alerts.is_empty() {
            check(&mut failures, format!("{} raised {:?}", path.display(), report.alerts));
        }
    }
    if table.entries.len() != 13 {
        check(
            &mut failures,
            format!("signature table has {} slots", table.entries.len()),
        );
    }
    verdict(
        failures,
        format!("{} attack pages, {benign} benign pages clean", table.entries.len()),
    )
}

// 6. Miss-gate exclusivity and fuzzy-only brute-force detection.
fn pipeline_gating() -> Outcome {
    let mut failures = Vec::new();
    let mut detector = Detector::default();
    let mixed = read_capture(&repo_path("corpus/mixed.jsonl"), CaptureFormat::Jsonl).unwrap();
    let report = run_pipeline(&mixed, &detector);
    let flagged = report.flagged();
    if !flagged.is_disjoint(&report.folded) {
        check(
            &mut failures,
            format!(
                "flagged transactions fed the fuzzy stage: {:?}",
                flagged.intersection(&report.folded)
            ),
        );
    }
    if flagged.is_empty() || report.folded.is_empty() {
        check(
            &mut failures,
            "mixed corpus should have both flagged and folded transactions".into(),
        );
    }
    let accounted = flagged.len() + report.folded.len() + report.summary.rejected;
    if accounted != report.summary.transactions {
        check(
            &mut failures,
            format!(
                "{accounted} of {} transactions accounted for",
                report.summary.transactions
            ),
        );
    }

    let trace = read_capture(&repo_path("corpus/scenarios/brute_force.jsonl"), CaptureFormat::Jsonl).unwrap();
    let strong = |stages: Stages, detector: &mut Detector| {
        detector.stages = stages;
        run_pipeline(&trace, detector)
            .alerts
            .into_iter()
            .filter(|a| a.severity >= Severity::Hp)
            .collect::<Vec<_>>()
    };
    let without = strong(Stages::HEADER_PAYLOAD, &mut detector);
    let with = strong(Stages::ALL, &mut detector);
    if !without.is_empty() {
        check(
            &mut failures,
            format!("brute force flagged without the fuzzy stage: {without:?}"),
        );
    }
    let fuzzy: Vec<_> = with
        .iter()
        .filter(|a| a.source == AlertSource::Fuzzy && a.id == "brute_force")
        .collect();
    match fuzzy.as_slice() {
        [a] => {
            if failures.is_empty() {
                return Outcome::Pass(format!(
                    "{} flagged / {} folded disjoint; brute force {} only with fuzzy",
                    flagged.len(),
                    report.folded.len(),
                    a.message
                ));
            }
        }
        other => check(
            &mut failures,
            format!("expected one brute_force alert >= HP, got {other:?}"),
        ),
    }
    verdict(failures, String::new())
}

// 7. Marginal cost per object flattens past the vocabulary size.
fn bench_trend() -> Outcome {
    let rows = bench_objects(&[20, 40, 80, 160, 320], 3);
    let t = |n: usize| rows.iter().find(|r| r.size == n).unwrap().micros;
    let below = (t(80) - t(20)) / 60.0;
    let above = (t(320) - t(80)) / 240.0;
    let table: Vec<String> = rows.iter().map(|r| format!("{}:{:.2}us", r.size, r.micros)).collect();
    let detail = format!(
        "marginal {below:.4} us/object below 80, {above:.4} above ({})",
        table.join(" ")
    );
    if above < below {
        Outcome::Pass(detail)
    } else {
        Outcome::Warn(detail)
    }
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("FAM fidelity", Duration::from_secs(1), fam_fidelity),
        ("parser fidelity", Duration::from_secs(1), parser_fidelity),
        ("rule semantics", Duration::from_secs(30), rule_semantics),
        ("fuzzy math", Duration::from_secs(30), fuzzy_math),
        ("signature coverage", Duration::from_secs(5), signature_coverage),
        ("pipeline gating", Duration::from_secs(10), pipeline_gating),
        ("bench trend", Duration::from_secs(120), bench_trend),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let timing = format!("{:.2}s, limit {}s", took.as_secs_f64(), limit.as_secs());
        let (status, detail) = match outcome {
            Outcome::Pass(d) if took <= limit => ("PASS", d),
            Outcome::Pass(d) => ("FAIL", format!("{d}; over time limit")),
            Outcome::Warn(d) => ("WARN", format!("{d}; soft check")),
            Outcome::Fail(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {} {name}: {status} ({timing}) {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
