use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::ingest::{dispatch, parse_header, ContentEncoding, Direction, FieldRecord, RawCapture};
use crate::payload::PayloadAnalyzer;
use crate::rules::{interpret, parse_rule_file, RuleBase, ValueMode};

/// Sections and features the synthetic rule-bases draw from. Distinct
/// predicates run out at `VOCABULARY_SIZE`; larger rule-bases repeat them
/// and identical predicates are merged.
const SECTIONS: [(&str, &str); 10] = [
    ("request-line", "uri"),
    ("request-line", "method"),
    ("request-line", "version"),
    ("header", "host"),
    ("header", "user-agent"),
    ("header", "accept"),
    ("header", "cookie"),
    ("header", "referer"),
    ("header", "accept-language"),
    ("header", "connection"),
];
const VARIANTS: usize = 8;
pub const VOCABULARY_SIZE: usize = SECTIONS.len() * VARIANTS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRow {
    /// Object count or payload bytes.
    pub size: usize,
    /// Median time per transaction, microseconds.
    pub micros: f64,
}

pub fn to_csv(size_column: &str, rows: &[BenchRow]) -> String {
    let mut out = format!("{size_column},time_us\n");
    for r in rows {
        let _ = writeln!(out, "{},{:.3}", r.size, r.micros);
    }
    out
}

fn vocabulary_object(n: usize, i: usize) -> String {
    let i = i % VOCABULARY_SIZE;
    let (ml, section) = SECTIONS[i % SECTIONS.len()];
    let k = i / SECTIONS.len();
    let body = match k % 4 {
        0 => format!("regex = \"(?i)(probe{k}|scan{k})[a-z0-9]*\""),
        1 => format!("size > {}", 900 + k),
        2 => format!("occurrence > {}", k + 1),
        _ => format!("regex = \"(%[0-9a-f]{{2}}){{{}}}x{k}\"", k + 2),
    };
    format!("object {n}: {ml} {section} {body}\n")
}

/// Rule-base with `n` objects cycling through the vocabulary, grouped four
/// to an unordered rule.
pub fn synthetic_rulebase(n: usize) -> RuleBase {
    let mut text = String::new();
    for i in 0..n {
        text.push_str(&vocabulary_object(i + 1, i));
    }
    for (r, chunk) in (1..=n).collect::<Vec<_>>().chunks(4).enumerate() {
        let list: Vec<String> = chunk.iter().map(usize::to_string).collect();
        let _ = writeln!(
            text,
            "rule {}: objects={{{}}} ordered=false msg=\"bench\"",
            r + 1,
            list.join(",")
        );
    }
    parse_rule_file(&text, ValueMode::Relaxed).expect("synthetic rule-base is valid")
}

/// Fixed request set replayed by the object benchmark.
pub fn bench_transactions() -> Vec<Vec<FieldRecord>> {
    let requests = [
        "GET /index.html HTTP/1.1\r\nHost: www.example.com\r\nUser-Agent: Mozilla/5.0 (X11; Linux x86_64)\r\nAccept: text/html,application/xhtml+xml\r\nAccept-Language: en-US,en;q=0.5\r\nConnection: keep-alive\r\n\r\n",
        "GET /search?q=rust+http+parser&page=2 HTTP/1.1\r\nHost: www.example.com\r\nUser-Agent: Mozilla/5.0\r\nAccept: */*\r\nCookie: session=ab12cd34; theme=dark\r\nReferer: http://www.example.com/index.html\r\n\r\n",
        "POST /login HTTP/1.1\r\nHost: www.example.com\r\nUser-Agent: curl/8.0\r\nContent-Type: application/x-www-form-urlencoded\r\nContent-Length: 27\r\n\r\nuser=alice&password=secret1",
        "GET /static/app.js?v=%20%20%20 HTTP/1.0\r\nHost: cdn.example.com\r\nAccept: application/javascript\r\nConnection: close\r\n\r\n",
    ];
    requests
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            let txn = dispatch(&RawCapture {
                timestamp: i as f64,
                direction: Direction::Request,
                session_id: "bench".into(),
                bytes: r.as_bytes().to_vec(),
            })
            .ok()?;
            Some(parse_header(&txn).0)
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

const REPEATS: usize = 200;

/// Per-request interpretation time for rule-bases of each size; median of
/// `trials` runs, each replaying the request set `REPEATS` times.
pub fn bench_objects(counts: &[usize], trials: usize) -> Vec<BenchRow> {
    let txns = bench_transactions();
    counts
        .iter()
        .map(|&n| {
            let rb = synthetic_rulebase(n);
            let samples = (0..trials.max(1))
                .map(|_| {
                    let start = Instant::now();
                    for _ in 0..REPEATS {
                        for t in &txns {
                            std::hint::black_box(interpret(std::hint::black_box(t), &rb));
                        }
                    }
                    start.elapsed().as_secs_f64() * 1e6 / (REPEATS * txns.len()) as f64
                })
                .collect();
            BenchRow {
                size: n,
                micros: median(samples),
            }
        })
        .collect()
}

/// HTML document of exactly `size` bytes with markup, links, and scripts.
pub fn synthetic_page(size: usize) -> Vec<u8> {
    let block = "<div class=\"item\"><a href=\"/p/1\">item</a> <img src=\"/i/1.png\" alt=\"x\"> text text text</div>\n<script>var n = 0; for (var i = 0; i < 10; i++) { n += i; }</script>\n";
    let mut page = String::from("<html><head><title>bench</title></head><body>\n");
    while page.len() < size {
        page.push_str(block);
    }
    let mut bytes = page.into_bytes();
    bytes.truncate(size);
    bytes
}

/// Payload analysis time per document size; median of `trials` runs.
pub fn bench_payload(sizes: &[usize], trials: usize) -> Vec<BenchRow> {
    let analyzer = PayloadAnalyzer::default();
    sizes
        .iter()
        .map(|&size| {
            let page = synthetic_page(size);
            let reps = (1_000_000 / size.max(1)).clamp(1, 200);
            let samples = (0..trials.max(1))
                .map(|_| {
                    let start = Instant::now();
                    for _ in 0..reps {
                        std::hint::black_box(analyzer.analyze(&page, ContentEncoding::Identity, Some("text/html")));
                    }
                    start.elapsed().as_secs_f64() * 1e6 / reps as f64
                })
                .collect();
            BenchRow {
                size,
                micros: median(samples),
            }
        })
        .collect()
}
