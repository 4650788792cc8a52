use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fasids::fuzzy::Consequent;
use fasids::ingest::{dispatch, parse_header, CaptureFormat};
use fasids::pipeline::{self, bench, run_pipeline, PipelineError, RunConfig, Stages};
use fasids::rules::ValueMode;

#[derive(Parser)]
#[command(
    name = "fasids",
    version,
    about = "HTTP misuse detection with header rules, payload scanning, and fuzzy frequency analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a capture and write alerts as JSON lines.
    Run(RunArgs),
    /// Print the field records of every message in a capture.
    Parse(InputArgs),
    /// Timing benchmarks, written as CSV.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Detection and false-positive rates over a labeled corpus, as CSV.
    Report {
        /// Directory of scenario captures with a labels.txt.
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// CSV destination (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InputArgs {
    /// JSONL capture file or directory of raw messages.
    #[arg(long)]
    input: PathBuf,
    /// Capture format (default: raw for directories, jsonl for files).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write record names as `Request_...` and `generic-header_...` for every header.
    #[arg(long)]
    legacy_record_names: bool,
}

#[derive(Args)]
struct ConfigArgs {
    /// Header rule file (default: bundled rules).
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Tag/attribute signature file (default: bundled table).
    #[arg(long)]
    signatures: Option<PathBuf>,
    /// Script pattern file (default: bundled patterns).
    #[arg(long)]
    script_patterns: Option<PathBuf>,
    /// Fuzzy stage TOML config (default: bundled config).
    #[arg(long)]
    fuzzy: Option<PathBuf>,
    /// Lex rule values exactly as the grammar states.
    #[arg(long)]
    strict_rules: bool,
    /// Lowest fuzzy verdict that raises an alert: LP, HP, or Intrusive.
    #[arg(long)]
    fuzzy_threshold: Option<Consequent>,
    /// Smallest literal loop bound reported as a DoS loop.
    #[arg(long)]
    loop_bound: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Alert sink (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the run summary as JSON to this file.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Skip the header rule stage.
    #[arg(long)]
    no_header: bool,
    /// Skip payload scanning.
    #[arg(long)]
    no_payload: bool,
    /// Skip the fuzzy stage.
    #[arg(long)]
    no_fuzzy: bool,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Rule interpretation time against rule-base size.
    Objects {
        #[arg(long, value_delimiter = ',', default_value = "20,40,80,160,320")]
        counts: Vec<usize>,
        /// Runs per size; the median is reported.
        #[arg(long, default_value_t = 3)]
        trials: usize,
        /// CSV destination (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Payload analysis time against document size.
    Payload {
        #[arg(long, value_delimiter = ',', default_value = "1024,4096,16384,65536,262144")]
        sizes: Vec<usize>,
        /// Runs per size; the median is reported.
        #[arg(long, default_value_t = 3)]
        trials: usize,
        /// CSV destination (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Raw,
    Jsonl,
}

impl From<Format> for CaptureFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Raw => CaptureFormat::Raw,
            Format::Jsonl => CaptureFormat::Jsonl,
        }
    }
}

fn run_config(input: Option<&InputArgs>, config: &ConfigArgs) -> RunConfig {
    RunConfig {
        rules: config.rules.clone(),
        signatures: config.signatures.clone(),
        script_patterns: config.script_patterns.clone(),
        fuzzy: config.fuzzy.clone(),
        input: input.map(|i| i.input.clone()).unwrap_or_default(),
        format: input.and_then(|i| i.format).map(Into::into),
        legacy_record_names: input.is_some_and(|i| i.legacy_record_names),
        value_mode: if config.strict_rules {
            ValueMode::Strict
        } else {
            ValueMode::Relaxed
        },
        alert_threshold: config.fuzzy_threshold,
        loop_bound_threshold: config.loop_bound,
        ..RunConfig::default()
    }
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>, PipelineError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| PipelineError::Io(p.clone(), e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_all(path: Option<&PathBuf>, text: &str) -> Result<(), PipelineError> {
    let mut out = sink(path)?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| PipelineError::Io(path.cloned().unwrap_or_else(|| "<stdout>".into()), e))
}

/// Exit status: 0 clean, 1 alerts raised, 2 configuration or I/O error.
fn execute(cli: Cli) -> Result<u8, PipelineError> {
    match cli.command {
        Command::Run(args) => {
            let mut config = run_config(Some(&args.input), &args.config);
            config.stages = Stages {
                header: !args.no_header,
                payload: !args.no_payload,
                fuzzy: !args.no_fuzzy,
            };
            config.out = args.out.clone();
            let detector = config.detector()?;
            let capture = config.capture()?;
            let report = run_pipeline(&capture, &detector);
            for d in &report.diagnostics {
                eprintln!("warning: {d}");
            }
            let mut out = sink(args.out.as_ref())?;
            report
                .write_jsonl(&mut out)
                .map_err(|e| PipelineError::Io(args.out.clone().unwrap_or_else(|| "<stdout>".into()), e))?;
            let summary = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
            match &args.summary {
                Some(p) => write_all(Some(p), &(summary + "\n"))?,
                None => eprintln!("{summary}"),
            }
            Ok(u8::from(!report.alerts.is_empty()))
        }
        Command::Parse(args) => {
            let config = run_config(Some(&args), &ConfigArgs::none());
            let capture = config.capture()?;
            let mut text = String::new();
            for entry in capture.entries_by_time() {
                text.push_str(&format!("# session {} t={}\n", entry.session_id, entry.timestamp));
                match dispatch(entry) {
                    Ok(txn) => {
                        let (records, violations) = parse_header(&txn);
                        text.push_str(&fasids::ingest::serialize_records(&records, args.legacy_record_names));
                        for v in violations {
                            eprintln!("warning: session `{}`: {v}", txn.session_id);
                        }
                    }
                    Err(v) => eprintln!("warning: session `{}`: {v}", entry.session_id),
                }
            }
            write_all(None, &text)?;
            Ok(0)
        }
        Command::Bench(BenchCommand::Objects { counts, trials, out }) => {
            if counts.contains(&0) {
                return Err(PipelineError::Config("object counts must be positive".into()));
            }
            let rows = bench::bench_objects(&counts, trials);
            write_all(out.as_ref(), &bench::to_csv("n_objects", &rows))?;
            Ok(0)
        }
        Command::Bench(BenchCommand::Payload { sizes, trials, out }) => {
            if sizes.contains(&0) {
                return Err(PipelineError::Config("payload sizes must be positive".into()));
            }
            let rows = bench::bench_payload(&sizes, trials);
            write_all(out.as_ref(), &bench::to_csv("payload_bytes", &rows))?;
            Ok(0)
        }
        Command::Report { corpus, config, out } => {
            let mut detector = run_config(None, &config).detector()?;
            let report = pipeline::corpus_report(&corpus, &mut detector)?;
            for d in &report.diagnostics {
                eprintln!("warning: {d}");
            }
            write_all(out.as_ref(), &report.to_csv())?;
            Ok(0)
        }
    }
}

impl ConfigArgs {
    fn none() -> Self {
        Self {
            rules: None,
            signatures: None,
            script_patterns: None,
            fuzzy: None,
            strict_rules: false,
            fuzzy_threshold: None,
            loop_bound: None,
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
