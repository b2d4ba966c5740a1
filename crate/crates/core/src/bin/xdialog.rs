use std::error::Error;
use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::json;

use xdialog_core::analytics::{conformance, ending_distribution, occurrence_histogram_named, AnalyticsReport, Group};
use xdialog_core::corpus::{parse_corpus, to_trace, Corpus};
use xdialog_core::protocol::{
    default_protocol, enumerate_traces, load_protocol, validate_trace, Policy, ProtocolDefinition, Sampler, Trace,
};
use xdialog_core::service::{http, SessionStore};

#[derive(Parser)]
#[command(name = "xdialog", version, about = "Explanation dialog protocol, corpus and session tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and segment a corpus, reporting the first error.
    ValidateCorpus {
        file: PathBuf,
        /// Reject unknown codes and fields instead of dropping them.
        #[arg(long)]
        strict: bool,
    },
    /// Print each dialog of a corpus as a JSON line.
    Segment {
        file: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Frequency, mean, histogram, ending and transition tables.
    Stats {
        corpus: PathBuf,
        #[arg(long)]
        by_type: bool,
        /// Output file; `.csv` selects the long CSV format, anything else JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also measure conformance against this protocol file.
        #[arg(long)]
        protocol: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
    },
    /// Ending categories per dialog type.
    Endings {
        corpus: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Occurrence histogram of one code.
    Histogram {
        corpus: PathBuf,
        #[arg(long)]
        code: String,
        /// `ALL` or a dialog type 1-6.
        #[arg(long, default_value = "ALL")]
        group: String,
    },
    /// Replay every dialog against a protocol.
    Conformance {
        corpus: PathBuf,
        /// Protocol file; the built-in protocol when omitted.
        #[arg(long)]
        protocol: Option<PathBuf>,
        #[arg(long)]
        by_type: bool,
        #[arg(long)]
        strict: bool,
    },
    /// Run the session HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Additional protocol files to register.
        #[arg(long)]
        protocol: Vec<PathBuf>,
        /// Directory for session event logs; sessions are kept in memory only when omitted.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Print the built-in protocol, or validate and print a protocol file.
    Protocol { file: Option<PathBuf> },
    /// Validate a JSON-lines trace.
    CheckTrace {
        trace: PathBuf,
        #[arg(long)]
        protocol: Option<PathBuf>,
    },
    /// List every accepted trace up to a length, one JSON line each.
    Enumerate {
        length: usize,
        #[arg(long)]
        protocol: Option<PathBuf>,
    },
    /// Draw dialogs under the uniform policy, one JSON line each.
    Sample {
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        protocol: Option<PathBuf>,
    },
}

type CliResult = Result<(), Box<dyn Error>>;

fn read_protocol(path: Option<&Path>) -> Result<ProtocolDefinition, Box<dyn Error>> {
    match path {
        None => Ok(default_protocol()),
        Some(p) => {
            let text = fs::read_to_string(p)?;
            load_protocol(&text).map_err(|e| format!("{}: {}: {e}", p.display(), e.code()).into())
        }
    }
}

fn read_corpus(path: &Path, strict: bool) -> Result<Corpus, Box<dyn Error>> {
    let text = fs::read_to_string(path)?;
    let corpus = parse_corpus(&text, strict).map_err(|e| format!("{}: {}: {e}", path.display(), e.code()))?;
    for w in &corpus.warnings {
        eprintln!("warning: {w}");
    }
    Ok(corpus)
}

fn print_json(out: &mut impl Write, value: &impl serde::Serialize) -> io::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("serializes"))
}

fn run(cli: Cli) -> CliResult {
    let mut w = io::stdout().lock();
    match cli.command {
        Command::ValidateCorpus { file, strict } => {
            let corpus = read_corpus(&file, strict)?;
            let counts = corpus.per_type_counts();
            print_json(
                &mut w,
                &json!({
                    "corpus_id": corpus.corpus_id,
                    "transcripts": corpus.transcripts.len(),
                    "dialogs": corpus.total_dialogs(),
                    "dialogs_per_type": (1..=6).map(|t| (t.to_string(), counts[t - 1])).collect::<std::collections::BTreeMap<_, _>>(),
                    "unassigned_utterances": corpus.unassigned.len(),
                    "warnings": corpus.warnings,
                }),
            )?;
        }
        Command::Segment { file, strict } => {
            let corpus = read_corpus(&file, strict)?;
            for d in &corpus.dialogs {
                let codes: Vec<&str> = d.code_events.iter().map(|e| e.code.as_str()).collect();
                let line = json!({
                    "transcript": d.transcript_id,
                    "ordinal": d.ordinal,
                    "dialog_type": d.dialog_type,
                    "span": [d.span.0, d.span.1],
                    "codes": codes,
                    "moves": to_trace(d)?.kinds(),
                });
                writeln!(w, "{line}")?;
            }
        }
        Command::Stats { corpus, by_type, out, protocol, strict } => {
            let corpus = read_corpus(&corpus, strict)?;
            let protocol = protocol.as_deref().map(|p| read_protocol(Some(p))).transpose()?;
            let report = AnalyticsReport::build(&corpus, by_type, protocol.as_ref())?;
            match out {
                Some(path) if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => {
                    fs::write(&path, report.to_csv())?
                }
                Some(path) => fs::write(&path, report.to_json_pretty())?,
                None => write!(w, "{}", report.to_json_pretty())?,
            }
        }
        Command::Endings { corpus, strict } => {
            let corpus = read_corpus(&corpus, strict)?;
            writeln!(
                w,
                "{:<6} {:>8} {:>12} {:>22} {:>22} {:>8}",
                "group", "dialogs", "EXPLANATION", "EXPLAINEE_AFFIRMATION", "EXPLAINER_AFFIRMATION", "OTHER"
            )?;
            for (g, dist) in ending_distribution(&corpus, true) {
                let r: Vec<u64> = dist.rows.values().copied().collect();
                writeln!(
                    w,
                    "{:<6} {:>8} {:>12} {:>22} {:>22} {:>8}",
                    g.to_string(),
                    dist.total(),
                    r[0],
                    r[1],
                    r[2],
                    r[3]
                )?;
            }
        }
        Command::Histogram { corpus, code, group } => {
            let corpus = read_corpus(&corpus, false)?;
            let group: Group = group.parse()?;
            let h = occurrence_histogram_named(&corpus, &code, group).map_err(|e| format!("{}: {e}", e.code()))?;
            print_json(&mut w, &json!({"code": h.code, "group": group, "buckets": h.buckets, "mode": h.mode}))?;
        }
        Command::Conformance { corpus, protocol, by_type, strict } => {
            let corpus = read_corpus(&corpus, strict)?;
            let protocol = read_protocol(protocol.as_deref())?;
            print_json(&mut w, &conformance(&corpus, &protocol, by_type)?)?;
        }
        Command::Serve { port, host, protocol, data_dir } => {
            let protocols = protocol.iter().map(|p| read_protocol(Some(p))).collect::<Result<Vec<_>, _>>()?;
            let store = match data_dir {
                Some(dir) => SessionStore::open(dir, protocols)?,
                None => {
                    let s = SessionStore::in_memory();
                    protocols.into_iter().for_each(|p| s.register_protocol(p));
                    s
                }
            };
            let addr: SocketAddr = format!("{host}:{port}").parse()?;
            let app = http::router(Arc::new(store));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                axum::serve(listener, app).await
            })?;
        }
        Command::Protocol { file } => write!(w, "{}", read_protocol(file.as_deref())?.to_json_pretty())?,
        Command::CheckTrace { trace, protocol } => {
            let protocol = read_protocol(protocol.as_deref())?;
            let text = fs::read_to_string(trace)?;
            // one move per line, or one whole trace per line as `sample` writes
            let traces = if text.trim_start().starts_with('[') {
                let lines = text.lines().filter(|l| !l.trim().is_empty());
                lines.map(serde_json::from_str).collect::<Result<Vec<Trace>, _>>()?
            } else {
                vec![Trace::from_jsonl(&text)?]
            };
            let mut refused = None;
            for trace in &traces {
                let verdict = validate_trace(&protocol, trace);
                if traces.len() == 1 {
                    print_json(&mut w, &verdict)?;
                } else {
                    writeln!(w, "{}", serde_json::to_string(&verdict)?)?;
                }
                if !verdict.is_accepted() {
                    refused.get_or_insert(verdict.label());
                }
            }
            if let Some(label) = refused {
                return Err(label.into());
            }
        }
        Command::Enumerate { length, protocol } => {
            let protocol = read_protocol(protocol.as_deref())?;
            for steps in enumerate_traces(&protocol, length)? {
                writeln!(w, "{}", serde_json::to_string(&steps)?)?;
            }
        }
        Command::Sample { count, seed, protocol } => {
            let protocol = read_protocol(protocol.as_deref())?;
            let policy = Policy::uniform(&protocol);
            let mut sampler = Sampler::new(&protocol, &policy, seed)?;
            for _ in 0..count {
                writeln!(w, "{}", serde_json::to_string(&sampler.next_dialog())?)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
