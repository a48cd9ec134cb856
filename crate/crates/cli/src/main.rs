//! `vakb`: validate, ingest, query and summarize a design knowledge base, or
//! serve it over HTTP.
//!
//! Exit status is 0 on success, 1 when validation found failures and 2 for
//! usage or I/O errors.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use vakb_core::analytics::{self, Property};
use vakb_core::corpus::{import_kb4va, ingest, save_index, Corpus, ManifestEntry, INDEX_FILE_NAME};
use vakb_core::grammar::{parse_spec, ParseMode};
use vakb_core::output::{
    canonical_json, cards, cards_table, histogram_csv, histogram_json, histogram_table, matrix_csv, matrix_json,
    matrix_table, overview_csv, overview_json, overview_table,
};
use vakb_core::query::{filter_query, structural_query, FilterQuery, QueryPattern};
use vakb_core::vocab::{default_vocabulary, Vocabulary};
use vakb_service::{router, serve, shutdown_signal, CorsPolicy, ServiceConfig, DEFAULT_PORT};

const MANIFEST: &str = "manifest.json";
const VOCABULARY: &str = "vocabulary.json";

#[derive(Parser)]
#[command(name = "vakb", version, about = "Knowledge base of visual-analytics design specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check spec files against the grammar and report metrics.
    Validate {
        /// A spec file, or a directory (its manifest entries, else every *.json).
        path: PathBuf,
        /// Treat unknown identifiers as errors.
        #[arg(long)]
        strict: bool,
        /// Vocabulary file replacing the built-in one.
        #[arg(long)]
        vocab: Option<PathBuf>,
    },
    /// Build a persistent index from a corpus directory.
    Ingest {
        dir: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[arg(long, default_value = "strict")]
        mode: ParseMode,
    },
    /// Run a structural pattern or an attribute filter.
    Query {
        #[command(flatten)]
        source: CorpusArgs,
        /// JSON pattern document.
        #[arg(long, conflicts_with = "filter")]
        pattern: Option<PathBuf>,
        /// Filter clause `key=value`; repeat to combine.
        #[arg(long, value_name = "KEY=VALUE")]
        filter: Vec<String>,
        #[arg(long, value_enum, default_value = "ids")]
        format: QueryFormat,
    },
    /// Corpus statistics.
    Stats {
        #[command(subcommand)]
        which: StatsCommand,
        #[command(flatten)]
        source: CorpusArgs,
        #[arg(long, value_enum, default_value = "json", global = true)]
        format: StatsFormat,
    },
    /// Serve the HTTP API (and optionally the web UI).
    Serve {
        #[command(flatten)]
        source: CorpusArgs,
        #[arg(long, env = "VAKB_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, env = "VAKB_HOST", default_value = "127.0.0.1")]
        host: String,
        /// Directory with the built web UI, served at `/`.
        #[arg(long, env = "VAKB_UI_DIR")]
        ui: Option<PathBuf>,
        /// Allowed CORS origin; repeat for several. Any origin when omitted.
        #[arg(long = "cors-origin", conflicts_with = "no_cors")]
        cors_origin: Vec<String>,
        #[arg(long)]
        no_cors: bool,
    },
    /// Convert a KB4VA-style JSON export into a corpus directory.
    Import {
        export: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[arg(long)]
        vocab: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct CorpusArgs {
    /// Corpus directory or saved index file.
    #[arg(long, env = "VAKB_CORPUS", global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, env = "VAKB_MODE", default_value = "strict", global = true)]
    mode: ParseMode,
}

#[derive(Subcommand)]
enum StatsCommand {
    Overview,
    Frequency { property: String },
    Cooccur { row: String, col: String },
    Words,
}

#[derive(Clone, Copy, ValueEnum)]
enum QueryFormat {
    Ids,
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsFormat {
    Json,
    Csv,
    Table,
}

/// A failed command: exit status plus a message for stderr.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { path, strict, vocab } => validate(&path, strict, vocab.as_deref()),
        Command::Ingest { dir, output, mode } => run_ingest(&dir, &output, mode),
        Command::Query {
            source,
            pattern,
            filter,
            format,
        } => query(&source, pattern.as_deref(), &filter, format),
        Command::Stats { which, source, format } => stats(&source, &which, format),
        Command::Serve {
            source,
            port,
            host,
            ui,
            cors_origin,
            no_cors,
        } => {
            let cors = if no_cors {
                CorsPolicy::Disabled
            } else if cors_origin.is_empty() {
                CorsPolicy::AnyOrigin
            } else {
                CorsPolicy::Origins(cors_origin)
            };
            run_serve(&source, &host, port, ServiceConfig { cors, ui_dir: ui })
        }
        Command::Import { export, output, vocab } => run_import(&export, &output, vocab.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("vakb: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn emit(text: &str) -> Outcome {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| usage(format!("writing output: {e}")))?;
    Ok(0)
}

fn load_vocab(explicit: Option<&Path>, dir: Option<&Path>) -> Result<Vocabulary, Failure> {
    let implicit = dir.map(|d| d.join(VOCABULARY)).filter(|p| p.is_file());
    match explicit.map(Path::to_path_buf).or(implicit) {
        Some(path) => Vocabulary::load(&path).map_err(usage),
        None => Ok(default_vocabulary()),
    }
}

/// Spec files a `validate` run covers, as (label, path).
fn spec_files(path: &Path) -> Result<Vec<(String, PathBuf)>, Failure> {
    if path.is_file() {
        return Ok(vec![(path.display().to_string(), path.to_path_buf())]);
    }
    if !path.is_dir() {
        return Err(usage(format!("{}: no such file or directory", path.display())));
    }
    let manifest = path.join(MANIFEST);
    if manifest.is_file() {
        let text = fs::read_to_string(&manifest).map_err(|e| usage(format!("{}: {e}", manifest.display())))?;
        let entries: Vec<ManifestEntry> =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", manifest.display())))?;
        return Ok(entries
            .into_iter()
            .map(|e| (e.spec_file.clone(), path.join(&e.spec_file)))
            .collect());
    }
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(path).sort_by_file_name() {
        let entry = entry.map_err(usage)?;
        let name = entry.file_name().to_string_lossy();
        if entry.file_type().is_file() && name.ends_with(".json") && name != VOCABULARY && name != INDEX_FILE_NAME {
            let label = entry.path().strip_prefix(path).unwrap_or(entry.path()).display().to_string();
            files.push((label, entry.path().to_path_buf()));
        }
    }
    Ok(files)
}

fn validate(path: &Path, strict: bool, vocab: Option<&Path>) -> Outcome {
    let vocab = load_vocab(vocab, path.is_dir().then_some(path))?;
    let mode = if strict { ParseMode::Strict } else { ParseMode::Lenient };
    let mut report = String::new();
    let (mut passed, mut failed) = (0, 0);
    for (label, file) in spec_files(path)? {
        let parsed = fs::read_to_string(&file)
            .map_err(|e| vec![e.to_string()])
            .and_then(|text| parse_spec(&text, &vocab, mode).map_err(|errs| errs.iter().map(ToString::to_string).collect()));
        match parsed {
            Ok(parsed) => {
                passed += 1;
                let m = vakb_core::compute_metrics(&parsed.spec, &vocab);
                report += &format!(
                    "PASS {label}  compositions={} depth={} tasks={} expressible={}\n",
                    m.composition_count, m.composition_depth, m.task_count, m.vegalite_expressible
                );
                for v in &m.expressibility_violations {
                    report += &format!("  not expressible: {v}\n");
                }
                for w in &parsed.warnings {
                    report += &format!("  warning: {w}\n");
                }
            }
            Err(errors) => {
                failed += 1;
                report += &format!("FAIL {label}\n");
                for e in errors {
                    report += &format!("  error: {e}\n");
                }
            }
        }
    }
    report += &format!("{passed} passed, {failed} failed\n");
    emit(&report)?;
    Ok(if failed > 0 { 1 } else { 0 })
}

fn run_ingest(dir: &Path, output: &Path, mode: ParseMode) -> Outcome {
    let (corpus, report) = ingest(dir, mode).map_err(usage)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    save_index(&corpus, output).map_err(usage)?;
    let mut text = format!("accepted {}\nrejected {}\n", report.accepted, report.rejected.len());
    for r in &report.rejected {
        text += &format!("  {}: {}\n", r.file, r.reason);
    }
    emit(&text)?;
    Ok(if report.rejected.is_empty() { 0 } else { 1 })
}

fn open_corpus(args: &CorpusArgs) -> Result<Corpus, Failure> {
    let path = args
        .corpus
        .as_deref()
        .ok_or_else(|| usage("no corpus given (use --corpus or VAKB_CORPUS)"))?;
    if !path.exists() {
        return Err(usage(format!("{}: no such file or directory", path.display())));
    }
    let (corpus, report) = Corpus::open(path, args.mode).map_err(usage)?;
    if let Some(report) = report {
        for r in &report.rejected {
            eprintln!("warning: skipped {}: {}", r.file, r.reason);
        }
    }
    Ok(corpus)
}

enum Search {
    Pattern(QueryPattern),
    Filter(FilterQuery),
}

fn query(source: &CorpusArgs, pattern: Option<&Path>, filter: &[String], format: QueryFormat) -> Outcome {
    let code_first = |e: vakb_core::query::QueryError| usage(format!("{}: {e}", e.code()));
    let search = match pattern {
        Some(file) => {
            let text = fs::read_to_string(file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            Search::Pattern(QueryPattern::parse(&text).map_err(code_first)?)
        }
        None => {
            let pairs = filter
                .iter()
                .map(|clause| {
                    clause
                        .split_once('=')
                        .ok_or_else(|| usage(format!("filter '{clause}' is not KEY=VALUE")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Search::Filter(FilterQuery::from_pairs(pairs).map_err(code_first)?)
        }
    };
    let corpus = open_corpus(source)?;
    let ids = match &search {
        Search::Pattern(p) => structural_query(&corpus, p),
        Search::Filter(q) => filter_query(&corpus, q).map_err(code_first)?,
    };
    match format {
        QueryFormat::Ids => emit(&ids.iter().map(|id| format!("{id}\n")).collect::<String>()),
        QueryFormat::Json => emit(&canonical_json(&ids)),
        QueryFormat::Table => emit(&cards_table(&cards(&corpus, &ids))),
    }
}

fn stats(source: &CorpusArgs, which: &StatsCommand, format: StatsFormat) -> Outcome {
    // property names are checked before the corpus is loaded
    let property = match which {
        StatsCommand::Frequency { property } => Some(property.parse::<Property>().map_err(usage)?),
        _ => None,
    };
    let corpus = open_corpus(source)?;
    let text = match which {
        StatsCommand::Overview => {
            let o = analytics::overview(&corpus).map_err(usage)?;
            match format {
                StatsFormat::Json => overview_json(&o),
                StatsFormat::Csv => overview_csv(&o),
                StatsFormat::Table => overview_table(&o),
            }
        }
        StatsCommand::Frequency { .. } | StatsCommand::Words => {
            let h = match property {
                Some(p) if p != Property::FieldWord => analytics::frequency(&corpus, p).map_err(usage)?,
                _ => analytics::field_word_frequency(&corpus),
            };
            match format {
                StatsFormat::Json => histogram_json(&h),
                StatsFormat::Csv => histogram_csv(&h),
                StatsFormat::Table => histogram_table(&h),
            }
        }
        StatsCommand::Cooccur { row, col } => {
            let m = analytics::cooccurrence(&corpus, row, col).map_err(usage)?;
            match format {
                StatsFormat::Json => matrix_json(&m),
                StatsFormat::Csv => matrix_csv(&m),
                StatsFormat::Table => matrix_table(&m),
            }
        }
    };
    emit(&text)
}

fn run_serve(source: &CorpusArgs, host: &str, port: u16, config: ServiceConfig) -> Outcome {
    let corpus = open_corpus(source)?;
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|e| usage(format!("bad listen address {host}:{port}: {e}")))?;
    let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
    let runtime = tokio::runtime::Runtime::new().map_err(usage)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| usage(format!("binding {addr}: {e}")))?;
        let bound = listener.local_addr().map_err(usage)?;
        eprintln!("vakb: {} designs, listening on http://{bound}", corpus.len());
        let app = router(Arc::new(corpus), &config);
        serve(listener, app, shutdown_signal()).await.map_err(usage)?;
        Ok(0)
    })
}

fn run_import(export: &Path, output: &Path, vocab: Option<&Path>) -> Outcome {
    let vocab = load_vocab(vocab, None)?;
    let report = import_kb4va(export, output, &vocab).map_err(usage)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let mut text = format!("imported {}\nskipped {}\n", report.imported, report.skipped.len());
    for (pos, reason) in &report.skipped {
        text += &format!("  entry {pos}: {reason}\n");
    }
    emit(&text)
}
