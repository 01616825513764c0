//! `subseq`: ingest datasets, query and benchmark subsequence matching
//! pipelines described by configuration files.

mod bench;
mod engine;
mod error;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::Value as Json;
use subseq_core::config::{AlgorithmHandle, Value};
use subseq_core::dataset::DatasetFormat;
use subseq_core::{Answer, Sequence};

use engine::QuerySpec;
use error::CliError;
use output::QueryOrigin;

#[derive(Parser, Debug)]
#[command(name = "subseq", version, about = "Subsequence matching over windowed, indexed sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Index a dataset with a configured pipeline and optionally snapshot it.
    Ingest(IngestArgs),
    /// Range query: all alignments within distance EPS of the query.
    QueryRange(RangeArgs),
    /// k-nearest-neighbour query over all alignments.
    QueryKnn(KnnArgs),
    /// Run one query workload through several configurations.
    Bench(BenchArgs),
    /// Write a query and its matched subsequences as CSV columns.
    Export(ExportArgs),
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Pipeline configuration file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Binds placeholder <NAME> in the config.
    #[arg(long = "bind", value_name = "NAME=VALUE", value_parser = engine::parse_assignment)]
    bindings: Vec<(String, Value)>,
    /// Defines a named instance visible to the config.
    #[arg(long = "instance", value_name = "NAME=VALUE", value_parser = engine::parse_assignment)]
    instances: Vec<(String, Value)>,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Dataset file, one sequence per line.
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,
    /// First field of each dataset line is a class label; ids become `line-<n>`.
    #[arg(long)]
    labeled: bool,
}

impl DataArgs {
    fn format(&self) -> DatasetFormat {
        DatasetFormat { labeled: self.labeled }
    }
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    data: DataArgs,
    /// Directory receiving the config, index and storage snapshot.
    #[arg(long, value_name = "DIR")]
    snapshot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Snapshot directory written by `ingest`.
    #[arg(long, value_name = "DIR", conflicts_with_all = ["config", "data", "bindings", "instances"])]
    snapshot: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    data: DataArgs,
    /// Query as a stored subsequence.
    #[arg(long, value_name = "ID:OFFSET:LEN", required_unless_present = "query_file")]
    query: Option<QuerySpec>,
    /// Queries read from a dataset-format file; output becomes a JSON array.
    #[arg(long, value_name = "FILE", conflicts_with = "query")]
    query_file: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RangeArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    eps: f64,
}

#[derive(Args, Debug)]
struct KnnArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    k: usize,
    /// Window hits pulled per requested neighbour.
    #[arg(long, default_value_t = 1)]
    mult: usize,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("mode").required(true).args(["eps", "k"]))]
struct BenchArgs {
    /// Configuration files to compare (repeatable).
    #[arg(long = "config", value_name = "FILE", required = true)]
    configs: Vec<PathBuf>,
    #[arg(long = "bind", value_name = "NAME=VALUE", value_parser = engine::parse_assignment)]
    bindings: Vec<(String, Value)>,
    #[arg(long = "instance", value_name = "NAME=VALUE", value_parser = engine::parse_assignment)]
    instances: Vec<(String, Value)>,
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    #[arg(long)]
    labeled: bool,
    /// Query workload in dataset format.
    #[arg(long, value_name = "FILE")]
    queries: PathBuf,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    mult: usize,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("mode").required(true).args(["eps", "k"]))]
struct ExportArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    mult: usize,
}

fn check_eps(eps: f64) -> Result<f64, CliError> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(eps)
    } else {
        Err(CliError::Usage(format!("--eps must be a finite non-negative number, got {eps}")))
    }
}

fn check_k(k: usize) -> Result<usize, CliError> {
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    Ok(k)
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn build(config: &ConfigArgs, data: &DataArgs) -> Result<AlgorithmHandle, CliError> {
    let (Some(path), Some(data_path)) = (&config.config, &data.data) else {
        return Err(CliError::Usage("either --snapshot or both --config and --data are required".into()));
    };
    let actions = engine::load_actions(path, &config.bindings, &config.instances)?;
    let mut handle = engine::start(&actions)?;
    let sequences = engine::read_sequences(data_path, data.format(), &handle)?;
    engine::ingest(&mut handle, &sequences);
    Ok(handle)
}

fn open(source: &SourceArgs) -> Result<AlgorithmHandle, CliError> {
    match &source.snapshot {
        Some(dir) => engine::load_snapshot(dir),
        None => build(&source.config, &source.data),
    }
}

fn queries(source: &SourceArgs, handle: &AlgorithmHandle) -> Result<Vec<Sequence>, CliError> {
    match (&source.query, &source.query_file) {
        (Some(spec), _) => Ok(vec![engine::select_query(handle, spec)?]),
        (None, Some(path)) => engine::read_sequences(path, DatasetFormat::default(), handle),
        (None, None) => Err(CliError::Usage("--query or --query-file is required".into())),
    }
}

/// A single document for `--query`, an array for `--query-file`.
fn emit(source: &SourceArgs, docs: Vec<Json>) -> Result<(), CliError> {
    let doc = if source.query.is_some() { docs.into_iter().next().unwrap_or(Json::Null) } else { Json::Array(docs) };
    let mut w = writer(source.out.as_deref())?;
    w.write_all(output::to_json(&doc).as_bytes())?;
    w.flush()?;
    Ok(())
}

fn log_stats(q: &Sequence, answer: &Answer) {
    let s = &answer.stats;
    info!(
        "query {}: {} windows (tail {} dropped), {} window hits, {} candidates, {} sequences visited, {} matches",
        q.id(),
        s.query_windows,
        s.dropped_tail,
        s.window_hits,
        s.candidates,
        s.sequences_visited,
        answer.matches.len()
    );
}

fn ingest(args: &IngestArgs) -> Result<(), CliError> {
    let (Some(path), Some(data_path)) = (&args.config.config, &args.data.data) else {
        return Err(CliError::Usage("ingest requires --config and --data".into()));
    };
    let actions = engine::load_actions(path, &args.config.bindings, &args.config.instances)?;
    let mut handle = engine::start(&actions)?;
    let sequences = engine::read_sequences(data_path, args.data.format(), &handle)?;
    let (indexed, windows, skipped) = engine::ingest(&mut handle, &sequences);
    if let Some(dir) = &args.snapshot {
        engine::save_snapshot(dir, &actions, &handle)?;
    }
    println!("strategy: {}", handle.strategy());
    println!("sequences: {indexed}");
    println!("windows: {windows}");
    println!("skipped: {skipped}");
    if let Some(dir) = &args.snapshot {
        println!("snapshot: {}", dir.display());
    }
    Ok(())
}

fn query_range(args: &RangeArgs) -> Result<(), CliError> {
    let eps = check_eps(args.eps)?;
    let handle = open(&args.source)?;
    let docs = queries(&args.source, &handle)?
        .iter()
        .map(|q| {
            let answer = handle.range_search(q, eps)?;
            log_stats(q, &answer);
            Ok(output::range_document(&QueryOrigin::of(q), eps, &answer))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    emit(&args.source, docs)
}

fn query_knn(args: &KnnArgs) -> Result<(), CliError> {
    let k = check_k(args.k)?;
    let mult = check_k(args.mult).map_err(|_| CliError::Usage("--mult must be at least 1".into()))?;
    let handle = open(&args.source)?;
    let docs = queries(&args.source, &handle)?
        .iter()
        .map(|q| {
            let answer = handle.knn_search(q, k, mult)?;
            log_stats(q, &answer);
            Ok(output::knn_document(&QueryOrigin::of(q), k, mult, &answer))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    emit(&args.source, docs)
}

fn bench(args: &BenchArgs) -> Result<(), CliError> {
    let workload = match (args.eps, args.k) {
        (Some(eps), _) => bench::Workload::Range { eps: check_eps(eps)? },
        (None, Some(k)) => bench::Workload::Knn { k: check_k(k)?, mult: args.mult.max(1) },
        (None, None) => unreachable!("clap requires --eps or --k"),
    };
    let input = bench::BenchInput {
        configs: &args.configs,
        bindings: &args.bindings,
        instances: &args.instances,
        data: &args.data,
        queries: &args.queries,
        format: DatasetFormat { labeled: args.labeled },
        workload,
    };
    let (ids, rows) = bench::run(&input)?;
    let mut w = writer(args.out.as_deref())?;
    w.write_all(bench::render(&ids, &rows).as_bytes())?;
    w.flush()?;
    Ok(())
}

fn export(args: &ExportArgs) -> Result<(), CliError> {
    let Some(out) = &args.source.out else {
        return Err(CliError::Usage("export requires --out".into()));
    };
    let handle = open(&args.source)?;
    let qs = queries(&args.source, &handle)?;
    let [q] = qs.as_slice() else {
        return Err(CliError::Usage("export takes a single query; use --query or a one-line --query-file".into()));
    };
    let answer = match (args.eps, args.k) {
        (Some(eps), _) => handle.range_search(q, check_eps(eps)?)?,
        (None, Some(k)) => handle.knn_search(q, check_k(k)?, args.mult.max(1))?,
        (None, None) => unreachable!("clap requires --eps or --k"),
    };
    let mut columns = vec![("query".to_owned(), q.clone())];
    for m in &answer.matches {
        let s = handle.storage().fetch_slice(&m.pid, m.start, m.start + q.len() - 1)?;
        columns.push((format!("{}@{}", m.pid, m.start), s));
    }
    let file = File::create(out).map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
    let mut w = BufWriter::new(file);
    output::write_csv(&mut w, &columns)?;
    w.flush()?;
    println!("wrote {} matches to {}", answer.matches.len(), out.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::QueryRange(a) => query_range(a),
        Command::QueryKnn(a) => query_knn(a),
        Command::Bench(a) => bench(a),
        Command::Export(a) => export(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SMF_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("subseq: {e}");
            e.exit_code()
        }
    }
}
