//! Runs one query workload through several configurations and compares each
//! answer with an exhaustive scan.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use subseq_core::config::Value;
use subseq_core::dataset::DatasetFormat;
use subseq_core::pipeline::{brute_force_knn, brute_force_range};
use subseq_core::{Error, MatchResult, Strategy};

use crate::engine;
use crate::error::CliError;

#[derive(Clone, Copy, Debug)]
pub enum Workload {
    Range { eps: f64 },
    Knn { k: usize, mult: usize },
}

#[derive(Debug)]
pub struct BenchRow {
    pub name: String,
    pub strategy: Strategy,
    pub ingest: Duration,
    pub query: Duration,
    pub distance_computations: u64,
    pub candidates: usize,
    /// Match count per query; `None` when the query was rejected as too short.
    pub matches: Vec<Option<usize>>,
    pub exact: bool,
    pub recall: f64,
}

pub struct BenchInput<'a> {
    pub configs: &'a [PathBuf],
    pub bindings: &'a [(String, Value)],
    pub instances: &'a [(String, Value)],
    pub data: &'a Path,
    pub queries: &'a Path,
    pub format: DatasetFormat,
    pub workload: Workload,
}

type Key = (String, usize);

fn keys(ms: &[MatchResult]) -> Vec<Key> {
    ms.iter().map(|m| (m.pid.clone(), m.start)).collect()
}

pub fn run(input: &BenchInput<'_>) -> Result<(Vec<String>, Vec<BenchRow>), CliError> {
    let mut rows = Vec::new();
    let mut query_ids = Vec::new();
    for path in input.configs {
        let actions = engine::load_actions(path, input.bindings, input.instances)?;
        let mut handle = engine::start(&actions)?;
        let data = engine::read_sequences(input.data, input.format, &handle)?;
        let queries = engine::read_sequences(input.queries, DatasetFormat::default(), &handle)?;
        query_ids = queries.iter().map(|q| q.id().to_owned()).collect();

        let t = Instant::now();
        engine::ingest(&mut handle, &data);
        let ingest = t.elapsed();
        handle.index().reset_counters();

        let refine = handle.sequence_type().refine.clone();
        let mut row = BenchRow {
            name: path.display().to_string(),
            strategy: handle.strategy(),
            ingest,
            query: Duration::ZERO,
            distance_computations: 0,
            candidates: 0,
            matches: Vec::with_capacity(queries.len()),
            exact: true,
            recall: 0.0,
        };
        let mut evaluated = 0usize;
        for q in &queries {
            let t = Instant::now();
            let answer = match input.workload {
                Workload::Range { eps } => handle.range_search(q, eps),
                Workload::Knn { k, mult } => handle.knn_search(q, k, mult),
            };
            row.query += t.elapsed();
            let answer = match answer {
                Ok(a) => a,
                Err(Error::QueryTooShort { .. }) => {
                    row.matches.push(None);
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let truth = match input.workload {
                Workload::Range { eps } => brute_force_range(handle.storage(), q, &refine, eps)?,
                Workload::Knn { k, .. } => brute_force_knn(handle.storage(), q, &refine, k)?,
            };
            let (found, truth) = (keys(&answer.matches), keys(&truth));
            row.exact &= found == truth;
            let found: HashSet<&Key> = found.iter().collect();
            let hit = truth.iter().filter(|k| found.contains(k)).count();
            row.recall += if truth.is_empty() { 1.0 } else { hit as f64 / truth.len() as f64 };
            row.candidates += answer.stats.candidates;
            row.matches.push(Some(answer.matches.len()));
            evaluated += 1;
        }
        row.recall = if evaluated == 0 { f64::NAN } else { row.recall / evaluated as f64 };
        row.distance_computations = handle.index().distance_computations();
        rows.push(row);
    }
    Ok((query_ids, rows))
}

/// Summary table followed by per-query match counts.
pub fn render(query_ids: &[String], rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let labels: Vec<String> = rows.iter().enumerate().map(|(i, r)| format!("#{} {}", i + 1, r.name)).collect();
    let name_w = labels.iter().map(String::len).chain([6]).max().unwrap_or(6);
    let _ = writeln!(
        out,
        "{:<name_w$}  {:<9}  {:>10}  {:>10}  {:>12}  {:>10}  {:>8}  {:<5}  {:>6}",
        "config", "strategy", "ingest_ms", "query_ms", "dist_comps", "candidates", "matches", "exact", "recall"
    );
    for (r, label) in rows.iter().zip(&labels) {
        let total: usize = r.matches.iter().flatten().sum();
        let _ = writeln!(
            out,
            "{:<name_w$}  {:<9}  {:>10.3}  {:>10.3}  {:>12}  {:>10}  {:>8}  {:<5}  {:>6.4}",
            label,
            r.strategy.to_string(),
            r.ingest.as_secs_f64() * 1e3,
            r.query.as_secs_f64() * 1e3,
            r.distance_computations,
            r.candidates,
            total,
            r.exact,
            r.recall
        );
    }
    out.push('\n');
    let id_w = query_ids.iter().map(String::len).chain([5]).max().unwrap_or(5);
    let _ = write!(out, "{:<id_w$}", "query");
    for i in 0..rows.len() {
        let _ = write!(out, "  {:>8}", format!("#{}", i + 1));
    }
    out.push('\n');
    for (qi, id) in query_ids.iter().enumerate() {
        let _ = write!(out, "{id:<id_w$}");
        for r in rows {
            match r.matches.get(qi).copied().flatten() {
                Some(n) => {
                    let _ = write!(out, "  {n:>8}");
                }
                None => {
                    let _ = write!(out, "  {:>8}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}
