//! Building pipelines from config files, snapshots and query selection.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::str::FromStr;

use log::{info, warn};
use subseq_core::config::{
    instantiate, parse_config, parse_value, render_config, substitute, AlgorithmHandle, Bindings, ConfigAction,
    Module, ModuleRegistry, Value, Verb,
};
use subseq_core::dataset::{parse_dataset, DatasetFormat};
use subseq_core::index::snapshot::{read_snapshot, write_snapshot};
use subseq_core::storage::FileStorage;
use subseq_core::{IndexSpec, Sequence, SequenceStorage};

use crate::error::CliError;

pub const SNAPSHOT_CONFIG: &str = "pipeline.conf";
pub const SNAPSHOT_INDEX: &str = "index.smfx";
pub const SNAPSHOT_STORAGE: &str = "storage.smfs";

/// `NAME=VALUE` with VALUE in config value syntax. Text that is not a valid
/// value is taken as a plain string.
pub fn parse_assignment(s: &str) -> Result<(String, Value), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let name = name.trim();
    if name.is_empty() {
        return Err(format!("empty name in {s:?}"));
    }
    let value = value.trim();
    let value = parse_value(value).unwrap_or_else(|_| Value::Str(value.to_owned()));
    Ok((name.to_owned(), value))
}

/// `id:offset:len`, selecting `len` components of a stored sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySpec {
    pub id: String,
    pub offset: usize,
    pub len: usize,
}

impl FromStr for QuerySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        // ids may contain ':', so split from the right
        let mut parts = s.rsplitn(3, ':');
        let (len, offset, id) = match (parts.next(), parts.next(), parts.next()) {
            (Some(l), Some(o), Some(id)) if !id.is_empty() => (l, o, id),
            _ => return Err(format!("expected id:offset:len, got {s:?}")),
        };
        let offset = offset.parse().map_err(|_| format!("invalid offset {offset:?}"))?;
        let len: usize = len.parse().map_err(|_| format!("invalid length {len:?}"))?;
        if len == 0 {
            return Err("query length must be at least 1".into());
        }
        Ok(QuerySpec { id: id.to_owned(), offset, len })
    }
}

/// Registry used by every subcommand: the shipped modules plus `mIndex`, a
/// linear-scan index standing in for an externally created metric index.
pub fn registry() -> ModuleRegistry {
    let mut r = ModuleRegistry::default();
    r.add_instance("mIndex", Module::Index(IndexSpec::linear()));
    r
}

/// Reads a config file, prepends `--instance` definitions as
/// `namedInstanceAdd` actions and substitutes `--bind` values. The result
/// is self-contained and can be rendered into a snapshot.
pub fn load_actions(
    path: &Path,
    bindings: &[(String, Value)],
    instances: &[(String, Value)],
) -> Result<Vec<ConfigAction>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(path.display(), e))?;
    let parsed = parse_config(&text).map_err(|e| CliError::input(path.display(), e))?;
    let declared: HashSet<&str> = parsed.iter().map(|a| a.name.as_str()).collect();
    let mut actions = Vec::with_capacity(instances.len() + parsed.len());
    for (name, value) in instances {
        if declared.contains(name.as_str()) {
            return Err(CliError::Usage(format!("--instance {name}: action {name:?} is already declared in the config")));
        }
        actions.push(ConfigAction { name: name.clone(), verb: Verb::NamedInstanceAdd, params: vec![value.clone()] });
    }
    actions.extend(parsed);
    let bindings: Bindings = bindings.iter().cloned().collect();
    substitute(&actions, &bindings).map_err(|e| CliError::input(path.display(), e))
}

pub fn start(actions: &[ConfigAction]) -> Result<AlgorithmHandle, CliError> {
    Ok(instantiate(actions, &registry(), &Bindings::new())?)
}

pub fn read_sequences(path: &Path, format: DatasetFormat, handle: &AlgorithmHandle) -> Result<Vec<Sequence>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(path.display(), e))?;
    parse_dataset(&text, format, handle.sequence_type().kind).map_err(|e| CliError::input(path.display(), e))
}

/// Indexes `sequences`, logging the ones that were skipped.
pub fn ingest(handle: &mut AlgorithmHandle, sequences: &[Sequence]) -> (usize, usize, usize) {
    let report = handle.ingest(sequences);
    for (id, e) in &report.skipped {
        warn!("skipped sequence {id:?}: {e}");
    }
    info!("indexed {} sequences into {} windows", report.sequences, report.windows);
    (report.sequences, report.windows, report.skipped.len())
}

/// Writes config, index items and stored sequences into `dir`.
pub fn save_snapshot(dir: &Path, actions: &[ConfigAction], handle: &AlgorithmHandle) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(SNAPSHOT_CONFIG), render_config(actions))?;

    let index = handle.index();
    let items: Vec<_> = index.items().collect();
    let mut w = BufWriter::new(File::create(dir.join(SNAPSHOT_INDEX))?);
    write_snapshot(&mut w, index.dim().unwrap_or(0), items.into_iter())?;
    std::io::Write::flush(&mut w)?;

    let storage = handle.storage();
    let mut file = FileStorage::create(dir.join(SNAPSHOT_STORAGE), handle.sequence_type().kind)?;
    for id in storage.ids() {
        file.store(&storage.get(&id)?)?;
    }
    Ok(())
}

/// Rebuilds a pipeline from a snapshot directory.
pub fn load_snapshot(dir: &Path) -> Result<AlgorithmHandle, CliError> {
    let conf = dir.join(SNAPSHOT_CONFIG);
    let text = fs::read_to_string(&conf).map_err(|e| CliError::input(conf.display(), e))?;
    let actions = parse_config(&text).map_err(|e| CliError::input(conf.display(), e))?;
    let mut handle = start(&actions)?;

    let storage_path = dir.join(SNAPSHOT_STORAGE);
    let storage = FileStorage::open(&storage_path).map_err(|e| CliError::input(storage_path.display(), e))?;
    let sequences = storage
        .ids()
        .iter()
        .map(|id| storage.get(id))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::input(storage_path.display(), e))?;

    let index_path = dir.join(SNAPSHOT_INDEX);
    let file = File::open(&index_path).map_err(|e| CliError::input(index_path.display(), e))?;
    let (_, items) = read_snapshot(BufReader::new(file)).map_err(|e| CliError::input(index_path.display(), e))?;
    handle.restore(&sequences, items).map_err(|e| CliError::input(dir.display(), e))?;
    info!("restored {} sequences and {} index items", sequences.len(), handle.index().len());
    Ok(handle)
}

/// Cuts the selected query out of the stored data.
pub fn select_query(handle: &AlgorithmHandle, spec: &QuerySpec) -> Result<Sequence, CliError> {
    let storage = handle.storage();
    let len = storage
        .sequence_len(&spec.id)
        .ok_or_else(|| CliError::Input(format!("query: no stored sequence {:?}", spec.id)))?;
    if spec.offset + spec.len > len {
        return Err(CliError::Input(format!(
            "query: {}:{}:{} exceeds sequence length {len}",
            spec.id, spec.offset, spec.len
        )));
    }
    storage
        .fetch_slice(&spec.id, spec.offset, spec.offset + spec.len - 1)
        .map_err(|e| CliError::input("query", e))
}
