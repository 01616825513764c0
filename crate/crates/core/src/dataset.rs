//! Line-oriented dataset files.
//!
//! Each non-blank line holds one sequence: an id followed by its components,
//! separated by commas and/or whitespace. Vector sequences list their
//! components flattened, `dim` values per element. In labeled mode the first
//! field is a class label instead of an id and ids are generated as
//! `line-<n>` from the 1-based line number. Lines starting with `#` are
//! comments.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sequence::{ComponentKind, Sequence};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DatasetFormat {
    pub labeled: bool,
}

/// One parsed line.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub line: usize,
    pub id: String,
    pub label: Option<String>,
    pub values: Vec<f64>,
}

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty())
}

pub fn parse_records(text: &str, format: DatasetFormat) -> Result<Vec<Record>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Dataset { line, msg };
        let mut it = fields(trimmed);
        let head = it.next().expect("non-empty line has a field").to_string();
        let (id, label) = if format.labeled { (format!("line-{line}"), Some(head)) } else { (head, None) };
        let values = it
            .map(|f| f.parse::<f64>().map_err(|_| err(format!("invalid number {f:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(err(format!("sequence {id:?} has no components")));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(err(format!("non-finite component {bad}")));
        }
        if !seen.insert(id.clone()) {
            return Err(err(format!("duplicate id {id:?}")));
        }
        out.push(Record { line, id, label, values });
    }
    Ok(out)
}

/// Parses `text` into sequences of the given component kind.
pub fn parse_dataset(text: &str, format: DatasetFormat, kind: ComponentKind) -> Result<Vec<Sequence>> {
    parse_records(text, format)?
        .into_iter()
        .map(|r| {
            Sequence::new(r.id, kind, r.values).map_err(|e| Error::Dataset { line: r.line, msg: e.to_string() })
        })
        .collect()
}

pub fn read_dataset(path: impl AsRef<Path>, format: DatasetFormat, kind: ComponentKind) -> Result<Vec<Sequence>> {
    parse_dataset(&fs::read_to_string(path)?, format, kind)
}
