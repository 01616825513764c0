//! Whole-sequence storage returning arbitrary slices by id.
//!
//! [`SequenceStorage::grouped_fetch`] serves a batch of alignment requests by
//! grouping them per sequence, so each stored sequence is looked up (or read
//! from disk) once per call however many requests hit it.

use std::fs::{File, OpenOptions};
use std::io::{BufReader, Read, Write};
use std::os::unix::fs::FileExt;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::sequence::{ComponentKind, Sequence};

/// Request for `pid[start ..= start + len - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlignmentRequest {
    pub pid: String,
    pub start: usize,
    pub len: usize,
}

impl AlignmentRequest {
    pub fn new(pid: impl Into<String>, start: usize, len: usize) -> Self {
        AlignmentRequest { pid: pid.into(), start, len }
    }
}

#[derive(Debug)]
pub struct GroupedFetch {
    /// One entry per request, in request order.
    pub slices: Vec<Result<Sequence>>,
    /// Distinct stored sequences looked up by this call.
    pub visits: usize,
}

pub trait SequenceStorage: Send + Sync {
    /// Stores `s` under its id as a root sequence; an existing id is replaced.
    fn store(&mut self, s: &Sequence) -> Result<()>;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stored ids in first-insertion order.
    fn ids(&self) -> Vec<String>;

    fn sequence_len(&self, id: &str) -> Option<usize>;

    /// `S[i:j]` (inclusive) of the sequence stored as `id`.
    fn fetch_slice(&self, id: &str, i: usize, j: usize) -> Result<Sequence>;

    fn grouped_fetch(&self, requests: &[AlignmentRequest]) -> GroupedFetch;

    fn get(&self, id: &str) -> Result<Sequence> {
        let len = self.sequence_len(id).ok_or_else(|| Error::UnknownId(id.to_owned()))?;
        if len == 0 {
            return Err(Error::EmptySequence);
        }
        self.fetch_slice(id, 0, len - 1).map(|s| {
            Sequence::new(id, s.kind(), s.values().to_vec()).expect("slice has the stored kind")
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StorageSpec {
    Memory,
    File(PathBuf),
}

impl StorageSpec {
    pub fn create(&self, kind: ComponentKind) -> Result<Box<dyn SequenceStorage>> {
        Ok(match self {
            StorageSpec::Memory => Box::new(MemoryStorage::new()),
            StorageSpec::File(path) => Box::new(FileStorage::create(path, kind)?),
        })
    }
}

fn check_range(i: usize, j: usize, len: usize) -> Result<()> {
    if i > j || j >= len {
        return Err(Error::IndexOutOfBounds { i, j, len });
    }
    Ok(())
}

fn request_bounds(r: &AlignmentRequest) -> Result<usize> {
    if r.len == 0 {
        return Err(Error::InvalidParameter("alignment length must be at least 1".into()));
    }
    Ok(r.start + r.len - 1)
}

/// Groups request positions by pid, keeping first-appearance order.
fn group(requests: &[AlignmentRequest]) -> IndexMap<&str, Vec<usize>> {
    let mut groups: IndexMap<&str, Vec<usize>> = IndexMap::new();
    for (pos, r) in requests.iter().enumerate() {
        groups.entry(r.pid.as_str()).or_default().push(pos);
    }
    groups
}

#[derive(Debug, Default)]
pub struct MemoryStorage {
    sequences: IndexMap<String, Sequence>,
}

impl MemoryStorage {
    pub fn new() -> Self {
        Self::default()
    }
}

impl SequenceStorage for MemoryStorage {
    fn store(&mut self, s: &Sequence) -> Result<()> {
        if s.id().is_empty() {
            return Err(Error::EmptyId);
        }
        let root = Sequence::new(s.id(), s.kind(), s.values().to_vec())?;
        self.sequences.insert(s.id().to_owned(), root);
        Ok(())
    }

    fn len(&self) -> usize {
        self.sequences.len()
    }

    fn ids(&self) -> Vec<String> {
        self.sequences.keys().cloned().collect()
    }

    fn sequence_len(&self, id: &str) -> Option<usize> {
        self.sequences.get(id).map(Sequence::len)
    }

    fn fetch_slice(&self, id: &str, i: usize, j: usize) -> Result<Sequence> {
        self.sequences.get(id).ok_or_else(|| Error::UnknownId(id.to_owned()))?.subsequence(i, j)
    }

    fn grouped_fetch(&self, requests: &[AlignmentRequest]) -> GroupedFetch {
        let mut slices: Vec<Option<Result<Sequence>>> = requests.iter().map(|_| None).collect();
        let groups = group(requests);
        let visits = groups.len();
        for (pid, positions) in groups {
            let seq = self.sequences.get(pid);
            for pos in positions {
                let r = &requests[pos];
                slices[pos] = Some(match seq {
                    None => Err(Error::UnknownId(pid.to_owned())),
                    Some(s) => request_bounds(r).and_then(|end| s.subsequence(r.start, end)),
                });
            }
        }
        GroupedFetch { slices: slices.into_iter().map(|s| s.expect("every request answered")).collect(), visits }
    }
}

const FILE_MAGIC: &[u8; 4] = b"SMFS";
const FILE_VERSION: u32 = 1;
const HEADER_LEN: u64 = 4 + 4 + 4 + 4 + 8;

#[derive(Clone, Copy, Debug)]
struct Record {
    /// Byte offset of the first component value.
    data: u64,
    count: usize,
}

/// Append-only file storage with an in-memory id directory.
///
/// Layout (little-endian): header `"SMFS"`, version u32, kind tag u32
/// (0 scalar, 1 vector), component dimension u32, Lp order f64; then per
/// record id length u32, UTF-8 id, component count u32 and
/// `count * dim` f64 values. A later record for the same id supersedes
/// earlier ones.
#[derive(Debug)]
pub struct FileStorage {
    path: PathBuf,
    file: File,
    kind: ComponentKind,
    directory: IndexMap<String, Record>,
    end: u64,
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Format { what: "sequence storage file", msg: msg.into() }
}

impl FileStorage {
    /// Creates (or truncates) a storage file.
    pub fn create(path: impl AsRef<Path>, kind: ComponentKind) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().read(true).write(true).create(true).truncate(true).open(&path)?;
        let (tag, dim, p) = match kind {
            ComponentKind::Scalar => (0u32, 1u32, 0.0f64),
            ComponentKind::Vector { dim, p } => (1, dim as u32, p),
        };
        let mut header = Vec::with_capacity(HEADER_LEN as usize);
        header.extend_from_slice(FILE_MAGIC);
        header.extend_from_slice(&FILE_VERSION.to_le_bytes());
        header.extend_from_slice(&tag.to_le_bytes());
        header.extend_from_slice(&dim.to_le_bytes());
        header.extend_from_slice(&p.to_le_bytes());
        file.write_all(&header)?;
        file.flush()?;
        Ok(FileStorage { path, file, kind, directory: IndexMap::new(), end: HEADER_LEN })
    }

    /// Opens an existing file and rebuilds the directory by scanning it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().read(true).write(true).open(&path)?;
        let total = file.metadata()?.len();
        let mut r = BufReader::new(&file);
        let mut take = |n: usize| -> Result<Vec<u8>> {
            let mut buf = vec![0u8; n];
            r.read_exact(&mut buf).map_err(|_| corrupt("truncated file"))?;
            Ok(buf)
        };
        let u32_at = |b: &[u8]| u32::from_le_bytes(b[..4].try_into().unwrap());
        let header = take(HEADER_LEN as usize)?;
        if &header[..4] != FILE_MAGIC {
            return Err(corrupt("bad magic"));
        }
        if u32_at(&header[4..]) != FILE_VERSION {
            return Err(corrupt("unsupported version"));
        }
        let kind = match u32_at(&header[8..]) {
            0 => ComponentKind::Scalar,
            1 => ComponentKind::vector(
                u32_at(&header[12..]) as usize,
                f64::from_le_bytes(header[16..24].try_into().unwrap()),
            )?,
            t => return Err(corrupt(format!("unknown component kind tag {t}"))),
        };
        let mut directory = IndexMap::new();
        let mut pos = HEADER_LEN;
        while pos < total {
            let id_len = u32_at(&take(4)?) as usize;
            let id = String::from_utf8(take(id_len)?).map_err(|_| corrupt("id is not UTF-8"))?;
            let count = u32_at(&take(4)?) as usize;
            let data = pos + 8 + id_len as u64;
            let bytes = count * kind.dim() * 8;
            take(bytes)?;
            directory.insert(id, Record { data, count });
            pos = data + bytes as u64;
        }
        Ok(FileStorage { path, file, kind, directory, end: pos })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn kind(&self) -> ComponentKind {
        self.kind
    }

    fn read_components(&self, rec: Record, start: usize, count: usize) -> Result<Vec<f64>> {
        let dim = self.kind.dim();
        let mut buf = vec![0u8; count * dim * 8];
        self.file.read_exact_at(&mut buf, rec.data + (start * dim * 8) as u64)?;
        Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn root_slice(&self, id: &str, values: Vec<f64>) -> Result<Sequence> {
        Sequence::new(id, self.kind, values)
    }
}

impl SequenceStorage for FileStorage {
    fn store(&mut self, s: &Sequence) -> Result<()> {
        if s.id().is_empty() {
            return Err(Error::EmptyId);
        }
        if s.kind() != self.kind {
            return Err(Error::ArityMismatch { expected: self.kind.to_string(), found: s.kind().to_string() });
        }
        let id_len = u32::try_from(s.id().len()).map_err(|_| Error::InvalidParameter("id too long".into()))?;
        let count = u32::try_from(s.len()).map_err(|_| Error::InvalidParameter("sequence too long".into()))?;
        let mut rec = Vec::with_capacity(8 + s.id().len() + s.values().len() * 8);
        rec.extend_from_slice(&id_len.to_le_bytes());
        rec.extend_from_slice(s.id().as_bytes());
        rec.extend_from_slice(&count.to_le_bytes());
        for v in s.values() {
            rec.extend_from_slice(&v.to_le_bytes());
        }
        self.file.write_all_at(&rec, self.end)?;
        let data = self.end + 8 + s.id().len() as u64;
        self.end += rec.len() as u64;
        self.directory.insert(s.id().to_owned(), Record { data, count: s.len() });
        Ok(())
    }

    fn len(&self) -> usize {
        self.directory.len()
    }

    fn ids(&self) -> Vec<String> {
        self.directory.keys().cloned().collect()
    }

    fn sequence_len(&self, id: &str) -> Option<usize> {
        self.directory.get(id).map(|r| r.count)
    }

    fn fetch_slice(&self, id: &str, i: usize, j: usize) -> Result<Sequence> {
        let rec = *self.directory.get(id).ok_or_else(|| Error::UnknownId(id.to_owned()))?;
        check_range(i, j, rec.count)?;
        let values = self.read_components(rec, i, j - i + 1)?;
        let seq = self.root_slice(id, values)?;
        // re-root so provenance matches an in-memory slice of the full sequence
        Sequence::with_provenance(format!("{id}[{i}:{j}]"), Some(id.to_owned()), i, self.kind, seq.values().to_vec())
    }

    fn grouped_fetch(&self, requests: &[AlignmentRequest]) -> GroupedFetch {
        let mut slices: Vec<Option<Result<Sequence>>> = requests.iter().map(|_| None).collect();
        let groups = group(requests);
        let visits = groups.len();
        for (pid, positions) in groups {
            let Some(&rec) = self.directory.get(pid) else {
                for pos in positions {
                    slices[pos] = Some(Err(Error::UnknownId(pid.to_owned())));
                }
                continue;
            };
            // one read covering every valid request of this sequence
            let mut valid = Vec::new();
            for pos in positions {
                let r = &requests[pos];
                match request_bounds(r).and_then(|end| check_range(r.start, end, rec.count).map(|_| end)) {
                    Ok(end) => valid.push((pos, r.start, end)),
                    Err(e) => slices[pos] = Some(Err(e)),
                }
            }
            if valid.is_empty() {
                continue;
            }
            let lo = valid.iter().map(|v| v.1).min().unwrap();
            let hi = valid.iter().map(|v| v.2).max().unwrap();
            match self.read_components(rec, lo, hi - lo + 1).and_then(|vals| self.root_slice(pid, vals)) {
                Ok(span) => {
                    let dim = self.kind.dim();
                    for (pos, start, end) in valid {
                        let vals = span.values()[(start - lo) * dim..(end - lo + 1) * dim].to_vec();
                        slices[pos] = Some(Sequence::with_provenance(
                            format!("{pid}[{start}:{end}]"),
                            Some(pid.to_owned()),
                            start,
                            self.kind,
                            vals,
                        ));
                    }
                }
                Err(e) => {
                    let msg = e.to_string();
                    for (pos, ..) in valid {
                        slices[pos] = Some(Err(corrupt(msg.clone())));
                    }
                }
            }
        }
        GroupedFetch { slices: slices.into_iter().map(|s| s.expect("every request answered")).collect(), visits }
    }
}
