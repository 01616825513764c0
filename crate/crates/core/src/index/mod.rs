//! Window indexes answering range and kNN queries by example.
//!
//! Two implementations share the [`DistanceIndex`] trait: [`LinearScanIndex`]
//! compares the query with every stored vector, [`PivotTableIndex`] keeps
//! precomputed item-to-pivot distances and skips items the triangle
//! inequality rules out. Both return identical answers whenever the index
//! distance is a metric.

mod linear;
mod pivot;
pub mod snapshot;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

pub use linear::LinearScanIndex;
pub use pivot::PivotTableIndex;

use crate::distance::DistanceSpec;
use crate::error::{Error, Result};
use crate::sequence::SeqRef;

/// A transformed window and where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedWindow {
    pub vector: Vec<f64>,
    pub pid: String,
    pub offset: usize,
}

impl IndexedWindow {
    pub fn new(vector: Vec<f64>, pid: impl Into<String>, offset: usize) -> Self {
        IndexedWindow { vector, pid: pid.into(), offset }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor<'a> {
    pub item: &'a IndexedWindow,
    pub distance: f64,
}

/// Result order: ascending distance, then `(pid, offset)`.
pub(crate) fn neighbor_order(a: &Neighbor<'_>, b: &Neighbor<'_>) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then_with(|| a.item.pid.cmp(&b.item.pid))
        .then_with(|| a.item.offset.cmp(&b.item.offset))
}

/// Single-writer / multi-reader: queries take `&self`, mutation `&mut self`.
pub trait DistanceIndex: Send + Sync {
    /// Adds an item; an existing `(pid, offset)` entry is replaced.
    fn insert(&mut self, item: IndexedWindow) -> Result<()>;

    /// Rebuilds auxiliary structures after a batch of inserts.
    fn build(&mut self) {}

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Vector length, fixed by the first insert.
    fn dim(&self) -> Option<usize>;

    fn distance(&self) -> &DistanceSpec;

    /// All items within `radius` of `query`, in result order.
    fn range_query(&self, query: &[f64], radius: f64) -> Result<Vec<Neighbor<'_>>>;

    /// The `k` closest items in result order (fewer if the index is smaller).
    fn knn_query(&self, query: &[f64], k: usize) -> Result<Vec<Neighbor<'_>>>;

    /// Items in insertion order.
    fn items(&self) -> Box<dyn Iterator<Item = &IndexedWindow> + '_>;

    /// Distance evaluations performed by queries since the last reset.
    fn distance_computations(&self) -> u64;

    fn reset_counters(&self);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexKind {
    LinearScan,
    PivotTable,
}

/// Recipe for an index instance.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSpec {
    pub kind: IndexKind,
    pub distance: DistanceSpec,
}

impl IndexSpec {
    pub fn linear() -> Self {
        IndexSpec { kind: IndexKind::LinearScan, distance: DistanceSpec::L2 }
    }

    pub fn pivot_table() -> Self {
        IndexSpec { kind: IndexKind::PivotTable, distance: DistanceSpec::L2 }
    }

    pub fn with_distance(mut self, distance: DistanceSpec) -> Self {
        self.distance = distance;
        self
    }

    pub fn create(&self) -> Box<dyn DistanceIndex> {
        match self.kind {
            IndexKind::LinearScan => Box::new(LinearScanIndex::with_distance(self.distance.clone())),
            IndexKind::PivotTable => Box::new(PivotTableIndex::with_distance(self.distance.clone())),
        }
    }
}

impl fmt::Display for IndexSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            IndexKind::LinearScan => "linear-scan",
            IndexKind::PivotTable => "pivot-table",
        };
        write!(f, "{kind}[{}]", self.distance)
    }
}

/// Item storage shared by both index kinds.
#[derive(Debug)]
pub(crate) struct WindowStore {
    items: Vec<IndexedWindow>,
    positions: HashMap<(String, usize), usize>,
    dim: Option<usize>,
    distance: DistanceSpec,
    computations: AtomicU64,
}

impl WindowStore {
    pub(crate) fn new(distance: DistanceSpec) -> Self {
        WindowStore { items: Vec::new(), positions: HashMap::new(), dim: None, distance, computations: AtomicU64::new(0) }
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        match self.dim {
            Some(d) if d != len => Err(Error::DimensionMismatch { expected: d, found: len }),
            _ => Ok(()),
        }
    }

    /// Returns the slot of the item and whether it replaced an older entry.
    pub(crate) fn insert(&mut self, item: IndexedWindow) -> Result<(usize, bool)> {
        self.check_dim(item.vector.len())?;
        self.dim = Some(item.vector.len());
        let key = (item.pid.clone(), item.offset);
        if let Some(&pos) = self.positions.get(&key) {
            self.items[pos] = item;
            return Ok((pos, true));
        }
        let pos = self.items.len();
        self.items.push(item);
        self.positions.insert(key, pos);
        Ok((pos, false))
    }

    pub(crate) fn items(&self) -> &[IndexedWindow] {
        &self.items
    }

    pub(crate) fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub(crate) fn distance(&self) -> &DistanceSpec {
        &self.distance
    }

    /// Distance without touching the query counter.
    pub(crate) fn raw_distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.distance.evaluate(SeqRef::scalar(a), SeqRef::scalar(b))
    }

    pub(crate) fn query_distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.computations.fetch_add(1, AtomicOrdering::Relaxed);
        self.raw_distance(a, b)
    }

    pub(crate) fn computations(&self) -> u64 {
        self.computations.load(AtomicOrdering::Relaxed)
    }

    pub(crate) fn reset(&self) {
        self.computations.store(0, AtomicOrdering::Relaxed);
    }
}

pub(crate) fn check_radius(radius: f64) -> Result<()> {
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::InvalidParameter(format!("query radius must be >= 0, got {radius}")));
    }
    Ok(())
}

pub(crate) fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    Ok(())
}
