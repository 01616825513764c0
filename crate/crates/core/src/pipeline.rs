//! Window-based subsequence matching skeleton.
//!
//! Data sequences are cut by the data slicer, each window is transformed and
//! inserted into the window index, and the whole sequence goes to storage.
//! A query is cut by the query slicer, each query window probes the index,
//! and every hit votes for the alignment `start = hit.offset - window.offset`.
//! Surviving alignments are fetched from storage in one grouped batch and
//! refined with the full distance.
//!
//! With a sliding data slicer and a disjoint query slicer this is FRM; the
//! swapped assignment gives DualMatch. For L2 refinement the window radius
//! `eps / sqrt(p)` guarantees no false dismissals, where `p` is the number of
//! disjoint windows that every alignment is guaranteed to contain:
//! `floor(|Q| / w)` query windows for FRM and `floor((|Q| - w + 1) / w)` data
//! windows for DualMatch. Transformed vectors lower-bound raw L2, so probing
//! the transformed index at that radius keeps the guarantee.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::config::ConfigError;
use crate::distance::DistanceSpec;
use crate::error::{Error, Result};
use crate::index::{DistanceIndex, IndexSpec, IndexedWindow};
use crate::sequence::{ComponentKind, Sequence};
use crate::storage::{AlignmentRequest, SequenceStorage, StorageSpec};
use crate::transform::TransformSpec;
use crate::window::{SlicerKind, WindowConfig};

/// Component kind of the sequences a skeleton handles and the distance used
/// to refine candidates.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceType {
    pub kind: ComponentKind,
    pub refine: DistanceSpec,
}

impl SequenceType {
    pub fn float_l2() -> Self {
        SequenceType { kind: ComponentKind::Scalar, refine: DistanceSpec::L2 }
    }
}

/// Slot assignment for [`assemble`]. Slot names in errors match the field
/// names used by configuration files.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PipelineConfig {
    pub sequence_type: Option<SequenceType>,
    pub storage: Option<StorageSpec>,
    pub index: Option<IndexSpec>,
    pub data_slicer: Option<WindowConfig>,
    pub query_slicer: Option<WindowConfig>,
    pub width: Option<usize>,
    /// Identity when absent.
    pub transformer: Option<TransformSpec>,
}

impl PipelineConfig {
    /// FRM over scalar L2 sequences: sliding data windows, disjoint query windows.
    pub fn frm(width: usize, transformer: TransformSpec, index: IndexSpec) -> Result<Self> {
        Ok(PipelineConfig {
            sequence_type: Some(SequenceType::float_l2()),
            storage: Some(StorageSpec::Memory),
            index: Some(index),
            data_slicer: Some(WindowConfig::sliding(width)?),
            query_slicer: Some(WindowConfig::disjoint(width)?),
            width: Some(width),
            transformer: Some(transformer),
        })
    }

    /// DualMatch over scalar L2 sequences: disjoint data windows, sliding query windows.
    pub fn dual_match(width: usize, transformer: TransformSpec, index: IndexSpec) -> Result<Self> {
        let mut c = Self::frm(width, transformer, index)?;
        std::mem::swap(&mut c.data_slicer, &mut c.query_slicer);
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Sliding data windows, disjoint query windows.
    Frm,
    /// Disjoint data windows, sliding query windows.
    DualMatch,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Frm => "FRM",
            Strategy::DualMatch => "DualMatch",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    pub pid: String,
    pub start: usize,
    pub distance: f64,
}

fn match_order(a: &MatchResult, b: &MatchResult) -> std::cmp::Ordering {
    a.distance.total_cmp(&b.distance).then_with(|| a.pid.cmp(&b.pid)).then_with(|| a.start.cmp(&b.start))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub query_windows: usize,
    /// Query components not covered by any query window.
    pub dropped_tail: usize,
    pub window_hits: usize,
    /// Distinct in-bounds alignments that were refined.
    pub candidates: usize,
    /// Stored sequences visited by the grouped fetch.
    pub sequences_visited: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Answer {
    pub matches: Vec<MatchResult>,
    /// True when the answer is guaranteed to equal an exhaustive scan.
    pub exact: bool,
    pub stats: SearchStats,
}

#[derive(Debug, Default)]
pub struct IngestReport {
    pub sequences: usize,
    pub windows: usize,
    pub skipped: Vec<(String, Error)>,
}

type QueryWindow = (usize, Vec<f64>);

/// Assembled, validated skeleton with its live index and storage.
pub struct Skeleton {
    config: PipelineConfig,
    sequence_type: SequenceType,
    data_slicer: WindowConfig,
    query_slicer: WindowConfig,
    transformer: TransformSpec,
    width: usize,
    index: Box<dyn DistanceIndex>,
    storage: Box<dyn SequenceStorage>,
}

impl fmt::Debug for Skeleton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Skeleton")
            .field("config", &self.config)
            .field("indexed_windows", &self.index.len())
            .field("stored_sequences", &self.storage.len())
            .finish()
    }
}

fn slot<T: Clone>(value: &Option<T>, name: &'static str) -> Result<T> {
    value.clone().ok_or_else(|| ConfigError::MissingSlot { slot: name }.into())
}

/// Validates slot assignments and builds a skeleton with empty index and storage.
pub fn assemble(config: PipelineConfig) -> Result<Skeleton> {
    let sequence_type = slot(&config.sequence_type, "sequenceType")?;
    let storage = slot(&config.storage, "seqStorage")?;
    let index = slot(&config.index, "index")?;
    let data_slicer = slot(&config.data_slicer, "dataSlicer")?;
    let query_slicer = slot(&config.query_slicer, "querySlicer")?;
    let width = slot(&config.width, "w")?;
    let transformer = config.transformer.unwrap_or(TransformSpec::Identity);

    for (name, slicer) in [("dataSlicer", data_slicer), ("querySlicer", query_slicer)] {
        if slicer.width() != width {
            return Err(ConfigError::WidthMismatch { slot: name, expected: width, found: slicer.width() }.into());
        }
    }
    if data_slicer.kind() == query_slicer.kind() {
        return Err(ConfigError::SlicerCombination { data: data_slicer.kind(), query: query_slicer.kind() }.into());
    }
    transformer
        .validate(width, sequence_type.kind)
        .map_err(|e| ConfigError::InvalidSlot { slot: "transformer", msg: e.to_string() })?;
    let storage = storage.create(sequence_type.kind)?;
    Ok(Skeleton {
        index: index.create(),
        storage,
        sequence_type,
        data_slicer,
        query_slicer,
        transformer,
        width,
        config,
    })
}

impl Skeleton {
    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn strategy(&self) -> Strategy {
        match self.data_slicer.kind() {
            SlicerKind::Sliding => Strategy::Frm,
            SlicerKind::Disjoint => Strategy::DualMatch,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn sequence_type(&self) -> &SequenceType {
        &self.sequence_type
    }

    pub fn transformer(&self) -> TransformSpec {
        self.transformer
    }

    pub fn index(&self) -> &dyn DistanceIndex {
        self.index.as_ref()
    }

    pub fn storage(&self) -> &dyn SequenceStorage {
        self.storage.as_ref()
    }

    /// Shortest query the skeleton accepts.
    pub fn min_query_len(&self) -> usize {
        match self.strategy() {
            Strategy::Frm => self.width,
            Strategy::DualMatch => 2 * self.width - 1,
        }
    }

    fn check_kind(&self, s: &Sequence) -> Result<()> {
        if s.kind() != self.sequence_type.kind {
            return Err(Error::ArityMismatch {
                expected: self.sequence_type.kind.to_string(),
                found: s.kind().to_string(),
            });
        }
        Ok(())
    }

    /// Stores `s` and indexes its data windows. Returns the window count.
    pub fn index_sequence(&mut self, s: &Sequence) -> Result<usize> {
        self.check_kind(s)?;
        let windows = self.data_slicer.slice(s)?;
        self.storage.store(s)?;
        let mut count = 0;
        for w in windows {
            let vector = self.transformer.index_vector(w.values(), s.kind())?;
            self.index.insert(IndexedWindow::new(vector, s.id(), w.offset()))?;
            count += 1;
        }
        Ok(count)
    }

    /// Indexes every sequence, skipping (and reporting) the ones that fail,
    /// then rebuilds the index.
    pub fn ingest<'a>(&mut self, sequences: impl IntoIterator<Item = &'a Sequence>) -> IngestReport {
        let mut report = IngestReport::default();
        for s in sequences {
            match self.index_sequence(s) {
                Ok(n) => {
                    report.sequences += 1;
                    report.windows += n;
                }
                Err(e) => report.skipped.push((s.id().to_owned(), e)),
            }
        }
        self.build_index();
        report
    }

    pub fn build_index(&mut self) {
        self.index.build();
    }

    /// Re-inserts stored sequences and pre-computed index items, e.g. from a snapshot.
    pub fn restore(&mut self, sequences: &[Sequence], items: Vec<IndexedWindow>) -> Result<()> {
        for s in sequences {
            self.check_kind(s)?;
            self.storage.store(s)?;
        }
        for item in items {
            self.index.insert(item)?;
        }
        self.build_index();
        Ok(())
    }

    /// Whether range answers are provably exhaustive: L2 refinement over an
    /// L2 window index whose vectors lower-bound the refinement distance.
    pub fn range_is_exact(&self) -> bool {
        let component_l2 = match self.sequence_type.kind {
            ComponentKind::Scalar => true,
            ComponentKind::Vector { p, .. } => p == 2.0,
        };
        self.sequence_type.refine.is_l2() && self.index.distance().is_l2() && component_l2
    }

    /// Query windows as `(offset, index vector)` plus the uncovered tail length.
    fn query_windows(&self, q: &Sequence) -> Result<(Vec<QueryWindow>, usize)> {
        self.check_kind(q)?;
        let min = self.min_query_len();
        if q.len() < min {
            return Err(Error::QueryTooShort { len: q.len(), min });
        }
        let dropped = self.query_slicer.dropped_tail(q.len());
        if dropped > 0 {
            log::debug!("query {}: {} trailing component(s) not covered by query windows", q.id(), dropped);
        }
        let windows = self
            .query_slicer
            .slice(q)?
            .map(|w| Ok((w.offset() - q.offset(), self.transformer.index_vector(w.values(), q.kind())?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((windows, dropped))
    }

    /// Window probe radius for a refinement radius `eps`.
    pub fn window_radius(&self, query_len: usize, eps: f64) -> f64 {
        let p = match self.strategy() {
            Strategy::Frm => self.query_slicer.window_count(query_len),
            Strategy::DualMatch => (query_len + 1 - self.width) / self.width,
        }
        .max(1);
        // squared-sum distances compare against eps on the squared scale
        let base = if self.sequence_type.refine.is_squared() { eps.sqrt() } else { eps };
        let r = base / (p as f64).sqrt();
        r * (1.0 + 1e-9) + 1e-12
    }

    /// Maps window hits to distinct in-bounds alignment starts.
    fn align<'a>(
        &self,
        query_len: usize,
        hits: impl IntoIterator<Item = (usize, &'a IndexedWindow)>,
        stats: &mut SearchStats,
    ) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        for (q_off, item) in hits {
            stats.window_hits += 1;
            let Some(start) = item.offset.checked_sub(q_off) else { continue };
            match self.storage.sequence_len(&item.pid) {
                Some(len) if start + query_len <= len => {
                    out.insert((item.pid.clone(), start));
                }
                _ => {}
            }
        }
        out
    }

    fn refine(
        &self,
        q: &Sequence,
        alignments: BTreeSet<(String, usize)>,
        stats: &mut SearchStats,
    ) -> Result<Vec<MatchResult>> {
        let requests: Vec<AlignmentRequest> =
            alignments.into_iter().map(|(pid, start)| AlignmentRequest { pid, start, len: q.len() }).collect();
        stats.candidates = requests.len();
        let fetched = self.storage.grouped_fetch(&requests);
        stats.sequences_visited = fetched.visits;
        let refine = &self.sequence_type.refine;
        let mut matches = requests
            .into_par_iter()
            .zip(fetched.slices.into_par_iter())
            .map(|(req, slice)| {
                let distance = refine.evaluate(q.view(), slice?.view())?;
                Ok(MatchResult { pid: req.pid, start: req.start, distance })
            })
            .collect::<Result<Vec<_>>>()?;
        matches.sort_by(match_order);
        Ok(matches)
    }

    /// All alignments within `eps` of `q` under the refinement distance.
    pub fn range_search(&self, q: &Sequence, eps: f64) -> Result<Answer> {
        if eps.is_nan() || eps < 0.0 {
            return Err(Error::InvalidParameter(format!("eps must be >= 0, got {eps}")));
        }
        let (windows, dropped) = self.query_windows(q)?;
        let mut stats = SearchStats { query_windows: windows.len(), dropped_tail: dropped, ..Default::default() };
        let radius = self.window_radius(q.len(), eps);
        let mut hits = Vec::new();
        for (q_off, vector) in &windows {
            hits.extend(self.index.range_query(vector, radius)?.into_iter().map(|n| (*q_off, n.item)));
        }
        let alignments = self.align(q.len(), hits, &mut stats);
        let mut matches = self.refine(q, alignments, &mut stats)?;
        matches.retain(|m| m.distance <= eps);
        Ok(Answer { matches, exact: self.range_is_exact(), stats })
    }

    /// Approximate k nearest alignments: each query window pulls its
    /// `k * multiplier` nearest index windows and the union is refined.
    /// Exact only when every probe pulled the whole index.
    pub fn knn_search(&self, q: &Sequence, k: usize, multiplier: usize) -> Result<Answer> {
        if k == 0 || multiplier == 0 {
            return Err(Error::InvalidParameter("k and the candidate multiplier must be at least 1".into()));
        }
        let (windows, dropped) = self.query_windows(q)?;
        let mut stats = SearchStats { query_windows: windows.len(), dropped_tail: dropped, ..Default::default() };
        let pull = k.saturating_mul(multiplier);
        let mut hits = Vec::new();
        for (q_off, vector) in &windows {
            hits.extend(self.index.knn_query(vector, pull)?.into_iter().map(|n| (*q_off, n.item)));
        }
        let alignments = self.align(q.len(), hits, &mut stats);
        let mut matches = self.refine(q, alignments, &mut stats)?;
        matches.truncate(k);
        Ok(Answer { matches, exact: pull >= self.index.len(), stats })
    }
}

/// Every alignment of `q` against every stored sequence within `eps`.
pub fn brute_force_range(
    storage: &dyn SequenceStorage,
    q: &Sequence,
    refine: &DistanceSpec,
    eps: f64,
) -> Result<Vec<MatchResult>> {
    let mut all = all_alignments(storage, q, refine)?;
    all.retain(|m| m.distance <= eps);
    Ok(all)
}

/// The `k` best alignments of `q` over all stored sequences.
pub fn brute_force_knn(
    storage: &dyn SequenceStorage,
    q: &Sequence,
    refine: &DistanceSpec,
    k: usize,
) -> Result<Vec<MatchResult>> {
    let mut all = all_alignments(storage, q, refine)?;
    all.truncate(k);
    Ok(all)
}

fn all_alignments(storage: &dyn SequenceStorage, q: &Sequence, refine: &DistanceSpec) -> Result<Vec<MatchResult>> {
    let mut out = Vec::new();
    for id in storage.ids() {
        let s = storage.get(&id)?;
        for start in 0..(s.len() + 1).saturating_sub(q.len()) {
            let a = s.subsequence(start, start + q.len() - 1)?;
            out.push(MatchResult { pid: id.clone(), start, distance: refine.evaluate(q.view(), a.view())? });
        }
    }
    out.sort_by(match_order);
    Ok(out)
}
