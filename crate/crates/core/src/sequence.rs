//! Sequences, slice bookkeeping and component distances.
//!
//! A [`Sequence`] is an immutable run of components. Components are either
//! scalars or fixed-dimension vectors; the [`ComponentKind`] carries the
//! distance between two components, so every sequence distance built on top
//! of it works for any kind without knowing what the components are.
//!
//! Slices always point at their root sequence: taking a slice of a slice adds
//! the offsets and keeps the root's id as `pid`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Shape of one sequence component and the distance between two of them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ComponentKind {
    /// Real numbers compared by `|a - b|`.
    Scalar,
    /// Vectors of `dim` reals compared by the Lp metric of order `p`.
    Vector { dim: usize, p: f64 },
}

impl ComponentKind {
    pub fn vector(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("vector dimension must be at least 1".into()));
        }
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidParameter(format!("Lp order must be >= 1, got {p}")));
        }
        Ok(ComponentKind::Vector { dim, p })
    }

    /// Number of reals stored per component.
    pub fn dim(&self) -> usize {
        match *self {
            ComponentKind::Scalar => 1,
            ComponentKind::Vector { dim, .. } => dim,
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, ComponentKind::Scalar)
    }

    /// Distance between two components. Both must have this kind's arity.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let dim = self.dim();
        if a.len() != dim || b.len() != dim {
            let found = if a.len() != dim { a.len() } else { b.len() };
            return Err(Error::ArityMismatch {
                expected: format!("{dim} value(s) per component"),
                found: format!("{found}"),
            });
        }
        Ok(self.distance_unchecked(a, b))
    }

    #[inline]
    pub(crate) fn distance_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            ComponentKind::Scalar => (a[0] - b[0]).abs(),
            ComponentKind::Vector { p, .. } => lp_norm(a.iter().zip(b).map(|(x, y)| x - y), p),
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentKind::Scalar => f.write_str("scalar"),
            ComponentKind::Vector { dim, p } => write!(f, "vector(dim={dim}, p={p})"),
        }
    }
}

/// Free-standing form of [`ComponentKind::distance`].
pub fn component_distance(kind: ComponentKind, a: &[f64], b: &[f64]) -> Result<f64> {
    kind.distance(a, b)
}

pub(crate) fn lp_norm(diffs: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p == 1.0 {
        diffs.map(f64::abs).sum()
    } else if p == 2.0 {
        diffs.map(|d| d * d).sum::<f64>().sqrt()
    } else if p.is_infinite() {
        diffs.map(f64::abs).fold(0.0, f64::max)
    } else {
        diffs.map(|d| d.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Borrowed view of a run of components.
#[derive(Clone, Copy, Debug)]
pub struct SeqRef<'a> {
    kind: ComponentKind,
    values: &'a [f64],
}

impl<'a> SeqRef<'a> {
    pub fn new(kind: ComponentKind, values: &'a [f64]) -> Result<Self> {
        if !values.len().is_multiple_of(kind.dim()) {
            return Err(Error::ArityMismatch {
                expected: format!("a multiple of {} values", kind.dim()),
                found: format!("{} values", values.len()),
            });
        }
        Ok(SeqRef { kind, values })
    }

    pub fn scalar(values: &'a [f64]) -> Self {
        SeqRef { kind: ComponentKind::Scalar, values }
    }

    pub fn kind(&self) -> ComponentKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.kind.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize) -> &'a [f64] {
        let d = self.kind.dim();
        &self.values[i * d..(i + 1) * d]
    }

    /// Scalar components, or [`Error::NonScalar`].
    pub fn scalars(&self) -> Result<&'a [f64]> {
        if self.kind.is_scalar() {
            Ok(self.values)
        } else {
            Err(Error::NonScalar)
        }
    }
}

/// An immutable sequence or a slice of one.
///
/// Root sequences have no `pid` and offset 0. A slice's `pid` names the root
/// sequence and its offset is relative to that root.
#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    id: String,
    pid: Option<String>,
    offset: usize,
    kind: ComponentKind,
    values: Arc<[f64]>,
}

impl Sequence {
    pub fn new(id: impl Into<String>, kind: ComponentKind, values: impl Into<Arc<[f64]>>) -> Result<Self> {
        let values = values.into();
        SeqRef::new(kind, &values)?;
        Ok(Sequence { id: id.into(), pid: None, offset: 0, kind, values })
    }

    pub fn scalar(id: impl Into<String>, values: impl Into<Arc<[f64]>>) -> Self {
        Sequence { id: id.into(), pid: None, offset: 0, kind: ComponentKind::Scalar, values: values.into() }
    }

    /// Builds a slice record directly, e.g. for a transformed window that
    /// keeps the provenance of the raw window it came from.
    pub fn with_provenance(
        id: impl Into<String>,
        pid: Option<String>,
        offset: usize,
        kind: ComponentKind,
        values: impl Into<Arc<[f64]>>,
    ) -> Result<Self> {
        let mut s = Sequence::new(id, kind, values)?;
        s.pid = pid;
        s.offset = offset;
        Ok(s)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn pid(&self) -> Option<&str> {
        self.pid.as_deref()
    }

    /// The id of the root sequence: `pid` for slices, `id` otherwise.
    pub fn root_id(&self) -> &str {
        self.pid.as_deref().unwrap_or(&self.id)
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn kind(&self) -> ComponentKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.kind.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flat component values (`len * kind.dim()` reals).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn component(&self, k: usize) -> &[f64] {
        self.view().get(k)
    }

    pub fn view(&self) -> SeqRef<'_> {
        SeqRef { kind: self.kind, values: &self.values }
    }

    /// `S[i:j]`, both ends inclusive.
    pub fn subsequence(&self, i: usize, j: usize) -> Result<Sequence> {
        let len = self.len();
        if i > j || j >= len {
            return Err(Error::IndexOutOfBounds { i, j, len });
        }
        Ok(self.slice_unchecked(i, j - i + 1))
    }

    pub(crate) fn slice_unchecked(&self, start: usize, len: usize) -> Sequence {
        let d = self.kind.dim();
        let root = self.root_id().to_owned();
        let offset = self.offset + start;
        Sequence {
            id: format!("{root}[{offset}:{}]", offset + len - 1),
            pid: Some(root),
            offset,
            kind: self.kind,
            values: self.values[start * d..(start + len) * d].into(),
        }
    }
}
