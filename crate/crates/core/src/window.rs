//! Slicers: cut a sequence into fixed-width windows.

use std::fmt;

use crate::error::{Error, Result};
use crate::sequence::Sequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlicerKind {
    /// A window at every offset.
    Sliding,
    /// Non-overlapping windows at offsets 0, w, 2w, ...; an incomplete tail is dropped.
    Disjoint,
}

impl fmt::Display for SlicerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlicerKind::Sliding => "sliding",
            SlicerKind::Disjoint => "disjoint",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowConfig {
    width: usize,
    kind: SlicerKind,
}

impl WindowConfig {
    pub fn new(width: usize, kind: SlicerKind) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidParameter("window width must be at least 1".into()));
        }
        Ok(WindowConfig { width, kind })
    }

    pub fn sliding(width: usize) -> Result<Self> {
        Self::new(width, SlicerKind::Sliding)
    }

    pub fn disjoint(width: usize) -> Result<Self> {
        Self::new(width, SlicerKind::Disjoint)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn kind(&self) -> SlicerKind {
        self.kind
    }

    fn step(&self) -> usize {
        match self.kind {
            SlicerKind::Sliding => 1,
            SlicerKind::Disjoint => self.width,
        }
    }

    /// Number of windows produced for a sequence of length `len`.
    pub fn window_count(&self, len: usize) -> usize {
        if len < self.width {
            0
        } else {
            (len - self.width) / self.step() + 1
        }
    }

    /// Components past the last window (always 0 for sliding windows).
    pub fn dropped_tail(&self, len: usize) -> usize {
        match self.window_count(len) {
            0 => len,
            n => len - ((n - 1) * self.step() + self.width),
        }
    }

    /// Offsets of the windows, relative to the sliced sequence.
    pub fn offsets(&self, len: usize) -> impl Iterator<Item = usize> {
        let step = self.step();
        (0..self.window_count(len)).map(move |k| k * step)
    }

    pub fn slice<'a>(&self, s: &'a Sequence) -> Result<Windows<'a>> {
        if s.len() < self.width {
            return Err(Error::SequenceTooShort { id: s.id().to_owned(), len: s.len(), width: self.width });
        }
        Ok(Windows { source: s, width: self.width, step: self.step(), next: 0, remaining: self.window_count(s.len()) })
    }
}

/// Lazy iterator over the windows of one sequence, in ascending offset order.
#[derive(Clone, Debug)]
pub struct Windows<'a> {
    source: &'a Sequence,
    width: usize,
    step: usize,
    next: usize,
    remaining: usize,
}

impl Iterator for Windows<'_> {
    type Item = Sequence;

    fn next(&mut self) -> Option<Sequence> {
        if self.remaining == 0 {
            return None;
        }
        let w = self.source.slice_unchecked(self.next, self.width);
        self.next += self.step;
        self.remaining -= 1;
        Some(w)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for Windows<'_> {}

pub fn sliding_slice(s: &Sequence, width: usize) -> Result<Windows<'_>> {
    WindowConfig::sliding(width)?.slice(s)
}

pub fn disjoint_slice(s: &Sequence, width: usize) -> Result<Windows<'_>> {
    WindowConfig::disjoint(width)?.slice(s)
}
