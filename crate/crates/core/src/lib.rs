//! Subsequence matching over windowed, transformed and indexed sequences.
//!
//! Stored sequences are cut into fixed-width windows, reduced to short
//! feature vectors and kept in a distance index. Queries of arbitrary length
//! are answered by probing the index with query windows, mapping hits back to
//! candidate alignments and refining them against the stored data.
//!
//! ```
//! use subseq_core::{pipeline::{assemble, PipelineConfig}, IndexSpec, Sequence, TransformSpec};
//!
//! let cfg = PipelineConfig::frm(4, TransformSpec::dft(2).unwrap(), IndexSpec::linear()).unwrap();
//! let mut sk = assemble(cfg).unwrap();
//! let data = Sequence::scalar("s", vec![0.0, 1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0, 0.0, 1.0]);
//! sk.ingest([&data]);
//! let q = data.subsequence(2, 9).unwrap();
//! let answer = sk.range_search(&q, 1e-9).unwrap();
//! assert_eq!(answer.matches[0].start, 2);
//! ```

pub mod config;
pub mod dataset;
pub mod distance;
pub mod error;
pub mod index;
pub mod pipeline;
pub mod sequence;
pub mod storage;
pub mod transform;
pub mod window;

pub use distance::{Band, DistanceSpec};
pub use error::{Error, Result};
pub use index::{DistanceIndex, IndexKind, IndexSpec, IndexedWindow};
pub use pipeline::{Answer, MatchResult, Skeleton, Strategy};
pub use sequence::{ComponentKind, SeqRef, Sequence};
pub use storage::{SequenceStorage, StorageSpec};
pub use transform::TransformSpec;
pub use window::{SlicerKind, WindowConfig};
