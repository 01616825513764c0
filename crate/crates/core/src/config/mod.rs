//! Text configuration files that wire module instances into a skeleton.
//!
//! ```text
//! slidingSlicer = namedInstanceAdd
//! slidingSlicer.param.1 = smf.modules.slicer.SlidingSlicer(<w>)
//!
//! startSearchAlg = algorithmStart
//! startSearchAlg.param.1 = smf.algorithms.VariableQueryAlgorithm
//! ...
//! ```
//!
//! Parsing ([`parse_config`]) only checks syntax; type paths and instance
//! references are resolved by [`instantiate`] against a [`ModuleRegistry`].

mod parse;
mod registry;

use thiserror::Error;

pub use parse::{parse_config, parse_value, render_config, substitute, Bindings, ConfigAction, Value, Verb};
pub use registry::{instantiate, AlgorithmHandle, AlgorithmKind, Arg, Module, ModuleRegistry};

use crate::window::SlicerKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("line {line}: unknown action verb {verb:?}")]
    UnknownVerb { line: usize, verb: String },

    #[error("line {line}: action {name:?} declared twice")]
    DuplicateAction { line: usize, name: String },

    #[error("line {line}: parameter for undeclared action {name:?}")]
    UndeclaredAction { line: usize, name: String },

    #[error("line {line}: parameter {index} of action {action:?} set twice")]
    DuplicateParam { line: usize, action: String, index: usize },

    #[error("line {line}: parameters of action {action:?} are not contiguous (param {missing} is missing)")]
    NonContiguousParams { line: usize, action: String, missing: usize },

    #[error("action {action:?} param {param}: unresolved placeholder <{name}>")]
    UnresolvedPlaceholder { action: String, param: usize, name: String },

    #[error("action {action:?}: unknown type path {path:?}")]
    UnknownTypePath { action: String, path: String },

    #[error("action {action:?}: unknown instance {name:?}")]
    UnknownInstance { action: String, name: String },

    #[error("action {action:?}: {path}: {msg}")]
    Constructor { action: String, path: String, msg: String },

    #[error("action {action:?} param {param}: {msg}")]
    BadParam { action: String, param: usize, msg: String },

    #[error("missing slot {slot:?}")]
    MissingSlot { slot: &'static str },

    #[error("slot {slot:?} has window width {found}, skeleton width is {expected}")]
    WidthMismatch { slot: &'static str, expected: usize, found: usize },

    #[error("slicer combination {data} (dataSlicer) / {query} (querySlicer): exactly one must be sliding")]
    SlicerCombination { data: SlicerKind, query: SlicerKind },

    #[error("slot {slot:?}: {msg}")]
    InvalidSlot { slot: &'static str, msg: String },

    #[error("configuration has no algorithmStart action")]
    NoAlgorithm,

    #[error("action {action:?}: only one algorithmStart action is supported")]
    MultipleAlgorithms { action: String },
}
