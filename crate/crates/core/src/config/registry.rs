//! Module registry and instantiation of parsed configurations.
//!
//! Type paths are plain registry keys. The default registry carries the
//! dotted `smf.*` paths plus the last path segment of each as a short alias.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use indexmap::IndexMap;

use super::parse::{substitute, Bindings, ConfigAction, Value, Verb};
use super::ConfigError;
use crate::distance::{Band, DistanceSpec};
use crate::error::Result;
use crate::index::{IndexKind, IndexSpec};
use crate::pipeline::{assemble, PipelineConfig, SequenceType, Skeleton};
use crate::sequence::ComponentKind;
use crate::storage::StorageSpec;
use crate::transform::TransformSpec;
use crate::window::WindowConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgorithmKind {
    /// Variable-length query matching over a window index.
    VariableQuery,
}

/// A constructed module instance.
#[derive(Clone, Debug, PartialEq)]
pub enum Module {
    Slicer(WindowConfig),
    Transformer(TransformSpec),
    Distance(DistanceSpec),
    Index(IndexSpec),
    Storage(StorageSpec),
    SequenceType(SequenceType),
    Algorithm(AlgorithmKind),
}

impl Module {
    fn type_name(&self) -> &'static str {
        match self {
            Module::Slicer(_) => "slicer",
            Module::Transformer(_) => "transformer",
            Module::Distance(_) => "distance",
            Module::Index(_) => "index",
            Module::Storage(_) => "storage",
            Module::SequenceType(_) => "sequence type",
            Module::Algorithm(_) => "algorithm",
        }
    }
}

/// A resolved constructor argument.
#[derive(Clone, Debug, PartialEq)]
pub enum Arg {
    Int(i64),
    Real(f64),
    Str(String),
    Module(Module),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Int(i) => write!(f, "integer {i}"),
            Arg::Real(x) => write!(f, "real {x}"),
            Arg::Str(s) => write!(f, "string {s:?}"),
            Arg::Module(m) => write!(f, "{} instance", m.type_name()),
        }
    }
}

impl Arg {
    fn count(&self) -> std::result::Result<usize, String> {
        match *self {
            Arg::Int(i) if i >= 0 => Ok(i as usize),
            ref other => Err(format!("expected a non-negative integer, got {other}")),
        }
    }

    fn positive(&self) -> std::result::Result<usize, String> {
        match self.count()? {
            0 => Err("expected a positive integer, got 0".into()),
            n => Ok(n),
        }
    }

    fn real(&self) -> std::result::Result<f64, String> {
        match *self {
            Arg::Int(i) => Ok(i as f64),
            Arg::Real(x) => Ok(x),
            ref other => Err(format!("expected a number, got {other}")),
        }
    }

    fn distance(&self) -> std::result::Result<DistanceSpec, String> {
        match self {
            Arg::Module(Module::Distance(d)) => Ok(d.clone()),
            other => Err(format!("expected a distance instance, got {other}")),
        }
    }
}

pub type Constructor = dyn Fn(&[Arg]) -> std::result::Result<Module, String> + Send + Sync;

/// Maps type paths to constructors and holds instances created outside the
/// configuration file (visible to every action by name).
#[derive(Clone)]
pub struct ModuleRegistry {
    constructors: HashMap<String, Arc<Constructor>>,
    instances: IndexMap<String, Module>,
}

impl fmt::Debug for ModuleRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut paths: Vec<&String> = self.constructors.keys().collect();
        paths.sort();
        f.debug_struct("ModuleRegistry").field("paths", &paths).field("instances", &self.instances).finish()
    }
}

impl Default for ModuleRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

fn arity(args: &[Arg], min: usize, max: usize) -> std::result::Result<(), String> {
    if args.len() < min || args.len() > max {
        let want = if min == max { format!("{min}") } else { format!("{min} to {max}") };
        return Err(format!("expected {want} argument(s), got {}", args.len()));
    }
    Ok(())
}

fn checked(d: DistanceSpec) -> std::result::Result<Module, String> {
    d.checked().map(Module::Distance).map_err(|e| e.to_string())
}

fn index_ctor(kind: IndexKind) -> impl Fn(&[Arg]) -> std::result::Result<Module, String> {
    move |args| {
        arity(args, 0, 1)?;
        let distance = args.first().map(Arg::distance).transpose()?.unwrap_or(DistanceSpec::L2);
        Ok(Module::Index(IndexSpec { kind, distance }))
    }
}

impl ModuleRegistry {
    pub fn empty() -> Self {
        ModuleRegistry { constructors: HashMap::new(), instances: IndexMap::new() }
    }

    /// Registry with every shipped module under its dotted path and alias.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register_with_alias("smf.modules.slicer.SlidingSlicer", |a| {
            arity(a, 1, 1)?;
            WindowConfig::sliding(a[0].positive()?).map(Module::Slicer).map_err(|e| e.to_string())
        });
        r.register_with_alias("smf.modules.slicer.DisjointSlicer", |a| {
            arity(a, 1, 1)?;
            WindowConfig::disjoint(a[0].positive()?).map(Module::Slicer).map_err(|e| e.to_string())
        });

        r.register_with_alias("smf.modules.transformer.IdentityTransformer", |a| {
            arity(a, 0, 0)?;
            Ok(Module::Transformer(TransformSpec::Identity))
        });
        r.register_with_alias("smf.modules.transformer.DFTTransformer", |a| {
            arity(a, 1, 1)?;
            Ok(Module::Transformer(TransformSpec::Dft { coefficients: a[0].positive()? }))
        });
        r.register_with_alias("smf.modules.transformer.PAATransformer", |a| {
            arity(a, 1, 1)?;
            Ok(Module::Transformer(TransformSpec::Paa { segments: a[0].positive()? }))
        });

        r.register_with_alias("smf.modules.index.LinearScanIndex", index_ctor(IndexKind::LinearScan));
        r.register_with_alias("smf.modules.index.PivotTableIndex", index_ctor(IndexKind::PivotTable));
        // adapter around an index algorithm instance; the wrapped index is used as is
        r.register_with_alias("smf.modules.index.ApproximateAlgorithmDistanceIndex", |a| {
            arity(a, 1, 1)?;
            match &a[0] {
                Arg::Module(m @ Module::Index(_)) => Ok(m.clone()),
                other => Err(format!("expected an index instance, got {other}")),
            }
        });

        r.register_with_alias("smf.modules.seqstorage.MemorySequenceStorage", |a| {
            arity(a, 0, 0)?;
            Ok(Module::Storage(StorageSpec::Memory))
        });
        r.register_with_alias("smf.modules.seqstorage.FileSequenceStorage", |a| {
            arity(a, 1, 1)?;
            match &a[0] {
                Arg::Str(p) => Ok(Module::Storage(StorageSpec::File(PathBuf::from(p)))),
                other => Err(format!("expected a file path string, got {other}")),
            }
        });

        r.register_with_alias("smf.distance.L2", |a| {
            arity(a, 0, 0)?;
            Ok(Module::Distance(DistanceSpec::L2))
        });
        r.register_with_alias("smf.distance.Lp", |a| {
            arity(a, 1, 1)?;
            checked(DistanceSpec::Lp { p: a[0].real()? })
        });
        r.register_with_alias("smf.distance.DTW", |a| {
            arity(a, 0, 1)?;
            let band = a.first().map(Arg::count).transpose()?.map_or(Band::Unbounded, Band::Width);
            checked(DistanceSpec::Dtw { band })
        });
        r.register_with_alias("smf.distance.LBKeogh", |a| {
            arity(a, 1, 1)?;
            checked(DistanceSpec::LbKeogh { band: a[0].count()? })
        });
        r.register_with_alias("smf.distance.LBPAA", |a| {
            arity(a, 2, 2)?;
            checked(DistanceSpec::LbPaa { band: a[0].count()?, segments: a[1].positive()? })
        });
        r.register_with_alias("smf.distance.ERP", |a| {
            arity(a, 1, usize::MAX)?;
            checked(DistanceSpec::Erp { gap: a.iter().map(Arg::real).collect::<std::result::Result<_, _>>()? })
        });
        r.register_with_alias("smf.distance.EDR", |a| {
            arity(a, 1, 1)?;
            checked(DistanceSpec::Edr { eps: a[0].real()? })
        });
        r.register_with_alias("smf.distance.LCSS", |a| {
            arity(a, 2, 2)?;
            checked(DistanceSpec::Lcss { eps: a[0].real()?, delta: a[1].count()? })
        });

        r.register_with_alias("smf.sequence.impl.SequenceFloatL2", |a| {
            arity(a, 0, 0)?;
            Ok(Module::SequenceType(SequenceType::float_l2()))
        });
        r.register_with_alias("smf.sequence.impl.SequenceFloat", |a| {
            arity(a, 1, 1)?;
            Ok(Module::SequenceType(SequenceType { kind: ComponentKind::Scalar, refine: a[0].distance()? }))
        });
        r.register_with_alias("smf.sequence.impl.SequenceVectorL2", |a| {
            arity(a, 1, 1)?;
            let kind = ComponentKind::vector(a[0].positive()?, 2.0).map_err(|e| e.to_string())?;
            Ok(Module::SequenceType(SequenceType { kind, refine: DistanceSpec::L2 }))
        });
        r.register_with_alias("smf.sequence.impl.SequenceVector", |a| {
            arity(a, 3, 3)?;
            let kind = ComponentKind::vector(a[0].positive()?, a[1].real()?).map_err(|e| e.to_string())?;
            Ok(Module::SequenceType(SequenceType { kind, refine: a[2].distance()? }))
        });

        r.register_with_alias("smf.algorithms.VariableQueryAlgorithm", |a| {
            arity(a, 0, 0)?;
            Ok(Module::Algorithm(AlgorithmKind::VariableQuery))
        });
        r
    }

    pub fn register(
        &mut self,
        path: impl Into<String>,
        ctor: impl Fn(&[Arg]) -> std::result::Result<Module, String> + Send + Sync + 'static,
    ) {
        self.constructors.insert(path.into(), Arc::new(ctor));
    }

    fn register_with_alias(
        &mut self,
        path: &str,
        ctor: impl Fn(&[Arg]) -> std::result::Result<Module, String> + Send + Sync + 'static,
    ) {
        self.register(path, ctor);
        let alias = path.rsplit('.').next().expect("non-empty path");
        self.alias(alias, path);
    }

    /// Makes `alias` resolve to the constructor registered under `path`.
    pub fn alias(&mut self, alias: impl Into<String>, path: &str) {
        if let Some(c) = self.constructors.get(path).cloned() {
            self.constructors.insert(alias.into(), c);
        }
    }

    pub fn contains(&self, path: &str) -> bool {
        self.constructors.contains_key(path)
    }

    /// Registers an instance created outside the configuration file.
    pub fn add_instance(&mut self, name: impl Into<String>, module: Module) {
        self.instances.insert(name.into(), module);
    }

    pub fn instances(&self) -> &IndexMap<String, Module> {
        &self.instances
    }

    pub fn construct(&self, path: &str, args: &[Arg]) -> std::result::Result<Module, String> {
        let ctor = self.constructors.get(path).ok_or_else(|| format!("unknown type path {path:?}"))?;
        ctor(args)
    }

    /// Resolves a value (constructor call, reference or literal) with
    /// `instances` as the named-instance scope.
    pub fn resolve(
        &self,
        value: &Value,
        instances: &IndexMap<String, Module>,
        action: &str,
        param: usize,
    ) -> std::result::Result<Arg, ConfigError> {
        Ok(match value {
            Value::Int(i) => Arg::Int(*i),
            Value::Real(x) => Arg::Real(*x),
            Value::Str(s) => Arg::Str(s.clone()),
            Value::Placeholder(name) => {
                return Err(ConfigError::UnresolvedPlaceholder { action: action.into(), param, name: name.clone() })
            }
            // a bare name is an instance first, then a zero-argument type
            Value::Ref(name) => match instances.get(name) {
                Some(m) => Arg::Module(m.clone()),
                None if self.constructors.contains_key(name) => {
                    let call = Value::Type { path: name.clone(), args: None };
                    return self.resolve(&call, instances, action, param);
                }
                None => return Err(ConfigError::UnknownInstance { action: action.into(), name: name.clone() }),
            },
            Value::Type { path, args } => {
                let ctor = self
                    .constructors
                    .get(path)
                    .ok_or_else(|| ConfigError::UnknownTypePath { action: action.into(), path: path.clone() })?;
                let args = args
                    .iter()
                    .flatten()
                    .map(|a| self.resolve(a, instances, action, param))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                Arg::Module(ctor(&args).map_err(|msg| ConfigError::Constructor {
                    action: action.into(),
                    path: path.clone(),
                    msg,
                })?)
            }
        })
    }
}

/// A started algorithm: the resolved configuration and its live skeleton.
#[derive(Debug)]
pub struct AlgorithmHandle {
    pub name: String,
    pub algorithm: AlgorithmKind,
    /// Named instances after all `namedInstanceAdd` actions ran.
    pub instances: IndexMap<String, Module>,
    pub skeleton: Skeleton,
}

impl AlgorithmHandle {
    pub fn config(&self) -> &PipelineConfig {
        self.skeleton.config()
    }
}

impl std::ops::Deref for AlgorithmHandle {
    type Target = Skeleton;

    fn deref(&self) -> &Skeleton {
        &self.skeleton
    }
}

impl std::ops::DerefMut for AlgorithmHandle {
    fn deref_mut(&mut self) -> &mut Skeleton {
        &mut self.skeleton
    }
}

/// Positional slots of `VariableQueryAlgorithm`, starting at `param.2`.
const VARIABLE_QUERY_SLOTS: [&str; 7] =
    ["sequenceType", "seqStorage", "index", "dataSlicer", "querySlicer", "w", "transformer"];
const VARIABLE_QUERY_REQUIRED: usize = 6;

fn variable_query_config(action: &str, args: &[Arg]) -> std::result::Result<PipelineConfig, ConfigError> {
    if args.len() < VARIABLE_QUERY_REQUIRED {
        return Err(ConfigError::MissingSlot { slot: VARIABLE_QUERY_SLOTS[args.len()] });
    }
    if args.len() > VARIABLE_QUERY_SLOTS.len() {
        return Err(ConfigError::BadParam {
            action: action.into(),
            param: VARIABLE_QUERY_SLOTS.len() + 2,
            msg: "unexpected extra parameter".into(),
        });
    }
    let wrong = |i: usize, want: &str| ConfigError::BadParam {
        action: action.into(),
        param: i + 2,
        msg: format!("slot {:?} expects {want}, got {}", VARIABLE_QUERY_SLOTS[i], args[i]),
    };
    let mut c = PipelineConfig::default();
    for (i, arg) in args.iter().enumerate() {
        match (i, arg) {
            (0, Arg::Module(Module::SequenceType(t))) => c.sequence_type = Some(t.clone()),
            (0, _) => return Err(wrong(i, "a sequence type")),
            (1, Arg::Module(Module::Storage(s))) => c.storage = Some(s.clone()),
            (1, _) => return Err(wrong(i, "a storage instance")),
            (2, Arg::Module(Module::Index(x))) => c.index = Some(x.clone()),
            (2, _) => return Err(wrong(i, "an index instance")),
            (3, Arg::Module(Module::Slicer(s))) => c.data_slicer = Some(*s),
            (4, Arg::Module(Module::Slicer(s))) => c.query_slicer = Some(*s),
            (3 | 4, _) => return Err(wrong(i, "a slicer instance")),
            (5, a) => c.width = Some(a.positive().map_err(|_| wrong(i, "a positive integer"))?),
            (6, Arg::Module(Module::Transformer(t))) => c.transformer = Some(*t),
            (6, _) => return Err(wrong(i, "a transformer instance")),
            _ => unreachable!("arity checked above"),
        }
    }
    Ok(c)
}

/// Runs the actions in order and starts the algorithm.
///
/// `namedInstanceAdd` actions take one parameter, the instance to create;
/// later actions may refer to earlier names. The single `algorithmStart`
/// action takes the algorithm type path first, then the skeleton slots:
/// for `VariableQueryAlgorithm` the sequence type, storage, index, data
/// slicer, query slicer, window width and an optional transformer.
pub fn instantiate(actions: &[ConfigAction], registry: &ModuleRegistry, bindings: &Bindings) -> Result<AlgorithmHandle> {
    let actions = substitute(actions, bindings)?;
    let mut instances = registry.instances.clone();
    let mut start: Option<&ConfigAction> = None;
    for action in &actions {
        match action.verb {
            Verb::NamedInstanceAdd => {
                let [value] = action.params.as_slice() else {
                    return Err(ConfigError::BadParam {
                        action: action.name.clone(),
                        param: 1,
                        msg: format!("namedInstanceAdd takes exactly one parameter, got {}", action.params.len()),
                    }
                    .into());
                };
                let module = match registry.resolve(value, &instances, &action.name, 1)? {
                    Arg::Module(m) => m,
                    other => {
                        return Err(ConfigError::BadParam {
                            action: action.name.clone(),
                            param: 1,
                            msg: format!("expected a module instance, got {other}"),
                        }
                        .into())
                    }
                };
                instances.insert(action.name.clone(), module);
            }
            Verb::AlgorithmStart => {
                if start.is_some() {
                    return Err(ConfigError::MultipleAlgorithms { action: action.name.clone() }.into());
                }
                start = Some(action);
            }
        }
    }
    let action = start.ok_or(ConfigError::NoAlgorithm)?;
    let resolved = action
        .params
        .iter()
        .enumerate()
        .map(|(i, v)| registry.resolve(v, &instances, &action.name, i + 1))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let algorithm = match resolved.first() {
        Some(Arg::Module(Module::Algorithm(a))) => *a,
        Some(other) => {
            return Err(ConfigError::BadParam {
                action: action.name.clone(),
                param: 1,
                msg: format!("expected an algorithm type, got {other}"),
            }
            .into())
        }
        None => return Err(ConfigError::MissingSlot { slot: "algorithm" }.into()),
    };
    let config = match algorithm {
        AlgorithmKind::VariableQuery => variable_query_config(&action.name, &resolved[1..])?,
    };
    let skeleton = assemble(config)?;
    Ok(AlgorithmHandle { name: action.name.clone(), algorithm, instances, skeleton })
}
