//! Resolved semantic model: exception hierarchy, method table, resolved call
//! sites and a lowered exception-flow view of every method body.

mod lower;
mod names;
pub mod platform;
mod types;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::{CatchClause, CompilationUnit, Invocation, SourcePosition, TypeKind, CONSTRUCTOR_NAME};

pub use platform::{
    load_platform_model, load_platform_models, parse_platform_model, ExceptionKind, MethodSignature,
    PlatformError, PlatformMethod, PlatformModel, PlatformType,
};
pub use types::{ExceptionInfo, Recoverability, TypeEntry, TypeId, TypeOrigin, TypeTable};

use names::NameResolver;
use types::default_recoverability;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{second}: type `{name}` is already declared at {first}")]
    DuplicateType {
        name: String,
        first: String,
        second: String,
    },
    #[error("cycle in the type hierarchy through `{name}`")]
    Cycle {
        name: String,
        position: Option<SourcePosition>,
    },
    #[error("type id {0} is not an exception type")]
    UnknownType(u32),
}

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub(crate) u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(MethodId);
id_type!(CallSiteId);
id_type!(TryId);
id_type!(CatchId);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    /// Declared in the corpus.
    Corpus,
    /// Default constructor of a corpus class without one.
    Implicit,
    /// Platform model entry.
    External,
}

#[derive(Debug, Clone)]
pub struct MethodInfo {
    pub owner: String,
    pub name: String,
    pub arity: usize,
    /// Parameter types as written; empty for external methods.
    pub param_types: Vec<String>,
    pub kind: MethodKind,
    pub position: Option<SourcePosition>,
    /// Qualified return type, when known.
    pub return_type: Option<String>,
    pub declared_throws: Vec<TypeId>,
    pub doc_throws: Vec<TypeId>,
    /// Exceptions listed by the platform model.
    pub documented: Vec<TypeId>,
}

impl MethodInfo {
    pub fn signature(&self) -> MethodSignature {
        MethodSignature::new(self.owner.clone(), self.name.clone(), self.arity)
    }
}

impl fmt::Display for MethodInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MethodKind::External => write!(f, "{}#{}({})", self.owner, self.name, self.arity),
            _ => write!(f, "{}#{}({})", self.owner, self.name, self.param_types.join(",")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Resolved(MethodId),
    Unresolved,
}

impl Resolution {
    pub fn method(self) -> Option<MethodId> {
        match self {
            Resolution::Resolved(m) => Some(m),
            Resolution::Unresolved => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CallSite {
    pub position: SourcePosition,
    pub caller: MethodId,
    pub name: String,
    pub arity: usize,
    /// Static owner the call was looked up on, resolved or not.
    pub target: Option<MethodSignature>,
    pub resolution: Resolution,
}

/// Exception-relevant skeleton of a method body, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowNode {
    Throw { position: SourcePosition, ty: TypeId },
    Call(CallSiteId),
    Try(TryId),
}

#[derive(Debug, Clone)]
pub struct TryNode {
    /// `file:line:col` of the `try` keyword.
    pub id: String,
    pub position: SourcePosition,
    pub method: MethodId,
    /// Resources followed by the block body.
    pub body: Vec<FlowNode>,
    pub catches: Vec<CatchId>,
    pub finally: Vec<FlowNode>,
}

#[derive(Debug, Clone)]
pub struct CatchNode {
    pub id: String,
    pub position: SourcePosition,
    pub try_id: TryId,
    /// Caught types inside the exception universe, in declaration order.
    pub caught: Vec<TypeId>,
    pub handler: Vec<FlowNode>,
    pub clause: CatchClause,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub position: Option<SourcePosition>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.position {
            Some(p) => write!(f, "{p}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct SemanticModel {
    types: TypeTable,
    methods: Vec<MethodInfo>,
    method_index: HashMap<(String, String, usize), Vec<MethodId>>,
    bodies: Vec<Option<Vec<FlowNode>>>,
    call_sites: Vec<CallSite>,
    call_index: HashMap<SourcePosition, CallSiteId>,
    tries: Vec<TryNode>,
    try_index: HashMap<String, TryId>,
    catches: Vec<CatchNode>,
    diagnostics: Vec<Diagnostic>,
}

impl SemanticModel {
    pub fn types(&self) -> &TypeTable {
        &self.types
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.types.get(name)
    }

    pub fn type_name(&self, id: TypeId) -> &str {
        self.types.name(id)
    }

    pub fn is_subtype(&self, a: TypeId, b: TypeId) -> Result<bool, ModelError> {
        self.types.is_subtype(a, b)
    }

    pub fn recoverability_of(&self, e: TypeId) -> Result<Recoverability, ModelError> {
        self.types.recoverability_of(e)
    }

    pub fn exception_universe(&self) -> Vec<TypeId> {
        self.types.exception_types()
    }

    pub fn method_count(&self) -> usize {
        self.methods.len()
    }

    pub fn method_ids(&self) -> impl Iterator<Item = MethodId> {
        (0..self.methods.len() as u32).map(MethodId)
    }

    pub fn method(&self, id: MethodId) -> &MethodInfo {
        &self.methods[id.index()]
    }

    /// Methods declared on `owner` with this name and arity.
    pub fn methods_named(&self, owner: &str, name: &str, arity: usize) -> &[MethodId] {
        self.method_index
            .get(&(owner.to_string(), name.to_string(), arity))
            .map_or(&[], Vec::as_slice)
    }

    /// Lowered body; `None` for external methods.
    pub fn body(&self, id: MethodId) -> Option<&[FlowNode]> {
        self.bodies[id.index()].as_deref()
    }

    pub fn call_sites(&self) -> &[CallSite] {
        &self.call_sites
    }

    pub fn call_site(&self, id: CallSiteId) -> &CallSite {
        &self.call_sites[id.index()]
    }

    pub fn call_site_at(&self, position: &SourcePosition) -> Option<CallSiteId> {
        self.call_index.get(position).copied()
    }

    /// Resolution recorded for an invocation of the corpus.
    pub fn resolve_invocation(&self, call: &Invocation) -> Resolution {
        self.call_site_at(&call.position)
            .map_or(Resolution::Unresolved, |c| self.call_sites[c.index()].resolution)
    }

    pub fn unresolved_count(&self) -> usize {
        self.call_sites
            .iter()
            .filter(|c| c.resolution == Resolution::Unresolved)
            .count()
    }

    pub fn tries(&self) -> &[TryNode] {
        &self.tries
    }

    pub fn try_ids(&self) -> impl Iterator<Item = TryId> {
        (0..self.tries.len() as u32).map(TryId)
    }

    pub fn try_node(&self, id: TryId) -> &TryNode {
        &self.tries[id.index()]
    }

    pub fn try_by_id(&self, id: &str) -> Option<TryId> {
        self.try_index.get(id).copied()
    }

    pub fn catches(&self) -> &[CatchNode] {
        &self.catches
    }

    pub fn catch_node(&self, id: CatchId) -> &CatchNode {
        &self.catches[id.index()]
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    fn add_method(&mut self, info: MethodInfo, body: Option<Vec<FlowNode>>) -> MethodId {
        let id = MethodId(self.methods.len() as u32);
        self.method_index
            .entry((info.owner.clone(), info.name.clone(), info.arity))
            .or_default()
            .push(id);
        self.methods.push(info);
        self.bodies.push(body);
        id
    }

    fn warn(&mut self, position: Option<SourcePosition>, message: String) {
        self.diagnostics.push(Diagnostic {
            severity: Severity::Warning,
            position,
            message,
        });
    }
}

/// Registers corpus and platform types and methods, resolves every call
/// site and lowers method bodies.
pub fn build_semantic_model(
    units: &[CompilationUnit],
    platform: &PlatformModel,
) -> Result<SemanticModel, ModelError> {
    let mut model = SemanticModel::default();
    let resolver = NameResolver::new(units, platform.known_names());

    for t in platform.types() {
        let kind = t.kind;
        model.types.insert(TypeEntry {
            name: t.name.clone(),
            origin: TypeOrigin::Platform,
            position: None,
            superclass_name: t.superclass.clone(),
            superclass: None,
            interface_names: Vec::new(),
            is_interface: false,
            fields: HashMap::new(),
            exception: Some(ExceptionInfo {
                kind,
                recoverability: match t.recoverable {
                    Some(true) => Recoverability::PotentiallyRecoverable,
                    Some(false) => Recoverability::PotentiallyUnrecoverable,
                    None => default_recoverability(kind),
                },
            }),
        })?;
    }
    for unit in units {
        for t in &unit.types {
            let current = Some(t.name.as_str());
            let fields = t
                .fields
                .iter()
                .map(|f| (f.name.clone(), resolver.resolve(unit, current, &f.ty)))
                .collect();
            model.types.insert(TypeEntry {
                name: t.name.clone(),
                origin: TypeOrigin::Corpus,
                position: Some(t.position.clone()),
                superclass_name: t.superclass.as_ref().map(|s| resolver.resolve(unit, current, s)),
                superclass: None,
                interface_names: t
                    .interfaces
                    .iter()
                    .map(|s| resolver.resolve(unit, current, s))
                    .collect(),
                is_interface: t.kind == TypeKind::Interface,
                fields,
                exception: None,
            })?;
        }
    }
    model.types.link()?;

    // corpus methods first, in declaration order, so lowering can find them
    let mut corpus_methods = Vec::new();
    for (ui, unit) in units.iter().enumerate() {
        for (ti, t) in unit.types.iter().enumerate() {
            let current = Some(t.name.as_str());
            for (mi, m) in t.methods.iter().enumerate() {
                let declared_throws = exception_ids(&mut model, &resolver, unit, current, &m.declared_throws, &m.position, "throws clause");
                let doc_names: Vec<String> = m
                    .doc
                    .iter()
                    .flat_map(|d| d.throws_tags.iter().map(|tag| tag.exception.clone()))
                    .collect();
                let doc_throws = exception_ids(&mut model, &resolver, unit, current, &doc_names, &m.position, "doc comment");
                let info = MethodInfo {
                    owner: t.name.clone(),
                    name: m.name.clone(),
                    arity: m.arity(),
                    param_types: m.params.iter().map(|p| p.ty.clone()).collect(),
                    kind: MethodKind::Corpus,
                    position: Some(m.position.clone()),
                    return_type: m.return_type.as_ref().map(|r| resolver.resolve(unit, current, r)),
                    declared_throws,
                    doc_throws,
                    documented: Vec::new(),
                };
                let id = model.add_method(info, Some(Vec::new()));
                corpus_methods.push((id, ui, ti, mi));
            }
            let has_ctor = t.methods.iter().any(|m| m.is_constructor());
            if t.kind != TypeKind::Interface && !has_ctor {
                model.add_method(
                    MethodInfo {
                        owner: t.name.clone(),
                        name: CONSTRUCTOR_NAME.to_string(),
                        arity: 0,
                        param_types: Vec::new(),
                        kind: MethodKind::Implicit,
                        position: Some(t.position.clone()),
                        return_type: None,
                        declared_throws: Vec::new(),
                        doc_throws: Vec::new(),
                        documented: Vec::new(),
                    },
                    Some(Vec::new()),
                );
            }
        }
    }
    for m in platform.methods() {
        let sig = MethodSignature::parse(&m.signature).expect("validated signature");
        let documented = m
            .throws
            .iter()
            .filter_map(|e| model.types.get(e))
            .collect();
        model.add_method(
            MethodInfo {
                owner: sig.owner,
                name: sig.name,
                arity: sig.arity,
                param_types: Vec::new(),
                kind: MethodKind::External,
                position: None,
                return_type: m.returns.clone(),
                declared_throws: Vec::new(),
                doc_throws: Vec::new(),
                documented,
            },
            None,
        );
    }

    for (id, ui, ti, mi) in corpus_methods {
        let unit = &units[ui];
        let decl = &unit.types[ti].methods[mi];
        let nodes = lower::lower_method(&mut model, &resolver, unit, &unit.types[ti], decl, id);
        model.bodies[id.index()] = Some(nodes);
    }
    Ok(model)
}

fn exception_ids(
    model: &mut SemanticModel,
    resolver: &NameResolver,
    unit: &CompilationUnit,
    current: Option<&str>,
    names: &[String],
    position: &SourcePosition,
    what: &str,
) -> Vec<TypeId> {
    let mut out = Vec::new();
    for n in names {
        let q = resolver.resolve(unit, current, n);
        match model.types.get(&q).filter(|&t| model.types.is_exception(t)) {
            Some(t) => {
                if !out.contains(&t) {
                    out.push(t);
                }
            }
            None => model.warn(
                Some(position.clone()),
                format!("unknown exception type `{n}` in {what}"),
            ),
        }
    }
    out
}
