//! Interprocedural exception flow: per-method possible exceptions by
//! fixed-point propagation, then per-try possible/handled/propagated sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::classify::{classify_strategy, Strategy};
use crate::model::{CallSiteId, CatchId, FlowNode, MethodId, SemanticModel, TryId, TypeId};
use crate::syntax::SourcePosition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    ThrowStatement,
    ThrowsDeclaration,
    DocComment,
    ExternalDocumentation,
}

impl EvidenceKind {
    pub const ALL: [EvidenceKind; 4] = [
        EvidenceKind::ThrowStatement,
        EvidenceKind::ThrowsDeclaration,
        EvidenceKind::DocComment,
        EvidenceKind::ExternalDocumentation,
    ];

    pub fn token(self) -> &'static str {
        match self {
            EvidenceKind::ThrowStatement => "throw_statement",
            EvidenceKind::ThrowsDeclaration => "throws_declaration",
            EvidenceKind::DocComment => "doc_comment",
            EvidenceKind::ExternalDocumentation => "external_documentation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    LexicalThrow(SourcePosition),
    CallSite { site: CallSiteId, callee: MethodId },
    /// The method's own throws clause, doc tags or platform entry.
    Signature(MethodId),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactInfo {
    pub evidence: BTreeSet<EvidenceKind>,
    pub origin_methods: BTreeSet<MethodId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossibleException {
    pub ty: TypeId,
    pub origin: Origin,
    pub evidence: BTreeSet<EvidenceKind>,
    pub origin_methods: BTreeSet<MethodId>,
}

/// Facts keyed by (type, origin); inserting an existing key merges.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactSet(BTreeMap<(TypeId, Origin), FactInfo>);

impl FactSet {
    pub fn add(&mut self, ty: TypeId, origin: Origin, info: &FactInfo) {
        let slot = self.0.entry((ty, origin)).or_default();
        slot.evidence.extend(info.evidence.iter().copied());
        slot.origin_methods.extend(info.origin_methods.iter().copied());
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TypeId, &Origin, &FactInfo)> {
        self.0.iter().map(|((t, o), i)| (*t, o, i))
    }

    pub fn types(&self) -> BTreeSet<TypeId> {
        self.0.keys().map(|(t, _)| *t).collect()
    }

    pub fn to_facts(&self) -> Vec<PossibleException> {
        self.iter()
            .map(|(ty, origin, info)| PossibleException {
                ty,
                origin: origin.clone(),
                evidence: info.evidence.clone(),
                origin_methods: info.origin_methods.clone(),
            })
            .collect()
    }

    fn merge(&mut self, other: FactSet) {
        for ((t, o), info) in other.0 {
            self.add(t, o, &info);
        }
    }
}

#[derive(Debug, Clone)]
pub struct MethodExceptionSets {
    sets: Vec<FactSet>,
    /// Full sweeps until nothing changed, the confirming sweep included.
    pub rounds: usize,
}

impl MethodExceptionSets {
    pub fn facts(&self, m: MethodId) -> &FactSet {
        &self.sets[m.index()]
    }

    pub fn types(&self, m: MethodId) -> BTreeSet<TypeId> {
        self.sets[m.index()].types()
    }
}

fn evidence(kind: EvidenceKind, method: MethodId) -> FactInfo {
    FactInfo {
        evidence: BTreeSet::from([kind]),
        origin_methods: BTreeSet::from([method]),
    }
}

fn signature_facts(model: &SemanticModel, m: MethodId) -> FactSet {
    let info = model.method(m);
    let mut set = FactSet::default();
    let sources = [
        (&info.declared_throws, EvidenceKind::ThrowsDeclaration),
        (&info.doc_throws, EvidenceKind::DocComment),
        (&info.documented, EvidenceKind::ExternalDocumentation),
    ];
    for (types, kind) in sources {
        for &t in types {
            set.add(t, Origin::Signature(m), &evidence(kind, m));
        }
    }
    set
}

/// Facts escaping a node sequence of method `m`, given current callee sets.
pub fn escaping(model: &SemanticModel, sets: &[FactSet], m: MethodId, nodes: &[FlowNode]) -> FactSet {
    let mut out = FactSet::default();
    for node in nodes {
        match node {
            FlowNode::Throw { position, ty } => {
                out.add(
                    *ty,
                    Origin::LexicalThrow(position.clone()),
                    &evidence(EvidenceKind::ThrowStatement, m),
                );
            }
            FlowNode::Call(site) => {
                if let Some(callee) = model.call_site(*site).resolution.method() {
                    // one fact per type at this call site, whatever its sources
                    for (ty, _, info) in sets[callee.index()].iter() {
                        out.add(ty, Origin::CallSite { site: *site, callee }, info);
                    }
                }
            }
            FlowNode::Try(t) => out.merge(escaping_try(model, sets, m, *t)),
        }
    }
    out
}

fn escaping_try(model: &SemanticModel, sets: &[FactSet], m: MethodId, t: TryId) -> FactSet {
    let node = model.try_node(t);
    let body = escaping(model, sets, m, &node.body);
    let mut out = FactSet::default();
    for (ty, origin, info) in body.iter() {
        if handler_for(model, &node.catches, ty).is_none() {
            out.add(ty, origin.clone(), info);
        }
    }
    for &c in &node.catches {
        out.merge(escaping(model, sets, m, &model.catch_node(c).handler));
    }
    out.merge(escaping(model, sets, m, &node.finally));
    out
}

/// First clause catching `ty`, with the alternative that matched; an exact
/// alternative is preferred within a multi-catch clause.
pub fn handler_for(model: &SemanticModel, catches: &[CatchId], ty: TypeId) -> Option<(CatchId, TypeId)> {
    catches.iter().find_map(|&c| {
        let caught = &model.catch_node(c).caught;
        if caught.contains(&ty) {
            return Some((c, ty));
        }
        caught
            .iter()
            .find(|&&k| model.is_subtype(ty, k).unwrap_or(false))
            .map(|&k| (c, k))
    })
}

/// Callees before callers, so acyclic graphs settle in one sweep.
fn callee_first_order(model: &SemanticModel) -> Vec<MethodId> {
    let n = model.method_count();
    let mut callees: Vec<Vec<MethodId>> = vec![Vec::new(); n];
    for site in model.call_sites() {
        if let Some(callee) = site.resolution.method() {
            callees[site.caller.index()].push(callee);
        }
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in model.method_ids() {
        if visited[root.index()] {
            continue;
        }
        visited[root.index()] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (node, k) = *top;
            top.1 += 1;
            match callees[node.index()].get(k) {
                Some(&next) if !visited[next.index()] => {
                    visited[next.index()] = true;
                    stack.push((next, 0));
                }
                Some(_) => {}
                None => {
                    order.push(node);
                    stack.pop();
                }
            }
        }
    }
    order
}

pub fn compute_method_exception_sets(model: &SemanticModel) -> MethodExceptionSets {
    let seeds: Vec<FactSet> = model.method_ids().map(|m| signature_facts(model, m)).collect();
    let mut sets = seeds.clone();
    let order = callee_first_order(model);
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut changed = false;
        for &m in &order {
            let Some(body) = model.body(m) else { continue };
            let mut next = seeds[m.index()].clone();
            next.merge(escaping(model, &sets, m, body));
            if next != sets[m.index()] {
                sets[m.index()] = next;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    MethodExceptionSets { sets, rounds }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlowOptions {
    /// Count the methods where an exception was raised rather than the
    /// methods invoked directly from the try body.
    pub transitive_origins: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Handled {
    pub fact: PossibleException,
    pub catch: CatchId,
    pub matched: TypeId,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TryBlockAnalysis {
    pub try_id: TryId,
    pub possible: Vec<PossibleException>,
    pub handled: Vec<Handled>,
    pub propagated: Vec<PossibleException>,
    pub distinct_method_count: BTreeMap<TypeId, usize>,
}

impl TryBlockAnalysis {
    pub fn possible_types(&self) -> BTreeSet<TypeId> {
        self.possible.iter().map(|f| f.ty).collect()
    }

    pub fn propagated_types(&self) -> BTreeSet<TypeId> {
        self.propagated.iter().map(|f| f.ty).collect()
    }
}

pub fn analyze_try_block(
    t: TryId,
    sets: &MethodExceptionSets,
    model: &SemanticModel,
    options: FlowOptions,
) -> TryBlockAnalysis {
    let node = model.try_node(t);
    let body = escaping(model, &sets.sets, node.method, &node.body);
    let possible = body.to_facts();
    let mut handled = Vec::new();
    let mut propagated = Vec::new();
    for fact in &possible {
        match handler_for(model, &node.catches, fact.ty) {
            Some((catch, matched)) => {
                let strategy = classify_strategy(model, fact.ty, matched)
                    .expect("handler_for only returns matching alternatives");
                handled.push(Handled {
                    fact: fact.clone(),
                    catch,
                    matched,
                    strategy,
                });
            }
            None => propagated.push(fact.clone()),
        }
    }
    let mut methods: BTreeMap<TypeId, BTreeSet<MethodId>> = BTreeMap::new();
    for fact in &possible {
        let entry = methods.entry(fact.ty).or_default();
        if let Origin::CallSite { callee, .. } = fact.origin {
            if options.transitive_origins {
                entry.extend(fact.origin_methods.iter().copied());
            } else {
                entry.insert(callee);
            }
        }
    }
    TryBlockAnalysis {
        try_id: t,
        possible,
        handled,
        propagated,
        distinct_method_count: methods.into_iter().map(|(t, m)| (t, m.len())).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceAttribution {
    pub distinct_methods: usize,
    pub evidence: BTreeSet<EvidenceKind>,
}

pub fn attribute_sources(t: &TryBlockAnalysis) -> BTreeMap<TypeId, SourceAttribution> {
    let mut out: BTreeMap<TypeId, SourceAttribution> = BTreeMap::new();
    for fact in &t.possible {
        let entry = out.entry(fact.ty).or_insert_with(|| SourceAttribution {
            distinct_methods: t.distinct_method_count.get(&fact.ty).copied().unwrap_or(0),
            evidence: BTreeSet::new(),
        });
        entry.evidence.extend(fact.evidence.iter().copied());
    }
    out
}
