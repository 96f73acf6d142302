#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use exflow::flow::{EvidenceKind, MethodExceptionSets, Origin, TryBlockAnalysis};
use exflow::model::{build_semantic_model, load_platform_model, PlatformModel, SemanticModel};
use exflow::syntax::parse_compilation_unit;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn platform() -> PlatformModel {
    load_platform_model(&fixtures().join("jre-mini.json")).expect("fixture platform model loads")
}

pub fn build(sources: &[(&str, &str)]) -> SemanticModel {
    let units: Vec<_> = sources
        .iter()
        .map(|(f, s)| parse_compilation_unit(s, f).unwrap_or_else(|e| panic!("{e}\n{s}")))
        .collect();
    build_semantic_model(&units, &platform()).expect("model builds")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Random corpora with known structure.

/// Exception types available to generated code: generated ones first, then
/// three platform roots.
pub const ROOTS: [&str; 3] = ["java.lang.Exception", "java.lang.RuntimeException", "java.lang.Throwable"];

#[derive(Debug, Clone)]
pub struct GenType {
    pub name: String,
    /// Index into the catchable list (generated types, then ROOTS).
    pub parent: usize,
}

#[derive(Debug, Clone)]
pub enum GenStmt {
    Throw { id: usize, ty: usize },
    /// `throw e;` inside a handler, rethrowing every alternative.
    Rethrow { id: usize, alts: Vec<usize> },
    Call { id: usize, callee: usize },
    Try {
        id: usize,
        body: Vec<GenStmt>,
        catches: Vec<(Vec<usize>, Vec<GenStmt>)>,
        finally: Option<Vec<GenStmt>>,
    },
}

#[derive(Debug, Clone)]
pub struct GenMethod {
    pub body: Vec<GenStmt>,
    pub throws: Vec<usize>,
    pub doc: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct GenCorpus {
    pub types: Vec<GenType>,
    pub methods: Vec<GenMethod>,
    pub classes: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    pub methods: usize,
    pub types: usize,
    pub classes: usize,
    pub max_depth: usize,
    pub acyclic: bool,
}

impl GenParams {
    pub fn small(acyclic: bool) -> Self {
        GenParams {
            methods: 30,
            types: 5,
            classes: 3,
            max_depth: 3,
            acyclic,
        }
    }
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    p: GenParams,
    next_id: usize,
    n_types: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn id(&mut self) -> usize {
        self.next_id += 1;
        self.next_id
    }

    fn catchable(&mut self) -> usize {
        // mostly generated types, sometimes a root
        if self.rng.gen_bool(0.8) || self.n_types == 0 {
            if self.n_types == 0 {
                return self.rng.gen_range(0..ROOTS.len());
            }
            self.rng.gen_range(0..self.n_types)
        } else {
            self.n_types + self.rng.gen_range(0..ROOTS.len())
        }
    }

    fn block(&mut self, method: usize, depth: usize, handler_alts: Option<&[usize]>) -> Vec<GenStmt> {
        let n = self.rng.gen_range(0..=3);
        let mut out = Vec::new();
        for _ in 0..n {
            let roll = self.rng.gen_range(0..10);
            let stmt = match roll {
                0..=2 if self.n_types > 0 => GenStmt::Throw {
                    id: self.id(),
                    ty: self.rng.gen_range(0..self.n_types),
                },
                3 if handler_alts.is_some() => GenStmt::Rethrow {
                    id: self.id(),
                    alts: handler_alts.unwrap().to_vec(),
                },
                4..=5 if depth < self.p.max_depth => {
                    let id = self.id();
                    let body = self.block(method, depth + 1, None);
                    let mut catches = Vec::new();
                    for _ in 0..self.rng.gen_range(0..=2) {
                        let mut alts = vec![self.catchable()];
                        if self.rng.gen_bool(0.25) {
                            let other = self.catchable();
                            if !alts.contains(&other) {
                                alts.push(other);
                            }
                        }
                        let handler = self.block(method, depth + 1, Some(&alts));
                        catches.push((alts, handler));
                    }
                    let finally = if catches.is_empty() || self.rng.gen_bool(0.2) {
                        Some(self.block(method, depth + 1, None))
                    } else {
                        None
                    };
                    GenStmt::Try {
                        id,
                        body,
                        catches,
                        finally,
                    }
                }
                _ => {
                    let callee = if self.p.acyclic {
                        if method + 1 >= self.p.methods {
                            continue;
                        }
                        self.rng.gen_range(method + 1..self.p.methods)
                    } else {
                        self.rng.gen_range(0..self.p.methods)
                    };
                    GenStmt::Call { id: self.id(), callee }
                }
            };
            out.push(stmt);
        }
        out
    }
}

pub fn generate<R: Rng>(rng: &mut R, p: GenParams) -> GenCorpus {
    let n_types = rng.gen_range(1..=p.types.max(1));
    let mut types = Vec::new();
    for i in 0..n_types {
        let parent = if i > 0 && rng.gen_bool(0.5) {
            rng.gen_range(0..i)
        } else {
            // Exception or RuntimeException
            n_types + rng.gen_range(0..2)
        };
        types.push(GenType {
            name: format!("E{i}"),
            parent,
        });
    }
    let n_methods = rng.gen_range(1..=p.methods.max(1));
    let p = GenParams { methods: n_methods, ..p };
    let mut g = Gen {
        rng,
        p,
        next_id: 0,
        n_types,
    };
    let mut methods = Vec::new();
    for k in 0..n_methods {
        let body = g.block(k, 0, None);
        let pick = |g: &mut Gen<'_, R>| -> Vec<usize> {
            let mut v: Vec<usize> = (0..n_types).filter(|_| g.rng.gen_bool(0.15)).collect();
            v.shuffle(g.rng);
            v
        };
        let throws = pick(&mut g);
        let doc = pick(&mut g);
        methods.push(GenMethod { body, throws, doc });
    }
    GenCorpus {
        types,
        methods,
        classes: p.classes.max(1),
    }
}

/// Where each statement id and try id landed in the rendered sources.
#[derive(Debug, Default)]
pub struct Rendered {
    pub files: Vec<(String, String)>,
    pub stmt_at: HashMap<(String, u32), usize>,
}

impl GenCorpus {
    pub fn type_name(&self, t: usize) -> String {
        if t < self.types.len() {
            format!("gen.{}", self.types[t].name)
        } else {
            ROOTS[t - self.types.len()].to_string()
        }
    }

    fn simple(&self, t: usize) -> String {
        if t < self.types.len() {
            self.types[t].name.clone()
        } else {
            ROOTS[t - self.types.len()].rsplit('.').next().unwrap().to_string()
        }
    }

    pub fn class_of(&self, m: usize) -> usize {
        m % self.classes
    }

    pub fn method_name(&self, m: usize) -> String {
        format!("gen.C{}#m{}()", self.class_of(m), m)
    }

    /// Reflexive supertype check over generated types and roots.
    pub fn is_subtype(&self, a: usize, b: usize) -> bool {
        let n = self.types.len();
        let (exc, rte, thr) = (n, n + 1, n + 2);
        let mut cur = a;
        loop {
            if cur == b {
                return true;
            }
            cur = if cur < n {
                self.types[cur].parent
            } else if cur == rte {
                exc
            } else if cur == exc {
                thr
            } else {
                return false;
            };
        }
    }

    pub fn render(&self) -> Rendered {
        let mut r = Rendered::default();
        for t in &self.types {
            let file = format!("gen/{}.java", t.name);
            let src = format!(
                "package gen;\n\npublic class {} extends {} {{\n}}\n",
                t.name,
                self.simple(t.parent)
            );
            r.files.push((file, src));
        }
        for c in 0..self.classes {
            let file = format!("gen/C{c}.java");
            let mut lines: Vec<String> = vec!["package gen;".into(), String::new(), format!("public class C{c} {{")];
            for (k, m) in self.methods.iter().enumerate().filter(|(k, _)| self.class_of(*k) == c) {
                if !m.doc.is_empty() {
                    lines.push("    /**".into());
                    for &t in &m.doc {
                        lines.push(format!("     * @throws {} when it goes wrong", self.simple(t)));
                    }
                    lines.push("     */".into());
                }
                let throws = if m.throws.is_empty() {
                    String::new()
                } else {
                    let names: Vec<String> = m.throws.iter().map(|&t| self.simple(t)).collect();
                    format!(" throws {}", names.join(", "))
                };
                lines.push(format!("    static void m{k}(){throws} {{"));
                self.render_block(&m.body, 2, &file, &mut lines, &mut r.stmt_at);
                lines.push("    }".into());
            }
            lines.push("}".into());
            lines.push(String::new());
            r.files.push((file, lines.join("\n")));
        }
        r
    }

    fn render_block(
        &self,
        stmts: &[GenStmt],
        indent: usize,
        file: &str,
        lines: &mut Vec<String>,
        at: &mut HashMap<(String, u32), usize>,
    ) {
        let pad = "    ".repeat(indent);
        for s in stmts {
            let mut mark = |lines: &Vec<String>, id: usize| {
                at.insert((file.to_string(), lines.len() as u32 + 1), id);
            };
            match s {
                GenStmt::Throw { id, ty } => {
                    mark(lines, *id);
                    lines.push(format!("{pad}throw new {}();", self.simple(*ty)));
                }
                GenStmt::Rethrow { id, .. } => {
                    mark(lines, *id);
                    lines.push(format!("{pad}throw e{indent};"));
                }
                GenStmt::Call { id, callee } => {
                    mark(lines, *id);
                    lines.push(format!("{pad}C{}.m{}();", self.class_of(*callee), callee));
                }
                GenStmt::Try {
                    id,
                    body,
                    catches,
                    finally,
                } => {
                    mark(lines, *id);
                    lines.push(format!("{pad}try {{"));
                    self.render_block(body, indent + 1, file, lines, at);
                    for (alts, handler) in catches {
                        let names: Vec<String> = alts.iter().map(|&t| self.simple(t)).collect();
                        lines.push(format!("{pad}}} catch ({} e{} ) {{", names.join(" | "), indent + 1));
                        self.render_block(handler, indent + 1, file, lines, at);
                    }
                    if let Some(f) = finally {
                        lines.push(format!("{pad}}} finally {{"));
                        self.render_block(f, indent + 1, file, lines, at);
                    }
                    lines.push(format!("{pad}}}"));
                }
            }
        }
    }

    pub fn model(&self) -> (SemanticModel, Rendered) {
        let rendered = self.render();
        let srcs: Vec<(&str, &str)> = rendered
            .files
            .iter()
            .map(|(f, s)| (f.as_str(), s.as_str()))
            .collect();
        (build(&srcs), rendered)
    }
}

// ---------------------------------------------------------------------------
// Oracles.

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Key {
    Lexical(usize),
    Call { stmt: usize, callee: usize },
    Signature,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Info {
    pub evidence: BTreeSet<EvidenceKind>,
    pub origins: BTreeSet<usize>,
}

pub type Facts = BTreeMap<(String, Key), Info>;

fn add(out: &mut Facts, ty: String, key: Key, info: &Info) {
    let slot = out.entry((ty, key)).or_default();
    slot.evidence.extend(info.evidence.iter().copied());
    slot.origins.extend(info.origins.iter().copied());
}

fn single(kind: EvidenceKind, m: usize) -> Info {
    Info {
        evidence: BTreeSet::from([kind]),
        origins: BTreeSet::from([m]),
    }
}

/// Depth-first traversal over an acyclic generated call graph. Each fact is
/// the set of raise points reachable through one first hop out of the method,
/// with everything caught along the way removed.
pub struct PathOracle<'c> {
    corpus: &'c GenCorpus,
    memo: Vec<Option<Facts>>,
}

impl<'c> PathOracle<'c> {
    pub fn new(corpus: &'c GenCorpus) -> Self {
        PathOracle {
            corpus,
            memo: vec![None; corpus.methods.len()],
        }
    }

    pub fn method(&mut self, m: usize) -> Facts {
        if let Some(f) = &self.memo[m] {
            return f.clone();
        }
        let c = self.corpus;
        let mut out = Facts::new();
        for &t in &c.methods[m].throws {
            add(&mut out, c.type_name(t), Key::Signature, &single(EvidenceKind::ThrowsDeclaration, m));
        }
        for &t in &c.methods[m].doc {
            add(&mut out, c.type_name(t), Key::Signature, &single(EvidenceKind::DocComment, m));
        }
        let body = self.block(m, &c.methods[m].body);
        for ((t, k), i) in body {
            add(&mut out, t, k, &i);
        }
        self.memo[m] = Some(out.clone());
        out
    }

    pub fn block(&mut self, m: usize, stmts: &[GenStmt]) -> Facts {
        let c = self.corpus;
        let mut out = Facts::new();
        for s in stmts {
            match s {
                GenStmt::Throw { id, ty } => {
                    add(&mut out, c.type_name(*ty), Key::Lexical(*id), &single(EvidenceKind::ThrowStatement, m));
                }
                GenStmt::Rethrow { id, alts } => {
                    for &a in alts {
                        add(&mut out, c.type_name(a), Key::Lexical(*id), &single(EvidenceKind::ThrowStatement, m));
                    }
                }
                GenStmt::Call { id, callee } => {
                    for ((t, _), i) in self.method(*callee) {
                        add(&mut out, t, Key::Call { stmt: *id, callee: *callee }, &i);
                    }
                }
                GenStmt::Try {
                    body,
                    catches,
                    finally,
                    ..
                } => {
                    for ((t, k), i) in self.block(m, body) {
                        let ti = self.type_index(&t);
                        let caught = catches
                            .iter()
                            .any(|(alts, _)| alts.iter().any(|&a| c.is_subtype(ti, a)));
                        if !caught {
                            add(&mut out, t, k, &i);
                        }
                    }
                    for (_, h) in catches {
                        for ((t, k), i) in self.block(m, h) {
                            add(&mut out, t, k, &i);
                        }
                    }
                    if let Some(f) = finally {
                        for ((t, k), i) in self.block(m, f) {
                            add(&mut out, t, k, &i);
                        }
                    }
                }
            }
        }
        out
    }

    fn type_index(&self, name: &str) -> usize {
        let c = self.corpus;
        (0..c.types.len() + ROOTS.len())
            .find(|&t| c.type_name(t) == name)
            .expect("known type")
    }
}

/// Per (method, type) aggregate: evidence and raising methods.
pub type TypeSummary = BTreeMap<String, Info>;

/// Transitive closure over (method, type) nodes for arbitrary call graphs.
/// A node holds if the method raises the type itself, or calls a method
/// holding it at a point where no enclosing catch intercepts it.
pub fn closure_oracle(c: &GenCorpus) -> Vec<TypeSummary> {
    let n = c.methods.len();
    let all_types = c.types.len() + ROOTS.len();
    // base facts and edges (caller, callee, type) that survive catching
    let mut base: Vec<TypeSummary> = vec![TypeSummary::new(); n];
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();

    fn walk(
        c: &GenCorpus,
        m: usize,
        stmts: &[GenStmt],
        filters: &mut Vec<Vec<Vec<usize>>>,
        base: &mut TypeSummary,
        calls: &mut Vec<(usize, Vec<Vec<Vec<usize>>>)>,
    ) {
        let survives = |t: usize, filters: &Vec<Vec<Vec<usize>>>| {
            filters
                .iter()
                .all(|catches| !catches.iter().any(|alts| alts.iter().any(|&a| c.is_subtype(t, a))))
        };
        for s in stmts {
            match s {
                GenStmt::Throw { ty, .. } => {
                    if survives(*ty, filters) {
                        let e = base.entry(c.type_name(*ty)).or_default();
                        e.evidence.insert(EvidenceKind::ThrowStatement);
                        e.origins.insert(m);
                    }
                }
                GenStmt::Rethrow { alts, .. } => {
                    for &a in alts {
                        if survives(a, filters) {
                            let e = base.entry(c.type_name(a)).or_default();
                            e.evidence.insert(EvidenceKind::ThrowStatement);
                            e.origins.insert(m);
                        }
                    }
                }
                GenStmt::Call { callee, .. } => calls.push((*callee, filters.clone())),
                GenStmt::Try {
                    body,
                    catches,
                    finally,
                    ..
                } => {
                    filters.push(catches.iter().map(|(alts, _)| alts.clone()).collect());
                    walk(c, m, body, filters, base, calls);
                    filters.pop();
                    for (_, h) in catches {
                        walk(c, m, h, filters, base, calls);
                    }
                    if let Some(f) = finally {
                        walk(c, m, f, filters, base, calls);
                    }
                }
            }
        }
    }

    for (m, gm) in c.methods.iter().enumerate() {
        for &t in &gm.throws {
            let e = base[m].entry(c.type_name(t)).or_default();
            e.evidence.insert(EvidenceKind::ThrowsDeclaration);
            e.origins.insert(m);
        }
        for &t in &gm.doc {
            let e = base[m].entry(c.type_name(t)).or_default();
            e.evidence.insert(EvidenceKind::DocComment);
            e.origins.insert(m);
        }
        let mut calls = Vec::new();
        walk(c, m, &gm.body, &mut Vec::new(), &mut base[m], &mut calls);
        for (callee, filters) in calls {
            for t in 0..all_types {
                let survives = filters
                    .iter()
                    .all(|catches| !catches.iter().any(|alts| alts.iter().any(|&a| c.is_subtype(t, a))));
                if survives {
                    edges.push((m, callee, t));
                }
            }
        }
    }

    // propagate every base node backwards along surviving edges
    let mut result: Vec<TypeSummary> = vec![TypeSummary::new(); n];
    for src in 0..n {
        for (tname, info) in base[src].clone() {
            let t = (0..all_types).find(|&t| c.type_name(t) == tname).unwrap();
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([src]);
            seen[src] = true;
            while let Some(x) = queue.pop_front() {
                let e = result[x].entry(tname.clone()).or_default();
                e.evidence.extend(info.evidence.iter().copied());
                e.origins.extend(info.origins.iter().copied());
                for &(caller, callee, et) in &edges {
                    if callee == x && et == t && !seen[caller] {
                        seen[caller] = true;
                        queue.push_back(caller);
                    }
                }
            }
        }
    }
    result
}

// ---------------------------------------------------------------------------
// Our results in oracle terms.

pub fn method_index(model: &SemanticModel, c: &GenCorpus) -> Vec<exflow::model::MethodId> {
    (0..c.methods.len())
        .map(|k| {
            let owner = format!("gen.C{}", c.class_of(k));
            model.methods_named(&owner, &format!("m{k}"), 0)[0]
        })
        .collect()
}

pub struct Translate<'a> {
    pub model: &'a SemanticModel,
    pub rendered: &'a Rendered,
    pub ids: Vec<exflow::model::MethodId>,
}

impl<'a> Translate<'a> {
    pub fn new(model: &'a SemanticModel, rendered: &'a Rendered, c: &GenCorpus) -> Self {
        Translate {
            model,
            rendered,
            ids: method_index(model, c),
        }
    }

    fn gen_method(&self, id: exflow::model::MethodId) -> usize {
        self.ids.iter().position(|&m| m == id).expect("generated method")
    }

    fn stmt(&self, pos: &exflow::syntax::SourcePosition) -> usize {
        self.rendered.stmt_at[&(pos.file.clone(), pos.line)]
    }

    pub fn facts<'f>(&self, facts: impl Iterator<Item = (exflow::model::TypeId, &'f Origin, BTreeSet<EvidenceKind>, BTreeSet<exflow::model::MethodId>)>) -> Facts {
        let mut out = Facts::new();
        for (ty, origin, evidence, origins) in facts {
            let key = match origin {
                Origin::LexicalThrow(p) => Key::Lexical(self.stmt(p)),
                Origin::CallSite { site, callee } => Key::Call {
                    stmt: self.stmt(&self.model.call_site(*site).position),
                    callee: self.gen_method(*callee),
                },
                Origin::Signature(_) => Key::Signature,
            };
            let info = Info {
                evidence,
                origins: origins.iter().map(|&m| self.gen_method(m)).collect(),
            };
            add(&mut out, self.model.type_name(ty).to_string(), key, &info);
        }
        out
    }

    pub fn method_facts(&self, sets: &MethodExceptionSets, k: usize) -> Facts {
        let set = sets.facts(self.ids[k]);
        self.facts(set.iter().map(|(t, o, i)| (t, o, i.evidence.clone(), i.origin_methods.clone())))
    }

    pub fn summary(&self, sets: &MethodExceptionSets, k: usize) -> TypeSummary {
        let mut out = TypeSummary::new();
        for (t, _, i) in sets.facts(self.ids[k]).iter() {
            let e = out.entry(self.model.type_name(t).to_string()).or_default();
            e.evidence.extend(i.evidence.iter().copied());
            e.origins.extend(i.origin_methods.iter().map(|&m| self.gen_method(m)));
        }
        out
    }

    pub fn try_possible(&self, a: &TryBlockAnalysis) -> Facts {
        self.facts(
            a.possible
                .iter()
                .map(|f| (f.ty, &f.origin, f.evidence.clone(), f.origin_methods.clone())),
        )
    }
}

/// Every try statement in the generated corpus with its method.
pub fn gen_tries(c: &GenCorpus) -> Vec<(usize, &GenStmt)> {
    fn collect<'a>(m: usize, stmts: &'a [GenStmt], out: &mut Vec<(usize, &'a GenStmt)>) {
        for s in stmts {
            if let GenStmt::Try {
                body,
                catches,
                finally,
                ..
            } = s
            {
                out.push((m, s));
                collect(m, body, out);
                for (_, h) in catches {
                    collect(m, h, out);
                }
                if let Some(f) = finally {
                    collect(m, f, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    for (m, gm) in c.methods.iter().enumerate() {
        collect(m, &gm.body, &mut out);
    }
    out
}

// ---------------------------------------------------------------------------
// Whole-corpus checks shared by the flow tests and the acceptance run.

use exflow::classify::Strategy;
use exflow::flow::{analyze_try_block, compute_method_exception_sets, FlowOptions};

/// Method sets and per-try results against the traversal oracle.
pub fn check_acyclic(c: &GenCorpus) -> Result<(), String> {
    let (model, rendered) = c.model();
    let sets = compute_method_exception_sets(&model);
    let tr = Translate::new(&model, &rendered, c);
    let mut oracle = PathOracle::new(c);
    for k in 0..c.methods.len() {
        let want = oracle.method(k);
        let got = tr.method_facts(&sets, k);
        if want != got {
            return Err(format!("method m{k}: oracle {want:?}\nanalysis {got:?}"));
        }
    }
    check_tries(c, &model, &sets, &tr, &mut oracle)?;
    check_rounds(c, &model, &sets)
}

/// Method summaries against the closure oracle, for any call graph.
pub fn check_cyclic(c: &GenCorpus) -> Result<(), String> {
    let (model, rendered) = c.model();
    let sets = compute_method_exception_sets(&model);
    let tr = Translate::new(&model, &rendered, c);
    let want = closure_oracle(c);
    for (k, w) in want.iter().enumerate() {
        let got = tr.summary(&sets, k);
        if *w != got {
            return Err(format!("method m{k}: oracle {w:?}\nanalysis {got:?}"));
        }
    }
    check_rounds(c, &model, &sets)
}

fn check_rounds(c: &GenCorpus, model: &SemanticModel, sets: &MethodExceptionSets) -> Result<(), String> {
    let bound = model.method_count() * model.exception_universe().len() + 2;
    if sets.rounds > bound {
        return Err(format!("{} rounds exceeds bound {bound} ({} methods)", sets.rounds, c.methods.len()));
    }
    Ok(())
}

fn check_tries(
    c: &GenCorpus,
    model: &SemanticModel,
    sets: &MethodExceptionSets,
    tr: &Translate<'_>,
    oracle: &mut PathOracle<'_>,
) -> Result<(), String> {
    let by_stmt: HashMap<usize, (usize, &GenStmt)> = gen_tries(c)
        .into_iter()
        .map(|(m, s)| match s {
            GenStmt::Try { id, .. } => (*id, (m, s)),
            _ => unreachable!(),
        })
        .collect();
    if by_stmt.len() != model.tries().len() {
        return Err(format!("{} generated tries, {} in model", by_stmt.len(), model.tries().len()));
    }
    for t in model.try_ids() {
        let node = model.try_node(t);
        let stmt = rendered_stmt(tr.rendered, &node.position);
        let (m, GenStmt::Try { body, catches, .. }) = by_stmt[&stmt] else {
            unreachable!()
        };
        let a = analyze_try_block(t, sets, model, FlowOptions::default());
        let want = oracle.block(m, body);
        let got = tr.try_possible(&a);
        if want != got {
            return Err(format!("try {}: oracle {want:?}\nanalysis {got:?}", node.id));
        }
        if a.handled.len() + a.propagated.len() != a.possible.len() {
            return Err(format!("try {}: partition sizes differ", node.id));
        }
        // first matching clause, Specific exactly when the clause names the type
        let index = |name: &str| (0..c.types.len() + ROOTS.len()).find(|&t| c.type_name(t) == name).unwrap();
        for f in &a.possible {
            let ti = index(model.type_name(f.ty));
            let want = catches
                .iter()
                .position(|(alts, _)| alts.iter().any(|&x| c.is_subtype(ti, x)))
                .map(|i| {
                    let s = if catches[i].0.contains(&ti) {
                        Strategy::Specific
                    } else {
                        Strategy::Subsumption
                    };
                    (i, s)
                });
            let got = a
                .handled
                .iter()
                .find(|h| h.fact == *f)
                .map(|h| (node.catches.iter().position(|&x| x == h.catch).unwrap(), h.strategy));
            if want != got {
                return Err(format!("try {} type {}: handler {want:?} vs {got:?}", node.id, model.type_name(f.ty)));
            }
            if got.is_none() && !a.propagated.contains(f) {
                return Err(format!("try {}: unhandled fact not propagated", node.id));
            }
        }
        // distinct direct callees per type
        let mut callees: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
        for (ty, key) in want.keys() {
            let e = callees.entry(ty.as_str()).or_default();
            if let Key::Call { callee, .. } = key {
                e.insert(*callee);
            }
        }
        for (ty, n) in &a.distinct_method_count {
            let w = callees.get(model.type_name(*ty)).map_or(0, |s| s.len());
            if w != *n {
                return Err(format!("try {} type {}: {n} methods, oracle {w}", node.id, model.type_name(*ty)));
            }
        }
    }
    Ok(())
}

fn rendered_stmt(r: &Rendered, pos: &exflow::syntax::SourcePosition) -> usize {
    r.stmt_at[&(pos.file.clone(), pos.line)]
}

pub fn acyclic_corpus(seed: u64) -> GenCorpus {
    generate(&mut rng(seed), GenParams::small(true))
}

pub fn cyclic_corpus(seed: u64) -> GenCorpus {
    generate(
        &mut rng(seed),
        GenParams {
            methods: 10,
            ..GenParams::small(false)
        },
    )
}

// ---------------------------------------------------------------------------
// Handler fixtures.

use exflow::classify::{classify_actions, Action, DetectorConfig};

pub struct HandlerFixture {
    pub name: &'static str,
    pub body: &'static str,
    pub expected: &'static [Action],
}

macro_rules! fixture {
    ($name:literal, $body:literal, [$($a:ident),*]) => {
        HandlerFixture { name: $name, body: $body, expected: &[$(Action::$a),*] }
    };
}

/// One handler per action, then three combining several.
pub const HANDLER_FIXTURES: &[HandlerFixture] = &[
    fixture!("abort", "System.exit(1);", [Abort]),
    fixture!("continue", "continue;", [Continue]),
    fixture!("default", "e.printStackTrace();", [Default]),
    fixture!("empty", "", [Empty]),
    fixture!("log", "logger.warn(\"copy failed\", e);", [Log]),
    fixture!("method", "cleanup();", [Method]),
    fixture!("nested-try", "try { } finally { }", [NestedTry]),
    fixture!("return", "return null;", [Return]),
    fixture!("throw-current", "throw e;", [ThrowCurrent]),
    fixture!("throw-new", "throw new IllegalStateException(\"copy failed\");", [ThrowNew]),
    fixture!("throw-wrap", "throw new UncheckedIOException(e.getMessage(), e);", [ThrowWrap]),
    // a comment alone leaves the handler without statements
    fixture!("todo", "// TODO: decide what to do here", [Empty, Todo]),
    fixture!(
        "log-and-return",
        "System.err.println(\"failed: \" + e);\nreturn null;",
        [Log, Return]
    ),
    fixture!(
        "retry-or-wrap",
        "/* fixme: bounded retries */\nif (attempts++ < 3) {\n  cleanup();\n  continue;\n}\nthrow new IllegalStateException(e);",
        [Continue, Method, ThrowWrap, Todo]
    ),
    fixture!(
        "nested-fallback",
        "logger.error(\"primary failed\", e);\ntry {\n  fallback();\n} catch (IOException inner) {\n  Runtime.getRuntime().halt(1);\n}",
        [Abort, Log, Method, NestedTry]
    ),
];

/// Actions of a handler catching `IOException e` inside a loop.
pub fn handler_actions(body: &str, config: &DetectorConfig) -> BTreeSet<Action> {
    let src = format!(
        "package h;\n\nimport java.io.IOException;\nimport java.io.UncheckedIOException;\n\n\
         class H {{\n  Logger logger;\n  int attempts;\n\n  Object run() {{\n    while (true) {{\n      try {{\n        work();\n      }} catch (IOException e) {{\n{body}\n      }}\n    }}\n  }}\n\n  \
         void work() throws IOException {{}}\n  void cleanup() {{}}\n  void fallback() throws IOException {{}}\n}}\n"
    );
    let model = build(&[("h/H.java", &src)]);
    let clause = model
        .catches()
        .iter()
        .find(|c| c.clause.variable == "e")
        .expect("fixture catch clause");
    classify_actions(&clause.clause, &model, config)
}

// ---------------------------------------------------------------------------
// Rank-sum oracle: enumerate every way of choosing which pooled values form
// the first sample.

pub fn permutation_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks: Vec<f64> = pooled
        .iter()
        .map(|&x| {
            let below = pooled.iter().filter(|&&y| y < x).count() as f64;
            let equal = pooled.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let n = a.len();
    let big_n = pooled.len() as f64;
    let mean = n as f64 * (big_n + 1.0) / 2.0;
    let observed = (ranks[..n].iter().sum::<f64>() - mean).abs();

    // every rank sum of a size-n subset, one entry per subset
    fn sums(ranks: &[f64], start: usize, left: usize, sum: f64, out: &mut Vec<f64>) {
        if left == 0 {
            out.push(sum);
            return;
        }
        for i in start..=ranks.len() - left {
            sums(ranks, i + 1, left - 1, sum + ranks[i], out);
        }
    }
    let mut all = Vec::new();
    sums(&ranks, 0, n, 0.0, &mut all);
    let hits = all.iter().filter(|&&s| (s - mean).abs() >= observed - 1e-9).count();
    hits as f64 / all.len() as f64
}

/// Samples with values drawn from `0..range`; a small range forces ties.
pub fn samples<R: Rng>(rng: &mut R, n: usize, m: usize, range: u32) -> (Vec<f64>, Vec<f64>) {
    let mut draw = |k: usize| (0..k).map(|_| rng.gen_range(0..range) as f64).collect::<Vec<_>>();
    let a = draw(n);
    (a, draw(m))
}

/// Distinct values shuffled into two samples.
pub fn tie_free<R: Rng>(rng: &mut R, n: usize, m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut values: Vec<f64> = (0..n + m).map(|i| i as f64 * 1.5 + rng.gen_range(0.0..1.0)).collect();
    values.shuffle(rng);
    (values[..n].to_vec(), values[n..].to_vec())
}

// ---------------------------------------------------------------------------
// Full analyses of generated corpora.

use exflow::pipeline::{analyze_units, Analysis, AnalysisOptions};

pub fn analyze_corpus(c: &GenCorpus) -> Analysis {
    let rendered = c.render();
    let units: Vec<_> = rendered
        .files
        .iter()
        .map(|(f, s)| parse_compilation_unit(s, f).expect("generated code parses"))
        .collect();
    analyze_units(&units, &platform(), &AnalysisOptions::default()).expect("generated corpus builds")
}

/// Partition and stacking violations in one analysed corpus.
pub fn invariant_violations(analysis: &Analysis) -> Vec<String> {
    let mut out = Vec::new();
    for a in &analysis.tries {
        let mut split: Vec<_> = a.handled.iter().map(|h| h.fact.clone()).chain(a.propagated.iter().cloned()).collect();
        split.sort_by(|x, y| (x.ty, &x.origin).cmp(&(y.ty, &y.origin)));
        let mut possible = a.possible.clone();
        possible.sort_by(|x, y| (x.ty, &x.origin).cmp(&(y.ty, &y.origin)));
        if split != possible {
            out.push(format!("{}: handled and propagated do not partition possible", analysis.model.try_node(a.try_id).id));
        }
    }
    let report = exflow::report::aggregate_project(analysis, "generated");
    for r in &report.try_blocks {
        if !(r.propagated_recoverable <= r.propagated && r.propagated <= r.total) {
            out.push(format!("{}: {} / {} / {}", r.try_id, r.propagated_recoverable, r.propagated, r.total));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Running the binary.

use std::process::{Command, Output};

pub fn exflow<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_exflow"))
        .args(args)
        .env_remove("EXFLOW_PLATFORM_PATH")
        .output()
        .expect("binary runs")
}

pub fn write_files(root: &Path, files: &[(String, String)]) {
    for (f, s) in files {
        let path = root.join(f);
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(path, s).unwrap();
    }
}

/// A generated project of exactly `files` source files, possibly recursive.
pub fn generated_project(seed: u64, files: usize) -> GenCorpus {
    let mut c = generate(
        &mut rng(seed),
        GenParams {
            methods: 400,
            types: 5,
            classes: 1,
            max_depth: 3,
            acyclic: false,
        },
    );
    c.classes = files - c.types.len();
    c
}

// ---------------------------------------------------------------------------
// Strategy checks.

use exflow::classify::classify_strategy;

/// A random three-level hierarchy under Exception: roots, children, grandchildren.
pub fn hierarchy(seed: u64) -> Vec<(String, Option<usize>)> {
    let mut rng = rng(seed);
    let mut types: Vec<(String, Option<usize>)> = Vec::new();
    let roots = rng.gen_range(1..=3);
    for i in 0..roots {
        types.push((format!("L1x{i}"), None));
    }
    let mut level = 0..roots;
    for depth in 2..=3 {
        let start = types.len();
        for parent in level.clone() {
            for i in 0..rng.gen_range(1..=2) {
                types.push((format!("L{depth}x{parent}x{i}"), Some(parent)));
            }
        }
        level = start..types.len();
    }
    types
}

/// Every (thrown, caught) pair of a generated hierarchy, both directly and
/// through an analysed try block.
pub fn check_strategy_pairs(seed: u64) -> Result<(), String> {
    let types = hierarchy(seed);
    let mut files: Vec<(String, String)> = types
        .iter()
        .map(|(n, p)| {
            let sup = p.map_or("Exception".to_string(), |p| types[p].0.clone());
            (format!("s/{n}.java"), format!("package s;\nclass {n} extends {sup} {{}}\n"))
        })
        .collect();
    let mut body = String::from("package s;\nclass Pairs {\n");
    for (a, (ta, _)) in types.iter().enumerate() {
        for (b, (tb, _)) in types.iter().enumerate() {
            body.push_str(&format!(
                "  void p{a}x{b}() {{\n    try {{\n      throw new {ta}();\n    }} catch ({tb} e) {{\n    }}\n  }}\n"
            ));
        }
    }
    body.push_str("}\n");
    files.push(("s/Pairs.java".into(), body));
    let srcs: Vec<(&str, &str)> = files.iter().map(|(f, s)| (f.as_str(), s.as_str())).collect();
    let model = build(&srcs);
    let sets = compute_method_exception_sets(&model);

    let ancestor = |mut a: usize, b: usize| loop {
        if a == b {
            return true;
        }
        match types[a].1 {
            Some(p) => a = p,
            None => return false,
        }
    };
    for a in 0..types.len() {
        for b in 0..types.len() {
            let ta = model.type_id(&format!("s.{}", types[a].0)).unwrap();
            let tb = model.type_id(&format!("s.{}", types[b].0)).unwrap();
            let direct = classify_strategy(&model, ta, tb).ok();
            let m = model.methods_named("s.Pairs", &format!("p{a}x{b}"), 0)[0];
            let t = model.try_ids().find(|&t| model.try_node(t).method == m).unwrap();
            let analysis = analyze_try_block(t, &sets, &model, FlowOptions::default());
            let via_try = analysis.handled.first().map(|h| h.strategy);
            let want = if a == b {
                Some(Strategy::Specific)
            } else if ancestor(a, b) {
                Some(Strategy::Subsumption)
            } else {
                None
            };
            if direct != want || via_try != want {
                return Err(format!(
                    "({}, catch {}): want {want:?}, classify {direct:?}, try {via_try:?}",
                    types[a].0, types[b].0
                ));
            }
        }
    }
    Ok(())
}

fn first_match(catches: &str, thrown: &str) -> Match {
    let src = format!(
        "package f;\nimport java.io.*;\nimport java.nio.file.*;\nclass F {{\n  void f() {{\n    try {{\n      throw new {thrown}();\n    }} {catches}\n  }}\n}}\n"
    );
    let model = build(&[("f/F.java", &src)]);
    let sets = compute_method_exception_sets(&model);
    let t = model.try_ids().next().unwrap();
    let a = analyze_try_block(t, &sets, &model, FlowOptions::default());
    let node = model.try_node(t);
    a.handled
        .first()
        .map(|h| (node.catches.iter().position(|&c| c == h.catch).unwrap(), h.strategy))
}

/// Index of the handling clause and its strategy.
pub type Match = Option<(usize, Strategy)>;

/// Ordered clause lists: (clauses, thrown type, expected match).
pub const FIRST_MATCH: &[(&str, &str, Match)] = &[
    (ORDERED, "FileNotFoundException", Some((0, Strategy::Specific))),
    (ORDERED, "IOException", Some((1, Strategy::Specific))),
    (ORDERED, "FileAlreadyExistsException", Some((1, Strategy::Subsumption))),
    (ORDERED, "IllegalStateException", Some((2, Strategy::Subsumption))),
    (ORDERED, "OutOfMemoryError", None),
    // a broad clause first shadows the narrower ones after it
    ("catch (Exception e) { } catch (IOException e) { }", "IOException", Some((0, Strategy::Subsumption))),
    (MULTI, "FileSystemException", Some((0, Strategy::Subsumption))),
    (MULTI, "IOException", Some((0, Strategy::Specific))),
    (MULTI, "IllegalStateException", Some((0, Strategy::Specific))),
];

const ORDERED: &str = "catch (FileNotFoundException e) { } catch (IOException e) { } catch (Exception e) { }";
const MULTI: &str = "catch (IllegalStateException | IOException e) { } catch (FileSystemException e) { }";

pub fn check_first_match() -> Result<(), String> {
    for &(catches, thrown, want) in FIRST_MATCH {
        let got = first_match(catches, thrown);
        if got != want {
            return Err(format!("throw {thrown} into `{catches}`: want {want:?}, got {got:?}"));
        }
    }
    Ok(())
}
