//! Lowers method bodies to flow nodes while typing receivers and resolving
//! call sites against declared types.

use std::collections::{HashMap, HashSet, VecDeque};

use super::names::NameResolver;
use super::{
    CallSite, CallSiteId, CatchId, CatchNode, FlowNode, MethodId, MethodSignature, Resolution,
    SemanticModel, TryId, TryNode,
};
use crate::syntax::{
    Block, CompilationUnit, Expr, Invocation, LambdaBody, MethodDecl, SourcePosition, Statement,
    StmtKind, SwitchBlock, Thrown, TryStmt, TypeDecl, CONSTRUCTOR_NAME,
};

enum Lookup {
    Found(MethodId),
    Ambiguous,
    Missing,
}

struct Lowerer<'a> {
    model: &'a mut SemanticModel,
    resolver: &'a NameResolver,
    unit: &'a CompilationUnit,
    ty: &'a TypeDecl,
    method: MethodId,
    /// Variable → qualified declared type; multi-catch variables hold `A|B`.
    scopes: Vec<HashMap<String, Option<String>>>,
}

pub(super) fn lower_method(
    model: &mut SemanticModel,
    resolver: &NameResolver,
    unit: &CompilationUnit,
    ty: &TypeDecl,
    decl: &MethodDecl,
    method: MethodId,
) -> Vec<FlowNode> {
    let mut l = Lowerer {
        model,
        resolver,
        unit,
        ty,
        method,
        scopes: vec![HashMap::new()],
    };
    for p in &decl.params {
        l.declare(&p.name, &p.ty);
    }
    let mut out = Vec::new();
    if let Some(body) = &decl.body {
        l.block(body, &mut out);
    }
    out
}

impl Lowerer<'_> {
    fn qualify(&self, name: &str) -> String {
        self.resolver.resolve(self.unit, Some(&self.ty.name), name)
    }

    fn declare(&mut self, var: &str, written: &str) {
        let q = (!written.is_empty() && written != "var").then(|| self.qualify(written));
        self.bind(var, q);
    }

    fn bind(&mut self, var: &str, q: Option<String>) {
        self.scopes
            .last_mut()
            .expect("scope stack is never empty")
            .insert(var.to_string(), q);
    }

    fn scoped(&mut self, f: impl FnOnce(&mut Self)) {
        self.scopes.push(HashMap::new());
        f(self);
        self.scopes.pop();
    }

    fn is_variable(&self, name: &str) -> bool {
        self.scopes.iter().any(|s| s.contains_key(name)) || self.field_of_scope(name).is_some()
    }

    fn var_type(&self, name: &str) -> Option<String> {
        for s in self.scopes.iter().rev() {
            if let Some(t) = s.get(name) {
                return t.clone();
            }
        }
        self.field_of_scope(name)
    }

    /// Field visible by simple name from the current type or an enclosing one.
    fn field_of_scope(&self, name: &str) -> Option<String> {
        let mut scope = Some(self.ty.name.clone());
        while let Some(t) = scope {
            if let Some(f) = self.field_type(&t, name) {
                return Some(f);
            }
            scope = self.enclosing_of(&t);
        }
        None
    }

    fn enclosing_of(&self, ty: &str) -> Option<String> {
        let (outer, _) = ty.rsplit_once('.')?;
        self.model.types.get(outer).map(|_| outer.to_string())
    }

    fn field_type(&self, owner: &str, field: &str) -> Option<String> {
        let start = self.model.types.get(owner)?;
        self.model
            .types
            .ancestors(start)
            .find_map(|t| self.model.types.entry(t).fields.get(field).cloned())
    }

    fn superclass_of(&self, ty: &str) -> Option<String> {
        let id = self.model.types.get(ty)?;
        self.model.types.entry(id).superclass_name.clone()
    }

    /// A name or dotted chain denoting a type rather than a value.
    fn type_ref(&self, e: &Expr) -> Option<String> {
        let dotted = e.dotted_name()?;
        let first = dotted.split('.').next().unwrap_or_default();
        if self.is_variable(first) {
            return None;
        }
        let current = Some(self.ty.name.as_str());
        if self.resolver.is_type_name(self.unit, current, &dotted) {
            return Some(self.qualify(&dotted));
        }
        // an unknown capitalized simple name is most likely a class
        let unknown_class = !dotted.contains('.') && dotted.starts_with(|c: char| c.is_uppercase());
        unknown_class.then_some(dotted)
    }

    fn block(&mut self, b: &Block, out: &mut Vec<FlowNode>) {
        self.scoped(|l| {
            for s in &b.statements {
                l.stmt(s, out);
            }
        });
    }

    fn stmt(&mut self, s: &Statement, out: &mut Vec<FlowNode>) {
        match &s.kind {
            StmtKind::Block(b) => self.block(b, out),
            StmtKind::Try(t) => self.try_stmt(t, out),
            StmtKind::Throw(t) => self.throw(&t.thrown, &t.position, out),
            StmtKind::Expr(e) | StmtKind::Yield(e) | StmtKind::Return(Some(e)) => {
                self.expr(e, out);
            }
            StmtKind::LocalDecl(d) => {
                for (name, init) in &d.vars {
                    let inferred = init.as_ref().and_then(|e| self.expr(e, out));
                    if d.ty == "var" {
                        self.bind(name, inferred);
                    } else {
                        self.declare(name, &d.ty);
                    }
                }
            }
            StmtKind::If {
                cond,
                then,
                otherwise,
            } => {
                self.expr(cond, out);
                self.scoped(|l| l.stmt(then, out));
                if let Some(o) = otherwise {
                    self.scoped(|l| l.stmt(o, out));
                }
            }
            StmtKind::Loop(lp) => self.scoped(|l| {
                for s in &lp.init {
                    l.stmt(s, out);
                }
                for e in &lp.header {
                    l.expr(e, out);
                }
                l.stmt(&lp.body, out);
            }),
            StmtKind::Switch(sw) => self.switch(sw, out),
            StmtKind::Synchronized { lock, body } => {
                self.expr(lock, out);
                self.block(body, out);
            }
            StmtKind::Labeled { body, .. } => self.stmt(body, out),
            StmtKind::Assert(es) => {
                for e in es {
                    self.expr(e, out);
                }
            }
            StmtKind::Return(None)
            | StmtKind::Continue(_)
            | StmtKind::Break(_)
            | StmtKind::Comment(_)
            | StmtKind::Empty => {}
        }
    }

    fn switch(&mut self, sw: &SwitchBlock, out: &mut Vec<FlowNode>) {
        self.expr(&sw.selector, out);
        self.scoped(|l| {
            for case in &sw.cases {
                for s in &case.body {
                    l.stmt(s, out);
                }
            }
        });
    }

    fn try_stmt(&mut self, t: &TryStmt, out: &mut Vec<FlowNode>) {
        let id = TryId(self.model.tries.len() as u32);
        self.model.tries.push(TryNode {
            id: t.id.clone(),
            position: t.position.clone(),
            method: self.method,
            body: Vec::new(),
            catches: Vec::new(),
            finally: Vec::new(),
        });
        self.model.try_index.insert(t.id.clone(), id);

        let mut body = Vec::new();
        self.scoped(|l| {
            for r in &t.resources {
                l.stmt(r, &mut body);
            }
            l.block(&t.body, &mut body);
        });

        let mut catches = Vec::new();
        for c in &t.catches {
            let names: Vec<String> = c.caught_types.iter().map(|n| self.qualify(n)).collect();
            let mut caught = Vec::new();
            for (written, q) in c.caught_types.iter().zip(&names) {
                match self.model.types.get(q).filter(|&x| self.model.types.is_exception(x)) {
                    Some(x) => caught.push(x),
                    None => self.model.warn(
                        Some(c.position.clone()),
                        format!("unknown exception type `{written}` in catch clause"),
                    ),
                }
            }
            let mut handler = Vec::new();
            self.scoped(|l| {
                l.bind(&c.variable, Some(names.join("|")));
                l.block(&c.body, &mut handler);
            });
            let cid = CatchId(self.model.catches.len() as u32);
            self.model.catches.push(CatchNode {
                id: c.id.clone(),
                position: c.position.clone(),
                try_id: id,
                caught,
                handler,
                clause: c.clone(),
            });
            catches.push(cid);
        }

        let mut finally = Vec::new();
        if let Some(f) = &t.finally {
            self.block(f, &mut finally);
        }
        let node = &mut self.model.tries[id.index()];
        node.body = body;
        node.catches = catches;
        node.finally = finally;
        out.push(FlowNode::Try(id));
    }

    fn throw(&mut self, thrown: &Thrown, position: &SourcePosition, out: &mut Vec<FlowNode>) {
        match thrown {
            Thrown::NewInstance { ty, args } => {
                for a in args {
                    self.expr(a, out);
                }
                let q = self.qualify(ty);
                self.constructor_call(&q, args.len(), position, out);
                self.throw_type(&q, position, out);
            }
            Thrown::VariableRef(v) => match self.var_type(v) {
                // a multi-catch parameter rethrows any of its alternatives
                Some(t) => {
                    for alt in t.split('|') {
                        self.throw_type(alt, position, out);
                    }
                }
                None => self.model.warn(
                    Some(position.clone()),
                    format!("cannot determine the type of thrown variable `{v}`"),
                ),
            },
            Thrown::Other(e) => match self.expr(e, out) {
                Some(t) => self.throw_type(&t, position, out),
                None => self.model.warn(
                    Some(position.clone()),
                    "cannot determine the type of the thrown expression".to_string(),
                ),
            },
        }
    }

    fn throw_type(&mut self, q: &str, position: &SourcePosition, out: &mut Vec<FlowNode>) {
        match self.model.types.get(q).filter(|&t| self.model.types.is_exception(t)) {
            Some(ty) => out.push(FlowNode::Throw {
                position: position.clone(),
                ty,
            }),
            None => self.model.warn(
                Some(position.clone()),
                format!("thrown type `{q}` is not a known exception type"),
            ),
        }
    }

    /// Static type of `e`, registering every call site inside it.
    fn expr(&mut self, e: &Expr, out: &mut Vec<FlowNode>) -> Option<String> {
        match e {
            Expr::Literal(lit) => lit.starts_with('"').then(|| "java.lang.String".to_string()),
            Expr::Name(n) => self.var_type(n),
            Expr::This => Some(self.ty.name.clone()),
            Expr::Super => self.superclass_of(&self.ty.name),
            Expr::FieldAccess { target, name } => {
                if self.type_ref(e).is_some() {
                    return None;
                }
                let owner = match self.type_ref(target) {
                    Some(t) => Some(t),
                    None => self.expr(target, out),
                };
                owner.and_then(|o| self.field_type(&o, name))
            }
            Expr::Invocation(inv) => self.invocation(inv, out),
            Expr::New {
                ty,
                args,
                body,
                position,
            } => {
                for a in args {
                    self.expr(a, out);
                }
                let q = self.qualify(ty);
                self.constructor_call(&q, args.len(), position, out);
                // anonymous class bodies count toward the enclosing method
                for m in body.iter().flatten() {
                    self.scoped(|l| {
                        for p in &m.params {
                            l.declare(&p.name, &p.ty);
                        }
                        if let Some(b) = &m.body {
                            l.block(b, out);
                        }
                    });
                }
                Some(q)
            }
            Expr::NewArray { dims, init, .. } => {
                for d in dims.iter().chain(init.iter().flatten()) {
                    self.expr(d, out);
                }
                None
            }
            Expr::ArrayInit(items) => {
                for i in items {
                    self.expr(i, out);
                }
                None
            }
            Expr::Unary { operand, .. } => self.expr(operand, out),
            Expr::Binary { op, lhs, rhs } => {
                let l = self.expr(lhs, out);
                let r = self.expr(rhs, out);
                let string = Some("java.lang.String".to_string());
                (op == "+" && (l == string || r == string)).then_some(string).flatten()
            }
            Expr::Assign { target, value, .. } => {
                self.expr(value, out);
                self.expr(target, out)
            }
            Expr::Conditional {
                cond,
                then,
                otherwise,
            } => {
                self.expr(cond, out);
                let a = self.expr(then, out);
                let b = self.expr(otherwise, out);
                a.or(b)
            }
            Expr::Cast { ty, expr } => {
                self.expr(expr, out);
                Some(self.qualify(ty))
            }
            Expr::InstanceOf { expr, ty, binding } => {
                self.expr(expr, out);
                if let Some(b) = binding {
                    self.declare(b, ty);
                }
                Some("boolean".to_string())
            }
            Expr::Index { array, index } => {
                let a = self.expr(array, out);
                self.expr(index, out);
                a.and_then(|t| t.strip_suffix("[]").map(str::to_string))
            }
            Expr::Lambda { params, body } => {
                self.scoped(|l| {
                    for p in params {
                        l.declare(&p.name, &p.ty);
                    }
                    match body {
                        LambdaBody::Expr(e) => {
                            l.expr(e, out);
                        }
                        LambdaBody::Block(b) => l.block(b, out),
                    }
                });
                None
            }
            Expr::MethodRef { target, .. } => {
                if self.type_ref(target).is_none() {
                    self.expr(target, out);
                }
                None
            }
            Expr::ClassLit(_) => Some("java.lang.Class".to_string()),
            Expr::Switch(sw) => {
                self.switch(sw, out);
                None
            }
        }
    }

    fn invocation(&mut self, inv: &Invocation, out: &mut Vec<FlowNode>) -> Option<String> {
        let arity = inv.arity();
        let owner = match inv.receiver.as_deref() {
            None if inv.name == CONSTRUCTOR_NAME => Some(self.ty.name.clone()),
            None => None,
            Some(Expr::Super) => self.superclass_of(&self.ty.name),
            Some(r) => match self.type_ref(r) {
                Some(t) => Some(t),
                None => self.expr(r, out),
            },
        };
        for a in &inv.args {
            self.expr(a, out);
        }
        let (target, lookup) = if inv.name == CONSTRUCTOR_NAME {
            match owner {
                Some(o) => {
                    let l = self.check(&o, CONSTRUCTOR_NAME, arity);
                    (Some(o), l)
                }
                None => (None, Lookup::Missing),
            }
        } else if inv.receiver.is_none() {
            self.lookup_unqualified(&inv.name, arity)
        } else {
            match owner {
                Some(o) => {
                    let l = self.lookup(&o, &inv.name, arity);
                    (Some(o), l)
                }
                None => (None, Lookup::Missing),
            }
        };
        let target = target.map(|o| MethodSignature::new(o, inv.name.clone(), arity));
        let resolution = self.settle(lookup, &inv.name, arity, &inv.position);
        self.register(&inv.position, &inv.name, arity, target, resolution, out);
        resolution
            .method()
            .and_then(|m| self.model.methods[m.index()].return_type.clone())
    }

    fn constructor_call(
        &mut self,
        owner: &str,
        arity: usize,
        position: &SourcePosition,
        out: &mut Vec<FlowNode>,
    ) {
        let lookup = self.check(owner, CONSTRUCTOR_NAME, arity);
        let corpus_class = self
            .model
            .types
            .get(owner)
            .map(|t| self.model.types.entry(t))
            .is_some_and(|e| e.position.is_some() && !e.is_interface);
        // library constructors without a platform entry are not call sites
        if matches!(lookup, Lookup::Missing) && !corpus_class {
            return;
        }
        let resolution = self.settle(lookup, CONSTRUCTOR_NAME, arity, position);
        let target = Some(MethodSignature::new(owner, CONSTRUCTOR_NAME, arity));
        self.register(position, CONSTRUCTOR_NAME, arity, target, resolution, out);
    }

    fn settle(&mut self, lookup: Lookup, name: &str, arity: usize, position: &SourcePosition) -> Resolution {
        match lookup {
            Lookup::Found(m) => Resolution::Resolved(m),
            Lookup::Missing => Resolution::Unresolved,
            Lookup::Ambiguous => {
                self.model.warn(
                    Some(position.clone()),
                    format!("ambiguous call to `{name}` with {arity} argument(s)"),
                );
                Resolution::Unresolved
            }
        }
    }

    fn register(
        &mut self,
        position: &SourcePosition,
        name: &str,
        arity: usize,
        target: Option<MethodSignature>,
        resolution: Resolution,
        out: &mut Vec<FlowNode>,
    ) {
        let id = CallSiteId(self.model.call_sites.len() as u32);
        self.model.call_sites.push(CallSite {
            position: position.clone(),
            caller: self.method,
            name: name.to_string(),
            arity,
            target,
            resolution,
        });
        self.model.call_index.insert(position.clone(), id);
        out.push(FlowNode::Call(id));
    }

    /// Candidates declared directly on `owner`.
    fn check(&self, owner: &str, name: &str, arity: usize) -> Lookup {
        match self.model.methods_named(owner, name, arity) {
            [] => Lookup::Missing,
            [m] => Lookup::Found(*m),
            _ => Lookup::Ambiguous,
        }
    }

    /// Declared type first, then its superclass chain, then interfaces.
    fn lookup(&self, owner: &str, name: &str, arity: usize) -> Lookup {
        let mut seen = HashSet::new();
        let mut chain = Vec::new();
        let mut cur = Some(owner.to_string());
        while let Some(c) = cur {
            if !seen.insert(c.clone()) {
                break;
            }
            match self.check(&c, name, arity) {
                Lookup::Missing => {}
                found => return found,
            }
            cur = self.superclass_of(&c);
            chain.push(c);
        }
        let mut queue: VecDeque<String> = chain.iter().flat_map(|c| self.interfaces_of(c)).collect();
        while let Some(i) = queue.pop_front() {
            if !seen.insert(i.clone()) {
                continue;
            }
            match self.check(&i, name, arity) {
                Lookup::Missing => {}
                found => return found,
            }
            queue.extend(self.interfaces_of(&i));
        }
        Lookup::Missing
    }

    fn interfaces_of(&self, ty: &str) -> Vec<String> {
        self.model
            .types
            .get(ty)
            .map(|t| self.model.types.entry(t).interface_names.clone())
            .unwrap_or_default()
    }

    /// Unqualified `m(...)`: the current type and its enclosing types, then
    /// static imports.
    fn lookup_unqualified(&self, name: &str, arity: usize) -> (Option<String>, Lookup) {
        let mut scope = Some(self.ty.name.clone());
        while let Some(t) = scope {
            match self.lookup(&t, name, arity) {
                Lookup::Missing => {}
                found => return (Some(t), found),
            }
            scope = self.enclosing_of(&t);
        }
        for imp in self.unit.imports.iter().filter(|i| i.is_static) {
            let owner = if imp.wildcard {
                imp.path.as_str()
            } else {
                match imp.path.rsplit_once('.') {
                    Some((owner, member)) if member == name => owner,
                    _ => continue,
                }
            };
            match self.lookup(owner, name, arity) {
                Lookup::Missing => {}
                found => return (Some(owner.to_string()), found),
            }
        }
        (Some(self.ty.name.clone()), Lookup::Missing)
    }
}
