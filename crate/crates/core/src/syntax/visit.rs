//! Read-only traversal over statements and expressions.
//!
//! Override the hooks you need and call the matching `walk_*` function to
//! keep descending. Lambda bodies and anonymous class methods are visited
//! in place, as part of the statement that contains them.

use super::ast::*;

pub trait Visit<'a> {
    fn visit_block(&mut self, b: &'a Block) {
        walk_block(self, b);
    }
    fn visit_statement(&mut self, s: &'a Statement) {
        walk_statement(self, s);
    }
    fn visit_try(&mut self, t: &'a TryStmt) {
        walk_try(self, t);
    }
    fn visit_catch(&mut self, c: &'a CatchClause) {
        self.visit_block(&c.body);
    }
    fn visit_throw(&mut self, t: &'a ThrowStmt) {
        walk_throw(self, t);
    }
    fn visit_comment(&mut self, _c: &'a Comment) {}
    fn visit_expr(&mut self, e: &'a Expr) {
        walk_expr(self, e);
    }
    fn visit_invocation(&mut self, i: &'a Invocation) {
        walk_invocation(self, i);
    }
}

pub fn walk_block<'a, V: Visit<'a> + ?Sized>(v: &mut V, b: &'a Block) {
    for s in &b.statements {
        v.visit_statement(s);
    }
}

pub fn walk_try<'a, V: Visit<'a> + ?Sized>(v: &mut V, t: &'a TryStmt) {
    for r in &t.resources {
        v.visit_statement(r);
    }
    v.visit_block(&t.body);
    for c in &t.catches {
        v.visit_catch(c);
    }
    if let Some(f) = &t.finally {
        v.visit_block(f);
    }
}

pub fn walk_throw<'a, V: Visit<'a> + ?Sized>(v: &mut V, t: &'a ThrowStmt) {
    match &t.thrown {
        Thrown::NewInstance { args, .. } => {
            for a in args {
                v.visit_expr(a);
            }
        }
        Thrown::VariableRef(_) => {}
        Thrown::Other(e) => v.visit_expr(e),
    }
}

pub fn walk_statement<'a, V: Visit<'a> + ?Sized>(v: &mut V, s: &'a Statement) {
    match &s.kind {
        StmtKind::Block(b) => v.visit_block(b),
        StmtKind::Try(t) => v.visit_try(t),
        StmtKind::Throw(t) => v.visit_throw(t),
        StmtKind::Expr(e) | StmtKind::Yield(e) => v.visit_expr(e),
        StmtKind::Return(e) => {
            if let Some(e) = e {
                v.visit_expr(e);
            }
        }
        StmtKind::Continue(_) | StmtKind::Break(_) | StmtKind::Empty => {}
        StmtKind::LocalDecl(d) => {
            for (_, init) in &d.vars {
                if let Some(e) = init {
                    v.visit_expr(e);
                }
            }
        }
        StmtKind::If {
            cond,
            then,
            otherwise,
        } => {
            v.visit_expr(cond);
            v.visit_statement(then);
            if let Some(o) = otherwise {
                v.visit_statement(o);
            }
        }
        StmtKind::Loop(l) => {
            for s in &l.init {
                v.visit_statement(s);
            }
            for e in &l.header {
                v.visit_expr(e);
            }
            v.visit_statement(&l.body);
        }
        StmtKind::Switch(sw) => walk_switch(v, sw),
        StmtKind::Synchronized { lock, body } => {
            v.visit_expr(lock);
            v.visit_block(body);
        }
        StmtKind::Labeled { body, .. } => v.visit_statement(body),
        StmtKind::Assert(es) => {
            for e in es {
                v.visit_expr(e);
            }
        }
        StmtKind::Comment(c) => v.visit_comment(c),
    }
}

pub fn walk_switch<'a, V: Visit<'a> + ?Sized>(v: &mut V, sw: &'a SwitchBlock) {
    v.visit_expr(&sw.selector);
    for case in &sw.cases {
        for l in &case.labels {
            v.visit_expr(l);
        }
        for s in &case.body {
            v.visit_statement(s);
        }
    }
}

pub fn walk_invocation<'a, V: Visit<'a> + ?Sized>(v: &mut V, i: &'a Invocation) {
    if let Some(r) = &i.receiver {
        v.visit_expr(r);
    }
    for a in &i.args {
        v.visit_expr(a);
    }
}

pub fn walk_expr<'a, V: Visit<'a> + ?Sized>(v: &mut V, e: &'a Expr) {
    match e {
        Expr::Literal(_)
        | Expr::Name(_)
        | Expr::This
        | Expr::Super
        | Expr::ClassLit(_) => {}
        Expr::FieldAccess { target, .. } => v.visit_expr(target),
        Expr::Invocation(i) => v.visit_invocation(i),
        Expr::New { args, body, .. } => {
            for a in args {
                v.visit_expr(a);
            }
            if let Some(methods) = body {
                for m in methods {
                    if let Some(b) = &m.body {
                        v.visit_block(b);
                    }
                }
            }
        }
        Expr::NewArray { dims, init, .. } => {
            for d in dims {
                v.visit_expr(d);
            }
            if let Some(init) = init {
                for x in init {
                    v.visit_expr(x);
                }
            }
        }
        Expr::ArrayInit(xs) => {
            for x in xs {
                v.visit_expr(x);
            }
        }
        Expr::Unary { operand, .. } => v.visit_expr(operand),
        Expr::Binary { lhs, rhs, .. } => {
            v.visit_expr(lhs);
            v.visit_expr(rhs);
        }
        Expr::Assign { target, value, .. } => {
            v.visit_expr(target);
            v.visit_expr(value);
        }
        Expr::Conditional {
            cond,
            then,
            otherwise,
        } => {
            v.visit_expr(cond);
            v.visit_expr(then);
            v.visit_expr(otherwise);
        }
        Expr::Cast { expr, .. } => v.visit_expr(expr),
        Expr::InstanceOf { expr, .. } => v.visit_expr(expr),
        Expr::Index { array, index } => {
            v.visit_expr(array);
            v.visit_expr(index);
        }
        Expr::Lambda { body, .. } => match body {
            LambdaBody::Expr(e) => v.visit_expr(e),
            LambdaBody::Block(b) => v.visit_block(b),
        },
        Expr::MethodRef { target, .. } => v.visit_expr(target),
        Expr::Switch(sw) => walk_switch(v, sw),
    }
}
