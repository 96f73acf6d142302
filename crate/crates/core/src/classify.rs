//! Handler strategies, handler actions and recoverability partitioning.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{PossibleException, TryBlockAnalysis};
use crate::model::{CatchId, ModelError, Recoverability, SemanticModel, TypeId};
use crate::syntax::visit::{self, Visit};
use crate::syntax::{CatchClause, Comment, Expr, Invocation, Statement, StmtKind, ThrowStmt, Thrown, TryStmt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Specific,
    Subsumption,
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("`{fact}` is not caught by `{caught}`")]
    NoMatch { fact: String, caught: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Specific when the handler names the exact type, Subsumption for a strict
/// supertype.
pub fn classify_strategy(model: &SemanticModel, fact: TypeId, matched: TypeId) -> Result<Strategy, ClassifyError> {
    if fact == matched {
        model.types().exception_info(fact)?;
        return Ok(Strategy::Specific);
    }
    if model.is_subtype(fact, matched)? {
        Ok(Strategy::Subsumption)
    } else {
        Err(ClassifyError::NoMatch {
            fact: model.type_name(fact).to_string(),
            caught: model.type_name(matched).to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Abort,
    Continue,
    Default,
    Empty,
    Log,
    Method,
    NestedTry,
    Return,
    ThrowCurrent,
    ThrowNew,
    ThrowWrap,
    Todo,
}

impl Action {
    pub const ALL: [Action; 12] = [
        Action::Abort,
        Action::Continue,
        Action::Default,
        Action::Empty,
        Action::Log,
        Action::Method,
        Action::NestedTry,
        Action::Return,
        Action::ThrowCurrent,
        Action::ThrowNew,
        Action::ThrowWrap,
        Action::Todo,
    ];

    pub fn parse(s: &str) -> Option<Action> {
        Action::ALL.into_iter().find(|a| a.to_string() == s)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub const DEFAULT_LOG_METHODS: &[&str] = &[
    "log", "trace", "debug", "info", "warn", "warning", "error", "fatal", "severe", "fine", "finer",
    "finest",
];

pub const DEFAULT_ABORT: &[&str] = &["java.lang.System#exit(1)", "java.lang.Runtime#halt(1)"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectorConfig {
    /// `Owner#name(arity)` signatures that terminate the process.
    pub abort: BTreeSet<String>,
    pub log_methods: BTreeSet<String>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            abort: DEFAULT_ABORT.iter().map(|s| s.to_string()).collect(),
            log_methods: DEFAULT_LOG_METHODS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

struct Detector<'a> {
    var: &'a str,
    model: &'a SemanticModel,
    config: &'a DetectorConfig,
    sole_statement: bool,
    throw_depth: usize,
    actions: BTreeSet<Action>,
}

impl Detector<'_> {
    fn is_abort(&self, i: &Invocation) -> bool {
        let Some(site) = self.model.call_site_at(&i.position) else {
            return false;
        };
        let site = self.model.call_site(site);
        let declared = site.target.as_ref().map(|t| t.to_string());
        let resolved = site
            .resolution
            .method()
            .map(|m| self.model.method(m).signature().to_string());
        declared
            .into_iter()
            .chain(resolved)
            .any(|s| self.config.abort.contains(&s))
    }

    fn is_log(&self, i: &Invocation) -> bool {
        if self.config.log_methods.contains(&i.name) {
            return true;
        }
        let console = i
            .receiver
            .as_ref()
            .and_then(|r| r.dotted_name())
            .is_some_and(|d| d == "System.out" || d == "System.err");
        console && i.name.starts_with("print")
    }

    fn is_print_stack_trace(&self, i: &Invocation) -> bool {
        i.name == "printStackTrace"
            && i.args.is_empty()
            && matches!(i.receiver.as_deref(), Some(Expr::Name(n)) if n == self.var)
    }
}

impl<'a> Visit<'a> for Detector<'_> {
    fn visit_statement(&mut self, s: &'a Statement) {
        match &s.kind {
            StmtKind::Continue(_) => {
                self.actions.insert(Action::Continue);
            }
            StmtKind::Return(_) => {
                self.actions.insert(Action::Return);
            }
            _ => {}
        }
        visit::walk_statement(self, s);
    }

    fn visit_try(&mut self, t: &'a TryStmt) {
        self.actions.insert(Action::NestedTry);
        visit::walk_try(self, t);
    }

    fn visit_throw(&mut self, t: &'a ThrowStmt) {
        match &t.thrown {
            Thrown::VariableRef(v) if v == self.var => {
                self.actions.insert(Action::ThrowCurrent);
            }
            Thrown::NewInstance { args, .. } => {
                let wraps = args.iter().any(|a| mentions(a, self.var));
                self.actions
                    .insert(if wraps { Action::ThrowWrap } else { Action::ThrowNew });
            }
            _ => {}
        }
        self.throw_depth += 1;
        visit::walk_throw(self, t);
        self.throw_depth -= 1;
    }

    fn visit_comment(&mut self, c: &'a Comment) {
        let upper = c.text.to_uppercase();
        if upper.contains("TODO") || upper.contains("FIXME") {
            self.actions.insert(Action::Todo);
        }
    }

    fn visit_invocation(&mut self, i: &'a Invocation) {
        if self.is_abort(i) {
            self.actions.insert(Action::Abort);
        } else if self.is_print_stack_trace(i) {
            // the IDE idiom on its own, otherwise just console output
            self.actions
                .insert(if self.sole_statement { Action::Default } else { Action::Log });
        } else if self.is_log(i) {
            self.actions.insert(Action::Log);
        } else if self.throw_depth == 0 {
            self.actions.insert(Action::Method);
        }
        visit::walk_invocation(self, i);
    }
}

/// Whether `e` refers to the variable `var` anywhere inside it.
fn mentions(e: &Expr, var: &str) -> bool {
    struct Finder<'v> {
        var: &'v str,
        found: bool,
    }
    impl<'a> Visit<'a> for Finder<'_> {
        fn visit_expr(&mut self, e: &'a Expr) {
            if matches!(e, Expr::Name(n) if n == self.var) {
                self.found = true;
            }
            visit::walk_expr(self, e);
        }
    }
    let mut f = Finder { var, found: false };
    f.visit_expr(e);
    f.found
}

/// Actions of a handler; abort detection reads call sites from `model`.
pub fn classify_actions(clause: &CatchClause, model: &SemanticModel, config: &DetectorConfig) -> BTreeSet<Action> {
    let code: Vec<&Statement> = clause.body.code_statements().collect();
    let mut d = Detector {
        var: &clause.variable,
        model,
        config,
        sole_statement: code.len() == 1,
        throw_depth: 0,
        actions: BTreeSet::new(),
    };
    if code.is_empty() {
        d.actions.insert(Action::Empty);
    }
    d.visit_block(&clause.body);
    d.actions
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HandlerClassification {
    pub catch: CatchId,
    pub id: String,
    pub actions: BTreeSet<Action>,
    pub strategies: Vec<(PossibleException, Strategy)>,
}

/// One entry per catch clause of the analyzed try blocks.
pub fn classify_handlers(
    model: &SemanticModel,
    analyses: &[TryBlockAnalysis],
    config: &DetectorConfig,
) -> Vec<HandlerClassification> {
    let mut out = Vec::new();
    for a in analyses {
        for &c in &model.try_node(a.try_id).catches {
            let node = model.catch_node(c);
            out.push(HandlerClassification {
                catch: c,
                id: node.id.clone(),
                actions: classify_actions(&node.clause, model, config),
                strategies: a
                    .handled
                    .iter()
                    .filter(|h| h.catch == c)
                    .map(|h| (h.fact.clone(), h.strategy))
                    .collect(),
            });
        }
    }
    out
}

/// Splits facts into (potentially recoverable, potentially unrecoverable).
pub fn partition_recoverability(
    propagated: &[PossibleException],
    model: &SemanticModel,
) -> (Vec<PossibleException>, Vec<PossibleException>) {
    propagated.iter().cloned().partition(|f| {
        model.recoverability_of(f.ty).expect("facts carry exception types")
            == Recoverability::PotentiallyRecoverable
    })
}
