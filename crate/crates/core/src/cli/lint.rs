use std::collections::BTreeSet;
use std::fmt;

use clap::ValueEnum;

use crate::classify::partition_recoverability;
use crate::pipeline::Analysis;
use crate::syntax::SourcePosition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
pub enum LintRule {
    RecoverablePropagated,
    CatchGeneric,
}

impl fmt::Display for LintRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LintRule::RecoverablePropagated => "recoverable-propagated",
            LintRule::CatchGeneric => "catch-generic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LintFinding {
    pub rule: LintRule,
    /// The try keyword for propagated exceptions, the catch keyword otherwise.
    pub position: SourcePosition,
    /// Propagated exception type, or the generic caught type.
    pub exception_type: String,
    pub message: String,
}

impl fmt::Display for LintFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: [{}] {}", self.position, self.rule, self.message)
    }
}

pub fn lint(analysis: &Analysis, generic_catch: &BTreeSet<String>) -> Vec<LintFinding> {
    let model = &analysis.model;
    let mut findings = Vec::new();
    for a in &analysis.tries {
        let node = model.try_node(a.try_id);
        let (recoverable, _) = partition_recoverability(&a.propagated, model);
        let types: BTreeSet<&str> = recoverable.iter().map(|f| model.type_name(f.ty)).collect();
        for ty in types {
            findings.push(LintFinding {
                rule: LintRule::RecoverablePropagated,
                position: node.position.clone(),
                exception_type: ty.to_string(),
                message: format!("potentially recoverable exception `{ty}` propagates out of this try block"),
            });
        }
    }
    for c in model.catches() {
        let generic = c
            .caught
            .iter()
            .map(|&t| model.type_name(t))
            .find(|n| generic_catch.contains(*n));
        if let Some(ty) = generic {
            findings.push(LintFinding {
                rule: LintRule::CatchGeneric,
                position: c.position.clone(),
                exception_type: ty.to_string(),
                message: format!("catch clause handles the generic type `{ty}`"),
            });
        }
    }
    findings.sort_by(|x, y| {
        (&x.position.file, x.position.line, x.rule, x.position.column, &x.exception_type).cmp(&(
            &y.position.file,
            y.position.line,
            y.rule,
            y.position.column,
            &y.exception_type,
        ))
    });
    findings
}
