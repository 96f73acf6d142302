//! Syntax tree for the supported Java subset.
//!
//! Type names are stored as written with type arguments erased, so
//! `Map<String, List<Foo>>` becomes `Map` and `String...` becomes `String[]`.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A 1-based line/column location inside a source file.
///
/// Columns count Unicode scalar values, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourcePosition {
    pub file: String,
    pub line: u32,
    pub column: u32,
}

impl SourcePosition {
    pub fn new(file: impl Into<String>, line: u32, column: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourcePosition {
            file: file.into(),
            line,
            column,
        }
    }
}

impl fmt::Display for SourcePosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompilationUnit {
    pub file: String,
    pub package: Option<String>,
    pub imports: Vec<Import>,
    /// All declared types, nested ones flattened with `Outer.Inner` qualified names.
    pub types: Vec<TypeDecl>,
}

impl CompilationUnit {
    /// Every try statement in the unit, in source order, including nested ones.
    pub fn try_statements(&self) -> Vec<&TryStmt> {
        struct Collect<'a>(Vec<&'a TryStmt>);
        impl<'a> crate::syntax::visit::Visit<'a> for Collect<'a> {
            fn visit_try(&mut self, t: &'a TryStmt) {
                self.0.push(t);
                crate::syntax::visit::walk_try(self, t);
            }
        }
        let mut c = Collect(Vec::new());
        for ty in &self.types {
            for m in &ty.methods {
                if let Some(body) = &m.body {
                    crate::syntax::visit::Visit::visit_block(&mut c, body);
                }
            }
        }
        c.0.sort_by(|a, b| a.position.cmp(&b.position));
        c.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Import {
    pub path: String,
    pub is_static: bool,
    pub wildcard: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeKind {
    Class,
    Interface,
    Enum,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    /// Qualified name, `pkg.Outer.Inner`.
    pub name: String,
    pub simple_name: String,
    pub kind: TypeKind,
    pub superclass: Option<String>,
    pub interfaces: Vec<String>,
    /// Qualified name of the lexically enclosing type, for member types.
    pub enclosing: Option<String>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub doc: Option<DocComment>,
    pub position: SourcePosition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: String,
    pub is_static: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: String,
}

/// Constructors use the name `<init>`, initializer blocks `<clinit>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub name: String,
    pub params: Vec<Param>,
    /// `None` for constructors and initializer blocks.
    pub return_type: Option<String>,
    pub declared_throws: Vec<String>,
    pub body: Option<Block>,
    pub doc: Option<DocComment>,
    pub is_static: bool,
    pub position: SourcePosition,
}

impl MethodDecl {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn is_constructor(&self) -> bool {
        self.name == CONSTRUCTOR_NAME
    }
}

pub const CONSTRUCTOR_NAME: &str = "<init>";
pub const INITIALIZER_NAME: &str = "<clinit>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocComment {
    pub raw: String,
    pub throws_tags: Vec<ThrowsTag>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThrowsTag {
    pub exception: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    pub text: String,
    pub position: SourcePosition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub statements: Vec<Statement>,
    pub position: SourcePosition,
}

impl Block {
    /// Statements other than comment carriers.
    pub fn code_statements(&self) -> impl Iterator<Item = &Statement> {
        self.statements
            .iter()
            .filter(|s| !matches!(s.kind, StmtKind::Comment(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub kind: StmtKind,
    pub position: SourcePosition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Block(Block),
    Try(TryStmt),
    Throw(ThrowStmt),
    Expr(Expr),
    Return(Option<Expr>),
    Yield(Expr),
    Continue(Option<String>),
    Break(Option<String>),
    LocalDecl(LocalDecl),
    If {
        cond: Expr,
        then: Box<Statement>,
        otherwise: Option<Box<Statement>>,
    },
    Loop(LoopStmt),
    Switch(SwitchBlock),
    Synchronized {
        lock: Expr,
        body: Block,
    },
    Labeled {
        label: String,
        body: Box<Statement>,
    },
    Assert(Vec<Expr>),
    /// A comment kept in its enclosing statement list.
    Comment(Comment),
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDecl {
    pub ty: String,
    pub vars: Vec<(String, Option<Expr>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopKind {
    While,
    DoWhile,
    For,
    ForEach,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopStmt {
    pub kind: LoopKind,
    /// `for` initializers; the for-each variable is a `LocalDecl` here.
    pub init: Vec<Statement>,
    /// Condition, update and iterable expressions.
    pub header: Vec<Expr>,
    pub body: Box<Statement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchBlock {
    pub selector: Box<Expr>,
    pub cases: Vec<SwitchCase>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchCase {
    /// Empty for `default`.
    pub labels: Vec<Expr>,
    pub body: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TryStmt {
    /// `file:line:col` of the `try` keyword.
    pub id: String,
    /// try-with-resources declarations and expressions.
    pub resources: Vec<Statement>,
    pub body: Block,
    pub catches: Vec<CatchClause>,
    pub finally: Option<Block>,
    pub position: SourcePosition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatchClause {
    /// `file:line:col` of the `catch` keyword.
    pub id: String,
    pub caught_types: Vec<String>,
    pub variable: String,
    pub body: Block,
    pub position: SourcePosition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThrowStmt {
    pub thrown: Thrown,
    pub position: SourcePosition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Thrown {
    NewInstance { ty: String, args: Vec<Expr> },
    VariableRef(String),
    /// Any other expression (casts, calls returning an exception, ...).
    Other(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub receiver: Option<Box<Expr>>,
    pub name: String,
    pub args: Vec<Expr>,
    /// Position of the method name token.
    pub position: SourcePosition,
}

impl Invocation {
    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LambdaBody {
    Expr(Box<Expr>),
    Block(Block),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Literal(String),
    Name(String),
    This,
    Super,
    FieldAccess {
        target: Box<Expr>,
        name: String,
    },
    Invocation(Invocation),
    New {
        ty: String,
        args: Vec<Expr>,
        /// Methods of an anonymous class body.
        body: Option<Vec<MethodDecl>>,
        position: SourcePosition,
    },
    NewArray {
        ty: String,
        dims: Vec<Expr>,
        init: Option<Vec<Expr>>,
    },
    ArrayInit(Vec<Expr>),
    Unary {
        op: String,
        operand: Box<Expr>,
    },
    Binary {
        op: String,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Assign {
        op: String,
        target: Box<Expr>,
        value: Box<Expr>,
    },
    Conditional {
        cond: Box<Expr>,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
    Cast {
        ty: String,
        expr: Box<Expr>,
    },
    InstanceOf {
        expr: Box<Expr>,
        ty: String,
        binding: Option<String>,
    },
    Index {
        array: Box<Expr>,
        index: Box<Expr>,
    },
    Lambda {
        params: Vec<Param>,
        body: LambdaBody,
    },
    MethodRef {
        target: Box<Expr>,
        name: String,
    },
    ClassLit(String),
    Switch(SwitchBlock),
}

impl Expr {
    /// Dotted rendering of a name/field-access chain, e.g. `System.out`.
    pub fn dotted_name(&self) -> Option<String> {
        match self {
            Expr::Name(n) => Some(n.clone()),
            Expr::FieldAccess { target, name } => {
                target.dotted_name().map(|t| format!("{t}.{name}"))
            }
            _ => None,
        }
    }
}
