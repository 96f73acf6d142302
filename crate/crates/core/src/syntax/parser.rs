//! Recursive-descent parser for the supported Java subset.

use super::ast::*;
use super::doc::extract_doc_throws;
use super::lexer::{lex, RawComment, Token, TokenKind};
use super::ParseError;

type PResult<T> = Result<T, ParseError>;

const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void",
];

const RESERVED: &[&str] = &[
    "abstract", "assert", "break", "case", "catch", "class", "continue", "default", "do",
    "else", "enum", "extends", "final", "finally", "for", "if", "implements", "import",
    "instanceof", "interface", "native", "new", "package", "private", "protected", "public",
    "return", "static", "strictfp", "super", "switch", "synchronized", "this", "throw",
    "throws", "transient", "try", "volatile", "while", "true", "false", "null", "goto", "const",
];

const MODIFIERS: &[&str] = &[
    "public", "protected", "private", "static", "final", "abstract", "native", "synchronized",
    "transient", "volatile", "strictfp", "default", "sealed",
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<="];

fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word) || PRIMITIVES.contains(&word)
}

/// Parses one source file.
pub fn parse_compilation_unit(source: &str, file: &str) -> Result<CompilationUnit, ParseError> {
    let lexed = lex(source, file)?;
    let consumed = vec![false; lexed.comments.len()];
    let mut p = Parser {
        file: file.to_string(),
        toks: lexed.tokens,
        pos: 0,
        comments: lexed.comments,
        consumed,
        package: None,
        types: Vec::new(),
        type_stack: Vec::new(),
        no_lambda: false,
    };
    p.parse_unit()
}

struct Parser {
    file: String,
    toks: Vec<Token>,
    pos: usize,
    comments: Vec<RawComment>,
    consumed: Vec<bool>,
    package: Option<String>,
    types: Vec<TypeDecl>,
    type_stack: Vec<String>,
    no_lambda: bool,
}

impl Parser {
    // ── token helpers ─────────────────────────────

    fn cur(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn nth(&self, n: usize) -> &Token {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(&self.cur().kind, TokenKind::Punct(q) if *q == p)
    }

    fn nth_is_punct(&self, n: usize, p: &str) -> bool {
        matches!(&self.nth(n).kind, TokenKind::Punct(q) if *q == p)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.cur().kind, TokenKind::Ident(x) if x == w)
    }

    fn nth_is_word(&self, n: usize, w: &str) -> bool {
        matches!(&self.nth(n).kind, TokenKind::Ident(x) if x == w)
    }

    fn word(&self) -> Option<&str> {
        match &self.cur().kind {
            TokenKind::Ident(x) => Some(x),
            _ => None,
        }
    }

    /// True when tokens `n` and `n + 1` touch without whitespace.
    fn adjacent(&self, n: usize) -> bool {
        self.nth(n).end == self.nth(n + 1).start
    }

    fn position(&self) -> SourcePosition {
        let t = self.cur();
        SourcePosition::new(self.file.clone(), t.line, t.column)
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = self.cur();
        Err(ParseError::new(&self.file, t.line, t.column, msg))
    }

    fn describe(&self) -> String {
        match &self.cur().kind {
            TokenKind::Ident(x) | TokenKind::Number(x) | TokenKind::Str(x) | TokenKind::Char(x) => {
                format!("'{x}'")
            }
            TokenKind::Punct(p) => format!("'{p}'"),
            TokenKind::Eof => "end of file".to_string(),
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token> {
        if self.is_punct(p) {
            Ok(self.bump())
        } else {
            self.error(format!("expected '{p}', found {}", self.describe()))
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<Token> {
        if self.is_word(w) {
            Ok(self.bump())
        } else {
            self.error(format!("expected '{w}', found {}", self.describe()))
        }
    }

    fn expect_ident(&mut self) -> PResult<String> {
        match self.word() {
            Some(w) if !is_reserved(w) => {
                let w = w.to_string();
                self.bump();
                Ok(w)
            }
            _ => self.error(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn at_ident(&self) -> bool {
        self.word().is_some_and(|w| !is_reserved(w))
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    // ── comments ──────────────────────────────────

    /// Takes the unconsumed comments starting inside `(lo, hi)`.
    fn drain_comments(&mut self, lo: usize, hi: usize) -> Vec<Comment> {
        let from = self.comments.partition_point(|c| c.start <= lo);
        let mut out = Vec::new();
        for i in from..self.comments.len() {
            let c = &self.comments[i];
            if c.start >= hi {
                break;
            }
            if !self.consumed[i] {
                self.consumed[i] = true;
                out.push(Comment {
                    text: c.text.clone(),
                    position: SourcePosition::new(self.file.clone(), c.line, c.column),
                });
            }
        }
        out
    }

    fn take_doc(&mut self, lo: usize) -> Option<DocComment> {
        let hi = self.cur().start;
        self.drain_comments(lo, hi)
            .into_iter()
            .rev()
            .find(|c| c.text.starts_with("/**") && c.text != "/**/")
            .map(|c| {
                let throws_tags = extract_doc_throws(&c.text).tags;
                DocComment {
                    raw: c.text,
                    throws_tags,
                }
            })
    }

    // ── declarations ──────────────────────────────

    fn parse_unit(&mut self) -> PResult<CompilationUnit> {
        self.skip_annotations()?;
        if self.is_word("package") {
            self.bump();
            let name = self.qualified_name()?;
            self.expect_punct(";")?;
            self.package = Some(name);
        }
        let mut imports = Vec::new();
        while self.is_word("import") {
            self.bump();
            let is_static = if self.is_word("static") {
                self.bump();
                true
            } else {
                false
            };
            let mut path = self.expect_any_ident()?;
            let mut wildcard = false;
            while self.eat_punct(".") {
                if self.eat_punct("*") {
                    wildcard = true;
                    break;
                }
                path.push('.');
                path.push_str(&self.expect_any_ident()?);
            }
            self.expect_punct(";")?;
            imports.push(Import {
                path,
                is_static,
                wildcard,
            });
        }
        let mut lo = 0;
        loop {
            if matches!(self.cur().kind, TokenKind::Eof) {
                break;
            }
            if self.eat_punct(";") {
                continue;
            }
            self.parse_type_decl(lo)?;
            lo = self.toks[self.pos.saturating_sub(1)].end;
        }
        let mut seen = std::collections::HashSet::new();
        for t in &self.types {
            if !seen.insert(t.name.clone()) {
                return Err(ParseError::new(
                    &self.file,
                    t.position.line,
                    t.position.column,
                    format!("duplicate type declaration '{}'", t.name),
                ));
            }
        }
        Ok(CompilationUnit {
            file: self.file.clone(),
            package: self.package.clone(),
            imports,
            types: std::mem::take(&mut self.types),
        })
    }

    fn expect_any_ident(&mut self) -> PResult<String> {
        match self.word() {
            Some(w) => {
                let w = w.to_string();
                self.bump();
                Ok(w)
            }
            None => self.error(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn qualified_name(&mut self) -> PResult<String> {
        let mut name = self.expect_ident()?;
        while self.is_punct(".") && matches!(self.nth(1).kind, TokenKind::Ident(_)) {
            self.bump();
            name.push('.');
            name.push_str(&self.expect_ident()?);
        }
        Ok(name)
    }

    fn skip_annotations(&mut self) -> PResult<()> {
        while self.is_punct("@") && !self.nth_is_word(1, "interface") {
            self.bump();
            self.qualified_name()?;
            if self.is_punct("(") {
                self.skip_balanced("(", ")")?;
            }
        }
        Ok(())
    }

    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<()> {
        self.expect_punct(open)?;
        let mut depth = 1;
        while depth > 0 {
            if matches!(self.cur().kind, TokenKind::Eof) {
                return self.error(format!("unbalanced '{open}'"));
            }
            if self.is_punct(open) {
                depth += 1;
            } else if self.is_punct(close) {
                depth -= 1;
            }
            self.bump();
        }
        Ok(())
    }

    /// Skips annotations and modifiers; returns whether `static` was seen.
    fn skip_modifiers(&mut self) -> PResult<bool> {
        let mut is_static = false;
        loop {
            self.skip_annotations()?;
            match self.word() {
                Some("static") => {
                    is_static = true;
                    self.bump();
                }
                Some("non") if self.nth_is_punct(1, "-") && self.nth_is_word(2, "sealed") => {
                    self.bump();
                    self.bump();
                    self.bump();
                }
                Some(m) if MODIFIERS.contains(&m) => {
                    // `default:` inside switch never reaches here
                    self.bump();
                }
                _ => return Ok(is_static),
            }
        }
    }

    fn at_type_decl_keyword(&self) -> bool {
        match self.word() {
            Some("class") | Some("interface") | Some("enum") => true,
            Some("record") => matches!(self.nth(1).kind, TokenKind::Ident(_)) && self.nth_is_punct(2, "(")
                || matches!(self.nth(1).kind, TokenKind::Ident(_)) && self.nth_is_punct(2, "<"),
            _ => self.is_punct("@") && self.nth_is_word(1, "interface"),
        }
    }

    fn parse_type_decl(&mut self, doc_lo: usize) -> PResult<()> {
        let doc = self.take_doc(doc_lo);
        self.skip_modifiers()?;
        if !self.at_type_decl_keyword() {
            return self.error(format!(
                "expected class, interface or enum declaration, found {}",
                self.describe()
            ));
        }
        self.parse_type_decl_after_modifiers(doc)
    }

    fn parse_type_decl_after_modifiers(&mut self, doc: Option<DocComment>) -> PResult<()> {
        let position = self.position();
        if self.is_punct("@") {
            // annotation type: members carry no analyzable code
            self.bump();
            self.bump();
            self.expect_ident()?;
            return self.skip_balanced("{", "}");
        }
        let keyword = self.expect_any_ident()?;
        let simple_name = self.expect_ident()?;
        let name = match self.type_stack.last() {
            Some(outer) => format!("{outer}.{simple_name}"),
            None => match &self.package {
                Some(p) => format!("{p}.{simple_name}"),
                None => simple_name.clone(),
            },
        };
        if self.is_punct("<") {
            self.skip_type_args()?;
        }
        let kind = match keyword.as_str() {
            "interface" => TypeKind::Interface,
            "enum" => TypeKind::Enum,
            _ => TypeKind::Class,
        };
        let mut fields = Vec::new();
        if keyword == "record" {
            for p in self.parse_params()? {
                fields.push(FieldDecl {
                    name: p.name,
                    ty: p.ty,
                    is_static: false,
                });
            }
        }
        let mut superclass = None;
        let mut interfaces = Vec::new();
        loop {
            match self.word() {
                Some("extends") => {
                    self.bump();
                    let list = self.type_list()?;
                    if kind == TypeKind::Interface {
                        interfaces.extend(list);
                    } else {
                        if list.len() != 1 {
                            return self.error("a class may extend only one superclass");
                        }
                        superclass = list.into_iter().next();
                    }
                }
                Some("implements") => {
                    self.bump();
                    interfaces.extend(self.type_list()?);
                }
                Some("permits") => {
                    self.bump();
                    self.type_list()?;
                }
                _ => break,
            }
        }
        let enclosing = self.type_stack.last().cloned();
        self.type_stack.push(name.clone());
        let (more_fields, methods) = self.parse_class_body(&simple_name, kind == TypeKind::Enum)?;
        self.type_stack.pop();
        fields.extend(more_fields);
        // keep declaration order: outer before nested
        let decl = TypeDecl {
            name,
            simple_name,
            kind,
            superclass,
            interfaces,
            enclosing,
            fields,
            methods,
            doc,
            position,
        };
        let at = self
            .types
            .iter()
            .position(|t| t.position > decl.position)
            .unwrap_or(self.types.len());
        self.types.insert(at, decl);
        Ok(())
    }

    fn type_list(&mut self) -> PResult<Vec<String>> {
        let mut out = vec![self.parse_type()?];
        while self.eat_punct(",") {
            out.push(self.parse_type()?);
        }
        Ok(out)
    }

    fn parse_class_body(
        &mut self,
        simple_name: &str,
        is_enum: bool,
    ) -> PResult<(Vec<FieldDecl>, Vec<MethodDecl>)> {
        let open = self.expect_punct("{")?;
        let mut lo = open.start;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        if is_enum {
            self.parse_enum_constants()?;
            lo = self.toks[self.pos.saturating_sub(1)].end;
        }
        loop {
            let doc = self.take_doc(lo);
            if self.eat_punct("}") {
                break;
            }
            if matches!(self.cur().kind, TokenKind::Eof) {
                return self.error("expected '}' to close type body");
            }
            if self.eat_punct(";") {
                lo = self.toks[self.pos - 1].end;
                continue;
            }
            let position = self.position();
            if self.is_punct("{") || (self.is_word("static") && self.nth_is_punct(1, "{")) {
                let is_static = self.is_word("static");
                if is_static {
                    self.bump();
                }
                let body = self.parse_block()?;
                methods.push(MethodDecl {
                    name: INITIALIZER_NAME.to_string(),
                    params: Vec::new(),
                    return_type: None,
                    declared_throws: Vec::new(),
                    body: Some(body),
                    doc,
                    is_static,
                    position,
                });
            } else {
                let is_static = self.skip_modifiers()?;
                if self.at_type_decl_keyword() {
                    self.parse_type_decl_after_modifiers(doc)?;
                } else {
                    if self.is_punct("<") {
                        self.skip_type_args()?;
                    }
                    let position = self.position();
                    if self.is_word(simple_name) && self.nth_is_punct(1, "(") {
                        self.bump();
                        let m = self.parse_method_rest(CONSTRUCTOR_NAME.to_string(), None, doc, is_static, position)?;
                        methods.push(m);
                    } else if self.is_word(simple_name) && self.nth_is_punct(1, "{") {
                        // compact record constructor
                        self.bump();
                        let body = self.parse_block()?;
                        methods.push(MethodDecl {
                            name: CONSTRUCTOR_NAME.to_string(),
                            params: Vec::new(),
                            return_type: None,
                            declared_throws: Vec::new(),
                            body: Some(body),
                            doc,
                            is_static: false,
                            position,
                        });
                    } else {
                        let ty = self.parse_type()?;
                        let name_pos = self.position();
                        let name = self.expect_ident()?;
                        if self.is_punct("(") {
                            let m = self.parse_method_rest(name, Some(ty), doc, is_static, name_pos)?;
                            methods.push(m);
                        } else {
                            self.parse_field_rest(ty, name, is_static, &mut fields)?;
                        }
                    }
                }
            }
            lo = self.toks[self.pos - 1].end;
        }
        Ok((fields, methods))
    }

    fn parse_enum_constants(&mut self) -> PResult<()> {
        loop {
            self.skip_annotations()?;
            if self.is_punct(";") {
                self.bump();
                return Ok(());
            }
            if self.is_punct("}") {
                return Ok(());
            }
            self.expect_ident()?;
            if self.is_punct("(") {
                self.parse_args()?;
            }
            if self.is_punct("{") {
                self.type_stack.push(String::from("<enum-constant>"));
                let r = self.parse_class_body("", false);
                self.type_stack.pop();
                r?;
            }
            if !self.eat_punct(",") {
                if self.eat_punct(";") || self.is_punct("}") {
                    return Ok(());
                }
                return self.error(format!("expected ',' or ';' after enum constant, found {}", self.describe()));
            }
        }
    }

    fn parse_field_rest(
        &mut self,
        ty: String,
        first: String,
        is_static: bool,
        fields: &mut Vec<FieldDecl>,
    ) -> PResult<()> {
        let mut name = first;
        loop {
            let mut ty = ty.clone();
            while self.is_punct("[") && self.nth_is_punct(1, "]") {
                self.bump();
                self.bump();
                ty.push_str("[]");
            }
            if self.eat_punct("=") {
                self.parse_var_init()?;
            }
            fields.push(FieldDecl {
                name,
                ty,
                is_static,
            });
            if !self.eat_punct(",") {
                break;
            }
            name = self.expect_ident()?;
        }
        self.expect_punct(";")?;
        Ok(())
    }

    fn parse_params(&mut self) -> PResult<Vec<Param>> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if self.eat_punct(")") {
            return Ok(params);
        }
        loop {
            self.skip_modifiers()?;
            let mut ty = self.parse_type()?;
            if self.eat_punct("...") {
                ty.push_str("[]");
            }
            let name = if self.is_word("this") {
                // explicit receiver parameter
                self.bump();
                None
            } else {
                Some(self.expect_ident()?)
            };
            while self.is_punct("[") && self.nth_is_punct(1, "]") {
                self.bump();
                self.bump();
                ty.push_str("[]");
            }
            if let Some(name) = name {
                params.push(Param { name, ty });
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(")")?;
        Ok(params)
    }

    fn parse_method_rest(
        &mut self,
        name: String,
        return_type: Option<String>,
        doc: Option<DocComment>,
        is_static: bool,
        position: SourcePosition,
    ) -> PResult<MethodDecl> {
        let params = self.parse_params()?;
        while self.is_punct("[") && self.nth_is_punct(1, "]") {
            self.bump();
            self.bump();
        }
        let mut declared_throws = Vec::new();
        if self.is_word("throws") {
            self.bump();
            declared_throws = self.type_list()?;
        }
        let body = if self.is_punct("{") {
            Some(self.parse_block()?)
        } else {
            if self.is_word("default") {
                self.bump();
                self.parse_var_init()?;
            }
            self.expect_punct(";")?;
            None
        };
        Ok(MethodDecl {
            name,
            params,
            return_type,
            declared_throws,
            body,
            doc,
            is_static,
            position,
        })
    }

    // ── types ─────────────────────────────────────

    /// Parses a type and returns its erased spelling.
    fn parse_type(&mut self) -> PResult<String> {
        let mut name = self.parse_type_no_dims()?;
        while self.is_punct("[") && self.nth_is_punct(1, "]") {
            self.bump();
            self.bump();
            name.push_str("[]");
        }
        Ok(name)
    }

    fn parse_type_no_dims(&mut self) -> PResult<String> {
        self.skip_annotations()?;
        if let Some(w) = self.word() {
            if PRIMITIVES.contains(&w) {
                let w = w.to_string();
                self.bump();
                return Ok(w);
            }
        }
        let mut name = self.expect_ident()?;
        if self.is_punct("<") {
            self.skip_type_args()?;
        }
        while self.is_punct(".") && matches!(self.nth(1).kind, TokenKind::Ident(_)) && !self.nth_is_word(1, "class") {
            self.bump();
            self.skip_annotations()?;
            name.push('.');
            name.push_str(&self.expect_ident()?);
            if self.is_punct("<") {
                self.skip_type_args()?;
            }
        }
        Ok(name)
    }

    fn skip_type_args(&mut self) -> PResult<()> {
        self.expect_punct("<")?;
        if self.eat_punct(">") {
            return Ok(());
        }
        loop {
            self.skip_annotations()?;
            if self.eat_punct("?") {
                if self.is_word("extends") || self.is_word("super") {
                    self.bump();
                    self.parse_type()?;
                }
            } else {
                self.parse_type()?;
                if self.is_word("extends") {
                    // type parameter bound
                    self.bump();
                    self.parse_type()?;
                    while self.eat_punct("&") {
                        self.parse_type()?;
                    }
                }
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(">")?;
        Ok(())
    }

    // ── statements ────────────────────────────────

    fn parse_block(&mut self) -> PResult<Block> {
        let position = self.position();
        let open = self.expect_punct("{")?;
        let statements = self.parse_statement_list(open.start, &["}"])?;
        self.expect_punct("}")?;
        Ok(Block {
            statements,
            position,
        })
    }

    /// Parses statements until one of `terminators` (a punct or word) is next.
    fn parse_statement_list(&mut self, lo: usize, terminators: &[&str]) -> PResult<Vec<Statement>> {
        let mut statements = Vec::new();
        loop {
            let hi = self.cur().start;
            for c in self.drain_comments(lo, hi) {
                statements.push(Statement {
                    position: c.position.clone(),
                    kind: StmtKind::Comment(c),
                });
            }
            let done = terminators
                .iter()
                .any(|t| self.is_punct(t) || self.is_word(t));
            if done {
                return Ok(statements);
            }
            if matches!(self.cur().kind, TokenKind::Eof) {
                return self.error("unexpected end of file inside block");
            }
            statements.push(self.parse_statement()?);
        }
    }

    fn parse_statement(&mut self) -> PResult<Statement> {
        let position = self.position();
        let kind = self.parse_statement_kind()?;
        Ok(Statement { kind, position })
    }

    fn parse_statement_kind(&mut self) -> PResult<StmtKind> {
        if self.is_punct("{") {
            return Ok(StmtKind::Block(self.parse_block()?));
        }
        if self.eat_punct(";") {
            return Ok(StmtKind::Empty);
        }
        if let Some(w) = self.word() {
            match w {
                "if" => {
                    self.bump();
                    let cond = self.parse_paren_expr()?;
                    let then = Box::new(self.parse_statement()?);
                    let otherwise = if self.is_word("else") {
                        self.bump();
                        Some(Box::new(self.parse_statement()?))
                    } else {
                        None
                    };
                    return Ok(StmtKind::If {
                        cond,
                        then,
                        otherwise,
                    });
                }
                "while" => {
                    self.bump();
                    let cond = self.parse_paren_expr()?;
                    let body = Box::new(self.parse_statement()?);
                    return Ok(StmtKind::Loop(LoopStmt {
                        kind: LoopKind::While,
                        init: Vec::new(),
                        header: vec![cond],
                        body,
                    }));
                }
                "do" => {
                    self.bump();
                    let body = Box::new(self.parse_statement()?);
                    self.expect_word("while")?;
                    let cond = self.parse_paren_expr()?;
                    self.expect_punct(";")?;
                    return Ok(StmtKind::Loop(LoopStmt {
                        kind: LoopKind::DoWhile,
                        init: Vec::new(),
                        header: vec![cond],
                        body,
                    }));
                }
                "for" => return self.parse_for(),
                "try" => return Ok(StmtKind::Try(self.parse_try()?)),
                "throw" => return Ok(StmtKind::Throw(self.parse_throw()?)),
                "return" => {
                    self.bump();
                    let e = if self.is_punct(";") {
                        None
                    } else {
                        Some(self.parse_expr()?)
                    };
                    self.expect_punct(";")?;
                    return Ok(StmtKind::Return(e));
                }
                "break" | "continue" => {
                    let is_break = w == "break";
                    self.bump();
                    let label = if self.at_ident() {
                        Some(self.expect_ident()?)
                    } else {
                        None
                    };
                    self.expect_punct(";")?;
                    return Ok(if is_break {
                        StmtKind::Break(label)
                    } else {
                        StmtKind::Continue(label)
                    });
                }
                "switch" => {
                    let sw = self.parse_switch()?;
                    return Ok(StmtKind::Switch(sw));
                }
                "synchronized" => {
                    self.bump();
                    let lock = self.parse_paren_expr()?;
                    let body = self.parse_block()?;
                    return Ok(StmtKind::Synchronized { lock, body });
                }
                "assert" => {
                    self.bump();
                    let mut es = vec![self.parse_expr()?];
                    if self.eat_punct(":") {
                        es.push(self.parse_expr()?);
                    }
                    self.expect_punct(";")?;
                    return Ok(StmtKind::Assert(es));
                }
                "yield"
                    if !(self.nth_is_punct(1, "=")
                        || self.nth_is_punct(1, "(")
                        || self.nth_is_punct(1, ".")
                        || self.nth_is_punct(1, "[")) =>
                {
                    self.bump();
                    let e = self.parse_expr()?;
                    self.expect_punct(";")?;
                    return Ok(StmtKind::Yield(e));
                }
                "class" | "interface" | "enum" | "abstract" | "static" => {
                    return self.error("local type declarations are not supported");
                }
                _ => {}
            }
            if self.at_ident() && self.nth_is_punct(1, ":") {
                let label = self.expect_ident()?;
                self.bump();
                let body = Box::new(self.parse_statement()?);
                return Ok(StmtKind::Labeled { label, body });
            }
        }
        if let Some(ty) = self.try_local_decl_head()? {
            let decl = self.parse_declarators(ty)?;
            self.expect_punct(";")?;
            return Ok(StmtKind::LocalDecl(decl));
        }
        let e = self.parse_expr()?;
        self.expect_punct(";")?;
        Ok(StmtKind::Expr(e))
    }

    /// Speculatively reads `[final] Type` when followed by a declarator.
    fn try_local_decl_head(&mut self) -> PResult<Option<String>> {
        let save = self.pos;
        let had_modifier = self.is_word("final") || self.is_punct("@");
        if had_modifier {
            self.skip_modifiers()?;
            if self.at_type_decl_keyword() {
                return self.error("local type declarations are not supported");
            }
        }
        if let Ok(ty) = self.parse_type() {
            let follows = self.nth(1);
            let is_decl = self.at_ident()
                && matches!(&follows.kind, TokenKind::Punct(p) if ["=", ";", ",", "[", ":"].contains(p));
            if is_decl {
                return Ok(Some(ty));
            }
        }
        self.pos = save;
        Ok(None)
    }

    fn parse_declarators(&mut self, ty: String) -> PResult<LocalDecl> {
        let mut vars = Vec::new();
        loop {
            let name = self.expect_ident()?;
            while self.is_punct("[") && self.nth_is_punct(1, "]") {
                self.bump();
                self.bump();
            }
            let init = if self.eat_punct("=") {
                Some(self.parse_var_init()?)
            } else {
                None
            };
            vars.push((name, init));
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(LocalDecl { ty, vars })
    }

    fn parse_var_init(&mut self) -> PResult<Expr> {
        if self.is_punct("{") {
            self.parse_array_init()
        } else if self.is_punct("@") {
            self.skip_annotations()?;
            Ok(Expr::Literal("@annotation".into()))
        } else {
            self.parse_expr()
        }
    }

    fn parse_array_init(&mut self) -> PResult<Expr> {
        self.expect_punct("{")?;
        let mut xs = Vec::new();
        while !self.is_punct("}") {
            xs.push(self.parse_var_init()?);
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct("}")?;
        Ok(Expr::ArrayInit(xs))
    }

    fn parse_paren_expr(&mut self) -> PResult<Expr> {
        self.expect_punct("(")?;
        let e = self.parse_expr()?;
        self.expect_punct(")")?;
        Ok(e)
    }

    fn parse_for(&mut self) -> PResult<StmtKind> {
        self.expect_word("for")?;
        self.expect_punct("(")?;
        let mut init = Vec::new();
        let mut header = Vec::new();
        if !self.is_punct(";") {
            let position = self.position();
            if let Some(ty) = self.try_local_decl_head()? {
                if self.nth_is_punct(1, ":") {
                    let name = self.expect_ident()?;
                    self.bump();
                    let iterable = self.parse_expr()?;
                    self.expect_punct(")")?;
                    let body = Box::new(self.parse_statement()?);
                    init.push(Statement {
                        kind: StmtKind::LocalDecl(LocalDecl {
                            ty,
                            vars: vec![(name, None)],
                        }),
                        position,
                    });
                    return Ok(StmtKind::Loop(LoopStmt {
                        kind: LoopKind::ForEach,
                        init,
                        header: vec![iterable],
                        body,
                    }));
                }
                let decl = self.parse_declarators(ty)?;
                init.push(Statement {
                    kind: StmtKind::LocalDecl(decl),
                    position,
                });
            } else {
                loop {
                    let position = self.position();
                    let e = self.parse_expr()?;
                    init.push(Statement {
                        kind: StmtKind::Expr(e),
                        position,
                    });
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
        }
        self.expect_punct(";")?;
        if !self.is_punct(";") {
            header.push(self.parse_expr()?);
        }
        self.expect_punct(";")?;
        if !self.is_punct(")") {
            loop {
                header.push(self.parse_expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        let body = Box::new(self.parse_statement()?);
        Ok(StmtKind::Loop(LoopStmt {
            kind: LoopKind::For,
            init,
            header,
            body,
        }))
    }

    fn parse_try(&mut self) -> PResult<TryStmt> {
        let position = self.position();
        self.expect_word("try")?;
        let mut resources = Vec::new();
        if self.eat_punct("(") {
            while !self.is_punct(")") {
                let rpos = self.position();
                let kind = if let Some(ty) = self.try_local_decl_head()? {
                    StmtKind::LocalDecl(self.parse_declarators(ty)?)
                } else {
                    StmtKind::Expr(self.parse_expr()?)
                };
                resources.push(Statement {
                    kind,
                    position: rpos,
                });
                if !self.eat_punct(";") {
                    break;
                }
            }
            self.expect_punct(")")?;
        }
        let body = self.parse_block()?;
        let mut catches = Vec::new();
        while self.is_word("catch") {
            let cpos = self.position();
            self.bump();
            self.expect_punct("(")?;
            self.skip_modifiers()?;
            let mut caught_types = vec![self.parse_type()?];
            while self.eat_punct("|") {
                caught_types.push(self.parse_type()?);
            }
            let variable = self.expect_ident()?;
            self.expect_punct(")")?;
            let body = self.parse_block()?;
            catches.push(CatchClause {
                id: cpos.to_string(),
                caught_types,
                variable,
                body,
                position: cpos,
            });
        }
        let finally = if self.is_word("finally") {
            self.bump();
            Some(self.parse_block()?)
        } else {
            None
        };
        if catches.is_empty() && finally.is_none() && resources.is_empty() {
            return Err(ParseError::new(
                &self.file,
                position.line,
                position.column,
                "try statement without catch or finally",
            ));
        }
        Ok(TryStmt {
            id: position.to_string(),
            resources,
            body,
            catches,
            finally,
            position,
        })
    }

    fn parse_throw(&mut self) -> PResult<ThrowStmt> {
        let position = self.position();
        self.expect_word("throw")?;
        let e = self.parse_expr()?;
        self.expect_punct(";")?;
        let thrown = match e {
            Expr::New {
                ty,
                args,
                body: None,
                ..
            } => Thrown::NewInstance { ty, args },
            Expr::Name(v) => Thrown::VariableRef(v),
            other => Thrown::Other(other),
        };
        Ok(ThrowStmt { thrown, position })
    }

    fn parse_switch(&mut self) -> PResult<SwitchBlock> {
        self.expect_word("switch")?;
        let selector = Box::new(self.parse_paren_expr()?);
        let open = self.expect_punct("{")?;
        let mut cases = Vec::new();
        loop {
            // comments between cases belong to the previous case body
            if self.eat_punct("}") {
                break;
            }
            let mut labels = Vec::new();
            if self.is_word("default") {
                self.bump();
            } else {
                self.expect_word("case")?;
                let saved = self.no_lambda;
                self.no_lambda = true;
                loop {
                    if self.is_word("default") {
                        self.bump();
                    } else {
                        labels.push(self.parse_ternary()?);
                    }
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.no_lambda = saved;
            }
            let body = if self.eat_punct("->") {
                let position = self.position();
                let kind = if self.is_punct("{") {
                    StmtKind::Block(self.parse_block()?)
                } else if self.is_word("throw") {
                    StmtKind::Throw(self.parse_throw()?)
                } else {
                    let e = self.parse_expr()?;
                    self.expect_punct(";")?;
                    StmtKind::Expr(e)
                };
                vec![Statement { kind, position }]
            } else {
                self.expect_punct(":")?;
                let lo = self.toks[self.pos - 1].start.max(open.start);
                self.parse_statement_list(lo, &["case", "default", "}"])?
            };
            cases.push(SwitchCase { labels, body });
        }
        Ok(SwitchBlock { selector, cases })
    }

    // ── expressions ───────────────────────────────

    fn parse_expr(&mut self) -> PResult<Expr> {
        let lhs = self.parse_ternary()?;
        if let Some((op, n)) = self.peek_assign_op() {
            for _ in 0..n {
                self.bump();
            }
            let value = self.parse_expr()?;
            return Ok(Expr::Assign {
                op,
                target: Box::new(lhs),
                value: Box::new(value),
            });
        }
        Ok(lhs)
    }

    fn peek_assign_op(&self) -> Option<(String, usize)> {
        if let TokenKind::Punct(p) = &self.cur().kind {
            if ASSIGN_OPS.contains(p) {
                return Some((p.to_string(), 1));
            }
            if *p == ">" && self.nth_is_punct(1, ">") && self.adjacent(0) {
                if self.nth_is_punct(2, "=") && self.adjacent(1) {
                    return Some((">>=".into(), 3));
                }
                if self.nth_is_punct(2, ">") && self.adjacent(1) && self.nth_is_punct(3, "=") && self.adjacent(2) {
                    return Some((">>>=".into(), 4));
                }
            }
        }
        None
    }

    fn parse_ternary(&mut self) -> PResult<Expr> {
        let cond = self.parse_binary(1)?;
        if self.eat_punct("?") {
            let then = self.parse_ternary_branch()?;
            self.expect_punct(":")?;
            let otherwise = self.parse_ternary_branch()?;
            return Ok(Expr::Conditional {
                cond: Box::new(cond),
                then: Box::new(then),
                otherwise: Box::new(otherwise),
            });
        }
        Ok(cond)
    }

    fn parse_ternary_branch(&mut self) -> PResult<Expr> {
        let saved = self.no_lambda;
        self.no_lambda = false;
        let r = self.parse_ternary();
        self.no_lambda = saved;
        r
    }

    /// Binary operator at the cursor: (spelling, token count, precedence).
    fn peek_binop(&self) -> Option<(String, usize, u8)> {
        let TokenKind::Punct(p) = &self.cur().kind else {
            return None;
        };
        let simple = |s: &str, prec| Some((s.to_string(), 1usize, prec));
        match *p {
            "||" => simple("||", 1),
            "&&" => simple("&&", 2),
            "|" => simple("|", 3),
            "^" => simple("^", 4),
            "&" => simple("&", 5),
            "==" | "!=" => simple(p, 6),
            "<" | "<=" => simple(p, 7),
            "<<" => simple("<<", 8),
            "+" | "-" => simple(p, 9),
            "*" | "/" | "%" => simple(p, 10),
            ">" => {
                if self.nth_is_punct(1, ">") && self.adjacent(0) {
                    if self.nth_is_punct(2, ">") && self.adjacent(1) {
                        if self.nth_is_punct(3, "=") && self.adjacent(2) {
                            return None;
                        }
                        return Some((">>>".into(), 3, 8));
                    }
                    if self.nth_is_punct(2, "=") && self.adjacent(1) {
                        return None;
                    }
                    return Some((">>".into(), 2, 8));
                }
                if self.nth_is_punct(1, "=") && self.adjacent(0) {
                    return Some((">=".into(), 2, 7));
                }
                simple(">", 7)
            }
            _ => None,
        }
    }

    fn parse_binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            if self.is_word("instanceof") && min_prec <= 7 {
                self.bump();
                if self.is_word("final") {
                    self.bump();
                }
                let ty = self.parse_type()?;
                let binding = if self.at_ident() {
                    Some(self.expect_ident()?)
                } else {
                    None
                };
                lhs = Expr::InstanceOf {
                    expr: Box::new(lhs),
                    ty,
                    binding,
                };
                continue;
            }
            let Some((op, n, prec)) = self.peek_binop() else {
                break;
            };
            if prec < min_prec {
                break;
            }
            for _ in 0..n {
                self.bump();
            }
            let rhs = self.parse_binary(prec + 1)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        if let TokenKind::Punct(p) = &self.cur().kind {
            if ["+", "-", "!", "~", "++", "--"].contains(p) {
                let op = p.to_string();
                self.bump();
                let operand = self.parse_unary()?;
                return Ok(Expr::Unary {
                    op,
                    operand: Box::new(operand),
                });
            }
        }
        if self.is_punct("(") && !self.lambda_ahead() {
            if let Some(cast) = self.try_cast()? {
                return Ok(cast);
            }
        }
        let primary = self.parse_primary()?;
        self.parse_postfix(primary)
    }

    fn matching_paren(&self, from: usize) -> Option<usize> {
        let mut depth = 0usize;
        for i in from..self.toks.len() {
            match &self.toks[i].kind {
                TokenKind::Punct("(") => depth += 1,
                TokenKind::Punct(")") => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i);
                    }
                }
                TokenKind::Eof => return None,
                _ => {}
            }
        }
        None
    }

    fn lambda_ahead(&self) -> bool {
        if self.no_lambda {
            return false;
        }
        self.matching_paren(self.pos)
            .is_some_and(|close| matches!(self.toks.get(close + 1).map(|t| &t.kind), Some(TokenKind::Punct("->"))))
    }

    fn try_cast(&mut self) -> PResult<Option<Expr>> {
        let save = self.pos;
        self.bump();
        let primitive = self.word().is_some_and(|w| PRIMITIVES.contains(&w));
        let ty = match self.parse_type() {
            Ok(mut ty) => {
                while self.eat_punct("&") {
                    match self.parse_type() {
                        Ok(extra) => ty = format!("{ty}&{extra}"),
                        Err(_) => {
                            self.pos = save;
                            return Ok(None);
                        }
                    }
                }
                ty
            }
            Err(_) => {
                self.pos = save;
                return Ok(None);
            }
        };
        if !self.eat_punct(")") {
            self.pos = save;
            return Ok(None);
        }
        let starts_operand = match &self.cur().kind {
            TokenKind::Ident(w) => {
                !is_reserved(w) || ["this", "super", "new", "true", "false", "null", "switch"].contains(&w.as_str())
                    || PRIMITIVES.contains(&w.as_str())
            }
            TokenKind::Number(_) | TokenKind::Str(_) | TokenKind::Char(_) => true,
            TokenKind::Punct(p) => ["(", "!", "~"].contains(p) || (primitive && ["+", "-", "++", "--"].contains(p)),
            TokenKind::Eof => false,
        };
        if !starts_operand {
            self.pos = save;
            return Ok(None);
        }
        let expr = self.parse_unary()?;
        Ok(Some(Expr::Cast {
            ty,
            expr: Box::new(expr),
        }))
    }

    fn parse_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_punct("(")?;
        let saved = self.no_lambda;
        self.no_lambda = false;
        let mut args = Vec::new();
        if !self.is_punct(")") {
            loop {
                args.push(self.parse_expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.no_lambda = saved;
        self.expect_punct(")")?;
        Ok(args)
    }

    fn parse_lambda(&mut self) -> PResult<Expr> {
        let mut params = Vec::new();
        if self.at_ident() {
            params.push(Param {
                name: self.expect_ident()?,
                ty: String::new(),
            });
        } else {
            self.expect_punct("(")?;
            if !self.is_punct(")") {
                loop {
                    self.skip_modifiers()?;
                    if self.at_ident() && (self.nth_is_punct(1, ",") || self.nth_is_punct(1, ")")) {
                        params.push(Param {
                            name: self.expect_ident()?,
                            ty: String::new(),
                        });
                    } else {
                        let mut ty = self.parse_type()?;
                        if self.eat_punct("...") {
                            ty.push_str("[]");
                        }
                        let name = self.expect_ident()?;
                        params.push(Param { name, ty });
                    }
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
            self.expect_punct(")")?;
        }
        self.expect_punct("->")?;
        let body = if self.is_punct("{") {
            LambdaBody::Block(self.parse_block()?)
        } else {
            LambdaBody::Expr(Box::new(self.parse_expr()?))
        };
        Ok(Expr::Lambda { params, body })
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        let tok = self.cur().clone();
        match &tok.kind {
            TokenKind::Number(x) | TokenKind::Str(x) | TokenKind::Char(x) => {
                self.bump();
                Ok(Expr::Literal(x.clone()))
            }
            TokenKind::Ident(w) => {
                let w = w.clone();
                match w.as_str() {
                    "true" | "false" | "null" => {
                        self.bump();
                        Ok(Expr::Literal(w))
                    }
                    "this" | "super" => {
                        let position = self.position();
                        self.bump();
                        let target = if w == "this" { Expr::This } else { Expr::Super };
                        if self.is_punct("(") {
                            let args = self.parse_args()?;
                            let receiver = (w == "super").then(|| Box::new(Expr::Super));
                            return Ok(Expr::Invocation(Invocation {
                                receiver,
                                name: CONSTRUCTOR_NAME.to_string(),
                                args,
                                position,
                            }));
                        }
                        Ok(target)
                    }
                    "new" => self.parse_creator(),
                    "switch" => Ok(Expr::Switch(self.parse_switch()?)),
                    _ if PRIMITIVES.contains(&w.as_str()) => {
                        let ty = self.parse_type()?;
                        if self.is_punct(".") && self.nth_is_word(1, "class") {
                            self.bump();
                            self.bump();
                            return Ok(Expr::ClassLit(ty));
                        }
                        if self.is_punct("::") {
                            return Ok(Expr::Name(ty));
                        }
                        self.error(format!("unexpected type '{ty}' in expression"))
                    }
                    _ if is_reserved(&w) => {
                        self.error(format!("expected expression, found '{w}'"))
                    }
                    _ => {
                        if self.nth_is_punct(1, "->") && !self.no_lambda {
                            return self.parse_lambda();
                        }
                        let position = self.position();
                        self.bump();
                        if self.is_punct("(") {
                            let args = self.parse_args()?;
                            return Ok(Expr::Invocation(Invocation {
                                receiver: None,
                                name: w,
                                args,
                                position,
                            }));
                        }
                        Ok(Expr::Name(w))
                    }
                }
            }
            TokenKind::Punct("(") => {
                if self.lambda_ahead() {
                    return self.parse_lambda();
                }
                self.bump();
                let saved = self.no_lambda;
                self.no_lambda = false;
                let e = self.parse_expr();
                self.no_lambda = saved;
                let e = e?;
                self.expect_punct(")")?;
                Ok(e)
            }
            TokenKind::Punct("{") => self.parse_array_init(),
            TokenKind::Punct("@") => {
                self.skip_annotations()?;
                self.parse_primary()
            }
            _ => self.error(format!("expected expression, found {}", self.describe())),
        }
    }

    fn parse_creator(&mut self) -> PResult<Expr> {
        let position = self.position();
        self.expect_word("new")?;
        if self.is_punct("<") {
            self.skip_type_args()?;
        }
        let ty = self.parse_type_no_dims()?;
        if self.is_punct("[") {
            let mut dims = Vec::new();
            let mut ty = ty;
            while self.eat_punct("[") {
                if !self.is_punct("]") {
                    dims.push(self.parse_expr()?);
                }
                self.expect_punct("]")?;
                ty.push_str("[]");
            }
            let init = if self.is_punct("{") {
                match self.parse_array_init()? {
                    Expr::ArrayInit(xs) => Some(xs),
                    _ => None,
                }
            } else {
                None
            };
            return Ok(Expr::NewArray { ty, dims, init });
        }
        let args = self.parse_args()?;
        let body = if self.is_punct("{") {
            let outer = self.type_stack.last().cloned().unwrap_or_default();
            self.type_stack.push(format!("{outer}.<anonymous>"));
            let r = self.parse_class_body("", false);
            self.type_stack.pop();
            let (_, methods) = r?;
            Some(methods)
        } else {
            None
        };
        Ok(Expr::New {
            ty,
            args,
            body,
            position,
        })
    }

    fn parse_postfix(&mut self, mut e: Expr) -> PResult<Expr> {
        loop {
            if self.is_punct(".") {
                self.bump();
                if self.is_punct("<") {
                    self.skip_type_args()?;
                }
                match self.word() {
                    Some("new") => {
                        e = self.parse_creator()?;
                    }
                    Some("class") => {
                        self.bump();
                        e = Expr::ClassLit(e.dotted_name().unwrap_or_default());
                    }
                    Some("this") => {
                        self.bump();
                        e = Expr::This;
                    }
                    Some("super") => {
                        self.bump();
                        e = Expr::Super;
                    }
                    Some(_) => {
                        let position = self.position();
                        let name = self.expect_any_ident()?;
                        if self.is_punct("(") {
                            let args = self.parse_args()?;
                            e = Expr::Invocation(Invocation {
                                receiver: Some(Box::new(e)),
                                name,
                                args,
                                position,
                            });
                        } else {
                            e = Expr::FieldAccess {
                                target: Box::new(e),
                                name,
                            };
                        }
                    }
                    None => return self.error(format!("expected member name, found {}", self.describe())),
                }
            } else if self.is_punct("[") {
                if self.nth_is_punct(1, "]") {
                    // array type in `Foo[].class` or `Foo[]::new`
                    self.bump();
                    self.bump();
                    if let Some(n) = e.dotted_name() {
                        e = Expr::Name(format!("{n}[]"));
                    }
                    continue;
                }
                self.bump();
                let index = self.parse_expr()?;
                self.expect_punct("]")?;
                e = Expr::Index {
                    array: Box::new(e),
                    index: Box::new(index),
                };
            } else if self.is_punct("::") {
                self.bump();
                let name = self.expect_any_ident()?;
                e = Expr::MethodRef {
                    target: Box::new(e),
                    name,
                };
            } else if self.is_punct("++") || self.is_punct("--") {
                let op = if self.is_punct("++") { "post++" } else { "post--" };
                self.bump();
                e = Expr::Unary {
                    op: op.to_string(),
                    operand: Box::new(e),
                };
            } else {
                return Ok(e);
            }
        }
    }
}
