use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Number(String),
    Str(String),
    Char(String),
    /// Operators and punctuation. `>` is always emitted on its own so that
    /// nested type arguments close cleanly; the parser reassembles shifts.
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub line: u32,
    pub column: u32,
    /// Byte offsets into the source.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub struct RawComment {
    pub text: String,
    pub line: u32,
    pub column: u32,
    pub start: usize,
}

const PUNCTS: &[&str] = &[
    "...", "<<=", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", "+=", "-=", "*=",
    "/=", "&=", "|=", "^=", "%=", "<<", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@", "=",
    ">", "<", "!", "~", "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<RawComment>,
}

struct Cursor<'s> {
    src: &'s str,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'s> Cursor<'s> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn rest(&self) -> &'s str {
        &self.src[self.pos..]
    }
}

pub fn lex(src: &str, file: &str) -> Result<Lexed, ParseError> {
    let mut cur = Cursor {
        src,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut comments = Vec::new();
    // tolerate a byte-order mark
    if cur.peek() == Some('\u{feff}') {
        cur.pos += '\u{feff}'.len_utf8();
    }
    loop {
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else {
                break;
            }
        }
        let (line, column, start) = (cur.line, cur.column, cur.pos);
        let err = |msg: &str| ParseError::new(file, line, column, msg);
        let Some(c) = cur.peek() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                line,
                column,
                start,
                end: start,
            });
            break;
        };
        if cur.rest().starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            comments.push(RawComment {
                text: src[start..cur.pos].trim_end_matches('\r').to_string(),
                line,
                column,
                start,
            });
            continue;
        }
        if cur.rest().starts_with("/*") {
            cur.bump();
            cur.bump();
            loop {
                if cur.rest().starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                if cur.bump().is_none() {
                    return Err(err("unterminated comment"));
                }
            }
            comments.push(RawComment {
                text: src[start..cur.pos].to_string(),
                line,
                column,
                start,
            });
            continue;
        }
        let kind = if c.is_alphabetic() || c == '_' || c == '$' {
            while let Some(c) = cur.peek() {
                if c.is_alphanumeric() || c == '_' || c == '$' {
                    cur.bump();
                } else {
                    break;
                }
            }
            TokenKind::Ident(src[start..cur.pos].to_string())
        } else if c.is_ascii_digit()
            || (c == '.' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit()))
        {
            lex_number(&mut cur);
            TokenKind::Number(src[start..cur.pos].to_string())
        } else if cur.rest().starts_with("\"\"\"") {
            for _ in 0..3 {
                cur.bump();
            }
            loop {
                if cur.rest().starts_with("\"\"\"") {
                    for _ in 0..3 {
                        cur.bump();
                    }
                    break;
                }
                match cur.bump() {
                    Some('\\') => {
                        cur.bump();
                    }
                    Some(_) => {}
                    None => return Err(err("unterminated text block")),
                }
            }
            TokenKind::Str(src[start..cur.pos].to_string())
        } else if c == '"' || c == '\'' {
            cur.bump();
            loop {
                match cur.bump() {
                    Some('\\') => {
                        cur.bump();
                    }
                    Some(q) if q == c => break,
                    Some('\n') | None => return Err(err("unterminated literal")),
                    Some(_) => {}
                }
            }
            let text = src[start..cur.pos].to_string();
            if c == '"' {
                TokenKind::Str(text)
            } else {
                TokenKind::Char(text)
            }
        } else if let Some(p) = PUNCTS.iter().find(|p| cur.rest().starts_with(**p)) {
            for _ in 0..p.chars().count() {
                cur.bump();
            }
            TokenKind::Punct(p)
        } else {
            return Err(err(&format!("unexpected character '{c}'")));
        };
        tokens.push(Token {
            kind,
            line,
            column,
            start,
            end: cur.pos,
        });
    }
    Ok(Lexed { tokens, comments })
}

fn lex_number(cur: &mut Cursor<'_>) {
    let hex = cur.rest().starts_with("0x") || cur.rest().starts_with("0X");
    if hex {
        cur.bump();
        cur.bump();
    }
    while let Some(c) = cur.peek() {
        let exponent = if hex {
            c == 'p' || c == 'P'
        } else {
            c == 'e' || c == 'E'
        };
        if exponent && matches!(cur.peek_at(1), Some('+') | Some('-')) {
            cur.bump();
            cur.bump();
        } else if c.is_ascii_alphanumeric()
            || c == '_'
            || c == '.' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit() || !d.is_alphabetic() && d != '.')
        {
            cur.bump();
        } else {
            break;
        }
    }
}
