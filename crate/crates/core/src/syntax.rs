//! Tokenizer shared by the grammar, pattern, annotation and aspect notations.
//!
//! All four languages use the same lexical conventions: `//` line comments,
//! single-quoted strings with a small escape set, identifiers, integers and
//! a handful of punctuation tokens. The parsers sit on top of [`TokenStream`].

use std::fmt;

use thiserror::Error;

/// A syntax error with its byte offset and 1-based line/column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct SyntaxError {
    pub message: String,
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl SyntaxError {
    pub fn new(src: &str, offset: usize, message: impl Into<String>) -> Self {
        let (line, column) = line_col(src, offset);
        SyntaxError {
            message: message.into(),
            offset,
            line,
            column,
        }
    }
}

/// 1-based line and column (in characters) of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..floor_char_boundary(src, offset)];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let column = before[line_start..].chars().count() + 1;
    (line, column)
}

fn floor_char_boundary(s: &str, mut i: usize) -> usize {
    while !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}

/// Punctuation characters allowed as bare members of a `{{ ... }}` sequence.
pub(crate) const SEQUENCE_PUNCTUATION: &str = "`~!@#$%()-+=|\\[];:,./?<>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Name(String),
    Str(String),
    Int(i64),
    Colon,
    Semi,
    Pipe,
    LParen,
    RParen,
    Star,
    Plus,
    Question,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Dot,
    DotDot,
    Ellipsis,
    Dollar,
    At,
    Hash,
    HashEmpty,
    HashLex,
    Comma,
    Punct(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(n) => write!(f, "name `{n}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Int(i) => write!(f, "integer {i}"),
            Tok::Eof => f.write_str("end of input"),
            other => write!(f, "`{}`", other.text()),
        }
    }
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Name(n) => n.clone(),
            Tok::Str(s) => format!("'{s}'"),
            Tok::Int(i) => i.to_string(),
            Tok::Colon => ":".into(),
            Tok::Semi => ";".into(),
            Tok::Pipe => "|".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Star => "*".into(),
            Tok::Plus => "+".into(),
            Tok::Question => "?".into(),
            Tok::LBrace => "{".into(),
            Tok::RBrace => "}".into(),
            Tok::LBracket => "[".into(),
            Tok::RBracket => "]".into(),
            Tok::Eq => "=".into(),
            Tok::Dot => ".".into(),
            Tok::DotDot => "..".into(),
            Tok::Ellipsis => "...".into(),
            Tok::Dollar => "$".into(),
            Tok::At => "@".into(),
            Tok::Hash => "#".into(),
            Tok::HashEmpty => "#empty".into(),
            Tok::HashLex => "#lex".into(),
            Tok::Comma => ",".into(),
            Tok::Punct(c) => c.to_string(),
            Tok::Eof => String::new(),
        }
    }

    /// Characters this token stands for when it appears inside `{{ ... }}`.
    pub(crate) fn as_punctuation(&self) -> Option<Vec<char>> {
        let text = match self {
            Tok::Name(_) | Tok::Str(_) | Tok::Int(_) | Tok::Eof => return None,
            Tok::LBrace | Tok::RBrace | Tok::Star | Tok::HashEmpty | Tok::HashLex => return None,
            other => other.text(),
        };
        if text.chars().all(|c| SEQUENCE_PUNCTUATION.contains(c)) {
            Some(text.chars().collect())
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = match c {
            b'\'' => {
                let (s, end) = lex_string(src, i)?;
                i = end;
                Tok::Str(s)
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = src[start..i]
                    .parse()
                    .map_err(|_| SyntaxError::new(src, start, "integer literal out of range"))?;
                Tok::Int(n)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                i = ident_end(bytes, i);
                Tok::Name(src[start..i].to_string())
            }
            b'#' => {
                let end = ident_end(bytes, i + 1);
                match &src[i + 1..end] {
                    "empty" => {
                        i = end;
                        Tok::HashEmpty
                    }
                    "lex" => {
                        i = end;
                        Tok::HashLex
                    }
                    _ => {
                        i += 1;
                        Tok::Hash
                    }
                }
            }
            b'.' => {
                let mut n = 0;
                while n < 3 && bytes.get(i + n) == Some(&b'.') {
                    n += 1;
                }
                i += n;
                match n {
                    1 => Tok::Dot,
                    2 => Tok::DotDot,
                    _ => Tok::Ellipsis,
                }
            }
            _ => {
                let ch = src[i..].chars().next().expect("in bounds");
                i += ch.len_utf8();
                match ch {
                    ':' => Tok::Colon,
                    ';' => Tok::Semi,
                    '|' => Tok::Pipe,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '*' => Tok::Star,
                    '+' => Tok::Plus,
                    '?' => Tok::Question,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '=' => Tok::Eq,
                    '$' => Tok::Dollar,
                    '@' => Tok::At,
                    ',' => Tok::Comma,
                    c if SEQUENCE_PUNCTUATION.contains(c) => Tok::Punct(c),
                    c => {
                        return Err(SyntaxError::new(
                            src,
                            start,
                            format!("unexpected character {c:?}"),
                        ))
                    }
                }
            }
        };
        out.push(Token { tok, start, end: i });
    }
    out.push(Token {
        tok: Tok::Eof,
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}

fn ident_end(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
        i += 1;
    }
    i
}

fn lex_string(src: &str, open: usize) -> Result<(String, usize), SyntaxError> {
    let mut out = String::new();
    let mut chars = src[open + 1..].char_indices();
    while let Some((off, c)) = chars.next() {
        let at = open + 1 + off;
        match c {
            '\'' => return Ok((out, at + 1)),
            '\n' => break,
            '\\' => match chars.next() {
                Some((_, 'n')) => out.push('\n'),
                Some((_, 't')) => out.push('\t'),
                Some((_, '\\')) => out.push('\\'),
                Some((_, '\'')) => out.push('\''),
                Some((_, other)) => {
                    return Err(SyntaxError::new(
                        src,
                        at,
                        format!("unknown escape sequence `\\{other}`"),
                    ))
                }
                None => break,
            },
            c => out.push(c),
        }
    }
    Err(SyntaxError::new(src, open, "unterminated string literal"))
}

/// Quote a string using the escapes the tokenizer understands.
pub fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('\'');
    for c in text.chars() {
        match c {
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

/// Cursor over a token vector with the helpers every parser here needs.
pub(crate) struct TokenStream<'a> {
    pub src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

impl<'a> TokenStream<'a> {
    pub fn new(src: &'a str) -> Result<Self, SyntaxError> {
        Ok(TokenStream {
            src,
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_token(&self) -> &Token {
        &self.toks[self.pos]
    }

    pub fn peek_nth(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    /// True when the token after the current one starts where the current ends.
    pub fn next_is_adjacent(&self) -> bool {
        let i = self.pos + 1;
        i < self.toks.len() && self.toks[self.pos].end == self.toks[i].start
    }

    pub fn offset(&self) -> usize {
        self.toks[self.pos].start
    }

    /// End offset of the last consumed token.
    pub fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].end
        }
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<Token, SyntaxError> {
        if self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(what))
        }
    }

    pub fn expect_name(&mut self, what: &str) -> Result<(String, usize), SyntaxError> {
        match self.peek().clone() {
            Tok::Name(n) => {
                let t = self.bump();
                Ok((n, t.start))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub fn unexpected(&self, what: &str) -> SyntaxError {
        let found = self.peek();
        let message = if *found == Tok::Eof {
            format!("expected {what} at end of input")
        } else {
            format!("expected {what}, found {found}")
        };
        SyntaxError::new(self.src, self.offset(), message)
    }

    pub fn error_at(&self, offset: usize, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.src, offset, message)
    }
}
