use std::ops::Range;

use regex::Regex;
use thiserror::Error;

use crate::grammar::{is_terminal_name, GrammarTree, NodeKind};
use crate::syntax::line_col;

/// Regular expressions for the grammar's terminals plus a skip pattern.
///
/// ```text
/// # comment
/// INT  = /[0-9]+/
/// skip = /\s+/
/// ```
#[derive(Clone, Debug)]
pub struct LexerSpec {
    terminals: Vec<(String, Regex)>,
    skip: Option<Regex>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct LexerSpecError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Literal(String),
    Terminal(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Range<usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{column}: no token matches at {found:?}")]
pub struct LexError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub found: char,
}

fn anchored(re: &str) -> Result<Regex, regex::Error> {
    Regex::new(&format!("^(?:{re})"))
}

impl LexerSpec {
    pub fn parse(text: &str) -> Result<Self, LexerSpecError> {
        let mut terminals: Vec<(String, Regex)> = Vec::new();
        let mut skip = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| LexerSpecError { line, message };
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (name, rest) = l
                .split_once('=')
                .ok_or_else(|| err("expected `NAME = /regex/`".into()))?;
            let name = name.trim();
            let rest = rest.trim();
            let body = rest
                .strip_prefix('/')
                .and_then(|r| r.strip_suffix('/'))
                .filter(|_| rest.len() >= 2)
                .ok_or_else(|| err(format!("regex for `{name}` must be written /.../")))?;
            let re = anchored(body).map_err(|e| err(format!("bad regex for `{name}`: {e}")))?;
            if name == "skip" {
                if skip.is_some() {
                    return Err(err("`skip` is defined twice".into()));
                }
                skip = Some(re);
            } else if !is_terminal_name(name) || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(err(format!("`{name}` is not a terminal name (must start uppercase)")));
            } else if terminals.iter().any(|(n, _)| n == name) {
                return Err(err(format!("terminal `{name}` is defined twice")));
            } else {
                terminals.push((name.to_string(), re));
            }
        }
        Ok(LexerSpec { terminals, skip })
    }

    pub fn terminal_names(&self) -> impl Iterator<Item = &str> {
        self.terminals.iter().map(|(n, _)| n.as_str())
    }

    /// Terminals referenced by `grammar` that this spec does not define.
    pub fn missing_terminals(&self, grammar: &GrammarTree) -> Vec<String> {
        let mut missing: Vec<String> = grammar
            .nodes()
            .filter_map(|n| match &n.kind {
                NodeKind::SymbolRef(s) if is_terminal_name(s) => Some(s.clone()),
                _ => None,
            })
            .filter(|s| !self.terminals.iter().any(|(n, _)| n == s))
            .collect();
        missing.sort();
        missing.dedup();
        missing
    }
}

/// Split `input` into tokens by maximal munch over the grammar's literals and
/// the lexer spec's terminals. Equal-length candidates prefer a literal, then the
/// earlier spec entry.
pub fn tokenize(spec: &LexerSpec, grammar: &GrammarTree, input: &str) -> Result<Vec<Token>, LexError> {
    let literals = grammar.literals();
    let mut out = Vec::new();
    let mut pos = 0;
    loop {
        if let Some(skip) = &spec.skip {
            while let Some(m) = skip.find(&input[pos..]) {
                if m.end() == 0 {
                    break;
                }
                pos += m.end();
            }
        }
        if pos >= input.len() {
            return Ok(out);
        }
        let rest = &input[pos..];
        let mut best: Option<(usize, TokenKind)> = None;
        for lit in &literals {
            if rest.starts_with(lit) && best.as_ref().map_or(true, |(l, _)| lit.len() > *l) {
                best = Some((lit.len(), TokenKind::Literal(lit.to_string())));
            }
        }
        for (name, re) in &spec.terminals {
            if let Some(m) = re.find(rest) {
                if m.end() > 0 && best.as_ref().map_or(true, |(l, _)| m.end() > *l) {
                    best = Some((m.end(), TokenKind::Terminal(name.clone())));
                }
            }
        }
        let Some((len, kind)) = best else {
            let (line, column) = line_col(input, pos);
            return Err(LexError {
                offset: pos,
                line,
                column,
                found: rest.chars().next().expect("not at end"),
            });
        };
        out.push(Token {
            kind,
            text: rest[..len].to_string(),
            span: pos..pos + len,
        });
        pos += len;
    }
}
