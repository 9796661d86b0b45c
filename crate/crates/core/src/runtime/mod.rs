//! Interpreting a grammar over input text: a maximal-munch lexer driven by a
//! sidecar [`LexerSpec`] and an Earley parser producing a [`ParseTree`] whose
//! nodes are instances of grammar-tree nodes.

use std::ops::Range;

use thiserror::Error;

use crate::grammar::{is_terminal_name, GrammarTree, NodeId, NodeKind};

mod earley;
mod lexer;
pub mod oracle;

pub use lexer::{tokenize, LexError, LexerSpec, LexerSpecError, Token, TokenKind};

/// One instance of a grammar-tree node in a derivation.
///
/// Symbol definitions have one production child, productions their body,
/// references to nonterminals the definition, alternatives the chosen
/// branch, sequences one child per item and iterations one child per
/// repetition. Literals and terminal references are leaves carrying a token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseNode {
    pub gt: NodeId,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Index into [`ParseTree::tokens`] for leaves.
    pub token: Option<usize>,
    /// Tokens derived by this node.
    pub tokens: Range<usize>,
}

/// A derivation of a token stream. Nodes are in pre-order; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseTree {
    pub tokens: Vec<Token>,
    pub nodes: Vec<ParseNode>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("`{0}` is not a nonterminal of this grammar")]
    UnknownStart(String),
    #[error("unexpected {}; expected {}", found_text(.found), expected_text(.expected))]
    Unexpected {
        /// How many tokens were consumed before the failure.
        token_index: usize,
        /// Byte offset of the offending token, or of the end of input.
        offset: usize,
        found: Option<String>,
        expected: Vec<String>,
    },
}

fn found_text(found: &Option<String>) -> String {
    match found {
        Some(t) => format!("`{t}`"),
        None => "end of input".into(),
    }
}

fn expected_text(expected: &[String]) -> String {
    match expected {
        [] => "end of input".into(),
        [one] => one.clone(),
        many => format!("one of {}", many.join(", ")),
    }
}

/// Parse `tokens` as an instance of the nonterminal `start`.
///
/// Ambiguities resolve toward earlier productions and branches and give
/// earlier symbols of a sequence the longest possible spans.
pub fn parse_input(grammar: &GrammarTree, start: &str, tokens: &[Token]) -> Result<ParseTree, ParseError> {
    let def = match grammar.rule(start) {
        Some(d) if !is_terminal_name(start) => d,
        _ => return Err(ParseError::UnknownStart(start.to_string())),
    };
    earley::Compiled::new(grammar).parse(def, tokens)
}

impl ParseTree {
    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, i: usize) -> &ParseNode {
        &self.nodes[i]
    }

    /// Leaf nodes in token order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].token.is_some())
            .collect();
        out.sort_by_key(|&i| self.nodes[i].token);
        out
    }

    /// Proper ancestors of `i`, innermost first.
    pub fn ancestors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.nodes[i].parent, move |&p| self.nodes[p].parent)
    }

    /// Check the structural invariants against `grammar`: leaves cover the
    /// tokens in order, every leaf's grammar node produces its token, and
    /// every child instantiates a node its parent may derive.
    pub fn validate(&self, grammar: &GrammarTree) -> Result<(), String> {
        let leaves = self.leaves();
        if leaves.len() != self.tokens.len() {
            return Err(format!("{} leaves for {} tokens", leaves.len(), self.tokens.len()));
        }
        for (k, &leaf) in leaves.iter().enumerate() {
            let n = &self.nodes[leaf];
            if n.token != Some(k) || n.tokens != (k..k + 1) {
                return Err(format!("leaf {leaf} is out of order"));
            }
            let tok = &self.tokens[k];
            let ok = match (grammar.kind(n.gt), &tok.kind) {
                (NodeKind::Literal(a), TokenKind::Literal(b)) => a == b,
                (NodeKind::SymbolRef(a), TokenKind::Terminal(b)) => a == b,
                _ => false,
            };
            if !ok {
                return Err(format!("leaf {leaf} ({}) cannot produce {:?}", grammar.kind(n.gt), tok.kind));
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let gt = grammar.node(n.gt);
            for &c in &n.children {
                let child = &self.nodes[c];
                if child.parent != Some(i) {
                    return Err(format!("node {c} has the wrong parent"));
                }
                let allowed = match &gt.kind {
                    NodeKind::SymbolRef(name) => grammar.rule(name) == Some(child.gt),
                    _ => gt.children.contains(&child.gt),
                };
                if !allowed {
                    return Err(format!("{} cannot derive {}", gt.kind, grammar.kind(child.gt)));
                }
            }
            let mut pos = n.tokens.start;
            for &c in &n.children {
                if self.nodes[c].tokens.start != pos {
                    return Err(format!("children of node {i} are not contiguous"));
                }
                pos = self.nodes[c].tokens.end;
            }
            if !n.children.is_empty() && pos != n.tokens.end {
                return Err(format!("children of node {i} do not cover it"));
            }
        }
        Ok(())
    }

    /// Indented outline, one node per line, for debugging and snapshots.
    pub fn outline(&self, grammar: &GrammarTree) -> String {
        let mut out = String::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, depth)) = stack.pop() {
            let n = &self.nodes[i];
            out.push_str(&"  ".repeat(depth));
            out.push_str(&grammar.kind(n.gt).to_string());
            if let Some(t) = n.token {
                out.push_str(&format!(" {:?}", self.tokens[t].text));
            }
            out.push('\n');
            stack.extend(n.children.iter().rev().map(|&c| (c, depth + 1)));
        }
        out
    }
}
