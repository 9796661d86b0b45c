//! Pointcut patterns over grammar trees.
//!
//! A [`RulePattern`] selects symbol definitions; a [`SubPattern`] selects
//! nodes below an already matched node. Wildcards:
//!
//! | notation | matches                         |
//! |----------|---------------------------------|
//! | `#`      | any symbol                      |
//! | `#lex`   | any lexical literal             |
//! | `..`     | any (possibly empty) sequence   |
//! | `...`    | a nonempty set of alternatives  |
//! | `{...}`  | a nonempty set of productions   |
//!
//! Variables (`$v=p` defines, `$v` refers) bind *sets* of nodes. All nodes
//! bound to a variable defined on a symbol pattern must name the same symbol;
//! nodes bound to other single-node variables must be structurally equal.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use thiserror::Error;

use crate::grammar::{IterKind, NodeId};
use crate::syntax::SyntaxError;

mod matcher;
pub mod oracle;
mod parse;

pub use matcher::{match_rules, match_within};
pub use oracle::{brute_force_match, brute_force_within};
pub use parse::{parse_rule_pattern, parse_subpattern};
pub(crate) use parse::{parse_rule_pattern_from, parse_subpattern_from};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolPattern {
    Any,
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RulePattern {
    pub var: Option<String>,
    pub symbol: SymbolPattern,
    pub productions: ProductionsPattern,
    pub span: Range<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProductionsPattern {
    /// `{...}`: the rule's whole (nonempty) production set.
    Any { var: Option<String> },
    /// Each pattern matches a distinct production, in order.
    List(Vec<ProductionPattern>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductionPattern {
    pub var: Option<String>,
    pub body: ExprPattern,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprPattern {
    /// Members match distinct branches in order; `rest` is a trailing `...`
    /// absorbing every unmatched branch (at least one).
    Alternative {
        members: Vec<ExprPattern>,
        rest: Option<AlternativesRest>,
    },
    Sequence(Vec<ExprPattern>),
    Iteration(Box<ExprPattern>, IterKind),
    AnySymbol,
    Symbol(String),
    AnySequence,
    AnyLex,
    Empty,
    Literal(String),
    VarDef(String, Box<ExprPattern>),
    VarRef(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlternativesRest {
    pub var: Option<String>,
}

/// A pattern matched against the descendants of an enclosing match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubPattern {
    Production(ProductionPattern),
    Expr(ExprPattern),
}

/// How the nodes bound to one variable must relate to each other.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum VarKind {
    /// Defined on `#` or a symbol name: every bound node names the same symbol.
    Symbol,
    /// Defined on any other single-node pattern: bound nodes are structurally equal.
    Structural,
    /// Defined on `..`, `...` or `{...}`: binds a run of nodes; cannot be referenced.
    Multi,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchResult {
    pub matched: NodeId,
    pub bindings: BTreeMap<String, BTreeSet<NodeId>>,
}

impl MatchResult {
    pub fn bound(&self, var: &str) -> Option<&BTreeSet<NodeId>> {
        self.bindings.get(var)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{line}:{column}: variable `${name}` is defined more than once")]
    DuplicateVariable {
        name: String,
        offset: usize,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: variable `${name}` is not defined before this use")]
    UnresolvedVariable {
        name: String,
        offset: usize,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: variable `${name}` binds several nodes and cannot be referenced")]
    MultiNodeReference {
        name: String,
        offset: usize,
        line: usize,
        column: usize,
    },
}

impl PatternError {
    pub fn offset(&self) -> usize {
        match self {
            PatternError::Syntax(e) => e.offset,
            PatternError::DuplicateVariable { offset, .. }
            | PatternError::UnresolvedVariable { offset, .. }
            | PatternError::MultiNodeReference { offset, .. } => *offset,
        }
    }
}

impl ExprPattern {
    /// The item list this pattern aligns against an element list.
    pub(crate) fn as_items(&self) -> &[ExprPattern] {
        match self {
            ExprPattern::Sequence(items) => items,
            other => std::slice::from_ref(other),
        }
    }

    fn collect_vars(&self, out: &mut BTreeMap<String, VarKind>) {
        match self {
            ExprPattern::Alternative { members, rest } => {
                members.iter().for_each(|m| m.collect_vars(out));
                if let Some(AlternativesRest { var: Some(v) }) = rest {
                    out.insert(v.clone(), VarKind::Multi);
                }
            }
            ExprPattern::Sequence(items) => items.iter().for_each(|m| m.collect_vars(out)),
            ExprPattern::Iteration(inner, _) => inner.collect_vars(out),
            ExprPattern::VarDef(v, inner) => {
                inner.collect_vars(out);
                let kind = match **inner {
                    ExprPattern::AnySymbol | ExprPattern::Symbol(_) => VarKind::Symbol,
                    ExprPattern::AnySequence => VarKind::Multi,
                    _ => VarKind::Structural,
                };
                out.insert(v.clone(), kind);
            }
            _ => {}
        }
    }

    /// Number of pattern nodes, counting wrappers.
    pub fn size(&self) -> usize {
        1 + match self {
            ExprPattern::Alternative { members, rest } => {
                members.iter().map(Self::size).sum::<usize>() + usize::from(rest.is_some())
            }
            ExprPattern::Sequence(items) => items.iter().map(Self::size).sum(),
            ExprPattern::Iteration(inner, _) | ExprPattern::VarDef(_, inner) => inner.size(),
            _ => 0,
        }
    }
}

impl ProductionPattern {
    fn collect_vars(&self, out: &mut BTreeMap<String, VarKind>) {
        if let Some(v) = &self.var {
            out.insert(v.clone(), VarKind::Structural);
        }
        self.body.collect_vars(out);
    }
}

impl RulePattern {
    /// Variable table of this pattern.
    pub fn variables(&self) -> BTreeMap<String, VarKind> {
        let mut out = BTreeMap::new();
        if let Some(v) = &self.var {
            out.insert(v.clone(), VarKind::Symbol);
        }
        match &self.productions {
            ProductionsPattern::Any { var } => {
                if let Some(v) = var {
                    out.insert(v.clone(), VarKind::Multi);
                }
            }
            ProductionsPattern::List(ps) => ps.iter().for_each(|p| p.collect_vars(&mut out)),
        }
        out
    }

    pub fn size(&self) -> usize {
        1 + match &self.productions {
            ProductionsPattern::Any { .. } => 1,
            ProductionsPattern::List(ps) => ps.iter().map(|p| 1 + p.body.size()).sum(),
        }
    }
}

impl SubPattern {
    pub fn variables(&self) -> BTreeMap<String, VarKind> {
        let mut out = BTreeMap::new();
        match self {
            SubPattern::Production(p) => p.collect_vars(&mut out),
            SubPattern::Expr(e) => e.collect_vars(&mut out),
        }
        out
    }
}

/// Accumulates `(variable, node)` pairs into the public binding map.
pub(crate) fn bindings_map<'a>(
    pairs: impl IntoIterator<Item = (&'a str, NodeId)>,
) -> BTreeMap<String, BTreeSet<NodeId>> {
    let mut out: BTreeMap<String, BTreeSet<NodeId>> = BTreeMap::new();
    for (v, n) in pairs {
        out.entry(v.to_string()).or_default().insert(n);
    }
    out
}
