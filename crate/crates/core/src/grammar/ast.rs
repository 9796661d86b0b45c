//! Owned, pre-id grammar syntax. The parser produces these; tests and
//! generators can build them directly and hand them to
//! [`GrammarTree::from_rules`](super::GrammarTree::from_rules).

use std::ops::Range;

use super::IterKind;

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub name: String,
    pub productions: Vec<Production>,
    pub span: Range<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Production {
    pub body: Expr,
    pub span: Range<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Range<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Alternative(Vec<Expr>),
    Sequence(Vec<Expr>),
    Iteration(Box<Expr>, IterKind),
    Ref(String),
    Empty,
    Literal(String),
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr { kind, span: 0..0 }
    }

    pub fn reference(name: &str) -> Self {
        Expr::new(ExprKind::Ref(name.to_string()))
    }

    pub fn literal(text: &str) -> Self {
        Expr::new(ExprKind::Literal(text.to_string()))
    }

    pub fn empty() -> Self {
        Expr::new(ExprKind::Empty)
    }

    pub fn seq(items: Vec<Expr>) -> Self {
        Expr::new(ExprKind::Sequence(items)).normalized()
    }

    pub fn alt(items: Vec<Expr>) -> Self {
        Expr::new(ExprKind::Alternative(items)).normalized()
    }

    pub fn iter(inner: Expr, kind: IterKind) -> Self {
        Expr::new(ExprKind::Iteration(Box::new(inner), kind))
    }

    /// Collapse one-element sequences and alternatives into their member.
    pub fn normalized(self) -> Expr {
        match self.kind {
            ExprKind::Sequence(mut items) | ExprKind::Alternative(mut items) if items.len() == 1 => {
                items.pop().expect("one item").normalized()
            }
            kind => Expr {
                kind,
                span: self.span,
            },
        }
    }
}

impl Rule {
    pub fn new(name: &str, productions: Vec<Expr>) -> Self {
        Rule {
            name: name.to_string(),
            productions: productions
                .into_iter()
                .map(|body| Production { body, span: 0..0 })
                .collect(),
            span: 0..0,
        }
    }
}
