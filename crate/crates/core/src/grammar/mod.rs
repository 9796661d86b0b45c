//! The grammar tree: the AST of a grammar written in the weft notation.
//!
//! Every node of a [`GrammarTree`] is a join point that aspects can attach
//! annotations to. Nodes live in an arena indexed by [`NodeId`]; ids are
//! assigned in pre-order, so the descendants of a node occupy a contiguous id
//! range and identical source text always produces identical ids.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::SyntaxError;

pub mod ast;
mod parse;
mod write;

pub use parse::parse_grammar;
pub use write::{serialize_grammar, serialize_rule};

/// Stable identity of a grammar-tree node.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(u32);

impl NodeId {
    pub fn new(index: usize) -> Self {
        NodeId(u32::try_from(index).expect("grammar tree too large"))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IterKind {
    #[serde(rename = "*")]
    Star,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "?")]
    Opt,
}

impl IterKind {
    pub fn symbol(self) -> char {
        match self {
            IterKind::Star => '*',
            IterKind::Plus => '+',
            IterKind::Opt => '?',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Grammar,
    SymbolDef(String),
    Production,
    Alternative,
    Sequence,
    Iteration(IterKind),
    SymbolRef(String),
    Empty,
    Literal(String),
}

impl NodeKind {
    /// Short lowercase tag, used in diagnostics and the woven-output format.
    pub fn tag(&self) -> &'static str {
        match self {
            NodeKind::Grammar => "grammar",
            NodeKind::SymbolDef(_) => "symbol_def",
            NodeKind::Production => "production",
            NodeKind::Alternative => "alternative",
            NodeKind::Sequence => "sequence",
            NodeKind::Iteration(_) => "iteration",
            NodeKind::SymbolRef(_) => "symbol_ref",
            NodeKind::Empty => "empty",
            NodeKind::Literal(_) => "literal",
        }
    }

    /// Nodes that can appear inside a production body.
    pub fn is_expression(&self) -> bool {
        !matches!(
            self,
            NodeKind::Grammar | NodeKind::SymbolDef(_) | NodeKind::Production
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::SymbolDef(n) => write!(f, "symbol_def({n})"),
            NodeKind::SymbolRef(n) => write!(f, "symbol_ref({n})"),
            NodeKind::Iteration(k) => write!(f, "iteration({})", k.symbol()),
            NodeKind::Literal(t) => write!(f, "literal({})", crate::syntax::quote(t)),
            other => f.write_str(other.tag()),
        }
    }
}

/// Terminals are named with an uppercase initial, nonterminals lowercase.
pub fn is_terminal_name(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_uppercase())
}

#[derive(Clone, Debug)]
pub struct GtNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    /// Byte range in the grammar source.
    pub span: Range<usize>,
    subtree_end: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("reference to undefined nonterminal `{name}`")]
    DanglingReference { name: String, span: Range<usize> },
    #[error("symbol `{name}` is defined more than once")]
    DuplicateRule { name: String, span: Range<usize> },
    #[error("empty literal ''")]
    EmptyLiteral { span: Range<usize> },
    #[error("rule `{name}` has no productions")]
    NoProductions { name: String, span: Range<usize> },
}

impl GrammarError {
    /// Byte offset in the grammar source where the problem was found.
    pub fn offset(&self) -> usize {
        match self {
            GrammarError::Syntax(e) => e.offset,
            GrammarError::DanglingReference { span, .. }
            | GrammarError::DuplicateRule { span, .. }
            | GrammarError::EmptyLiteral { span }
            | GrammarError::NoProductions { span, .. } => span.start,
        }
    }
}

/// An immutable grammar tree.
#[derive(Clone, Debug)]
pub struct GrammarTree {
    nodes: Vec<GtNode>,
    rule_index: BTreeMap<String, NodeId>,
}

impl GrammarTree {
    /// Build a tree from rule definitions, assigning ids in pre-order.
    pub fn from_rules(rules: Vec<ast::Rule>) -> Result<Self, GrammarError> {
        let mut builder = Builder::default();
        let root_end = rules.iter().map(|r| r.span.end).max().unwrap_or(0);
        let root = builder.push(NodeKind::Grammar, None, 0..root_end);
        let mut rule_index = BTreeMap::new();
        for rule in rules {
            if rule.productions.is_empty() {
                return Err(GrammarError::NoProductions {
                    name: rule.name,
                    span: rule.span,
                });
            }
            if rule_index.contains_key(&rule.name) {
                return Err(GrammarError::DuplicateRule {
                    name: rule.name,
                    span: rule.span,
                });
            }
            let def = builder.push(NodeKind::SymbolDef(rule.name.clone()), Some(root), rule.span);
            rule_index.insert(rule.name, def);
            for prod in rule.productions {
                let p = builder.push(NodeKind::Production, Some(def), prod.span.clone());
                builder.expr(prod.body, p)?;
                builder.close(p);
            }
            builder.close(def);
        }
        builder.close(root);
        let tree = GrammarTree {
            nodes: builder.nodes,
            rule_index,
        };
        for node in &tree.nodes {
            if let NodeKind::SymbolRef(name) = &node.kind {
                if !is_terminal_name(name) && !tree.rule_index.contains_key(name) {
                    return Err(GrammarError::DanglingReference {
                        name: name.clone(),
                        span: node.span.clone(),
                    });
                }
            }
        }
        Ok(tree)
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &GtNode {
        &self.nodes[id.index()]
    }

    pub fn get(&self, id: NodeId) -> Option<&GtNode> {
        self.nodes.get(id.index())
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id.index()].kind
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    /// All nodes in pre-order.
    pub fn nodes(&self) -> impl Iterator<Item = &GtNode> {
        self.nodes.iter()
    }

    /// Symbol definitions in source order.
    pub fn rules(&self) -> &[NodeId] {
        self.children(self.root())
    }

    pub fn rule(&self, name: &str) -> Option<NodeId> {
        self.rule_index.get(name).copied()
    }

    pub fn rule_index(&self) -> &BTreeMap<String, NodeId> {
        &self.rule_index
    }

    /// The name carried by a symbol definition or reference.
    pub fn symbol_name(&self, id: NodeId) -> Option<&str> {
        match self.kind(id) {
            NodeKind::SymbolDef(n) | NodeKind::SymbolRef(n) => Some(n),
            _ => None,
        }
    }

    /// The body expression of a production.
    pub fn production_body(&self, production: NodeId) -> NodeId {
        debug_assert_eq!(self.kind(production), &NodeKind::Production);
        self.children(production)[0]
    }

    /// Pre-order traversal of the subtree below `id`, excluding `id` itself.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        self.descendant_range(id).map(NodeId::new).collect()
    }

    fn descendant_range(&self, id: NodeId) -> Range<usize> {
        id.index() + 1..self.nodes[id.index()].subtree_end
    }

    /// The symbol definition that encloses `id`, if any.
    pub fn enclosing_rule(&self, mut id: NodeId) -> Option<NodeId> {
        loop {
            if matches!(self.kind(id), NodeKind::SymbolDef(_)) {
                return Some(id);
            }
            id = self.node(id).parent?;
        }
    }

    /// Every literal text used anywhere in the grammar, deduplicated, in first-use order.
    pub fn literals(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.nodes
            .iter()
            .filter_map(|n| match &n.kind {
                NodeKind::Literal(t) if seen.insert(t.as_str()) => Some(t.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Structural equality of two subtrees (kinds and shape; ids and spans ignored).
    pub fn subtree_eq(&self, a: NodeId, other: &GrammarTree, b: NodeId) -> bool {
        let (na, nb) = (self.node(a), other.node(b));
        na.kind == nb.kind
            && na.children.len() == nb.children.len()
            && na
                .children
                .iter()
                .zip(&nb.children)
                .all(|(&x, &y)| self.subtree_eq(x, other, y))
    }

    /// Structural equality of whole trees.
    pub fn structural_eq(&self, other: &GrammarTree) -> bool {
        self.len() == other.len() && self.subtree_eq(self.root(), other, other.root())
    }

    /// Hash of the tree's structure; two structurally equal trees hash equally.
    pub fn structural_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for n in &self.nodes {
            n.kind.hash(&mut h);
            n.children.hash(&mut h);
        }
        h.finish()
    }
}

#[derive(Default)]
struct Builder {
    nodes: Vec<GtNode>,
}

impl Builder {
    fn push(&mut self, kind: NodeKind, parent: Option<NodeId>, span: Range<usize>) -> NodeId {
        let id = NodeId::new(self.nodes.len());
        self.nodes.push(GtNode {
            id,
            kind,
            children: Vec::new(),
            parent,
            span,
            subtree_end: 0,
        });
        if let Some(p) = parent {
            self.nodes[p.index()].children.push(id);
        }
        id
    }

    fn close(&mut self, id: NodeId) {
        self.nodes[id.index()].subtree_end = self.nodes.len();
    }

    fn expr(&mut self, e: ast::Expr, parent: NodeId) -> Result<NodeId, GrammarError> {
        let e = e.normalized();
        let (kind, children) = match e.kind {
            ast::ExprKind::Alternative(items) => (NodeKind::Alternative, items),
            ast::ExprKind::Sequence(items) => (NodeKind::Sequence, items),
            ast::ExprKind::Iteration(inner, k) => (NodeKind::Iteration(k), vec![*inner]),
            ast::ExprKind::Ref(name) => (NodeKind::SymbolRef(name), vec![]),
            ast::ExprKind::Empty => (NodeKind::Empty, vec![]),
            ast::ExprKind::Literal(text) => {
                if text.is_empty() {
                    return Err(GrammarError::EmptyLiteral { span: e.span });
                }
                (NodeKind::Literal(text), vec![])
            }
        };
        let id = self.push(kind, Some(parent), e.span);
        for child in children {
            self.expr(child, id)?;
        }
        self.close(id);
        Ok(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ARITH: &str = "expr : term ((PLUS | MINUS) term)* ;\n\
                         term : factor ((MULT | DIV) factor)* ;\n\
                         factor : INT | '(' expr ')' ;\n";

    // Independent traversal over the parent/child links.
    fn walk(tree: &GrammarTree, id: NodeId, out: &mut Vec<NodeId>) {
        for &c in tree.children(id) {
            out.push(c);
            walk(tree, c, out);
        }
    }

    #[test]
    fn descendants_match_recursive_walk() {
        let tree = parse_grammar(ARITH).unwrap();
        for node in tree.nodes() {
            let mut expected = Vec::new();
            walk(&tree, node.id, &mut expected);
            assert_eq!(tree.descendants(node.id), expected, "node {}", node.id);
        }
    }

    #[test]
    fn descendants_of_expr_rule() {
        let tree = parse_grammar(ARITH).unwrap();
        let expr = tree.rule("expr").unwrap();
        let kinds: Vec<NodeKind> = tree
            .descendants(expr)
            .into_iter()
            .map(|d| tree.kind(d).clone())
            .collect();
        let count = |k: &NodeKind| kinds.iter().filter(|x| *x == k).count();
        assert_eq!(count(&NodeKind::SymbolRef("term".into())), 2);
        assert_eq!(count(&NodeKind::SymbolRef("PLUS".into())), 1);
        assert_eq!(count(&NodeKind::SymbolRef("MINUS".into())), 1);
        assert_eq!(count(&NodeKind::Alternative), 1);
        assert_eq!(count(&NodeKind::Iteration(IterKind::Star)), 1);
        // outer sequence plus the one under the iteration
        assert_eq!(count(&NodeKind::Sequence), 2);
        assert_eq!(count(&NodeKind::Production), 1);
        assert_eq!(kinds.len(), 9);
    }

    #[test]
    fn descendants_of_root_and_leaf() {
        let tree = parse_grammar(ARITH).unwrap();
        let defs: Vec<&str> = tree
            .descendants(tree.root())
            .into_iter()
            .filter_map(|d| match tree.kind(d) {
                NodeKind::SymbolDef(n) => Some(n.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(defs, ["expr", "term", "factor"]);

        let empty = parse_grammar("a : #empty ;").unwrap();
        let leaf = empty
            .nodes()
            .find(|n| n.kind == NodeKind::Empty)
            .unwrap()
            .id;
        assert!(empty.descendants(leaf).is_empty());
    }

    #[test]
    fn ids_are_deterministic() {
        let a = parse_grammar(ARITH).unwrap();
        let b = parse_grammar(ARITH).unwrap();
        assert!(a.structural_eq(&b));
        assert_eq!(a.structural_hash(), b.structural_hash());
        for (x, y) in a.nodes().zip(b.nodes()) {
            assert_eq!((x.id, &x.kind, &x.span), (y.id, &y.kind, &y.span));
        }
    }

    #[test]
    fn terminal_naming() {
        assert!(is_terminal_name("IDENTIFIER"));
        assert!(is_terminal_name("Plus"));
        assert!(!is_terminal_name("expr"));
        assert!(!is_terminal_name("_x"));
    }
}
