//! Backtracking matcher.
//!
//! Search is depth-first in pattern order. The choice points are how many
//! elements each `..` absorbs (fewest first) and which production or
//! alternative branch each listed pattern takes (earliest first). The first
//! complete, consistent alignment wins, so bindings are deterministic.

use std::collections::BTreeMap;

use super::{
    bindings_map, AlternativesRest, ExprPattern, MatchResult, ProductionPattern,
    ProductionsPattern, RulePattern, SubPattern, SymbolPattern, VarKind,
};
use crate::grammar::{GrammarTree, NodeId, NodeKind};

/// Match a rule pattern against every symbol definition of `tree`.
pub fn match_rules(pattern: &RulePattern, tree: &GrammarTree) -> Vec<MatchResult> {
    let vars = pattern.variables();
    let mut out = Vec::new();
    for &def in tree.rules() {
        let mut cx = Search::new(tree, &vars);
        let mut found = None;
        cx.rule(pattern, def, &mut |cx| {
            found = Some(cx.snapshot());
            true
        });
        if let Some(bindings) = found {
            out.push(MatchResult {
                matched: def,
                bindings,
            });
        }
    }
    out
}

/// Match a subpattern against every descendant of `scope` (pre-order, `scope`
/// excluded). Production patterns are tried on production nodes, alternative
/// patterns on expression nodes.
pub fn match_within(pattern: &SubPattern, tree: &GrammarTree, scope: NodeId) -> Vec<MatchResult> {
    let vars = pattern.variables();
    let mut out = Vec::new();
    for node in tree.descendants(scope) {
        let mut cx = Search::new(tree, &vars);
        let mut found = None;
        let mut record = |cx: &mut Search<'_, '_>| {
            found = Some(cx.snapshot());
            true
        };
        match (pattern, tree.kind(node)) {
            (SubPattern::Production(p), NodeKind::Production) => {
                cx.production(p, node, &mut record);
            }
            (SubPattern::Expr(p), kind) if kind.is_expression() => {
                cx.expr(p, node, &mut record);
            }
            _ => {}
        }
        if let Some(bindings) = found {
            out.push(MatchResult {
                matched: node,
                bindings,
            });
        }
    }
    out
}

type Cont<'k, 'p, 't> = &'k mut dyn FnMut(&mut Search<'p, 't>) -> bool;

struct Search<'p, 't> {
    tree: &'t GrammarTree,
    vars: &'p BTreeMap<String, VarKind>,
    binds: Vec<(&'p str, NodeId)>,
}

impl<'p, 't> Search<'p, 't> {
    fn new(tree: &'t GrammarTree, vars: &'p BTreeMap<String, VarKind>) -> Self {
        Search {
            tree,
            vars,
            binds: Vec::new(),
        }
    }

    fn snapshot(&self) -> BTreeMap<String, std::collections::BTreeSet<NodeId>> {
        bindings_map(self.binds.iter().copied())
    }

    /// Elements a node offers to an item list: a sequence's children, or the node itself.
    fn view(&self, node: NodeId) -> &'t [NodeId] {
        let tree: &'t GrammarTree = self.tree;
        match tree.kind(node) {
            NodeKind::Sequence => tree.children(node),
            _ => std::slice::from_ref(&tree.node(node).id),
        }
    }

    fn consistent(&self, var: &str, node: NodeId) -> bool {
        let first = self.binds.iter().find(|(v, _)| *v == var).map(|&(_, n)| n);
        let Some(first) = first else {
            return true;
        };
        match self.vars.get(var) {
            Some(VarKind::Symbol) => {
                matches!(self.tree.kind(node), NodeKind::SymbolRef(_) | NodeKind::SymbolDef(_))
                    && self.tree.symbol_name(node) == self.tree.symbol_name(first)
            }
            Some(VarKind::Structural) => self.tree.subtree_eq(first, self.tree, node),
            _ => true,
        }
    }

    /// Record `var -> node` and continue; undo on failure.
    fn bind(&mut self, var: &'p str, node: NodeId, k: Cont<'_, 'p, 't>) -> bool {
        if !self.consistent(var, node) {
            return false;
        }
        let mark = self.binds.len();
        self.binds.push((var, node));
        if k(self) {
            return true;
        }
        self.binds.truncate(mark);
        false
    }

    fn bind_all(&mut self, var: Option<&'p str>, nodes: &[NodeId], k: Cont<'_, 'p, 't>) -> bool {
        let mark = self.binds.len();
        if let Some(v) = var {
            self.binds.extend(nodes.iter().map(|&n| (v, n)));
        }
        if k(self) {
            return true;
        }
        self.binds.truncate(mark);
        false
    }

    fn rule(&mut self, p: &'p RulePattern, def: NodeId, k: Cont<'_, 'p, 't>) -> bool {
        let tree = self.tree;
        let name = tree.symbol_name(def).expect("symbol definition");
        if let SymbolPattern::Named(want) = &p.symbol {
            if want != name {
                return false;
            }
        }
        let prods = tree.children(def);
        let mut body = |cx: &mut Self| match &p.productions {
            ProductionsPattern::Any { var } => {
                !prods.is_empty() && cx.bind_all(var.as_deref(), prods, k)
            }
            ProductionsPattern::List(list) => cx.productions(list, prods, k),
        };
        match &p.var {
            Some(v) => self.bind(v, def, &mut body),
            None => body(self),
        }
    }

    /// Order-preserving assignment of production patterns to distinct productions.
    fn productions(
        &mut self,
        pats: &'p [ProductionPattern],
        prods: &'t [NodeId],
        k: Cont<'_, 'p, 't>,
    ) -> bool {
        let Some((first, rest)) = pats.split_first() else {
            return k(self);
        };
        if prods.len() < pats.len() {
            return false;
        }
        for i in 0..=prods.len() - pats.len() {
            if self.production(first, prods[i], &mut |cx| cx.productions(rest, &prods[i + 1..], k)) {
                return true;
            }
        }
        false
    }

    fn production(&mut self, p: &'p ProductionPattern, prod: NodeId, k: Cont<'_, 'p, 't>) -> bool {
        let body = self.tree.production_body(prod);
        match &p.var {
            Some(v) => self.expr(&p.body, body, &mut |cx| cx.bind(v, prod, k)),
            None => self.expr(&p.body, body, k),
        }
    }

    fn expr(&mut self, p: &'p ExprPattern, node: NodeId, k: Cont<'_, 'p, 't>) -> bool {
        match p {
            ExprPattern::Alternative { members, rest } => {
                *self.tree.kind(node) == NodeKind::Alternative
                    && self.alternatives(members, rest.as_ref(), self.tree.children(node), k)
            }
            ExprPattern::VarDef(v, inner) if **inner != ExprPattern::AnySequence => {
                self.expr(inner, node, &mut |cx| cx.bind(v, node, k))
            }
            _ => {
                let elems = self.view(node);
                self.items(p.as_items(), elems, k)
            }
        }
    }

    fn alternatives(
        &mut self,
        members: &'p [ExprPattern],
        rest: Option<&'p AlternativesRest>,
        branches: &'t [NodeId],
        k: Cont<'_, 'p, 't>,
    ) -> bool {
        match rest {
            None => members.len() == branches.len() && self.exact_branches(members, branches, k),
            Some(r) => {
                members.len() < branches.len()
                    && self.pick_branches(members, branches, 0, &mut Vec::new(), r, k)
            }
        }
    }

    fn exact_branches(
        &mut self,
        members: &'p [ExprPattern],
        branches: &'t [NodeId],
        k: Cont<'_, 'p, 't>,
    ) -> bool {
        match (members.split_first(), branches.split_first()) {
            (None, None) => k(self),
            (Some((m, ms)), Some((&b, bs))) => {
                self.expr(m, b, &mut |cx| cx.exact_branches(ms, bs, k))
            }
            _ => false,
        }
    }

    fn pick_branches(
        &mut self,
        members: &'p [ExprPattern],
        branches: &'t [NodeId],
        from: usize,
        chosen: &mut Vec<usize>,
        rest: &'p AlternativesRest,
        k: Cont<'_, 'p, 't>,
    ) -> bool {
        let Some((first, tail)) = members.split_first() else {
            let unmatched: Vec<NodeId> = (0..branches.len())
                .filter(|i| !chosen.contains(i))
                .map(|i| branches[i])
                .collect();
            return self.bind_all(rest.var.as_deref(), &unmatched, k);
        };
        let last = branches.len() - members.len();
        for i in from..=last {
            chosen.push(i);
            let ok = self.expr(first, branches[i], &mut |cx| {
                cx.pick_branches(tail, branches, i + 1, chosen, rest, k)
            });
            if ok {
                return true;
            }
            chosen.pop();
        }
        false
    }

    fn items(&mut self, items: &'p [ExprPattern], elems: &'t [NodeId], k: Cont<'_, 'p, 't>) -> bool {
        let Some((first, rest)) = items.split_first() else {
            return elems.is_empty() && k(self);
        };
        let absorb_var = match first {
            ExprPattern::AnySequence => Some(None),
            ExprPattern::VarDef(v, inner) if **inner == ExprPattern::AnySequence => {
                Some(Some(v.as_str()))
            }
            _ => None,
        };
        if let Some(var) = absorb_var {
            for n in 0..=elems.len() {
                let (taken, left) = elems.split_at(n);
                if self.bind_all(var, taken, &mut |cx| cx.items(rest, left, k)) {
                    return true;
                }
            }
            return false;
        }
        let Some((&e, tail)) = elems.split_first() else {
            return false;
        };
        self.elem(first, e, &mut |cx| cx.items(rest, tail, k))
    }

    fn elem(&mut self, p: &'p ExprPattern, e: NodeId, k: Cont<'_, 'p, 't>) -> bool {
        let kind = self.tree.kind(e);
        match p {
            ExprPattern::AnySymbol => matches!(kind, NodeKind::SymbolRef(_)) && k(self),
            ExprPattern::Symbol(n) => {
                matches!(kind, NodeKind::SymbolRef(m) if m == n) && k(self)
            }
            ExprPattern::AnyLex => matches!(kind, NodeKind::Literal(_)) && k(self),
            ExprPattern::Literal(t) => matches!(kind, NodeKind::Literal(s) if s == t) && k(self),
            ExprPattern::Empty => *kind == NodeKind::Empty && k(self),
            ExprPattern::Iteration(inner, ik) => {
                *kind == NodeKind::Iteration(*ik)
                    && self.expr(inner, self.tree.children(e)[0], k)
            }
            ExprPattern::Sequence(_) | ExprPattern::Alternative { .. } | ExprPattern::AnySequence => {
                self.expr(p, e, k)
            }
            ExprPattern::VarDef(v, inner) => self.elem(inner, e, &mut |cx| cx.bind(v, e, k)),
            ExprPattern::VarRef(v) => {
                let bound = self.binds.iter().any(|(x, _)| x == v);
                let shaped = match self.vars.get(v.as_str()) {
                    Some(VarKind::Symbol) => matches!(kind, NodeKind::SymbolRef(_)),
                    _ => true,
                };
                bound && shaped && self.bind(v, e, k)
            }
        }
    }
}
