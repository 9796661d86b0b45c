//! Random grammars and patterns for differential tests.
//!
//! Patterns are mostly derived from a rule of the grammar at hand with parts
//! abstracted into wildcards or variables, so a good share of them match;
//! the rest are perturbed so they usually do not.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use weft_core::grammar::ast::{Expr, Rule};
use weft_core::pattern::{parse_rule_pattern, parse_subpattern, ProductionsPattern, RulePattern, SubPattern};
use weft_core::syntax::quote;
use weft_core::{GrammarTree, IterKind, NodeId, NodeKind};

pub const NONTERMINALS: [&str; 4] = ["a", "b", "c", "d"];
pub const TERMINALS: [&str; 3] = ["X", "Y", "Z"];
pub const LITERALS: [&str; 3] = ["p", "q", "+"];

#[derive(Copy, Clone, PartialEq)]
enum Ctx {
    Top,
    InSeq,
    InAlt,
    InIter,
}

fn leaf<R: Rng>(rng: &mut R, rules: usize) -> Expr {
    match rng.gen_range(0..10) {
        0..=3 => Expr::reference(NONTERMINALS[rng.gen_range(0..rules)]),
        4..=6 => Expr::reference(TERMINALS.choose(rng).unwrap()),
        7..=8 => Expr::literal(LITERALS.choose(rng).unwrap()),
        _ => Expr::empty(),
    }
}

fn expr<R: Rng>(rng: &mut R, rules: usize, depth: usize, ctx: Ctx) -> Expr {
    if depth == 0 || rng.gen_bool(0.4) {
        return leaf(rng, rules);
    }
    let mut kinds = vec![2];
    if ctx != Ctx::InSeq {
        kinds.push(0);
    }
    if ctx != Ctx::InAlt {
        kinds.push(1);
    }
    match *kinds.choose(rng).unwrap() {
        0 => {
            let n = rng.gen_range(2..=3);
            Expr::seq((0..n).map(|_| expr(rng, rules, depth - 1, Ctx::InSeq)).collect())
        }
        1 => {
            let n = rng.gen_range(2..=3);
            Expr::alt((0..n).map(|_| expr(rng, rules, depth - 1, Ctx::InAlt)).collect())
        }
        _ => {
            let inner = match expr(rng, rules, depth - 1, Ctx::InIter) {
                e if matches!(e.kind, weft_core::grammar::ast::ExprKind::Iteration(..)) => leaf(rng, rules),
                e => e,
            };
            let kind = *[IterKind::Star, IterKind::Plus, IterKind::Opt].choose(rng).unwrap();
            Expr::iter(inner, kind)
        }
    }
}

/// A grammar over nonterminals `a`..`d` with at most `max_nodes` tree nodes.
pub fn random_grammar<R: Rng>(rng: &mut R, max_nodes: usize) -> GrammarTree {
    loop {
        let rules = rng.gen_range(1..=NONTERMINALS.len());
        let rs: Vec<Rule> = NONTERMINALS[..rules]
            .iter()
            .map(|name| {
                let prods = rng.gen_range(1..=2);
                Rule::new(name, (0..prods).map(|_| expr(rng, rules, 3, Ctx::Top)).collect())
            })
            .collect();
        if let Ok(g) = GrammarTree::from_rules(rs) {
            if g.len() <= max_nodes {
                return g;
            }
        }
    }
}

struct Gen<'a, R> {
    rng: &'a mut R,
    tree: &'a GrammarTree,
    var_defined: bool,
    structural: bool,
}

impl<R: Rng> Gen<'_, R> {
    fn atom(&mut self) -> String {
        match self.rng.gen_range(0..6) {
            0 => "#".into(),
            1 => "#lex".into(),
            2 => "#empty".into(),
            3 => TERMINALS.choose(self.rng).unwrap().to_string(),
            4 => NONTERMINALS.choose(self.rng).unwrap().to_string(),
            _ => quote(LITERALS.choose(self.rng).unwrap()),
        }
    }

    fn wrap(&self, text: String, node: NodeId, ctx: Ctx) -> String {
        let needs = match self.tree.kind(node) {
            NodeKind::Alternative => ctx != Ctx::Top,
            NodeKind::Sequence => ctx == Ctx::InIter,
            _ => false,
        };
        if needs {
            format!("({text})")
        } else {
            text
        }
    }

    fn expr(&mut self, node: NodeId, ctx: Ctx) -> String {
        if self.rng.gen_bool(0.06) {
            return self.atom();
        }
        let tree = self.tree;
        let kids = tree.children(node);
        let text = match tree.kind(node) {
            NodeKind::SymbolRef(name) => {
                let r = self.rng.gen_range(0..100);
                if !self.var_defined && r < 25 {
                    self.var_defined = true;
                    "$v=#".into()
                } else if self.var_defined && r < 45 {
                    "$v".into()
                } else if r < 65 {
                    "#".into()
                } else {
                    name.clone()
                }
            }
            NodeKind::Literal(t) => {
                if self.rng.gen_bool(0.35) {
                    "#lex".into()
                } else {
                    quote(t)
                }
            }
            NodeKind::Empty => "#empty".into(),
            NodeKind::Sequence => {
                let n = kids.len();
                // abstract kids[lo..hi] (possibly nothing) into `..`
                let (lo, hi) = if self.rng.gen_bool(0.45) {
                    let lo = self.rng.gen_range(0..=n);
                    (lo, self.rng.gen_range(lo..=n))
                } else {
                    (usize::MAX, usize::MAX)
                };
                let mut parts = Vec::new();
                for (i, &k) in kids.iter().enumerate() {
                    if i == lo {
                        parts.push("..".to_string());
                    }
                    if !(lo..hi).contains(&i) {
                        parts.push(self.expr(k, Ctx::InSeq));
                    }
                }
                if lo == n {
                    parts.push("..".into());
                }
                parts.join(" ")
            }
            NodeKind::Alternative => {
                let keep: Vec<NodeId> = if self.rng.gen_bool(0.4) {
                    let m = self.rng.gen_range(1..kids.len());
                    let mut idx: Vec<usize> = (0..kids.len()).collect();
                    idx.shuffle(self.rng);
                    idx.truncate(m);
                    idx.sort();
                    idx.into_iter().map(|i| kids[i]).collect()
                } else {
                    kids.to_vec()
                };
                let mut parts: Vec<String> = keep.iter().map(|&k| self.expr(k, Ctx::InAlt)).collect();
                if keep.len() < kids.len() || self.rng.gen_bool(0.1) {
                    parts.push("...".into());
                }
                parts.join(" | ")
            }
            NodeKind::Iteration(k) => {
                if self.rng.gen_bool(0.2) {
                    format!("(..){}", k.symbol())
                } else {
                    let inner = self.expr(kids[0], Ctx::InIter);
                    let inner = if self.rng.gen_bool(0.1) && !self.structural {
                        self.structural = true;
                        format!("$s=({inner})")
                    } else {
                        inner
                    };
                    format!("{inner}{}", k.symbol())
                }
            }
            other => unreachable!("{other} is not an expression"),
        };
        self.wrap(text, node, ctx)
    }
}

fn rule_text<R: Rng>(rng: &mut R, tree: &GrammarTree) -> String {
    let Some(&def) = tree.rules().choose(rng) else {
        return "# : ..".into();
    };
    let name = tree.symbol_name(def).unwrap().to_string();
    let mut g = Gen {
        rng,
        tree,
        var_defined: false,
        structural: false,
    };
    let symbol = match g.rng.gen_range(0..10) {
        0..=4 => "#".to_string(),
        5..=8 => name,
        _ => NONTERMINALS.choose(g.rng).unwrap().to_string(),
    };
    if g.rng.gen_bool(0.1) {
        return format!("{symbol} : {{...}}");
    }
    let prods = tree.children(def);
    let mut chosen: Vec<NodeId> = prods.iter().copied().filter(|_| g.rng.gen_bool(0.6)).collect();
    if chosen.is_empty() {
        chosen.push(prods[0]);
    }
    let bodies: Vec<String> = chosen
        .iter()
        .map(|&p| g.expr(tree.production_body(p), Ctx::Top))
        .collect();
    let mut text = format!("{symbol} : {}", bodies.join(" : "));
    // a stray reference to the structural variable somewhere later
    if g.structural && g.rng.gen_bool(0.5) {
        text.push_str(" $s");
    }
    text
}

/// A rule pattern of at most `max_size` nodes that parses, mostly derived from `tree`.
pub fn random_rule_pattern<R: Rng>(rng: &mut R, tree: &GrammarTree, max_size: usize) -> (String, RulePattern) {
    loop {
        let text = rule_text(rng, tree);
        if let Ok(p) = parse_rule_pattern(&text) {
            if p.size() <= max_size {
                return (text, p);
            }
        }
    }
}

pub fn subpattern_size(p: &SubPattern) -> usize {
    match p {
        SubPattern::Production(pp) => 1 + pp.body.size(),
        SubPattern::Expr(e) => e.size(),
    }
}

/// A subpattern plus a scope to search, mostly derived from a node under the scope.
pub fn random_subpattern<R: Rng>(rng: &mut R, tree: &GrammarTree, max_size: usize) -> (String, SubPattern, NodeId) {
    loop {
        let Some(&scope) = tree.rules().choose(rng) else {
            continue;
        };
        let below = tree.descendants(scope);
        let &target = below.choose(rng).expect("rules have productions");
        let mut g = Gen {
            rng,
            tree,
            var_defined: false,
            structural: false,
        };
        let text = match tree.kind(target) {
            NodeKind::Production => format!(": {}", g.expr(tree.production_body(target), Ctx::Top)),
            _ => g.expr(target, Ctx::Top),
        };
        if let Ok(p) = parse_subpattern(&text) {
            if subpattern_size(&p) <= max_size {
                return (text, p, scope);
            }
        }
    }
}

pub fn is_wildcard_productions(p: &RulePattern) -> bool {
    matches!(p.productions, ProductionsPattern::Any { .. })
}
