//! Exhaustive reference matcher used to cross-check [`match_rules`](super::match_rules).
//!
//! Every alignment is enumerated without pruning, each tagged with its
//! decision vector: `..` lengths, chosen production indices and chosen
//! alternative branches, in pattern pre-order. Variable constraints are only
//! checked afterwards, on whole solutions. The preferred solution is the one
//! with the smallest decision vector.

use std::collections::BTreeMap;

use super::{
    bindings_map, ExprPattern, MatchResult, ProductionPattern, ProductionsPattern, RulePattern,
    SubPattern, SymbolPattern, VarKind,
};
use crate::grammar::{GrammarTree, NodeId, NodeKind};

#[derive(Clone, Default)]
struct Sol {
    decisions: Vec<usize>,
    binds: Vec<(String, NodeId)>,
}

impl Sol {
    fn decide(d: usize) -> Sol {
        Sol {
            decisions: vec![d],
            binds: Vec::new(),
        }
    }

    fn bind(var: &str, nodes: &[NodeId]) -> Sol {
        Sol {
            decisions: Vec::new(),
            binds: nodes.iter().map(|&n| (var.to_string(), n)).collect(),
        }
    }

    fn then(&self, other: &Sol) -> Sol {
        let mut s = self.clone();
        s.decisions.extend_from_slice(&other.decisions);
        s.binds.extend(other.binds.iter().cloned());
        s
    }
}

fn product(a: &[Sol], b: &[Sol]) -> Vec<Sol> {
    a.iter().flat_map(|x| b.iter().map(move |y| x.then(y))).collect()
}

/// All strictly increasing `k`-tuples drawn from `0..n`, in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..n {
            cur.push(i);
            go(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, k, 0, &mut Vec::new(), &mut out);
    out
}

pub fn brute_force_match(pattern: &RulePattern, tree: &GrammarTree) -> Vec<MatchResult> {
    let vars = pattern.variables();
    tree.rules()
        .iter()
        .filter_map(|&def| best(&vars, tree, def, rule_sols(pattern, tree, def)))
        .collect()
}

pub fn brute_force_within(
    pattern: &SubPattern,
    tree: &GrammarTree,
    scope: NodeId,
) -> Vec<MatchResult> {
    let vars = pattern.variables();
    tree.descendants(scope)
        .into_iter()
        .filter_map(|node| {
            let sols = match (pattern, tree.kind(node)) {
                (SubPattern::Production(p), NodeKind::Production) => prod_sols(p, tree, node),
                (SubPattern::Expr(p), k) if k.is_expression() => expr_sols(p, tree, node),
                _ => Vec::new(),
            };
            best(&vars, tree, node, sols)
        })
        .collect()
}

fn best(
    vars: &BTreeMap<String, VarKind>,
    tree: &GrammarTree,
    node: NodeId,
    sols: Vec<Sol>,
) -> Option<MatchResult> {
    sols.into_iter()
        .filter(|s| consistent(vars, tree, s))
        .min_by(|a, b| a.decisions.cmp(&b.decisions))
        .map(|s| MatchResult {
            matched: node,
            bindings: bindings_map(s.binds.iter().map(|(v, n)| (v.as_str(), *n))),
        })
}

fn consistent(vars: &BTreeMap<String, VarKind>, tree: &GrammarTree, sol: &Sol) -> bool {
    let mut groups: BTreeMap<&str, Vec<NodeId>> = BTreeMap::new();
    for (v, n) in &sol.binds {
        groups.entry(v.as_str()).or_default().push(*n);
    }
    groups.iter().all(|(v, nodes)| match vars.get(*v) {
        Some(VarKind::Symbol) => {
            let names: Vec<Option<&str>> = nodes.iter().map(|&n| tree.symbol_name(n)).collect();
            names.iter().all(|n| n.is_some() && *n == names[0])
        }
        Some(VarKind::Structural) => nodes.iter().all(|&n| tree.subtree_eq(nodes[0], tree, n)),
        _ => true,
    })
}

fn rule_sols(p: &RulePattern, tree: &GrammarTree, def: NodeId) -> Vec<Sol> {
    if let SymbolPattern::Named(want) = &p.symbol {
        if tree.symbol_name(def) != Some(want.as_str()) {
            return Vec::new();
        }
    }
    let head = match &p.var {
        Some(v) => Sol::bind(v, &[def]),
        None => Sol::default(),
    };
    let prods = tree.children(def);
    let body = match &p.productions {
        ProductionsPattern::Any { var } => match var {
            Some(v) => vec![Sol::bind(v, prods)],
            None => vec![Sol::default()],
        },
        ProductionsPattern::List(list) => {
            let mut out = Vec::new();
            for choice in combinations(prods.len(), list.len()) {
                let mut acc = vec![Sol::default()];
                for (pat, &i) in list.iter().zip(&choice) {
                    let step: Vec<Sol> = prod_sols(pat, tree, prods[i])
                        .iter()
                        .map(|s| Sol::decide(i).then(s))
                        .collect();
                    acc = product(&acc, &step);
                }
                out.extend(acc);
            }
            out
        }
    };
    body.iter().map(|s| head.then(s)).collect()
}

fn prod_sols(p: &ProductionPattern, tree: &GrammarTree, prod: NodeId) -> Vec<Sol> {
    let sols = expr_sols(&p.body, tree, tree.production_body(prod));
    match &p.var {
        Some(v) => sols.iter().map(|s| s.then(&Sol::bind(v, &[prod]))).collect(),
        None => sols,
    }
}

fn elements(tree: &GrammarTree, node: NodeId) -> Vec<NodeId> {
    if *tree.kind(node) == NodeKind::Sequence {
        tree.children(node).to_vec()
    } else {
        vec![node]
    }
}

fn expr_sols(p: &ExprPattern, tree: &GrammarTree, node: NodeId) -> Vec<Sol> {
    match p {
        ExprPattern::Alternative { members, rest } => {
            if *tree.kind(node) != NodeKind::Alternative {
                return Vec::new();
            }
            let branches = tree.children(node);
            match rest {
                None => {
                    if members.len() != branches.len() {
                        return Vec::new();
                    }
                    let mut acc = vec![Sol::default()];
                    for (m, &b) in members.iter().zip(branches) {
                        acc = product(&acc, &expr_sols(m, tree, b));
                    }
                    acc
                }
                Some(r) => {
                    if members.len() >= branches.len() {
                        return Vec::new();
                    }
                    let mut out = Vec::new();
                    for choice in combinations(branches.len(), members.len()) {
                        let mut acc = vec![Sol::default()];
                        for (m, &i) in members.iter().zip(&choice) {
                            let step: Vec<Sol> = expr_sols(m, tree, branches[i])
                                .iter()
                                .map(|s| Sol::decide(i).then(s))
                                .collect();
                            acc = product(&acc, &step);
                        }
                        let unchosen: Vec<NodeId> = (0..branches.len())
                            .filter(|i| !choice.contains(i))
                            .map(|i| branches[i])
                            .collect();
                        let tail = match &r.var {
                            Some(v) => Sol::bind(v, &unchosen),
                            None => Sol::default(),
                        };
                        out.extend(acc.iter().map(|s| s.then(&tail)));
                    }
                    out
                }
            }
        }
        ExprPattern::VarDef(v, inner) if **inner != ExprPattern::AnySequence => {
            let sols = expr_sols(inner, tree, node);
            sols.iter().map(|s| s.then(&Sol::bind(v, &[node]))).collect()
        }
        ExprPattern::Sequence(items) => seq_sols(items, tree, &elements(tree, node)),
        single => seq_sols(std::slice::from_ref(single), tree, &elements(tree, node)),
    }
}

fn seq_sols(items: &[ExprPattern], tree: &GrammarTree, elems: &[NodeId]) -> Vec<Sol> {
    let Some((first, rest)) = items.split_first() else {
        return if elems.is_empty() {
            vec![Sol::default()]
        } else {
            Vec::new()
        };
    };
    let absorbing = match first {
        ExprPattern::AnySequence => Some(None),
        ExprPattern::VarDef(v, inner) if **inner == ExprPattern::AnySequence => Some(Some(v)),
        _ => None,
    };
    if let Some(var) = absorbing {
        let mut out = Vec::new();
        for n in 0..=elems.len() {
            let mut head = Sol::decide(n);
            if let Some(v) = var {
                head = head.then(&Sol::bind(v, &elems[..n]));
            }
            out.extend(seq_sols(rest, tree, &elems[n..]).iter().map(|s| head.then(s)));
        }
        return out;
    }
    match elems.split_first() {
        Some((&e, tail)) => product(&elem_sols(first, tree, e), &seq_sols(rest, tree, tail)),
        None => Vec::new(),
    }
}

fn elem_sols(p: &ExprPattern, tree: &GrammarTree, e: NodeId) -> Vec<Sol> {
    let kind = tree.kind(e);
    let ok = match p {
        ExprPattern::AnySymbol => matches!(kind, NodeKind::SymbolRef(_)),
        ExprPattern::Symbol(n) => *kind == NodeKind::SymbolRef(n.clone()),
        ExprPattern::AnyLex => matches!(kind, NodeKind::Literal(_)),
        ExprPattern::Literal(t) => *kind == NodeKind::Literal(t.clone()),
        ExprPattern::Empty => *kind == NodeKind::Empty,
        ExprPattern::Iteration(inner, k) => {
            return if *kind == NodeKind::Iteration(*k) {
                expr_sols(inner, tree, tree.children(e)[0])
            } else {
                Vec::new()
            };
        }
        ExprPattern::VarDef(v, inner) => {
            let sols = elem_sols(inner, tree, e);
            return sols.iter().map(|s| s.then(&Sol::bind(v, &[e]))).collect();
        }
        ExprPattern::VarRef(v) => return vec![Sol::bind(v, &[e])],
        ExprPattern::Sequence(_) | ExprPattern::Alternative { .. } | ExprPattern::AnySequence => {
            return expr_sols(p, tree, e);
        }
    };
    if ok {
        vec![Sol::default()]
    } else {
        Vec::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;
    use crate::pattern::{match_rules, match_within, parse_rule_pattern, parse_subpattern};

    const ARITH: &str = "expr : term ((PLUS | MINUS) term)* ;\n\
                         term : factor ((MULT | DIV) factor)* ;\n\
                         factor : INT | '(' expr ')' ;\n";

    #[test]
    fn agrees_with_matcher_on_examples() {
        let tree = parse_grammar(ARITH).unwrap();
        for src in [
            "expr : {...}",
            "# : term ..",
            "# : # (..)*",
            "# : $tr=# ((PLUS | MINUS) $tr)*",
            "expr : term ((PLUS | MINUS) term)*",
            "# : $a=.. $b=(..)*",
            "# : (INT | ...)",
            "# : ($x=# | $y=...)",
            "$r=# : .. $r ..",
        ] {
            let p = parse_rule_pattern(src).unwrap();
            assert_eq!(match_rules(&p, &tree), brute_force_match(&p, &tree), "{src}");
        }
        let root = tree.root();
        for src in ["#lex", "$t=#", ": .. ", "(# | ...)", "$s=(# ..)"] {
            let p = parse_subpattern(src).unwrap();
            assert_eq!(
                match_within(&p, &tree, root),
                brute_force_within(&p, &tree, root),
                "{src}"
            );
        }
    }

    #[test]
    fn prefers_shortest_absorption() {
        let tree = parse_grammar("a : B C B C ;").unwrap();
        let p = parse_rule_pattern("# : $x=.. B ..").unwrap();
        let ms = brute_force_match(&p, &tree);
        assert_eq!(ms.len(), 1);
        assert!(ms[0].bound("x").is_none());
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(
            combinations(4, 2),
            [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]
        );
        assert_eq!(combinations(2, 0), [Vec::<usize>::new()]);
    }
}
