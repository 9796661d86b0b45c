//! Earley recognizer over a rule set compiled from the grammar tree, with
//! deterministic top-down reconstruction of one derivation.
//!
//! Every grammar-tree node gets its own nonterminal, so completed chart
//! entries map straight back to grammar-tree nodes:
//!
//! | node               | rules                         |
//! |--------------------|-------------------------------|
//! | symbol definition  | `D -> P_k` per production     |
//! | production         | `P -> body`                   |
//! | sequence           | `S -> c1 c2 ...`              |
//! | alternative        | `A -> c_i` per branch         |
//! | `c*` / `c+` / `c?` | `I -> ε \| I c`, `I -> c \| I c`, `I -> ε \| c` |
//! | symbol reference   | `R -> D` or `R -> terminal`   |
//! | literal            | `L -> 'text'`                 |
//! | `#empty`           | `E -> ε`                      |
//!
//! Nullable nonterminals are skipped at prediction time (Aycock and
//! Horspool), so empty derivations need no special completion pass.

use std::collections::{HashMap, HashSet};

use super::{ParseError, ParseNode, ParseTree, Token, TokenKind};
use crate::grammar::{is_terminal_name, GrammarTree, IterKind, NodeId, NodeKind};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Sym {
    Nt(usize),
    Lit(String),
    Term(String),
}

struct Rule {
    lhs: usize,
    rhs: Vec<Sym>,
}

pub(super) struct Compiled<'g> {
    tree: &'g GrammarTree,
    rules: Vec<Rule>,
    by_lhs: Vec<Vec<usize>>,
    nullable: Vec<bool>,
}

fn matches(sym: &Sym, tok: &Token) -> bool {
    match (sym, &tok.kind) {
        (Sym::Lit(a), TokenKind::Literal(b)) => a == b,
        (Sym::Term(a), TokenKind::Terminal(b)) => a == b,
        _ => false,
    }
}

impl<'g> Compiled<'g> {
    pub(super) fn new(tree: &'g GrammarTree) -> Self {
        let n = tree.len();
        let mut rules = Vec::new();
        let mut add = |lhs: usize, rhs: Vec<Sym>| rules.push(Rule { lhs, rhs });
        for node in tree.nodes() {
            let id = node.id.index();
            let nt = |c: &NodeId| Sym::Nt(c.index());
            match &node.kind {
                NodeKind::Grammar => {}
                NodeKind::SymbolDef(_) | NodeKind::Alternative => {
                    for c in &node.children {
                        add(id, vec![nt(c)]);
                    }
                }
                NodeKind::Production => add(id, vec![nt(&node.children[0])]),
                NodeKind::Sequence => add(id, node.children.iter().map(nt).collect()),
                NodeKind::Iteration(k) => {
                    let c = nt(&node.children[0]);
                    match k {
                        IterKind::Star => {
                            add(id, vec![]);
                            add(id, vec![Sym::Nt(id), c]);
                        }
                        IterKind::Plus => {
                            add(id, vec![c.clone()]);
                            add(id, vec![Sym::Nt(id), c]);
                        }
                        IterKind::Opt => {
                            add(id, vec![]);
                            add(id, vec![c]);
                        }
                    }
                }
                NodeKind::SymbolRef(name) if is_terminal_name(name) => {
                    add(id, vec![Sym::Term(name.clone())])
                }
                NodeKind::SymbolRef(name) => {
                    let def = tree.rule(name).expect("references are resolved at load time");
                    add(id, vec![Sym::Nt(def.index())]);
                }
                NodeKind::Literal(text) => add(id, vec![Sym::Lit(text.clone())]),
                NodeKind::Empty => add(id, vec![]),
            }
        }
        let mut by_lhs = vec![Vec::new(); n];
        for (i, r) in rules.iter().enumerate() {
            by_lhs[r.lhs].push(i);
        }
        let mut nullable = vec![false; n];
        loop {
            let mut changed = false;
            for r in &rules {
                if !nullable[r.lhs]
                    && r.rhs.iter().all(|s| matches!(s, Sym::Nt(x) if nullable[*x]))
                {
                    nullable[r.lhs] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Compiled {
            tree,
            rules,
            by_lhs,
            nullable,
        }
    }

    pub(super) fn parse(&self, start: NodeId, tokens: &[Token]) -> Result<ParseTree, ParseError> {
        let chart = self.recognize(start.index(), tokens);
        let n = tokens.len();
        let mut done: HashSet<(usize, usize, usize)> = HashSet::new();
        for (j, set) in chart.iter().enumerate() {
            for &(r, dot, origin) in set {
                if dot == self.rules[r].rhs.len() {
                    done.insert((self.rules[r].lhs, origin, j));
                }
            }
        }
        if !done.contains(&(start.index(), 0, n)) {
            return Err(self.error(&chart, tokens));
        }
        let mut b = Builder {
            c: self,
            tokens,
            done,
            feasible: HashMap::new(),
            visiting: HashSet::new(),
            nodes: Vec::new(),
        };
        let root = b
            .build(start.index(), 0, n, None)
            .expect("a recognized input has a cycle-free derivation");
        Ok(ParseTree {
            tokens: tokens.to_vec(),
            nodes: compact(b.nodes, root),
        })
    }

    fn recognize(&self, start: usize, tokens: &[Token]) -> Vec<Vec<(usize, usize, usize)>> {
        let n = tokens.len();
        let mut chart: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n + 1];
        let mut seen: Vec<HashSet<(usize, usize, usize)>> = vec![HashSet::new(); n + 1];
        let push = |chart: &mut Vec<Vec<_>>, seen: &mut Vec<HashSet<_>>, k: usize, item| {
            if seen[k].insert(item) {
                chart[k].push(item);
            }
        };
        for &r in &self.by_lhs[start] {
            push(&mut chart, &mut seen, 0, (r, 0, 0));
        }
        for k in 0..=n {
            let mut i = 0;
            while i < chart[k].len() {
                let (r, dot, origin) = chart[k][i];
                i += 1;
                let rule = &self.rules[r];
                match rule.rhs.get(dot) {
                    Some(Sym::Nt(x)) => {
                        for &rx in &self.by_lhs[*x] {
                            push(&mut chart, &mut seen, k, (rx, 0, k));
                        }
                        if self.nullable[*x] {
                            push(&mut chart, &mut seen, k, (r, dot + 1, origin));
                        }
                    }
                    Some(t) => {
                        if k < n && matches(t, &tokens[k]) {
                            push(&mut chart, &mut seen, k + 1, (r, dot + 1, origin));
                        }
                    }
                    None => {
                        let lhs = rule.lhs;
                        let mut j = 0;
                        while j < chart[origin].len() {
                            let (r2, d2, o2) = chart[origin][j];
                            j += 1;
                            if self.rules[r2].rhs.get(d2) == Some(&Sym::Nt(lhs)) {
                                push(&mut chart, &mut seen, k, (r2, d2 + 1, o2));
                            }
                        }
                    }
                }
            }
        }
        chart
    }

    fn error(&self, chart: &[Vec<(usize, usize, usize)>], tokens: &[Token]) -> ParseError {
        let furthest = chart.iter().rposition(|s| !s.is_empty()).unwrap_or(0);
        let mut expected: Vec<String> = chart[furthest]
            .iter()
            .filter_map(|&(r, dot, _)| match self.rules[r].rhs.get(dot)? {
                Sym::Lit(t) => Some(crate::syntax::quote(t)),
                Sym::Term(t) => Some(t.clone()),
                Sym::Nt(_) => None,
            })
            .collect();
        expected.sort();
        expected.dedup();
        let (offset, found) = match tokens.get(furthest) {
            Some(t) => (t.span.start, Some(t.text.clone())),
            None => (tokens.last().map_or(0, |t| t.span.end), None),
        };
        ParseError::Unexpected {
            token_index: furthest,
            offset,
            found,
            expected,
        }
    }
}

struct Builder<'c, 'g, 't> {
    c: &'c Compiled<'g>,
    tokens: &'t [Token],
    done: HashSet<(usize, usize, usize)>,
    /// Can symbols `k..` of rule `r` cover tokens `pos..end`?
    feasible: HashMap<(usize, usize, usize, usize), bool>,
    visiting: HashSet<(usize, usize, usize)>,
    nodes: Vec<ParseNode>,
}

impl Builder<'_, '_, '_> {
    fn derives(&self, sym: &Sym, i: usize, j: usize) -> bool {
        match sym {
            Sym::Nt(x) => self.done.contains(&(*x, i, j)) || (i == j && self.c.nullable[*x]),
            t => j == i + 1 && i < self.tokens.len() && matches(t, &self.tokens[i]),
        }
    }

    fn feasible(&mut self, r: usize, k: usize, pos: usize, end: usize) -> bool {
        let rhs_len = self.c.rules[r].rhs.len();
        if k == rhs_len {
            return pos == end;
        }
        if let Some(&f) = self.feasible.get(&(r, k, pos, end)) {
            return f;
        }
        let mut ok = false;
        for mid in (pos..=end).rev() {
            let sym = self.c.rules[r].rhs[k].clone();
            if self.derives(&sym, pos, mid) && self.feasible(r, k + 1, mid, end) {
                ok = true;
                break;
            }
        }
        self.feasible.insert((r, k, pos, end), ok);
        ok
    }

    fn push(&mut self, gt: usize, i: usize, j: usize, parent: Option<usize>) -> usize {
        self.nodes.push(ParseNode {
            gt: NodeId::new(gt),
            parent,
            children: Vec::new(),
            token: None,
            tokens: i..j,
        });
        self.nodes.len() - 1
    }

    /// Build the instance of grammar node `nt` spanning tokens `i..j`.
    fn build(&mut self, nt: usize, i: usize, j: usize, parent: Option<usize>) -> Option<usize> {
        if !self.visiting.insert((nt, i, j)) {
            return None;
        }
        let mark = self.nodes.len();
        let me = self.push(nt, i, j, parent);
        let result = self.build_into(me, nt, i, j);
        self.visiting.remove(&(nt, i, j));
        if result {
            Some(me)
        } else {
            self.nodes.truncate(mark);
            None
        }
    }

    fn build_into(&mut self, me: usize, nt: usize, i: usize, j: usize) -> bool {
        let rules = self.c.by_lhs[nt].clone();
        rules.into_iter().any(|r| self.fill(me, nt, r, 0, i, j))
    }

    /// Place symbols `k..` of rule `r` over tokens `pos..end`, giving earlier
    /// symbols the longest spans that still leave a derivation for the rest.
    fn fill(&mut self, me: usize, nt: usize, r: usize, k: usize, pos: usize, end: usize) -> bool {
        let Some(sym) = self.c.rules[r].rhs.get(k).cloned() else {
            return pos == end;
        };
        let is_iteration = matches!(self.c.tree.kind(NodeId::new(nt)), NodeKind::Iteration(_));
        for mid in (pos..=end).rev() {
            if !(self.derives(&sym, pos, mid) && self.feasible(r, k + 1, mid, end)) {
                continue;
            }
            let mark = self.nodes.len();
            let kids = self.nodes[me].children.len();
            let placed = match &sym {
                // the left-recursive occurrence of an iteration contributes its repetitions
                Sym::Nt(x) if is_iteration && *x == nt => match self.build(nt, pos, mid, Some(me)) {
                    Some(sub) => {
                        let reps = std::mem::take(&mut self.nodes[sub].children);
                        for &c in &reps {
                            self.nodes[c].parent = Some(me);
                        }
                        self.nodes[me].children.extend(reps);
                        true
                    }
                    None => false,
                },
                Sym::Nt(x) => match self.build(*x, pos, mid, Some(me)) {
                    Some(child) => {
                        self.nodes[me].children.push(child);
                        true
                    }
                    None => false,
                },
                _ => {
                    self.nodes[me].token = Some(pos);
                    true
                }
            };
            if placed && self.fill(me, nt, r, k + 1, mid, end) {
                return true;
            }
            self.nodes.truncate(mark);
            self.nodes[me].children.truncate(kids);
            if !matches!(sym, Sym::Nt(_)) {
                self.nodes[me].token = None;
            }
        }
        false
    }
}

/// Drop nodes unreachable from `root` and renumber in pre-order.
fn compact(nodes: Vec<ParseNode>, root: usize) -> Vec<ParseNode> {
    let mut order = Vec::with_capacity(nodes.len());
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        order.push(n);
        stack.extend(nodes[n].children.iter().rev());
    }
    let mut new_index = vec![usize::MAX; nodes.len()];
    for (i, &old) in order.iter().enumerate() {
        new_index[old] = i;
    }
    order
        .iter()
        .map(|&old| {
            let n = &nodes[old];
            ParseNode {
                gt: n.gt,
                parent: n.parent.map(|p| new_index[p]),
                children: n.children.iter().map(|&c| new_index[c]).collect(),
                token: n.token,
                tokens: n.tokens.clone(),
            }
        })
        .collect()
}
