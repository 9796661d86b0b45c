//! A deliberately naive recognizer used to cross-check the chart parser.
//!
//! It iterates a table `derives[node][i][j]` over every grammar-tree node and
//! every token span until nothing changes. Cubic in the input per round and
//! only suitable for tiny inputs.

use super::{Token, TokenKind};
use crate::grammar::{is_terminal_name, GrammarTree, IterKind, NodeId, NodeKind};

/// Whether `tokens` form an instance of the nonterminal `start`.
pub fn recognizes_brute_force(grammar: &GrammarTree, start: &str, tokens: &[Token]) -> bool {
    let Some(def) = grammar.rule(start).filter(|_| !is_terminal_name(start)) else {
        return false;
    };
    let n = tokens.len();
    let w = n + 1;
    let mut d = vec![vec![false; w * w]; grammar.len()];
    loop {
        let mut changed = false;
        for id in (0..grammar.len()).map(NodeId::new) {
            for i in 0..=n {
                for j in i..=n {
                    if d[id.index()][i * w + j] {
                        continue;
                    }
                    let at = |x: NodeId, a: usize, b: usize| d[x.index()][a * w + b];
                    let kids = grammar.children(id);
                    let v = match grammar.kind(id) {
                        NodeKind::Grammar => false,
                        NodeKind::SymbolDef(_) | NodeKind::Alternative => kids.iter().any(|&c| at(c, i, j)),
                        NodeKind::Production => at(kids[0], i, j),
                        NodeKind::Empty => i == j,
                        NodeKind::Literal(l) => {
                            j == i + 1 && tokens[i].kind == TokenKind::Literal(l.clone())
                        }
                        NodeKind::SymbolRef(s) if is_terminal_name(s) => {
                            j == i + 1 && tokens[i].kind == TokenKind::Terminal(s.clone())
                        }
                        NodeKind::SymbolRef(s) => grammar.rule(s).is_some_and(|r| at(r, i, j)),
                        NodeKind::Sequence => {
                            let mut reach = vec![false; w];
                            reach[i] = true;
                            for &c in kids {
                                let mut next = vec![false; w];
                                for a in i..=j {
                                    if reach[a] {
                                        for b in a..=j {
                                            next[b] |= at(c, a, b);
                                        }
                                    }
                                }
                                reach = next;
                            }
                            reach[j]
                        }
                        NodeKind::Iteration(k) => {
                            let inner = kids[0];
                            let more = (i..=j).any(|m| at(inner, i, m) && at(id, m, j) && (m > i || m < j));
                            match k {
                                IterKind::Opt => i == j || at(inner, i, j),
                                IterKind::Star => i == j || more,
                                IterKind::Plus => at(inner, i, j) || more,
                            }
                        }
                    };
                    if v {
                        d[id.index()][i * w + j] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return d[def.index()][n];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;
    use crate::runtime::{parse_input, tokenize, LexerSpec};

    #[test]
    fn agrees_with_chart_parser_on_small_inputs() {
        let g = parse_grammar(
            "s : a* b | b '+' s ;\n\
             a : X | X a Y | #empty ;\n\
             b : Y+ | '(' s ')' ;\n",
        )
        .unwrap();
        let spec = LexerSpec::parse("X = /x/\nY = /y/").unwrap();
        let alphabet = ["x", "y", "+", "(", ")"];
        let mut inputs = vec![String::new()];
        for _ in 0..4 {
            let mut next = Vec::new();
            for s in &inputs {
                for a in alphabet {
                    next.push(format!("{s}{a}"));
                }
            }
            inputs.extend(next.iter().cloned());
            inputs.sort();
            inputs.dedup();
        }
        let mut accepted = 0;
        for input in &inputs {
            let toks = tokenize(&spec, &g, input).unwrap();
            let chart = parse_input(&g, "s", &toks);
            if let Ok(t) = &chart {
                t.validate(&g).unwrap();
                accepted += 1;
            }
            assert_eq!(chart.is_ok(), recognizes_brute_force(&g, "s", &toks), "{input:?}");
        }
        assert!(accepted > 10);
    }
}
