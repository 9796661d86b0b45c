use super::{GrammarTree, NodeId, NodeKind};
use crate::syntax::quote;

/// Emit the grammar in the notation accepted by [`parse_grammar`](super::parse_grammar).
pub fn serialize_grammar(tree: &GrammarTree) -> String {
    let mut out = String::new();
    for &def in tree.rules() {
        out.push_str(&serialize_rule(tree, def));
        out.push('\n');
    }
    out
}

/// Emit one symbol definition, terminated by `;`.
pub fn serialize_rule(tree: &GrammarTree, def: NodeId) -> String {
    let name = tree.symbol_name(def).expect("symbol definition");
    let prods = tree.children(def);
    let mut out = String::from(name);
    if prods.len() == 1 {
        out.push_str(" : ");
        write_expr(tree, tree.production_body(prods[0]), Ctx::Top, &mut out);
        out.push_str(" ;");
    } else {
        for &p in prods {
            out.push_str("\n    : ");
            write_expr(tree, tree.production_body(p), Ctx::Top, &mut out);
        }
        out.push_str("\n    ;");
    }
    out
}

#[derive(Copy, Clone, PartialEq)]
enum Ctx {
    Top,
    AltMember,
    SeqItem,
    IterBody,
}

fn write_expr(tree: &GrammarTree, id: NodeId, ctx: Ctx, out: &mut String) {
    let node = tree.node(id);
    let needs_parens = match node.kind {
        NodeKind::Alternative => ctx != Ctx::Top,
        NodeKind::Sequence => matches!(ctx, Ctx::SeqItem | Ctx::IterBody),
        NodeKind::Iteration(_) => ctx == Ctx::IterBody,
        _ => false,
    };
    if needs_parens {
        out.push('(');
    }
    match &node.kind {
        NodeKind::Alternative => {
            for (i, &c) in node.children.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                write_expr(tree, c, Ctx::AltMember, out);
            }
        }
        NodeKind::Sequence => {
            for (i, &c) in node.children.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write_expr(tree, c, Ctx::SeqItem, out);
            }
        }
        NodeKind::Iteration(k) => {
            write_expr(tree, node.children[0], Ctx::IterBody, out);
            out.push(k.symbol());
        }
        NodeKind::SymbolRef(n) => out.push_str(n),
        NodeKind::Empty => out.push_str("#empty"),
        NodeKind::Literal(t) => out.push_str(&quote(t)),
        NodeKind::Grammar | NodeKind::SymbolDef(_) | NodeKind::Production => {
            unreachable!("not an expression node")
        }
    }
    if needs_parens {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use crate::grammar::parse_grammar;

    use super::*;

    fn round_trip(src: &str) -> String {
        let t = parse_grammar(src).unwrap();
        let text = serialize_grammar(&t);
        let again = parse_grammar(&text).unwrap();
        assert!(t.structural_eq(&again), "{src}\n=> {text}");
        text
    }

    #[test]
    fn listing_shapes_round_trip() {
        let text = round_trip("expr : term ((PLUS | MINUS) term)* ; term : INT ;");
        assert_eq!(text, "expr : term ((PLUS | MINUS) term)* ;\nterm : INT ;\n");
        round_trip("a : (B | C) | D ; b : B (C D) E : (B*)* : #empty ;");
        round_trip("s : 'it\\'s' '\\n' ('a' 'b')? ;");
    }

    #[test]
    fn empty_is_written_as_keyword() {
        let text = round_trip("a : #empty | B ;");
        assert!(text.contains("#empty"));
    }
}
