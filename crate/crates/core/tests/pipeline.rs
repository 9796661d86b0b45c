//! End-to-end runs over the fixture files: weave, lex, parse, highlight, format.

mod support;

use std::path::PathBuf;

use weft_core::annotations::{AnnotationStore, Value};
use weft_core::aspect::{parse_aspect, weave, Aspect};
use weft_core::highlight::{assign_groups, render_ansi, render_html, Palette, PLAIN};
use weft_core::pattern::match_rules;
use support::reference::reference_format;
use weft_core::pretty::{effective_whitespace, format, WsItem};
use weft_core::runtime::{parse_input, tokenize, LexerSpec, ParseTree};
use weft_core::{parse_grammar, GrammarTree, NodeKind};

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

struct Java {
    grammar: GrammarTree,
    spec: LexerSpec,
}

impl Java {
    fn new(grammar: &str) -> Self {
        Java {
            grammar: parse_grammar(&fixture(grammar)).unwrap(),
            spec: LexerSpec::parse(&fixture("java.lexer")).unwrap(),
        }
    }

    fn store(&self, aspect: &str) -> AnnotationStore {
        weave(&self.grammar, &[parse_aspect(&fixture(aspect)).unwrap()]).unwrap()
    }

    fn parse(&self, start: &str, input: &str) -> ParseTree {
        let toks = tokenize(&self.spec, &self.grammar, input).unwrap();
        let tree = parse_input(&self.grammar, start, &toks).unwrap();
        tree.validate(&self.grammar).unwrap();
        tree
    }
}

fn format_checked(java: &Java, store: &AnnotationStore, start: &str, input: &str) -> String {
    let tree = java.parse(start, input);
    let f = format(&tree, store).unwrap();
    assert!(f.warnings.is_empty(), "{:?}", f.warnings);
    assert_eq!(f.indent_level, 0);
    assert_eq!(f.text, reference_format(&tree, store), "reference emitter disagrees");
    let again = format(&java.parse(start, &f.text), store).unwrap();
    assert_eq!(again.text, f.text, "not idempotent");
    let squeeze = |s: &str| s.split_whitespace().collect::<String>();
    assert_eq!(squeeze(&f.text), squeeze(input));
    f.text
}

#[test]
fn formats_class_body() {
    let java = Java::new("java5.grammar");
    let store = java.store("pretty.aspect");
    let out = format_checked(&java, &store, "normalClassDeclaration", &fixture("classbody.java"));
    assert_eq!(out, "class A {\n    int x ;\n\n}\n");
    let out = format_checked(&java, &store, "normalClassDeclaration", "class Box<T> { }");
    assert_eq!(out, "class Box <T> {\n\n}\n");
    let out = format_checked(
        &java,
        &store,
        "normalClassDeclaration",
        "class C<K extends A & B, V> extends D implements E, F { int a; long b; }",
    );
    assert_eq!(
        out,
        "class C <K extends A & B, V> extends D implements E , F {\n    int a ;\n    long b ;\n\n}\n"
    );
}

#[test]
fn formats_type_parameters() {
    let java = Java::new("java5.grammar");
    let store = java.store("pretty.aspect");
    let out = format_checked(&java, &store, "typeParameters", &fixture("typeparams.java"));
    assert_eq!(out, "<A, B>");
}

#[test]
fn whitespace_programs_per_token() {
    let java = Java::new("java5.grammar");
    let store = java.store("pretty.aspect");
    let tree = java.parse("normalClassDeclaration", &fixture("classbody.java"));
    let leaves = tree.leaves();
    let ws = |k: usize| effective_whitespace(&tree, leaves[k], &store).unwrap();
    let text = |s: &str| WsItem::Text(s.into());
    // class A { int x ; }
    assert_eq!(ws(2).1, [text("\n"), WsItem::IncIndent]);
    assert_eq!(ws(0), (vec![text("")], vec![text(" ")]));
    assert_eq!(ws(5).1, [text("\n")]);
    assert_eq!(ws(6).0, [WsItem::DecIndent, text("\n")]);
}

fn groups(java: &Java, store: &AnnotationStore, input: &str) -> Vec<(String, String)> {
    let tree = java.parse("normalClassDeclaration", input);
    assign_groups(&tree, store)
        .into_iter()
        .map(|s| (input[s.span].to_string(), s.group))
        .collect()
}

#[test]
fn highlights_declaring_occurrences() {
    let java = Java::new("java5.grammar");
    let store = java.store("highlight.aspect");
    let input = fixture("example.java");
    let got = groups(&java, &store, &input);
    let expect = [
        ("class", "keyword"),
        ("Example", "classDeclaration"),
        ("<", PLAIN),
        ("A", "typeParameterDeclaration"),
        (",", PLAIN),
        ("B", "typeParameterDeclaration"),
        (">", PLAIN),
        ("extends", "keyword"),
        ("A", PLAIN),
        ("implements", "keyword"),
        ("Some", PLAIN),
        ("<", PLAIN),
        ("?", "typeParameterDeclaration"),
        ("super", "keyword"),
        ("B", PLAIN),
        (">", PLAIN),
        ("{", PLAIN),
        ("}", PLAIN),
    ];
    let expect: Vec<(String, String)> = expect.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    assert_eq!(got, expect);

    let declared: Vec<String> = store
        .iter()
        .flat_map(|(_, attrs)| attrs.iter())
        .filter_map(|s| match &s.attribute.value {
            Some(Value::Name(n)) if s.attribute.name == "group" => Some(n.clone()),
            _ => None,
        })
        .collect();
    for (_, g) in &got {
        assert!(g == PLAIN || declared.contains(g), "{g} not in store");
    }
}

#[test]
fn unannotated_tokens_are_plain() {
    let java = Java::new("java5.grammar");
    let store = weave(&java.grammar, &[]).unwrap();
    assert!(groups(&java, &store, "class A { }").iter().all(|(_, g)| g == PLAIN));
}

#[test]
fn rendering_preserves_text() {
    let java = Java::new("java5.grammar");
    let store = java.store("highlight.aspect");
    let input = fixture("example.java");
    let tree = java.parse("normalClassDeclaration", &input);
    let spans = assign_groups(&tree, &store);
    let palette = Palette::parse(&fixture("default.palette")).unwrap();
    let ansi = render_ansi(&input, &spans, &palette).unwrap();
    assert!(ansi.contains("\x1b[1;34mclass\x1b[0m"));
    assert!(ansi.contains("\x1b[4;32mExample\x1b[0m"));
    let stripped = regex_lite_strip(&ansi);
    assert_eq!(stripped, input);
    let html = render_html(&input, &spans).unwrap();
    assert!(html.contains("<span class=\"typeParameterDeclaration\">?</span>"));
    assert_eq!(render_ansi(&input, &spans, &Palette::default()).unwrap(), input);
}

fn regex_lite_strip(s: &str) -> String {
    let mut out = String::new();
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\x1b' {
            for d in chars.by_ref() {
                if d == 'm' {
                    break;
                }
            }
        } else {
            out.push(c);
        }
    }
    out
}

#[test]
fn class_rule_survives_grammar_evolution() {
    let aspect: Aspect = parse_aspect(&fixture("highlight.aspect")).unwrap();
    let rule = &aspect.rules[0].pattern;
    for (file, expected) in [("java5.grammar", "normalClassDeclaration"), ("java14.grammar", "classDeclaration")] {
        let g = parse_grammar(&fixture(file)).unwrap();
        let hits: Vec<&NodeKind> = match_rules(rule, &g).iter().map(|m| g.kind(m.matched)).collect();
        assert_eq!(hits, [&NodeKind::SymbolDef(expected.into())], "{file}");
    }
}

#[test]
fn arithmetic_round_trip() {
    let g = parse_grammar(&fixture("arith.grammar")).unwrap();
    let spec = LexerSpec::parse(&fixture("arith.lexer")).unwrap();
    let input = fixture("sum.arith");
    let toks = tokenize(&spec, &g, &input).unwrap();
    let tree = parse_input(&g, "expr", &toks).unwrap();
    tree.validate(&g).unwrap();
    let store = weave(&g, &[]).unwrap();
    // no annotations and no defaults: tokens run together
    assert_eq!(format(&tree, &store).unwrap().text, "1+2*(3-4)");
}
