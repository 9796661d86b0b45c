//! Pretty-printing driven by woven `before`/`after` attributes.
//!
//! Between two tokens the formatter runs the `after` program of the first
//! and then the `before` program of the second. Programs emit text and move
//! the indentation level; indentation is written lazily, just before the
//! first visible character of a line.

use thiserror::Error;

use crate::annotations::{AnnotationStore, Provenance, Value};
use crate::runtime::ParseTree;
use crate::NodeId;

pub const DEFAULT_INDENT_UNIT: &str = "    ";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WsItem {
    Text(String),
    IncIndent,
    DecIndent,
}

pub type WhitespaceProgram = Vec<WsItem>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("attribute `{attribute}` on node {node}: {message}")]
pub struct DecodeError {
    pub node: NodeId,
    pub attribute: String,
    /// Which aspect rule attached the attribute, when it came from a store.
    pub provenance: Option<Provenance>,
    pub message: String,
}

/// Decode a whitespace value: a string, or a sequence of strings and the
/// names `increaseIndent` and `decreaseIndent`.
pub fn decode_whitespace(value: &Value) -> Result<WhitespaceProgram, String> {
    fn item(v: &Value) -> Result<WsItem, String> {
        match v {
            Value::Str(s) => Ok(WsItem::Text(s.clone())),
            Value::Name(n) if n == "increaseIndent" => Ok(WsItem::IncIndent),
            Value::Name(n) if n == "decreaseIndent" => Ok(WsItem::DecIndent),
            Value::Name(n) => Err(format!("unknown whitespace directive `{n}`")),
            other => Err(format!("`{other}` is not a string or indentation directive")),
        }
    }
    match value {
        Value::Str(s) => Ok(vec![WsItem::Text(s.clone())]),
        Value::Seq(items) => items.iter().map(item).collect(),
        other => Err(format!("`{other}` is not a whitespace value")),
    }
}

fn program(store: &AnnotationStore, node: NodeId, name: &str) -> Result<Option<WhitespaceProgram>, DecodeError> {
    let Some(attr) = store.lookup(node, None, name) else {
        return Ok(None);
    };
    let err = |message: String| DecodeError {
        node,
        attribute: name.to_string(),
        provenance: store.provenance(node, None, name),
        message,
    };
    let value = attr.value.as_ref().ok_or_else(|| err("needs a value".into()))?;
    decode_whitespace(value).map(Some).map_err(err)
}

/// The `before` and `after` programs for the token at parse-tree leaf `leaf`.
///
/// `before` gathers the programs of every node whose tokens start at this
/// leaf, outermost first; `after` those of every node ending here, innermost
/// first. A side with no contribution at all falls back to the grammar's
/// `defaultBefore` or `defaultAfter`.
pub fn effective_whitespace(
    tree: &ParseTree,
    leaf: usize,
    store: &AnnotationStore,
) -> Result<(WhitespaceProgram, WhitespaceProgram), DecodeError> {
    let k = tree.nodes[leaf].token.expect("leaf carries a token");
    let chain: Vec<usize> = std::iter::once(leaf).chain(tree.ancestors(leaf)).collect();
    let side = |name: &str, default: &str, starts: bool| -> Result<WhitespaceProgram, DecodeError> {
        let mut parts = Vec::new();
        for &n in chain.iter().take_while(|&&n| {
            let r = &tree.nodes[n].tokens;
            if starts {
                r.start == k
            } else {
                r.end == k + 1
            }
        }) {
            if let Some(p) = program(store, tree.nodes[n].gt, name)? {
                parts.push(p);
            }
        }
        if parts.is_empty() {
            return Ok(program(store, store.root(), default)?.unwrap_or_default());
        }
        if starts {
            parts.reverse();
        }
        Ok(parts.concat())
    };
    Ok((side("before", "defaultBefore", true)?, side("after", "defaultAfter", false)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formatted {
    pub text: String,
    /// Indentation level after the last program ran.
    pub indent_level: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("grammar attribute `indentUnit` must be a string")]
    IndentUnit,
}

struct Emitter {
    out: String,
    level: usize,
    unit: String,
    /// A newline was written and the indentation for the next line is not yet.
    line_start: bool,
    warnings: Vec<String>,
}

impl Emitter {
    fn trim_trailing_spaces(&mut self) {
        let keep = self.out.trim_end_matches([' ', '\t']).len();
        self.out.truncate(keep);
    }

    fn text(&mut self, s: &str) {
        for c in s.chars() {
            if c == '\n' {
                self.trim_trailing_spaces();
                self.out.push('\n');
                self.line_start = true;
            } else {
                if self.line_start && !c.is_whitespace() {
                    for _ in 0..self.level {
                        self.out.push_str(&self.unit);
                    }
                    self.line_start = false;
                }
                self.out.push(c);
            }
        }
    }

    fn run(&mut self, program: &[WsItem], token: usize) {
        for item in program {
            match item {
                WsItem::Text(s) => self.text(s),
                WsItem::IncIndent => self.level += 1,
                WsItem::DecIndent if self.level == 0 => self
                    .warnings
                    .push(format!("indentation would drop below zero before token {token}")),
                WsItem::DecIndent => self.level -= 1,
            }
        }
    }
}

/// Re-emit the tokens of `tree` with whitespace taken from `store`.
pub fn format(tree: &ParseTree, store: &AnnotationStore) -> Result<Formatted, FormatError> {
    let unit = match store.value(store.root(), "indentUnit") {
        None => DEFAULT_INDENT_UNIT.to_string(),
        Some(Value::Str(s)) => s.clone(),
        Some(_) => return Err(FormatError::IndentUnit),
    };
    let mut e = Emitter {
        out: String::new(),
        level: 0,
        unit,
        line_start: false,
        warnings: Vec::new(),
    };
    let mut pending_after = Vec::new();
    for (k, leaf) in tree.leaves().into_iter().enumerate() {
        let (before, after) = effective_whitespace(tree, leaf, store)?;
        e.run(&pending_after, k);
        e.run(&before, k);
        e.text(&tree.tokens[k].text);
        pending_after = after;
    }
    e.run(&pending_after, tree.tokens.len());
    e.trim_trailing_spaces();
    let ends_with_newline = e.out.ends_with('\n');
    let keep = e.out.trim_end_matches(['\n', ' ', '\t']).len();
    e.out.truncate(keep);
    if ends_with_newline {
        e.out.push('\n');
    }
    Ok(Formatted {
        text: e.out,
        indent_level: e.level,
        warnings: e.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotations::parse_annotation;
    use crate::aspect::{parse_aspect, weave};
    use crate::grammar::parse_grammar;
    use crate::runtime::{parse_input, tokenize, LexerSpec};

    fn seq(items: Vec<Value>) -> Value {
        Value::Seq(items)
    }

    #[test]
    fn decoding() {
        let v = seq(vec![Value::Str("\n".into()), Value::Name("increaseIndent".into())]);
        assert_eq!(
            decode_whitespace(&v).unwrap(),
            [WsItem::Text("\n".into()), WsItem::IncIndent]
        );
        assert_eq!(decode_whitespace(&Value::Str(String::new())).unwrap(), [WsItem::Text(String::new())]);
        assert!(decode_whitespace(&seq(vec![Value::Int(3)])).is_err());
        assert!(decode_whitespace(&seq(vec![Value::Name("sideways".into())])).is_err());
        assert!(decode_whitespace(&Value::Int(1)).is_err());
    }

    fn run(grammar: &str, aspect: &str, lexer: &str, start: &str, input: &str) -> Formatted {
        let g = parse_grammar(grammar).unwrap();
        let a = parse_aspect(aspect).unwrap();
        let store = weave(&g, &[a]).unwrap();
        let spec = LexerSpec::parse(lexer).unwrap();
        let toks = tokenize(&spec, &g, input).unwrap();
        let tree = parse_input(&g, start, &toks).unwrap();
        format(&tree, &store).unwrap()
    }

    #[test]
    fn identity_without_annotations() {
        let f = run("a : X ;", "", "X = /x+/\nskip = /\\s+/", "a", "  xxx ");
        assert_eq!(f.text, "xxx");
    }

    #[test]
    fn lazy_indent_and_underflow() {
        let grammar = "b : '{' X* '}' ;";
        let aspect = "{ defaultAfter = {{ ' ' }}; }\n\
                      b : '{' X* '}'\n\
                      \t@'{': { after = {{ '\\n' increaseIndent }} } ;\n\
                      \t@X: { after = {{ '\\n' }} } ;\n\
                      \t@'}': { before = {{ decreaseIndent }} } ;\n";
        let f = run(grammar, aspect, "X = /x/\nskip = /\\s+/", "b", "{ x x }");
        assert_eq!(f.text, "{\n    x\n    x\n}");
        assert_eq!(f.indent_level, 0);
        assert!(f.warnings.is_empty());

        let f = run("b : X ;", "b : X @X: { before = {{ decreaseIndent }} } ;", "X = /x/", "b", "x");
        assert_eq!(f.text, "x");
        assert_eq!(f.warnings.len(), 1);
    }

    #[test]
    fn indent_unit_from_grammar_annotation() {
        let aspect = "{ indentUnit = '\\t'; }\nb : X @X: { before = {{ increaseIndent '\\n' }} } ;";
        let f = run("b : X ;", aspect, "X = /x/", "b", "x");
        assert_eq!(f.text, "\n\tx");
        assert!(parse_annotation("{ indentUnit = 2; }").is_ok());
    }
}
