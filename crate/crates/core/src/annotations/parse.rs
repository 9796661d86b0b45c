use super::{key_text, Annotation, AnnotationError, Attribute, Value};
use crate::syntax::{line_col, Tok, TokenStream};

/// Parse advice text: `{ attr; attr; ... }` or the single-attribute shorthand `.attr`.
///
/// ```text
/// annotation : '{' (attribute (';' attribute?)*)? '}' | '.' attribute
/// attribute  : (NAME ':')? NAME ('=' value)?
/// value      : INT | STRING | NAME | annotation | '{{' (value | punctuation)* '}}' | punctuation
/// ```
pub fn parse_annotation(text: &str) -> Result<Annotation, AnnotationError> {
    let mut ts = TokenStream::new(text)?;
    let a = parse_annotation_from(&mut ts)?;
    if *ts.peek() != Tok::Eof {
        return Err(ts.unexpected("end of annotation").into());
    }
    Ok(a)
}

pub(crate) fn parse_annotation_from(ts: &mut TokenStream<'_>) -> Result<Annotation, AnnotationError> {
    let mut attributes: Vec<Attribute> = Vec::new();
    let mut push = |ts: &TokenStream<'_>, attr: Attribute, offset: usize| {
        if attributes.iter().any(|a| a.matches(attr.namespace.as_deref(), &attr.name)) {
            let (line, column) = line_col(ts.src, offset);
            return Err(AnnotationError::DuplicateAttribute {
                key: key_text(attr.namespace.as_deref(), &attr.name),
                offset,
                line,
                column,
            });
        }
        attributes.push(attr);
        Ok(())
    };
    match ts.peek() {
        Tok::Dot => {
            ts.bump();
            let at = ts.offset();
            let attr = parse_attribute(ts)?;
            push(ts, attr, at)?;
        }
        Tok::LBrace => {
            ts.bump();
            if *ts.peek() != Tok::RBrace {
                let at = ts.offset();
                let attr = parse_attribute(ts)?;
                push(ts, attr, at)?;
                while ts.eat(&Tok::Semi) {
                    if matches!(ts.peek(), Tok::Name(_)) {
                        let at = ts.offset();
                        let attr = parse_attribute(ts)?;
                        push(ts, attr, at)?;
                    }
                }
            }
            ts.expect(&Tok::RBrace, "`;` or `}`")?;
        }
        _ => return Err(ts.unexpected("`{` or `.`").into()),
    }
    Ok(Annotation { attributes })
}

fn parse_attribute(ts: &mut TokenStream<'_>) -> Result<Attribute, AnnotationError> {
    let (first, _) = ts.expect_name("an attribute name")?;
    let (namespace, name) = if ts.eat(&Tok::Colon) {
        let (name, _) = ts.expect_name("an attribute name after the namespace")?;
        (Some(first), name)
    } else {
        (None, first)
    };
    let value = if ts.eat(&Tok::Eq) {
        Some(parse_value(ts)?)
    } else {
        None
    };
    Ok(Attribute {
        namespace,
        name,
        value,
    })
}

fn opens_sequence(ts: &TokenStream<'_>) -> bool {
    *ts.peek() == Tok::LBrace && *ts.peek_nth(1) == Tok::LBrace && ts.next_is_adjacent()
}

fn closes_sequence(ts: &TokenStream<'_>) -> bool {
    *ts.peek() == Tok::RBrace && *ts.peek_nth(1) == Tok::RBrace && ts.next_is_adjacent()
}

fn parse_value(ts: &mut TokenStream<'_>) -> Result<Value, AnnotationError> {
    let value = match ts.peek().clone() {
        Tok::Int(i) => Value::Int(i),
        Tok::Str(s) => Value::Str(s),
        Tok::Name(n) => Value::Name(n),
        Tok::LBrace if opens_sequence(ts) => return parse_sequence(ts),
        Tok::LBrace => return Ok(Value::Record(parse_annotation_from(ts)?)),
        Tok::Dot if matches!(ts.peek_nth(1), Tok::Name(_)) => {
            return Ok(Value::Record(parse_annotation_from(ts)?))
        }
        // `;` always separates attributes
        Tok::Semi => return Err(ts.unexpected("a value").into()),
        other => match other.as_punctuation().as_deref() {
            Some(&[c]) => Value::Punct(c),
            _ => return Err(ts.unexpected("a value").into()),
        },
    };
    ts.bump();
    Ok(value)
}

fn parse_sequence(ts: &mut TokenStream<'_>) -> Result<Value, AnnotationError> {
    ts.bump();
    ts.bump();
    let mut items = Vec::new();
    loop {
        if closes_sequence(ts) {
            ts.bump();
            ts.bump();
            return Ok(Value::Seq(items));
        }
        let tok = ts.peek().clone();
        match tok {
            Tok::Int(_) | Tok::Str(_) | Tok::Name(_) | Tok::LBrace => items.push(parse_value(ts)?),
            Tok::HashLex | Tok::HashEmpty => {
                // `#lex` inside a sequence is `#` followed by the name `lex`
                items.push(Value::Punct('#'));
                let word = if tok == Tok::HashLex { "lex" } else { "empty" };
                items.push(Value::Name(word.into()));
                ts.bump();
            }
            Tok::Eof => return Err(ts.unexpected("`}}` closing the sequence").into()),
            other => match other.as_punctuation() {
                Some(chars) => {
                    items.extend(chars.into_iter().map(Value::Punct));
                    ts.bump();
                }
                None => return Err(ts.unexpected("a value, punctuation or `}}`").into()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn name(n: &str) -> Value {
        Value::Name(n.into())
    }

    #[test]
    fn single_group() {
        let a = parse_annotation("{ group = keyword }").unwrap();
        assert_eq!(a.attributes, [Attribute::new("group", Some(name("keyword")))]);
        assert_eq!(parse_annotation(".group = keyword").unwrap(), a);
    }

    #[test]
    fn whitespace_sequences() {
        let a = parse_annotation("{ after = {{ '\\n' increaseIndent }} }").unwrap();
        assert_eq!(
            a.attributes[0].value,
            Some(Value::Seq(vec![Value::Str("\n".into()), name("increaseIndent")]))
        );
        let a = parse_annotation("{ x = {{}}; y = {{ }} }").unwrap();
        assert_eq!(a.attributes[0].value, Some(Value::Seq(vec![])));
        assert_eq!(a.attributes[1].value, Some(Value::Seq(vec![])));
    }

    #[test]
    fn value_table() {
        let a = parse_annotation(
            "{ int = 10; str = 'Hello'; id = SomeName; rec = {b = c; d = 5}; seq = {{1, a b 'str'}} }",
        )
        .unwrap();
        let v: Vec<_> = a.attributes.iter().map(|a| a.value.clone().unwrap()).collect();
        assert_eq!(v[0], Value::Int(10));
        assert_eq!(v[1], Value::Str("Hello".into()));
        assert_eq!(v[2], name("SomeName"));
        assert_eq!(
            v[3],
            Value::Record(Annotation {
                attributes: vec![
                    Attribute::new("b", Some(name("c"))),
                    Attribute::new("d", Some(Value::Int(5)))
                ]
            })
        );
        assert_eq!(
            v[4],
            Value::Seq(vec![
                Value::Int(1),
                Value::Punct(','),
                name("a"),
                name("b"),
                Value::Str("str".into())
            ])
        );
    }

    #[test]
    fn empty_flags_and_namespaces() {
        assert!(parse_annotation("{}").unwrap().is_empty());
        let a = parse_annotation("{ hl:group = keyword; folded; ; }").unwrap();
        assert_eq!(a.attributes[0].namespace.as_deref(), Some("hl"));
        assert_eq!(a.attributes[1].value, None);
        assert_eq!(a.attributes.len(), 2);
    }

    #[test]
    fn punctuation_in_sequences() {
        let a = parse_annotation("{ p = {{ ( ) ... : # ? <> }} }").unwrap();
        let Some(Value::Seq(items)) = &a.attributes[0].value else {
            panic!()
        };
        let chars: String = items
            .iter()
            .map(|v| match v {
                Value::Punct(c) => *c,
                other => panic!("{other:?}"),
            })
            .collect();
        assert_eq!(chars, "()...:#?<>");
        assert!(parse_annotation("{ p = {{ * }} }").is_err());
        assert_eq!(
            parse_annotation("{ sep = , }").unwrap().attributes[0].value,
            Some(Value::Punct(','))
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_annotation("{ a = 1; a = 2 }"),
            Err(AnnotationError::DuplicateAttribute { key, .. }) if key == "a"
        ));
        // same name in different namespaces is fine
        assert!(parse_annotation("{ a = 1; x:a = 2 }").is_ok());
        assert!(parse_annotation("{ a = 1 b = 2 }").is_err());
        assert!(parse_annotation("{ a = {{ 1 }").is_err());
        assert!(parse_annotation("{ a = '\\q' }").is_err());
    }

    #[test]
    fn display_reparses() {
        for src in [
            "{ group = keyword }",
            "{ after = {{ '\\n' increaseIndent }}; x; n:y = {a = {{ }}} }",
            "{ s = {{ 1 , 'x' {b = c} {{ . }} }} }",
        ] {
            let a = parse_annotation(src).unwrap();
            assert_eq!(parse_annotation(&a.to_string()).unwrap(), a, "{a}");
        }
    }
}
