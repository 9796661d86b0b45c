use super::ast::{Expr, ExprKind, Production, Rule};
use super::{GrammarError, GrammarTree, IterKind};
use crate::syntax::{SyntaxError, Tok, TokenStream};

/// Parse grammar text into a [`GrammarTree`].
///
/// ```text
/// rule   : NAME (':' alt)+ ';'
/// alt    : seq ('|' seq)*
/// seq    : item+
/// item   : atom ('*' | '+' | '?')?
/// atom   : '(' alt ')' | NAME | STRING | '#empty'
/// ```
pub fn parse_grammar(text: &str) -> Result<GrammarTree, GrammarError> {
    let mut ts = TokenStream::new(text)?;
    let mut rules = Vec::new();
    while *ts.peek() != Tok::Eof {
        rules.push(parse_rule(&mut ts)?);
    }
    GrammarTree::from_rules(rules)
}

fn parse_rule(ts: &mut TokenStream<'_>) -> Result<Rule, SyntaxError> {
    let (name, start) = ts.expect_name("a rule name")?;
    let mut productions = Vec::new();
    loop {
        match ts.peek() {
            Tok::Colon => {
                let colon = ts.bump();
                let body = parse_alt(ts)?;
                productions.push(Production {
                    body,
                    span: colon.start..ts.prev_end(),
                });
            }
            Tok::Semi if !productions.is_empty() => {
                ts.bump();
                break;
            }
            _ if productions.is_empty() => return Err(ts.unexpected("`:`")),
            _ => return Err(ts.unexpected("`;`")),
        }
    }
    Ok(Rule {
        name,
        productions,
        span: start..ts.prev_end(),
    })
}

pub(crate) fn parse_alt(ts: &mut TokenStream<'_>) -> Result<Expr, SyntaxError> {
    let start = ts.offset();
    let mut members = vec![parse_seq(ts)?];
    while ts.eat(&Tok::Pipe) {
        members.push(parse_seq(ts)?);
    }
    Ok(Expr {
        kind: ExprKind::Alternative(members),
        span: start..ts.prev_end(),
    }
    .normalized())
}

fn starts_atom(tok: &Tok) -> bool {
    matches!(
        tok,
        Tok::LParen | Tok::Name(_) | Tok::Str(_) | Tok::HashEmpty
    )
}

fn parse_seq(ts: &mut TokenStream<'_>) -> Result<Expr, SyntaxError> {
    let start = ts.offset();
    let mut items = Vec::new();
    while starts_atom(ts.peek()) {
        items.push(parse_item(ts)?);
    }
    if items.is_empty() {
        return Err(ts.unexpected("a symbol, literal, `#empty` or `(`"));
    }
    Ok(Expr {
        kind: ExprKind::Sequence(items),
        span: start..ts.prev_end(),
    }
    .normalized())
}

fn parse_item(ts: &mut TokenStream<'_>) -> Result<Expr, SyntaxError> {
    let start = ts.offset();
    let atom = parse_atom(ts)?;
    let kind = match ts.peek() {
        Tok::Star => IterKind::Star,
        Tok::Plus => IterKind::Plus,
        Tok::Question => IterKind::Opt,
        _ => return Ok(atom),
    };
    ts.bump();
    Ok(Expr {
        kind: ExprKind::Iteration(Box::new(atom), kind),
        span: start..ts.prev_end(),
    })
}

fn parse_atom(ts: &mut TokenStream<'_>) -> Result<Expr, SyntaxError> {
    let tok = ts.peek_token().clone();
    let kind = match tok.tok {
        Tok::LParen => {
            ts.bump();
            let inner = parse_alt(ts)?;
            ts.expect(&Tok::RParen, "`)`")?;
            // grouping is structural only
            return Ok(inner);
        }
        Tok::Name(name) => ExprKind::Ref(name),
        Tok::Str(text) => {
            if text.is_empty() {
                return Err(ts.error_at(tok.start, "empty literal ''"));
            }
            ExprKind::Literal(text)
        }
        Tok::HashEmpty => ExprKind::Empty,
        _ => return Err(ts.unexpected("a symbol, literal, `#empty` or `(`")),
    };
    ts.bump();
    Ok(Expr {
        kind,
        span: tok.start..tok.end,
    })
}
