use std::collections::BTreeMap;

use super::{
    AlternativesRest, ExprPattern, PatternError, ProductionPattern, ProductionsPattern,
    RulePattern, SubPattern, SymbolPattern, VarKind,
};
use crate::grammar::IterKind;
use crate::syntax::{line_col, Tok, TokenStream};

/// Parse a standalone rule pattern such as `# : term ..` or `expr : {...} ;`.
pub fn parse_rule_pattern(text: &str) -> Result<RulePattern, PatternError> {
    let mut ts = TokenStream::new(text)?;
    let p = parse_rule_pattern_from(&mut ts)?;
    ts.eat(&Tok::Semi);
    if *ts.peek() != Tok::Eof {
        return Err(ts.unexpected("end of pattern").into());
    }
    Ok(p)
}

/// Parse a standalone subpattern: a production pattern (`: ...`) or an
/// alternative pattern such as `#lex` or `'?'`.
pub fn parse_subpattern(text: &str) -> Result<SubPattern, PatternError> {
    let mut ts = TokenStream::new(text)?;
    let p = parse_subpattern_from(&mut ts)?;
    if *ts.peek() != Tok::Eof {
        return Err(ts.unexpected("end of pattern").into());
    }
    Ok(p)
}

pub(crate) fn parse_rule_pattern_from(ts: &mut TokenStream<'_>) -> Result<RulePattern, PatternError> {
    let mut vars = VarScope::new(ts.src);
    let start = ts.offset();
    let var = parse_var(ts)?;
    let symbol = match ts.peek().clone() {
        Tok::Hash => SymbolPattern::Any,
        Tok::Name(n) => SymbolPattern::Named(n),
        _ => return Err(ts.unexpected("`#` or a symbol name").into()),
    };
    ts.bump();
    if let Some((name, offset)) = &var {
        vars.define(name, VarKind::Symbol, *offset)?;
    }

    let mut list = Vec::new();
    let mut any = None;
    while starts_production_pattern(ts) {
        if any.is_some() {
            return Err(ts
                .error_at(ts.offset(), "`{...}` must be the only production pattern")
                .into());
        }
        match parse_production_pattern(ts, &mut vars)? {
            Production::Any(var) => {
                if !list.is_empty() {
                    return Err(ts
                        .error_at(ts.prev_end(), "`{...}` must be the only production pattern")
                        .into());
                }
                any = Some(var);
            }
            Production::Pattern(p) => list.push(p),
        }
    }
    let productions = match any {
        Some(var) => ProductionsPattern::Any { var },
        None if list.is_empty() => return Err(ts.unexpected("`:`").into()),
        None => ProductionsPattern::List(list),
    };
    Ok(RulePattern {
        var: var_name(var),
        symbol,
        productions,
        span: start..ts.prev_end(),
    })
}

fn var_name(v: Option<(String, usize)>) -> Option<String> {
    v.map(|(n, _)| n)
}

pub(crate) fn parse_subpattern_from(ts: &mut TokenStream<'_>) -> Result<SubPattern, PatternError> {
    let mut vars = VarScope::new(ts.src);
    if starts_production_pattern(ts) {
        match parse_production_pattern(ts, &mut vars)? {
            Production::Pattern(p) => Ok(SubPattern::Production(p)),
            Production::Any(_) => Err(ts
                .error_at(ts.prev_end(), "`{...}` is only allowed in rule patterns")
                .into()),
        }
    } else {
        Ok(SubPattern::Expr(parse_alternative(ts, &mut vars)?))
    }
}

enum Production {
    Any(Option<String>),
    Pattern(ProductionPattern),
}

fn starts_production_pattern(ts: &TokenStream<'_>) -> bool {
    match ts.peek() {
        Tok::Colon => true,
        Tok::Dollar => {
            matches!(ts.peek_nth(1), Tok::Name(_))
                && *ts.peek_nth(2) == Tok::Eq
                && *ts.peek_nth(3) == Tok::Colon
        }
        _ => false,
    }
}

fn parse_production_pattern(
    ts: &mut TokenStream<'_>,
    vars: &mut VarScope<'_>,
) -> Result<Production, PatternError> {
    let var = parse_var(ts)?;
    ts.expect(&Tok::Colon, "`:`")?;
    let inner_var_start = ts.offset();
    let inner_var = if *ts.peek() == Tok::Dollar
        && *ts.peek_nth(3) == Tok::LBrace
        && *ts.peek_nth(4) == Tok::Ellipsis
    {
        parse_var(ts)?
    } else {
        None
    };
    if *ts.peek() == Tok::LBrace && *ts.peek_nth(1) == Tok::Ellipsis {
        ts.bump();
        ts.bump();
        ts.expect(&Tok::RBrace, "`}` closing `{...}`")?;
        if let Some((name, offset)) = var {
            return Err(ts
                .error_at(offset, format!("put `${name}=` after the `:` of `{{...}}`"))
                .into());
        }
        if let Some((name, offset)) = &inner_var {
            vars.define(name, VarKind::Multi, *offset)?;
        }
        return Ok(Production::Any(var_name(inner_var)));
    }
    if inner_var.is_some() {
        return Err(ts.error_at(inner_var_start, "expected `{...}` after variable").into());
    }
    let body = parse_alternative(ts, vars)?;
    if let Some((name, offset)) = &var {
        vars.define(name, VarKind::Structural, *offset)?;
    }
    Ok(Production::Pattern(ProductionPattern {
        var: var_name(var),
        body,
    }))
}

/// `'$' NAME '='`, when present.
fn parse_var(ts: &mut TokenStream<'_>) -> Result<Option<(String, usize)>, PatternError> {
    if *ts.peek() == Tok::Dollar && *ts.peek_nth(2) == Tok::Eq {
        let start = ts.bump().start;
        let (name, _) = ts.expect_name("a variable name")?;
        ts.expect(&Tok::Eq, "`=`")?;
        Ok(Some((name, start)))
    } else {
        Ok(None)
    }
}

fn is_rest(ts: &TokenStream<'_>) -> bool {
    match ts.peek() {
        Tok::Ellipsis => true,
        Tok::Dollar => *ts.peek_nth(2) == Tok::Eq && *ts.peek_nth(3) == Tok::Ellipsis,
        _ => false,
    }
}

fn parse_alternative(
    ts: &mut TokenStream<'_>,
    vars: &mut VarScope<'_>,
) -> Result<ExprPattern, PatternError> {
    let mut members = vec![parse_sequence(ts, vars)?];
    let mut rest = None;
    while ts.eat(&Tok::Pipe) {
        if rest.is_some() {
            return Err(ts
                .error_at(ts.prev_end() - 1, "`...` must be the last alternative")
                .into());
        }
        if is_rest(ts) {
            let var = parse_var(ts)?;
            ts.expect(&Tok::Ellipsis, "`...`")?;
            if let Some((name, offset)) = &var {
                vars.define(name, VarKind::Multi, *offset)?;
            }
            rest = Some(AlternativesRest {
                var: var_name(var),
            });
        } else {
            members.push(parse_sequence(ts, vars)?);
        }
    }
    if rest.is_none() && members.len() == 1 {
        return Ok(members.pop().expect("one member"));
    }
    Ok(ExprPattern::Alternative { members, rest })
}

fn starts_item(ts: &TokenStream<'_>) -> bool {
    match ts.peek() {
        Tok::LParen
        | Tok::Name(_)
        | Tok::Hash
        | Tok::Str(_)
        | Tok::HashEmpty
        | Tok::DotDot
        | Tok::HashLex => true,
        Tok::Dollar => {
            // `$v.attr` / `$v{...}` is an advice, `$v=:` starts a production pattern
            match ts.peek_nth(2) {
                Tok::Dot | Tok::LBrace => false,
                Tok::Eq => *ts.peek_nth(3) != Tok::Colon && *ts.peek_nth(3) != Tok::Ellipsis,
                _ => true,
            }
        }
        _ => false,
    }
}

fn parse_sequence(
    ts: &mut TokenStream<'_>,
    vars: &mut VarScope<'_>,
) -> Result<ExprPattern, PatternError> {
    let mut items = Vec::new();
    while starts_item(ts) {
        items.push(parse_item(ts, vars)?);
    }
    match items.len() {
        0 if *ts.peek() == Tok::Ellipsis => Err(ts
            .error_at(
                ts.offset(),
                "`...` is only allowed as the last member of an alternative pattern",
            )
            .into()),
        0 => Err(ts.unexpected("a pattern").into()),
        1 => Ok(items.pop().expect("one item")),
        _ => Ok(ExprPattern::Sequence(items)),
    }
}

fn parse_item(
    ts: &mut TokenStream<'_>,
    vars: &mut VarScope<'_>,
) -> Result<ExprPattern, PatternError> {
    let var = parse_var(ts)?;
    let atom = parse_atom(ts, vars)?;
    let kind = match ts.peek() {
        Tok::Star => Some(IterKind::Star),
        Tok::Plus => Some(IterKind::Plus),
        Tok::Question => Some(IterKind::Opt),
        _ => None,
    };
    let item = match kind {
        Some(k) => {
            ts.bump();
            ExprPattern::Iteration(Box::new(atom), k)
        }
        None => atom,
    };
    Ok(match var {
        Some((name, offset)) => {
            let kind = match &item {
                ExprPattern::AnySymbol | ExprPattern::Symbol(_) => VarKind::Symbol,
                ExprPattern::AnySequence => VarKind::Multi,
                _ => VarKind::Structural,
            };
            vars.define(&name, kind, offset)?;
            ExprPattern::VarDef(name, Box::new(item))
        }
        None => item,
    })
}

fn parse_atom(
    ts: &mut TokenStream<'_>,
    vars: &mut VarScope<'_>,
) -> Result<ExprPattern, PatternError> {
    let tok = ts.peek_token().clone();
    let atom = match tok.tok {
        Tok::LParen => {
            ts.bump();
            let inner = parse_alternative(ts, vars)?;
            ts.expect(&Tok::RParen, "`)`")?;
            return Ok(inner);
        }
        Tok::Name(n) => ExprPattern::Symbol(n),
        Tok::Hash => ExprPattern::AnySymbol,
        Tok::Str(s) => {
            if s.is_empty() {
                return Err(ts.error_at(tok.start, "empty literal ''").into());
            }
            ExprPattern::Literal(s)
        }
        Tok::HashEmpty => ExprPattern::Empty,
        Tok::DotDot => ExprPattern::AnySequence,
        Tok::HashLex => ExprPattern::AnyLex,
        Tok::Dollar => {
            ts.bump();
            let (name, _) = ts.expect_name("a variable name")?;
            vars.reference(&name, tok.start)?;
            return Ok(ExprPattern::VarRef(name));
        }
        _ => return Err(ts.unexpected("a pattern").into()),
    };
    ts.bump();
    Ok(atom)
}

/// Tracks variables defined so far within one rule pattern or subpattern.
struct VarScope<'a> {
    src: &'a str,
    defined: BTreeMap<String, VarKind>,
}

impl<'a> VarScope<'a> {
    fn new(src: &'a str) -> Self {
        VarScope {
            src,
            defined: BTreeMap::new(),
        }
    }

    fn define(&mut self, name: &str, kind: VarKind, offset: usize) -> Result<(), PatternError> {
        if self.defined.insert(name.to_string(), kind).is_some() {
            let (line, column) = line_col(self.src, offset);
            return Err(PatternError::DuplicateVariable {
                name: name.to_string(),
                offset,
                line,
                column,
            });
        }
        Ok(())
    }

    fn reference(&self, name: &str, offset: usize) -> Result<(), PatternError> {
        let (line, column) = line_col(self.src, offset);
        match self.defined.get(name) {
            None => Err(PatternError::UnresolvedVariable {
                name: name.to_string(),
                offset,
                line,
                column,
            }),
            Some(VarKind::Multi) => Err(PatternError::MultiNodeReference {
                name: name.to_string(),
                offset,
                line,
                column,
            }),
            Some(_) => Ok(()),
        }
    }
}
