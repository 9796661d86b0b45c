//! Aspects: an optional grammar annotation followed by annotation rules that
//! pair a rule pattern with subpatterns and variable annotations.
//!
//! ```text
//! aspect            : grammarAnnotation? annotationRule*
//! annotationRule    : multiplicity? rulePattern subrules
//! subrules          : (subpattern | variableAnnotation)*
//! subpattern        : '@' multiplicity? (productionPattern | alternativePattern) ':'
//!                       (subrules | annotation)
//! variableAnnotation: '$' NAME annotation
//! multiplicity      : '[' intOrInfinity ('..' intOrInfinity)? ']'
//! ```
//!
//! Each subpattern with an annotation body and each variable annotation may
//! be followed by one `;`. A block of nested subrules ends at a bare `;` or
//! at the first token that cannot start another subrule.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::annotations::{parse_annotation_from, Annotation, AnnotationError};
use crate::pattern::{
    parse_rule_pattern_from, parse_subpattern_from, PatternError, RulePattern, SubPattern, VarKind,
};
use crate::syntax::{line_col, SyntaxError, Tok, TokenStream};

mod weave;

pub use weave::{check_multiplicity, weave, WeaveDiagnostic, WeaveError};

/// Allowed number of matches; `max == None` is unbounded.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Multiplicity {
    pub min: u64,
    pub max: Option<u64>,
}

impl Default for Multiplicity {
    /// `[1..*]`: one or more.
    fn default() -> Self {
        Multiplicity { min: 1, max: None }
    }
}

impl Multiplicity {
    pub fn new(min: u64, max: Option<u64>) -> Self {
        Multiplicity { min, max }
    }

    pub fn contains(&self, count: u64) -> bool {
        self.min <= count && self.max.map_or(true, |m| count <= m)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(m) => write!(f, "[{}..{m}]", self.min),
            None => write!(f, "[{}..*]", self.min),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Aspect {
    pub grammar_annotation: Option<Annotation>,
    pub rules: Vec<AnnotationRule>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotationRule {
    pub multiplicity: Multiplicity,
    pub pattern: RulePattern,
    /// The pattern exactly as written, for diagnostics.
    pub pattern_text: String,
    /// Byte range of the pattern in the aspect source.
    pub span: Range<usize>,
    pub subrules: Vec<SubRule>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubRule {
    Subpattern(Subpattern),
    Variable(VariableAnnotation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subpattern {
    pub multiplicity: Multiplicity,
    pub pattern: SubPattern,
    pub pattern_text: String,
    pub span: Range<usize>,
    pub body: SubpatternBody,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubpatternBody {
    Subrules(Vec<SubRule>),
    /// Attached to every node the subpattern matches.
    Annotation(Annotation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableAnnotation {
    pub var: String,
    pub annotation: Annotation,
    pub span: Range<usize>,
}

/// A problem in aspect text, located in that text.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{column}: {message}")]
pub struct AspectError {
    pub message: String,
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl AspectError {
    fn at(src: &str, offset: usize, message: impl Into<String>) -> Self {
        let (line, column) = line_col(src, offset);
        AspectError {
            message: message.into(),
            offset,
            line,
            column,
        }
    }
}

impl From<SyntaxError> for AspectError {
    fn from(e: SyntaxError) -> Self {
        AspectError {
            message: e.message,
            offset: e.offset,
            line: e.line,
            column: e.column,
        }
    }
}

impl From<PatternError> for AspectError {
    fn from(e: PatternError) -> Self {
        let (message, offset, line, column) = match e {
            PatternError::Syntax(s) => return s.into(),
            PatternError::DuplicateVariable {
                name,
                offset,
                line,
                column,
            } => (format!("variable `${name}` is defined more than once"), offset, line, column),
            PatternError::UnresolvedVariable {
                name,
                offset,
                line,
                column,
            } => (format!("variable `${name}` is not defined before this use"), offset, line, column),
            PatternError::MultiNodeReference {
                name,
                offset,
                line,
                column,
            } => (
                format!("variable `${name}` binds several nodes and cannot be referenced"),
                offset,
                line,
                column,
            ),
        };
        AspectError {
            message,
            offset,
            line,
            column,
        }
    }
}

impl From<AnnotationError> for AspectError {
    fn from(e: AnnotationError) -> Self {
        match e {
            AnnotationError::Syntax(s) => s.into(),
            AnnotationError::DuplicateAttribute {
                key,
                offset,
                line,
                column,
            } => AspectError {
                message: format!("attribute `{key}` is given more than once"),
                offset,
                line,
                column,
            },
        }
    }
}

/// Parse aspect source text.
pub fn parse_aspect(text: &str) -> Result<Aspect, AspectError> {
    let mut ts = TokenStream::new(text)?;
    let mut aspect = Aspect::default();
    if matches!(ts.peek(), Tok::LBrace | Tok::Dot) {
        aspect.grammar_annotation = Some(parse_annotation_from(&mut ts)?);
        ts.eat(&Tok::Semi);
    }
    while *ts.peek() != Tok::Eof {
        aspect.rules.push(parse_rule(&mut ts)?);
    }
    Ok(aspect)
}

type Scopes = Vec<BTreeMap<String, VarKind>>;

fn parse_rule(ts: &mut TokenStream<'_>) -> Result<AnnotationRule, AspectError> {
    let multiplicity = parse_multiplicity(ts)?;
    let start = ts.offset();
    let pattern = parse_rule_pattern_from(ts)?;
    let span = start..ts.prev_end();
    let mut scopes = vec![pattern.variables()];
    let subrules = parse_subrules(ts, &mut scopes)?;
    Ok(AnnotationRule {
        multiplicity,
        pattern,
        pattern_text: ts.src[span.clone()].to_string(),
        span,
        subrules,
    })
}

/// True if the cursor is at `$NAME.` or `$NAME{`.
fn at_variable_annotation(ts: &TokenStream<'_>) -> bool {
    *ts.peek() == Tok::Dollar
        && matches!(ts.peek_nth(1), Tok::Name(_))
        && matches!(ts.peek_nth(2), Tok::Dot | Tok::LBrace)
}

fn parse_subrules(ts: &mut TokenStream<'_>, scopes: &mut Scopes) -> Result<Vec<SubRule>, AspectError> {
    let mut items = Vec::new();
    loop {
        if *ts.peek() == Tok::At {
            items.push(SubRule::Subpattern(parse_subpattern_item(ts, scopes)?));
        } else if at_variable_annotation(ts) {
            let start = ts.bump().start;
            let (var, _) = ts.expect_name("a variable name")?;
            if !scopes.iter().any(|s| s.contains_key(&var)) {
                return Err(AspectError::at(
                    ts.src,
                    start,
                    format!("variable `${var}` is not defined by the enclosing patterns"),
                ));
            }
            let annotation = parse_annotation_from(ts)?;
            let span = start..ts.prev_end();
            ts.eat(&Tok::Semi);
            items.push(SubRule::Variable(VariableAnnotation {
                var,
                annotation,
                span,
            }));
        } else {
            // a bare `;` closes the block
            ts.eat(&Tok::Semi);
            return Ok(items);
        }
    }
}

fn parse_subpattern_item(ts: &mut TokenStream<'_>, scopes: &mut Scopes) -> Result<Subpattern, AspectError> {
    ts.expect(&Tok::At, "`@`")?;
    let multiplicity = parse_multiplicity(ts)?;
    let start = ts.offset();
    let pattern = parse_subpattern_from(ts)?;
    let span = start..ts.prev_end();
    ts.expect(&Tok::Colon, "`:` after the subpattern")?;
    let body = if matches!(ts.peek(), Tok::LBrace | Tok::Dot) {
        let a = parse_annotation_from(ts)?;
        ts.eat(&Tok::Semi);
        SubpatternBody::Annotation(a)
    } else {
        scopes.push(pattern.variables());
        let items = parse_subrules(ts, scopes);
        scopes.pop();
        SubpatternBody::Subrules(items?)
    };
    Ok(Subpattern {
        multiplicity,
        pattern,
        pattern_text: ts.src[span.clone()].to_string(),
        span,
        body,
    })
}

fn parse_multiplicity(ts: &mut TokenStream<'_>) -> Result<Multiplicity, AspectError> {
    if *ts.peek() != Tok::LBracket {
        return Ok(Multiplicity::default());
    }
    let open = ts.bump().start;
    let bound = |ts: &mut TokenStream<'_>| -> Result<Option<u64>, AspectError> {
        match ts.peek().clone() {
            Tok::Int(i) => {
                ts.bump();
                Ok(Some(i as u64))
            }
            Tok::Star => {
                ts.bump();
                Ok(None)
            }
            _ => Err(ts.unexpected("an integer or `*`").into()),
        }
    };
    let first_at = ts.offset();
    let first = bound(ts)?;
    let m = if ts.eat(&Tok::DotDot) {
        let Some(min) = first else {
            return Err(AspectError::at(ts.src, first_at, "lower bound must be an integer"));
        };
        Multiplicity::new(min, bound(ts)?)
    } else {
        match first {
            Some(n) => Multiplicity::new(n, Some(n)),
            None => Multiplicity::new(0, None),
        }
    };
    ts.expect(&Tok::RBracket, "`]`")?;
    if let Some(max) = m.max {
        if m.min > max {
            return Err(AspectError::at(ts.src, open, format!("empty multiplicity {m}")));
        }
    }
    Ok(m)
}
