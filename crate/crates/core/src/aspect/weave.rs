use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use thiserror::Error;

use super::{Aspect, Multiplicity, SubRule, SubpatternBody};
use crate::annotations::{Annotation, AnnotationStore, AttachError, Provenance};
use crate::grammar::{GrammarTree, NodeId};
use crate::pattern::{match_rules, match_within, MatchResult, VarKind};

pub fn check_multiplicity(count: usize, m: Multiplicity) -> bool {
    m.contains(count as u64)
}

/// A pattern matched a number of times outside its multiplicity.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("pattern `{pattern_text}` matched {actual}, expected {expected}")]
pub struct WeaveError {
    pub aspect: usize,
    pub rule: usize,
    pub pattern_text: String,
    /// Where the pattern is written in the aspect source.
    pub pattern_span: Range<usize>,
    pub expected: Multiplicity,
    pub actual: usize,
    /// Grammar spans of the nodes that did match.
    pub matched: Vec<Range<usize>>,
    /// For subpatterns: the grammar span of the enclosing match.
    pub within: Option<Range<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeaveDiagnostic {
    Multiplicity(WeaveError),
    Attach {
        aspect: usize,
        /// Source span of the advice whose attachment failed.
        advice_span: Option<Range<usize>>,
        error: AttachError,
    },
}

impl fmt::Display for WeaveDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeaveDiagnostic::Multiplicity(e) => write!(f, "{e}"),
            WeaveDiagnostic::Attach { error, .. } => write!(f, "{error}"),
        }
    }
}

impl WeaveDiagnostic {
    pub fn aspect(&self) -> usize {
        match self {
            WeaveDiagnostic::Multiplicity(e) => e.aspect,
            WeaveDiagnostic::Attach { aspect, .. } => *aspect,
        }
    }

    /// Offset in the aspect source this diagnostic points at.
    pub fn offset(&self) -> usize {
        match self {
            WeaveDiagnostic::Multiplicity(e) => e.pattern_span.start,
            WeaveDiagnostic::Attach { advice_span, .. } => {
                advice_span.as_ref().map_or(0, |s| s.start)
            }
        }
    }
}

/// Apply `aspects` to `grammar` in order.
///
/// For each aspect the grammar annotation goes onto the root, then each rule
/// is matched, its multiplicity checked, and for every match its subpatterns
/// are applied (recursively, multiplicity checked per enclosing match) before
/// its variable annotations. Errors are collected across all rules; a rule
/// whose multiplicity fails attaches nothing.
pub fn weave(grammar: &GrammarTree, aspects: &[Aspect]) -> Result<AnnotationStore, Vec<WeaveDiagnostic>> {
    let mut w = Weaver {
        grammar,
        store: AnnotationStore::new(grammar),
        errors: Vec::new(),
    };
    for (ai, aspect) in aspects.iter().enumerate() {
        if let Some(a) = &aspect.grammar_annotation {
            let prov = Provenance {
                aspect: ai,
                rule: None,
            };
            if let Err(error) = w.store.attach(grammar.root(), a, prov) {
                w.errors.push(WeaveDiagnostic::Attach {
                    aspect: ai,
                    advice_span: None,
                    error,
                });
            }
        }
        for (ri, rule) in aspect.rules.iter().enumerate() {
            let matches = match_rules(&rule.pattern, grammar);
            let prov = Provenance {
                aspect: ai,
                rule: Some(ri),
            };
            if !check_multiplicity(matches.len(), rule.multiplicity) {
                w.errors.push(WeaveDiagnostic::Multiplicity(WeaveError {
                    aspect: ai,
                    rule: ri,
                    pattern_text: rule.pattern_text.clone(),
                    pattern_span: rule.span.clone(),
                    expected: rule.multiplicity,
                    actual: matches.len(),
                    matched: w.spans(&matches),
                    within: None,
                }));
                continue;
            }
            let vars = rule.pattern.variables();
            for m in &matches {
                let scopes = [Scope {
                    vars: &vars,
                    bindings: &m.bindings,
                }];
                w.apply(&rule.subrules, m.matched, &scopes, prov);
            }
        }
    }
    if w.errors.is_empty() {
        Ok(w.store)
    } else {
        Err(w.errors)
    }
}

#[derive(Clone, Copy)]
struct Scope<'a> {
    vars: &'a BTreeMap<String, VarKind>,
    bindings: &'a BTreeMap<String, BTreeSet<NodeId>>,
}

struct Weaver<'g> {
    grammar: &'g GrammarTree,
    store: AnnotationStore,
    errors: Vec<WeaveDiagnostic>,
}

impl Weaver<'_> {
    fn spans(&self, ms: &[MatchResult]) -> Vec<Range<usize>> {
        ms.iter().map(|m| self.grammar.node(m.matched).span.clone()).collect()
    }

    fn attach(
        &mut self,
        node: NodeId,
        annotation: &Annotation,
        prov: Provenance,
        advice_span: Range<usize>,
    ) {
        if let Err(error) = self.store.attach(node, annotation, prov) {
            self.errors.push(WeaveDiagnostic::Attach {
                aspect: prov.aspect,
                advice_span: Some(advice_span),
                error,
            });
        }
    }

    fn apply<'a>(
        &mut self,
        items: &'a [SubRule],
        node: NodeId,
        scopes: &[Scope<'a>],
        prov: Provenance,
    ) {
        for item in items {
            let SubRule::Subpattern(sp) = item else {
                continue;
            };
            let matches = match_within(&sp.pattern, self.grammar, node);
            if !check_multiplicity(matches.len(), sp.multiplicity) {
                self.errors.push(WeaveDiagnostic::Multiplicity(WeaveError {
                    aspect: prov.aspect,
                    rule: prov.rule.expect("rules carry an index"),
                    pattern_text: sp.pattern_text.clone(),
                    pattern_span: sp.span.clone(),
                    expected: sp.multiplicity,
                    actual: matches.len(),
                    matched: self.spans(&matches),
                    within: Some(self.grammar.node(node).span.clone()),
                }));
                continue;
            }
            match &sp.body {
                SubpatternBody::Annotation(a) => {
                    for m in &matches {
                        self.attach(m.matched, a, prov, sp.span.clone());
                    }
                }
                SubpatternBody::Subrules(inner) => {
                    let vars = sp.pattern.variables();
                    for m in &matches {
                        let mut nested: Vec<Scope<'_>> = scopes.to_vec();
                        nested.push(Scope {
                            vars: &vars,
                            bindings: &m.bindings,
                        });
                        self.apply(inner, m.matched, &nested, prov);
                    }
                }
            }
        }
        for item in items {
            let SubRule::Variable(va) = item else {
                continue;
            };
            let Some(scope) = scopes.iter().rev().find(|s| s.vars.contains_key(&va.var)) else {
                // unreachable for parsed aspects, which check scoping
                continue;
            };
            let nodes: Vec<NodeId> = scope
                .bindings
                .get(&va.var)
                .map(|s| s.iter().copied().collect())
                .unwrap_or_default();
            for n in nodes {
                self.attach(n, &va.annotation, prov, va.span.clone());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotations::Value;
    use crate::aspect::parse_aspect;
    use crate::grammar::{parse_grammar, NodeKind};

    const ARITH: &str = "expr : term ((PLUS | MINUS) term)* ;\n\
                         term : factor ((MULT | DIV) factor)* ;\n\
                         factor : INT | '(' expr ')' ;\n";

    #[test]
    fn multiplicity_checks() {
        assert!(!check_multiplicity(2, Multiplicity::new(0, Some(1))));
        assert!(check_multiplicity(1, Multiplicity::default()));
        assert!(!check_multiplicity(0, Multiplicity::default()));
    }

    #[test]
    fn multiplicity_violation_reports_both_rules() {
        let tree = parse_grammar(ARITH).unwrap();
        let aspect = parse_aspect("[0..1] # : $tr=# (.. $tr)*\n  $tr.varName = t ;").unwrap();
        let errs = weave(&tree, &[aspect]).unwrap_err();
        assert_eq!(errs.len(), 1);
        let WeaveDiagnostic::Multiplicity(e) = &errs[0] else {
            panic!()
        };
        assert_eq!(e.actual, 2);
        assert_eq!(e.expected, Multiplicity::new(0, Some(1)));
        assert_eq!(e.pattern_text, "# : $tr=# (.. $tr)*");
        assert_eq!(e.matched.len(), 2);
        assert_eq!(e.to_string(), "pattern `# : $tr=# (.. $tr)*` matched 2, expected [0..1]");

        let aspect = parse_aspect("# : $tr=# (.. $tr)*\n  $tr.varName = t ;").unwrap();
        let store = weave(&tree, &[aspect]).unwrap();
        // expr binds term twice, term binds factor twice
        assert_eq!(store.len(), 4);
    }

    #[test]
    fn subpattern_on_term_references() {
        let tree = parse_grammar(ARITH).unwrap();
        for src in ["expr : ..\n  @$tr=(term):\n    $tr.varName = t ;", "expr : ..\n  @term: { varName = t } ;"] {
            let store = weave(&tree, &[parse_aspect(src).unwrap()]).unwrap();
            let tagged: Vec<NodeId> = store.iter().map(|(n, _)| n).collect();
            assert_eq!(tagged.len(), 2, "{src}");
            for n in tagged {
                assert_eq!(tree.kind(n), &NodeKind::SymbolRef("term".into()));
                assert_eq!(store.value(n, "varName"), Some(&Value::Name("t".into())));
            }
        }
    }

    #[test]
    fn empty_aspect_is_identity() {
        let tree = parse_grammar(ARITH).unwrap();
        let store = weave(&tree, &[parse_aspect("").unwrap()]).unwrap();
        assert!(store.is_empty());
        let hash = tree.structural_hash();
        let _ = weave(&tree, &[parse_aspect("# : {...} @#lex: .x = 1;").unwrap()]);
        assert_eq!(tree.structural_hash(), hash);
    }

    #[test]
    fn unmatched_rule_is_an_error_unless_optional() {
        let tree = parse_grammar(ARITH).unwrap();
        let errs = weave(&tree, &[parse_aspect("nothing : {...}").unwrap()]).unwrap_err();
        assert!(matches!(&errs[0], WeaveDiagnostic::Multiplicity(e) if e.actual == 0));
        assert!(weave(&tree, &[parse_aspect("[0..*] nothing : {...}").unwrap()]).is_ok());
        // per-enclosing-match subpattern counts
        let errs = weave(&tree, &[parse_aspect("# : {...} @[1] '(': .paren").unwrap()]).unwrap_err();
        assert_eq!(errs.len(), 2);
        assert!(errs
            .iter()
            .all(|e| matches!(e, WeaveDiagnostic::Multiplicity(w) if w.actual == 0 && w.within.is_some())));
    }

    #[test]
    fn conflicts_between_aspects_and_rules() {
        let tree = parse_grammar(ARITH).unwrap();
        let a = parse_aspect("factor : {...} @'(': .group = paren").unwrap();
        let b = parse_aspect("factor : {...} @#lex: .group = punct").unwrap();
        let errs = weave(&tree, &[a.clone(), b.clone()]).unwrap_err();
        assert!(matches!(&errs[0], WeaveDiagnostic::Attach { aspect: 1, error: AttachError::Conflict(_), .. }));
        // identical advice from two aspects is fine, and order does not matter
        let c = parse_aspect("factor : {...} @'(': .group = paren").unwrap();
        let d = parse_aspect("expr : {...} @PLUS: .group = op").unwrap();
        let s1 = weave(&tree, &[a.clone(), c.clone(), d.clone()]).unwrap();
        let s2 = weave(&tree, &[d, c, a]).unwrap();
        for (n, attrs) in s1.iter() {
            let other = s2.attributes(n);
            assert_eq!(attrs.len(), other.len());
            for (x, y) in attrs.iter().zip(other) {
                assert_eq!(x.attribute, y.attribute);
            }
        }
    }
}
