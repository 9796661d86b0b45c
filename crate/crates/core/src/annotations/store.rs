use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Annotation, Attribute, Value};
use crate::grammar::{GrammarTree, NodeId};

/// Where an attribute came from: the aspect (by weave order) and the rule
/// within it, or `None` for the aspect's grammar annotation.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub aspect: usize,
    pub rule: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredAttribute {
    pub attribute: Attribute,
    pub provenance: Provenance,
}

/// Annotations attached to the nodes of one grammar tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotationStore {
    spans: Vec<Range<usize>>,
    root: NodeId,
    by_node: BTreeMap<NodeId, Vec<StoredAttribute>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error(
    "conflicting values for `{key}` on node {node} (bytes {}..{}): {existing} from {existing_from:?} vs {incoming} from {incoming_from:?}",
    span.start, span.end
)]
pub struct ConflictError {
    pub node: NodeId,
    pub span: Range<usize>,
    pub key: String,
    pub existing: String,
    pub existing_from: Provenance,
    pub incoming: String,
    pub incoming_from: Provenance,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttachError {
    #[error("node {0} does not belong to this grammar")]
    UnknownNode(NodeId),
    #[error(transparent)]
    Conflict(#[from] ConflictError),
}

fn value_text(v: &Option<Value>) -> String {
    match v {
        Some(v) => v.to_string(),
        None => "(flag)".into(),
    }
}

impl AnnotationStore {
    /// An empty store for `tree`.
    pub fn new(tree: &GrammarTree) -> Self {
        AnnotationStore {
            spans: tree.nodes().map(|n| n.span.clone()).collect(),
            root: tree.root(),
            by_node: BTreeMap::new(),
        }
    }

    pub(crate) fn from_parts(
        spans: Vec<Range<usize>>,
        root: NodeId,
        by_node: BTreeMap<NodeId, Vec<StoredAttribute>>,
    ) -> Self {
        AnnotationStore {
            spans,
            root,
            by_node,
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.spans.len()
    }

    /// Attach every attribute of `annotation` to `node`.
    ///
    /// Re-attaching an identical value is a no-op. A different value for the
    /// same key replaces the old one only when both come from the same
    /// aspect rule (later advice in a rule refines earlier advice); across
    /// rules or aspects it is a [`ConflictError`]. The store is left
    /// unchanged when an error is returned.
    pub fn attach(
        &mut self,
        node: NodeId,
        annotation: &Annotation,
        provenance: Provenance,
    ) -> Result<(), AttachError> {
        if node.index() >= self.spans.len() {
            return Err(AttachError::UnknownNode(node));
        }
        let mut attrs = self.by_node.get(&node).cloned().unwrap_or_default();
        for attr in &annotation.attributes {
            let existing = attrs
                .iter_mut()
                .find(|s| s.attribute.matches(attr.namespace.as_deref(), &attr.name));
            match existing {
                None => attrs.push(StoredAttribute {
                    attribute: attr.clone(),
                    provenance,
                }),
                Some(s) if s.attribute.value == attr.value => {}
                Some(s) if s.provenance == provenance => s.attribute.value = attr.value.clone(),
                Some(s) => {
                    return Err(ConflictError {
                        node,
                        span: self.spans[node.index()].clone(),
                        key: attr.key(),
                        existing: value_text(&s.attribute.value),
                        existing_from: s.provenance,
                        incoming: value_text(&attr.value),
                        incoming_from: provenance,
                    }
                    .into())
                }
            }
        }
        if !attrs.is_empty() {
            self.by_node.insert(node, attrs);
        }
        Ok(())
    }

    /// The attribute `namespace:name` on `node`. A flag attribute is present
    /// with `value == None`.
    pub fn lookup(&self, node: NodeId, namespace: Option<&str>, name: &str) -> Option<&Attribute> {
        self.by_node
            .get(&node)?
            .iter()
            .map(|s| &s.attribute)
            .find(|a| a.matches(namespace, name))
    }

    /// Shorthand for the value of an un-namespaced attribute.
    pub fn value(&self, node: NodeId, name: &str) -> Option<&Value> {
        self.lookup(node, None, name)?.value.as_ref()
    }

    pub fn provenance(&self, node: NodeId, namespace: Option<&str>, name: &str) -> Option<Provenance> {
        self.by_node
            .get(&node)?
            .iter()
            .find(|s| s.attribute.matches(namespace, name))
            .map(|s| s.provenance)
    }

    /// Attributes on `node`, in attachment order.
    pub fn attributes(&self, node: NodeId) -> &[StoredAttribute] {
        self.by_node.get(&node).map_or(&[], Vec::as_slice)
    }

    /// Everything attached to the grammar root, which is where grammar annotations go.
    pub fn grammar_annotation(&self) -> Annotation {
        Annotation {
            attributes: self
                .attributes(self.root)
                .iter()
                .map(|s| s.attribute.clone())
                .collect(),
        }
    }

    /// Annotated nodes in id order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &[StoredAttribute])> {
        self.by_node.iter().map(|(n, a)| (*n, a.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.by_node.is_empty()
    }

    /// Total number of attributes over all nodes.
    pub fn len(&self) -> usize {
        self.by_node.values().map(Vec::len).sum()
    }

    pub fn span(&self, node: NodeId) -> Option<Range<usize>> {
        self.spans.get(node.index()).cloned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotations::parse_annotation;
    use crate::grammar::{parse_grammar, NodeKind};

    fn setup() -> (GrammarTree, NodeId) {
        let tree = parse_grammar("a : 'class' X ;").unwrap();
        let lit = tree
            .nodes()
            .find(|n| matches!(n.kind, NodeKind::Literal(_)))
            .unwrap()
            .id;
        (tree, lit)
    }

    const R0: Provenance = Provenance {
        aspect: 0,
        rule: Some(0),
    };
    const R1: Provenance = Provenance {
        aspect: 0,
        rule: Some(1),
    };

    #[test]
    fn identical_attach_is_idempotent() {
        let (tree, lit) = setup();
        let mut store = AnnotationStore::new(&tree);
        let kw = parse_annotation("{ group = keyword }").unwrap();
        store.attach(lit, &kw, R0).unwrap();
        let once = store.clone();
        store.attach(lit, &kw, R1).unwrap();
        assert_eq!(store, once);
        assert_eq!(store.value(lit, "group"), Some(&Value::Name("keyword".into())));
        assert_eq!(store.provenance(lit, None, "group"), Some(R0));
    }

    #[test]
    fn conflicts_across_rules() {
        let (tree, lit) = setup();
        let mut store = AnnotationStore::new(&tree);
        store
            .attach(lit, &parse_annotation(".group = keyword").unwrap(), R0)
            .unwrap();
        let before = store.clone();
        let err = store
            .attach(lit, &parse_annotation(".group = classDeclaration").unwrap(), R1)
            .unwrap_err();
        let AttachError::Conflict(c) = err else {
            panic!()
        };
        assert_eq!(c.key, "group");
        assert_eq!((c.existing_from, c.incoming_from), (R0, R1));
        assert_eq!(c.span, tree.node(lit).span);
        assert_eq!(store, before);
        // within one rule the later advice wins
        store
            .attach(lit, &parse_annotation(".group = other").unwrap(), R0)
            .unwrap();
        assert_eq!(store.value(lit, "group"), Some(&Value::Name("other".into())));
    }

    #[test]
    fn unknown_node_and_flags() {
        let (tree, lit) = setup();
        let mut store = AnnotationStore::new(&tree);
        assert!(matches!(
            store.attach(NodeId::new(999), &Annotation::default(), R0),
            Err(AttachError::UnknownNode(_))
        ));
        store.attach(lit, &parse_annotation(".bold").unwrap(), R0).unwrap();
        assert!(store.lookup(lit, None, "bold").is_some());
        assert_eq!(store.value(lit, "bold"), None);
        assert!(store.lookup(tree.root(), None, "bold").is_none());
    }
}
