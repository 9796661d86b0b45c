//! The woven-output file: grammar-tree nodes plus every attached attribute.
//!
//! ```json
//! {
//!   "format": "weft-woven/1",
//!   "nodes": [{ "id": 0, "kind": "grammar", "span": [0, 42], "children": [1] }, ...],
//!   "annotations": [{
//!     "node": 7, "namespace": null, "name": "group",
//!     "value": { "name": "keyword" },
//!     "provenance": { "aspect": 0, "rule": 0 }
//!   }, ...]
//! }
//! ```
//!
//! Keys appear in exactly this order. Nodes are listed by id; annotations by
//! node id, then attachment order. A node's `name` is present for symbol
//! definitions and references (the symbol), literals (the text) and
//! iterations (`*`, `+` or `?`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AnnotationStore, Attribute, Provenance, StoredAttribute, Value};
use crate::grammar::{GrammarTree, NodeId, NodeKind};

pub const WOVEN_FORMAT: &str = "weft-woven/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WovenDocument {
    pub format: String,
    pub nodes: Vec<WovenNode>,
    pub annotations: Vec<WovenAnnotation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WovenNode {
    pub id: NodeId,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub span: [usize; 2],
    pub children: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WovenAnnotation {
    pub node: NodeId,
    pub namespace: Option<String>,
    pub name: String,
    pub value: Option<Value>,
    pub provenance: Provenance,
}

#[derive(Debug, Error)]
pub enum WovenError {
    #[error("malformed woven document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported woven format `{0}`")]
    Format(String),
    #[error("node ids must be 0..n in order; found {found} at position {position}")]
    NodeOrder { position: usize, found: NodeId },
    #[error("annotation refers to unknown node {0}")]
    UnknownNode(NodeId),
    #[error("attribute `{key}` appears twice on node {node}")]
    Duplicate { node: NodeId, key: String },
}

fn node_name(kind: &NodeKind) -> Option<String> {
    match kind {
        NodeKind::SymbolDef(n) | NodeKind::SymbolRef(n) | NodeKind::Literal(n) => Some(n.clone()),
        NodeKind::Iteration(k) => Some(k.symbol().to_string()),
        _ => None,
    }
}

impl WovenDocument {
    pub fn new(tree: &GrammarTree, store: &AnnotationStore) -> Self {
        let nodes = tree
            .nodes()
            .map(|n| WovenNode {
                id: n.id,
                kind: n.kind.tag().to_string(),
                name: node_name(&n.kind),
                span: [n.span.start, n.span.end],
                children: n.children.clone(),
            })
            .collect();
        let annotations = store
            .iter()
            .flat_map(|(node, attrs)| {
                attrs.iter().map(move |s| WovenAnnotation {
                    node,
                    namespace: s.attribute.namespace.clone(),
                    name: s.attribute.name.clone(),
                    value: s.attribute.value.clone(),
                    provenance: s.provenance,
                })
            })
            .collect();
        WovenDocument {
            format: WOVEN_FORMAT.to_string(),
            nodes,
            annotations,
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("woven documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, WovenError> {
        let doc: WovenDocument = serde_json::from_str(text)?;
        if doc.format != WOVEN_FORMAT {
            return Err(WovenError::Format(doc.format));
        }
        for (i, n) in doc.nodes.iter().enumerate() {
            if n.id.index() != i {
                return Err(WovenError::NodeOrder {
                    position: i,
                    found: n.id,
                });
            }
        }
        Ok(doc)
    }

    /// Rebuild the annotation store this document was written from.
    pub fn to_store(&self) -> Result<AnnotationStore, WovenError> {
        let spans = self.nodes.iter().map(|n| n.span[0]..n.span[1]).collect();
        let mut by_node: BTreeMap<NodeId, Vec<StoredAttribute>> = BTreeMap::new();
        for a in &self.annotations {
            if a.node.index() >= self.nodes.len() {
                return Err(WovenError::UnknownNode(a.node));
            }
            let attrs = by_node.entry(a.node).or_default();
            if attrs
                .iter()
                .any(|s| s.attribute.matches(a.namespace.as_deref(), &a.name))
            {
                return Err(WovenError::Duplicate {
                    node: a.node,
                    key: super::key_text(a.namespace.as_deref(), &a.name),
                });
            }
            attrs.push(StoredAttribute {
                attribute: Attribute {
                    namespace: a.namespace.clone(),
                    name: a.name.clone(),
                    value: a.value.clone(),
                },
                provenance: a.provenance,
            });
        }
        Ok(AnnotationStore::from_parts(spans, NodeId::new(0), by_node))
    }
}
