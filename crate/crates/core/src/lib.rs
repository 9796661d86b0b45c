//! Grammar aspect weaving.
//!
//! A grammar stays free of annotations; aspects written separately select
//! grammar-tree nodes with patterns and attach name/value annotations to
//! them. The woven [`AnnotationStore`] then drives generators: a syntax
//! highlighter ([`highlight`]) and a pretty-printer ([`pretty`]), both running
//! over parse trees produced by the chart parser in [`runtime`].

pub mod annotations;
pub mod aspect;
pub mod grammar;
pub mod highlight;
pub mod pattern;
pub mod pretty;
pub mod runtime;
pub mod syntax;

pub use grammar::{
    parse_grammar, serialize_grammar, GrammarError, GrammarTree, GtNode, IterKind, NodeId,
    NodeKind,
};
pub use syntax::SyntaxError;
