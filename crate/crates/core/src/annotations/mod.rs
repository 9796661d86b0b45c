//! Advice data model: annotations are ordered sets of (namespace, name, value)
//! attributes; the [`AnnotationStore`] holds what weaving attached to each
//! grammar-tree node.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{quote, SyntaxError};

mod parse;
mod store;
mod woven;

pub use parse::parse_annotation;
pub(crate) use parse::parse_annotation_from;
pub use store::{AnnotationStore, AttachError, ConflictError, Provenance, StoredAttribute};
pub use woven::{WovenAnnotation, WovenDocument, WovenError, WovenNode, WOVEN_FORMAT};

/// An attribute value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Int(i64),
    Str(String),
    /// A bare identifier such as `keyword` or `increaseIndent`.
    Name(String),
    Record(Annotation),
    /// `{{ ... }}`: values and punctuation characters.
    Seq(Vec<Value>),
    Punct(char),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Annotation {
    pub attributes: Vec<Attribute>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub namespace: Option<String>,
    pub name: String,
    /// `None` for flag attributes written without `= value`.
    pub value: Option<Value>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{line}:{column}: attribute `{key}` is given more than once")]
    DuplicateAttribute {
        key: String,
        offset: usize,
        line: usize,
        column: usize,
    },
}

impl AnnotationError {
    pub fn offset(&self) -> usize {
        match self {
            AnnotationError::Syntax(e) => e.offset,
            AnnotationError::DuplicateAttribute { offset, .. } => *offset,
        }
    }
}

impl Attribute {
    pub fn new(name: impl Into<String>, value: Option<Value>) -> Self {
        Attribute {
            namespace: None,
            name: name.into(),
            value,
        }
    }

    /// `namespace:name`, or just `name`.
    pub fn key(&self) -> String {
        key_text(self.namespace.as_deref(), &self.name)
    }

    pub fn matches(&self, namespace: Option<&str>, name: &str) -> bool {
        self.namespace.as_deref() == namespace && self.name == name
    }
}

pub(crate) fn key_text(namespace: Option<&str>, name: &str) -> String {
    match namespace {
        Some(ns) => format!("{ns}:{name}"),
        None => name.to_string(),
    }
}

impl Annotation {
    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn get(&self, namespace: Option<&str>, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.matches(namespace, name))
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())?;
        if let Some(v) = &self.value {
            write!(f, " = {v}")?;
        }
        Ok(())
    }
}

/// Written back in advice notation, e.g. `{ group = keyword }`.
impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.attributes.is_empty() {
            return f.write_str("{}");
        }
        f.write_str("{ ")?;
        for (i, a) in self.attributes.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(" }")
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => f.write_str(&quote(s)),
            Value::Name(n) => f.write_str(n),
            Value::Record(a) => write!(f, "{a}"),
            Value::Punct(c) => write!(f, "{c}"),
            Value::Seq(items) => {
                f.write_str("{{")?;
                for item in items {
                    write!(f, " {item}")?;
                }
                f.write_str(" }}")
            }
        }
    }
}
