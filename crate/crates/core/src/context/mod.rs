//! Context values: points, regions and hierarchical trees.
//!
//! A [`SimpleContext`] is a point in the context space, a finite map from
//! dimension names to tags. A [`ContextSet`] is a finite region made of
//! points. A [`ContextTree`] nests contexts under dimensions and can be
//! navigated in both directions with a [`ContextCursor`].
//!
//! All values are immutable once built. Maps are ordered by dimension name,
//! which fixes both hashing and the printed/serialized forms.

mod literal;
mod tree;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use literal::{parse_context_literal, ContextLiteral, LiteralError};
pub use tree::{Child, ContextCursor, ContextTree, NodeId, TreeNode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("invalid dimension name `{0}`")]
    InvalidDimension(String),
    #[error("no subtree under dimension `{0}`")]
    NoSuchChild(DimensionName),
    #[error("cursor is already at the root")]
    AtRoot,
    #[error("cursor path does not resolve in this tree")]
    DanglingPath,
}

/// A dimension identifier: letters, digits and underscores, not starting
/// with a digit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DimensionName(String);

impl DimensionName {
    pub fn new(name: impl Into<String>) -> Result<Self, ContextError> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(DimensionName(name))
        } else {
            Err(ContextError::InvalidDimension(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl TryFrom<String> for DimensionName {
    type Error = ContextError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        DimensionName::new(s)
    }
}

impl From<DimensionName> for String {
    fn from(d: DimensionName) -> String {
        d.0
    }
}

impl fmt::Display for DimensionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Shorthand for building a dimension name from a literal known to be valid.
///
/// Panics on an invalid name; use [`DimensionName::new`] for untrusted input.
pub fn dim(name: &str) -> DimensionName {
    DimensionName::new(name).unwrap_or_else(|e| panic!("{e}"))
}

/// A coordinate along a dimension. Integer and string tags never compare
/// equal to each other.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TagValue {
    Int(i64),
    Str(String),
}

impl TagValue {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            TagValue::Int(i) => Some(*i),
            TagValue::Str(_) => None,
        }
    }
}

impl From<i64> for TagValue {
    fn from(v: i64) -> Self {
        TagValue::Int(v)
    }
}

impl From<&str> for TagValue {
    fn from(v: &str) -> Self {
        TagValue::Str(v.to_string())
    }
}

impl fmt::Display for TagValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagValue::Int(i) => write!(f, "{i}"),
            TagValue::Str(s) => write_quoted(f, s),
        }
    }
}

pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

/// A point in the context space.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimpleContext {
    bindings: BTreeMap<DimensionName, TagValue>,
}

impl SimpleContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, d: &DimensionName) -> Option<&TagValue> {
        self.bindings.get(d)
    }

    pub fn contains(&self, d: &DimensionName) -> bool {
        self.bindings.contains_key(d)
    }

    pub fn insert(&mut self, d: DimensionName, tag: TagValue) -> Option<TagValue> {
        self.bindings.insert(d, tag)
    }

    pub fn remove(&mut self, d: &DimensionName) -> Option<TagValue> {
        self.bindings.remove(d)
    }

    pub fn with(mut self, d: &str, tag: impl Into<TagValue>) -> Self {
        self.insert(dim(d), tag.into());
        self
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Bindings in canonical (dimension name) order.
    pub fn iter(&self) -> impl Iterator<Item = (&DimensionName, &TagValue)> {
        self.bindings.iter()
    }

    pub fn dimensions(&self) -> impl Iterator<Item = &DimensionName> {
        self.bindings.keys()
    }

    /// Restricts this context to the given dimensions.
    pub fn project<'a>(&self, dims: impl IntoIterator<Item = &'a DimensionName>) -> SimpleContext {
        let bindings = dims
            .into_iter()
            .filter_map(|d| self.bindings.get(d).map(|t| (d.clone(), t.clone())))
            .collect();
        SimpleContext { bindings }
    }

    /// Right-biased refinement: every binding of `upper`, plus the bindings
    /// of `self` on dimensions `upper` leaves unbound.
    pub fn override_with(&self, upper: &SimpleContext) -> SimpleContext {
        let mut out = self.clone();
        for (d, t) in &upper.bindings {
            out.bindings.insert(d.clone(), t.clone());
        }
        out
    }
}

impl FromIterator<(DimensionName, TagValue)> for SimpleContext {
    fn from_iter<I: IntoIterator<Item = (DimensionName, TagValue)>>(iter: I) -> Self {
        SimpleContext {
            bindings: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for SimpleContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (d, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{d}:{t}")?;
        }
        f.write_str("}")
    }
}

/// `override(lower, upper)`; see [`SimpleContext::override_with`].
pub fn override_context(lower: &SimpleContext, upper: &SimpleContext) -> SimpleContext {
    lower.override_with(upper)
}

/// Declares a dimension, optionally with a default tag other than 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DimensionDecl {
    pub name: DimensionName,
    pub default_tag: Option<TagValue>,
}

impl DimensionDecl {
    pub fn new(name: DimensionName) -> Self {
        DimensionDecl {
            name,
            default_tag: None,
        }
    }

    pub fn with_default(name: DimensionName, tag: TagValue) -> Self {
        DimensionDecl {
            name,
            default_tag: Some(tag),
        }
    }

    pub fn default_value(&self) -> TagValue {
        self.default_tag.clone().unwrap_or(TagValue::Int(0))
    }
}

/// The tag of `d` in `c`; falls back to the declared default and then to
/// integer 0.
pub fn lookup_tag<'a>(
    c: &SimpleContext,
    d: &DimensionName,
    decls: impl IntoIterator<Item = &'a DimensionDecl>,
) -> TagValue {
    if let Some(t) = c.get(d) {
        return t.clone();
    }
    decls
        .into_iter()
        .find(|decl| &decl.name == d)
        .map(DimensionDecl::default_value)
        .unwrap_or(TagValue::Int(0))
}

/// A finite region of the context space.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContextSet {
    elements: BTreeSet<SimpleContext>,
}

impl ContextSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, c: &SimpleContext) -> bool {
        self.elements.contains(c)
    }

    pub fn insert(&mut self, c: SimpleContext) -> bool {
        self.elements.insert(c)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SimpleContext> {
        self.elements.iter()
    }

    pub fn union(&self, other: &ContextSet) -> ContextSet {
        self.elements.union(&other.elements).cloned().collect()
    }

    pub fn intersect(&self, other: &ContextSet) -> ContextSet {
        self.elements
            .intersection(&other.elements)
            .cloned()
            .collect()
    }

    pub fn difference(&self, other: &ContextSet) -> ContextSet {
        self.elements.difference(&other.elements).cloned().collect()
    }
}

impl FromIterator<SimpleContext> for ContextSet {
    fn from_iter<I: IntoIterator<Item = SimpleContext>>(iter: I) -> Self {
        ContextSet {
            elements: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for ContextSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}
