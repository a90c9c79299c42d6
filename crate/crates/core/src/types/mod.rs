//! The type universe shared by the intensional core and foreign code.

mod literal;
mod ops;
mod table;

use std::fmt;
use std::sync::Arc;

use crate::context::{write_quoted, ContextSet, ContextTree, DimensionName, SimpleContext};

pub use literal::{typed_literal, LiteralKind, TypedLiteralError};
pub use ops::{apply_binary, apply_unary, values_equal, BinaryOp, UnaryOp};
pub use table::{MappingRow, RowDirection, TableError, TypeKind, TypeMappingTable};

/// Bit width of a sized integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntWidth {
    W8,
    W16,
    W32,
    W64,
}

impl IntWidth {
    pub fn bits(self) -> u32 {
        match self {
            IntWidth::W8 => 8,
            IntWidth::W16 => 16,
            IntWidth::W32 => 32,
            IntWidth::W64 => 64,
        }
    }

    pub fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            8 => Some(IntWidth::W8),
            16 => Some(IntWidth::W16),
            32 => Some(IntWidth::W32),
            64 => Some(IntWidth::W64),
            _ => None,
        }
    }

    pub fn min(self) -> i64 {
        match self {
            IntWidth::W64 => i64::MIN,
            w => -(1i64 << (w.bits() - 1)),
        }
    }

    pub fn max(self) -> i64 {
        match self {
            IntWidth::W64 => i64::MAX,
            w => (1i64 << (w.bits() - 1)) - 1,
        }
    }

    pub fn contains(self, v: i64) -> bool {
        v >= self.min() && v <= self.max()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoreType {
    Integer,
    Float,
    Double,
    Boolean,
    Character,
    String,
    Function,
    Operator,
    Array(Box<CoreType>),
    /// A user type registered through a type declaration segment.
    Object(String),
    Embed,
    Void,
    Identifier,
    Context,
    Dimension,
    SizedInteger(IntWidth),
    Special,
}

impl CoreType {
    pub fn kind(&self) -> TypeKind {
        match self {
            CoreType::Integer => TypeKind::Integer,
            CoreType::Float => TypeKind::Float,
            CoreType::Double => TypeKind::Double,
            CoreType::Boolean => TypeKind::Boolean,
            CoreType::Character => TypeKind::Character,
            CoreType::String => TypeKind::String,
            CoreType::Function => TypeKind::Function,
            CoreType::Operator => TypeKind::Operator,
            CoreType::Array(_) => TypeKind::Array,
            CoreType::Object(_) => TypeKind::Object,
            CoreType::Embed => TypeKind::Embed,
            CoreType::Void => TypeKind::Void,
            CoreType::Identifier => TypeKind::Identifier,
            CoreType::Context => TypeKind::Context,
            CoreType::Dimension => TypeKind::Dimension,
            CoreType::SizedInteger(_) => TypeKind::SizedInteger,
            CoreType::Special => TypeKind::Special,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            CoreType::Integer | CoreType::Float | CoreType::Double | CoreType::SizedInteger(_)
        )
    }
}

impl fmt::Display for CoreType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreType::Integer => f.write_str("int"),
            CoreType::Float => f.write_str("float"),
            CoreType::Double => f.write_str("double"),
            CoreType::Boolean => f.write_str("bool"),
            CoreType::Character => f.write_str("char"),
            CoreType::String => f.write_str("string"),
            CoreType::Function => f.write_str("function"),
            CoreType::Operator => f.write_str("operator"),
            CoreType::Array(t) => write!(f, "{t}[]"),
            CoreType::Object(name) => f.write_str(name),
            CoreType::Embed => f.write_str("embed"),
            CoreType::Void => f.write_str("void"),
            CoreType::Identifier => f.write_str("identifier"),
            CoreType::Context => f.write_str("context"),
            CoreType::Dimension => f.write_str("dimension"),
            CoreType::SizedInteger(w) => write!(f, "int{}", w.bits()),
            CoreType::Special => f.write_str("special"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpecialKind {
    Undecl,
    Arith,
    TypeErr,
    UndefDim,
}

impl SpecialKind {
    pub fn name(self) -> &'static str {
        match self {
            SpecialKind::Undecl => "undecl",
            SpecialKind::Arith => "arith",
            SpecialKind::TypeErr => "typeerr",
            SpecialKind::UndefDim => "undefdim",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "undecl" => Some(SpecialKind::Undecl),
            "arith" => Some(SpecialKind::Arith),
            "typeerr" => Some(SpecialKind::TypeErr),
            "undefdim" => Some(SpecialKind::UndefDim),
            _ => None,
        }
    }

    pub const ALL: [SpecialKind; 4] = [
        SpecialKind::Undecl,
        SpecialKind::Arith,
        SpecialKind::TypeErr,
        SpecialKind::UndefDim,
    ];
}

impl fmt::Display for SpecialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a value came from in source text.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceLocation {
    pub file: Option<Arc<str>>,
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.file {
            Some(file) => write!(f, "{file}:{}", self.line),
            None => write!(f, "{}:{}", self.line, self.column),
        }
    }
}

/// An error value. It remembers where it was first produced, and that
/// origin survives propagation through operators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpecialValue {
    pub kind: SpecialKind,
    pub origin: Option<SourceLocation>,
    pub note: Option<Arc<str>>,
}

impl SpecialValue {
    pub fn new(kind: SpecialKind) -> Self {
        SpecialValue {
            kind,
            origin: None,
            note: None,
        }
    }

    pub fn at(kind: SpecialKind, origin: SourceLocation) -> Self {
        SpecialValue {
            kind,
            origin: Some(origin),
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<Arc<str>>) -> Self {
        self.note = Some(note.into());
        self
    }
}

impl fmt::Display for SpecialValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "special<{}>", self.kind)
    }
}

/// An object produced by a foreign function. `origin_tag` names the segment
/// language whose provider made it; member calls go back to that provider.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectValue {
    pub class: Arc<str>,
    pub origin_tag: Arc<str>,
    pub source_url: Option<Arc<str>>,
    pub fields: Arc<[CoreValue]>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoreValue {
    Integer(i64),
    Sized(IntWidth, i64),
    Float(f32),
    Double(f64),
    Boolean(bool),
    Character(char),
    String(Arc<str>),
    /// Result of a foreign procedure without a return value; reads as true.
    Void,
    Special(SpecialValue),
    Dimension(DimensionName),
    Context(SimpleContext),
    ContextSet(ContextSet),
    Tree(Arc<ContextTree>),
    Object(ObjectValue),
    Array(Arc<[CoreValue]>),
}

impl CoreValue {
    pub fn special(kind: SpecialKind) -> Self {
        CoreValue::Special(SpecialValue::new(kind))
    }

    pub fn string(s: &str) -> Self {
        CoreValue::String(Arc::from(s))
    }

    pub fn core_type(&self) -> CoreType {
        match self {
            CoreValue::Integer(_) => CoreType::Integer,
            CoreValue::Sized(w, _) => CoreType::SizedInteger(*w),
            CoreValue::Float(_) => CoreType::Float,
            CoreValue::Double(_) => CoreType::Double,
            CoreValue::Boolean(_) => CoreType::Boolean,
            CoreValue::Character(_) => CoreType::Character,
            CoreValue::String(_) => CoreType::String,
            CoreValue::Void => CoreType::Void,
            CoreValue::Special(_) => CoreType::Special,
            CoreValue::Dimension(_) => CoreType::Dimension,
            CoreValue::Context(_) | CoreValue::ContextSet(_) | CoreValue::Tree(_) => {
                CoreType::Context
            }
            CoreValue::Object(o) if o.source_url.is_some() => CoreType::Embed,
            CoreValue::Object(o) => CoreType::Object(o.class.to_string()),
            CoreValue::Array(items) => CoreType::Array(Box::new(
                items
                    .first()
                    .map(CoreValue::core_type)
                    .unwrap_or(CoreType::Void),
            )),
        }
    }

    pub fn is_special(&self) -> bool {
        matches!(self, CoreValue::Special(_))
    }

    pub fn as_special(&self) -> Option<&SpecialValue> {
        match self {
            CoreValue::Special(s) => Some(s),
            _ => None,
        }
    }

    /// Boolean reading of a value; `Void` reads as true.
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            CoreValue::Boolean(b) => Some(*b),
            CoreValue::Void => Some(true),
            _ => None,
        }
    }

    /// Canonical source text for this value. For literal kinds the text
    /// parses back to an equal value.
    pub fn lexeme(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CoreValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreValue::Integer(i) => write!(f, "{i}"),
            CoreValue::Sized(w, i) => write!(f, "int{}<{i}>", w.bits()),
            CoreValue::Float(x) => write!(f, "float32<{x:?}>"),
            CoreValue::Double(x) => write!(f, "{x:?}"),
            CoreValue::Boolean(b) => write!(f, "{b}"),
            CoreValue::Character(c) => match c {
                '\'' => f.write_str("'\\''"),
                '\\' => f.write_str("'\\\\'"),
                '\n' => f.write_str("'\\n'"),
                '\t' => f.write_str("'\\t'"),
                c => write!(f, "'{c}'"),
            },
            CoreValue::String(s) => write_quoted(f, s),
            CoreValue::Void => f.write_str("true"),
            CoreValue::Special(s) => write!(f, "{s}"),
            CoreValue::Dimension(d) => write!(f, "{d}"),
            CoreValue::Context(c) => write!(f, "{c}"),
            CoreValue::ContextSet(s) => write!(f, "{s}"),
            CoreValue::Tree(t) => write!(f, "{t}"),
            CoreValue::Object(o) => match &o.source_url {
                Some(url) => write!(f, "<{} object from {url}>", o.class),
                None => write!(f, "<{} object>", o.class),
            },
            CoreValue::Array(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// The value of a call to a foreign procedure declared `void`.
pub fn void_result() -> CoreValue {
    CoreValue::Void
}

/// Absorbing, left-priority propagation of error values: the leftmost
/// special operand wins unchanged. `None` when neither operand is special.
pub fn combine_special(left: &CoreValue, right: &CoreValue) -> Option<CoreValue> {
    match (left, right) {
        (CoreValue::Special(_), _) => Some(left.clone()),
        (_, CoreValue::Special(_)) => Some(right.clone()),
        _ => None,
    }
}

/// `isspecial<kind> v`, or `isspecial v` when `kind` is `None`.
pub fn is_special(v: &CoreValue, kind: Option<SpecialKind>) -> CoreValue {
    let hit = match (v, kind) {
        (CoreValue::Special(s), Some(k)) => s.kind == k,
        (CoreValue::Special(_), None) => true,
        _ => false,
    };
    CoreValue::Boolean(hit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(kind: SpecialKind, line: u32) -> CoreValue {
        CoreValue::Special(SpecialValue::at(
            kind,
            SourceLocation {
                file: None,
                line,
                column: 1,
            },
        ))
    }

    #[test]
    fn leftmost_special_wins() {
        let undecl = sp(SpecialKind::Undecl, 1);
        let arith = sp(SpecialKind::Arith, 2);
        assert_eq!(combine_special(&undecl, &arith), Some(undecl.clone()));
        assert_eq!(
            combine_special(&arith, &CoreValue::Integer(3)),
            Some(arith.clone())
        );
        assert_eq!(
            combine_special(&CoreValue::Integer(3), &arith),
            Some(arith.clone())
        );
        assert_eq!(
            combine_special(&CoreValue::Integer(3), &CoreValue::Integer(4)),
            None
        );
    }

    #[test]
    fn isspecial_checks_kind() {
        let undecl = CoreValue::special(SpecialKind::Undecl);
        assert_eq!(
            is_special(&undecl, Some(SpecialKind::Undecl)),
            CoreValue::Boolean(true)
        );
        assert_eq!(
            is_special(&CoreValue::Integer(42), None),
            CoreValue::Boolean(false)
        );
        assert_eq!(
            is_special(
                &CoreValue::special(SpecialKind::Arith),
                Some(SpecialKind::Undecl)
            ),
            CoreValue::Boolean(false)
        );
    }

    #[test]
    fn void_reads_true() {
        assert_eq!(void_result().as_bool(), Some(true));
        assert_eq!(void_result(), void_result());
        assert_eq!(void_result().core_type(), CoreType::Void);
    }

    #[test]
    fn widths() {
        assert_eq!(IntWidth::W8.min(), -128);
        assert_eq!(IntWidth::W8.max(), 127);
        assert_eq!(IntWidth::W64.max(), i64::MAX);
        assert!(!IntWidth::W16.contains(40_000));
    }

    #[test]
    fn lexemes() {
        assert_eq!(CoreValue::Double(2.0).lexeme(), "2.0");
        assert_eq!(CoreValue::Float(1.75).lexeme(), "float32<1.75>");
        assert_eq!(CoreValue::Sized(IntWidth::W8, -3).lexeme(), "int8<-3>");
        assert_eq!(CoreValue::Character('\'').lexeme(), "'\\''");
        assert_eq!(
            CoreValue::special(SpecialKind::TypeErr).lexeme(),
            "special<typeerr>"
        );
    }
}
