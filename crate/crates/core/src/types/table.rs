//! Foreign <-> core type matching tables.
//!
//! Each row maps a set of foreign type names to a set of intensional type
//! names and one internal type. Tables are plain tab-separated text with
//! the columns `tag, direction, foreign, lucid, internal`; list-valued
//! columns are comma separated. The JAVA and CPP tables ship built in.

use std::fmt;

use thiserror::Error;

use super::CoreType;
use crate::context::TagValue;

const JAVA_TABLE: &str = include_str!("java.tsv");
const CPP_TABLE: &str = include_str!("cpp.tsv");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("no type mapping registered for segment tag `{0}`")]
    UnknownTag(String),
    #[error("foreign type `{name}` has no mapping for tag `{tag}`")]
    UnknownForeignType { name: String, tag: String },
    #[error("type {ty} cannot be passed to `{tag}` code")]
    UnmappableType { ty: CoreType, tag: String },
    #[error("mapping table line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// Discriminant of [`CoreType`], named after the internal type classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeKind {
    Integer,
    Float,
    Double,
    Boolean,
    Character,
    String,
    Function,
    Operator,
    Array,
    Object,
    Embed,
    Void,
    Identifier,
    Context,
    Dimension,
    SizedInteger,
    Special,
}

impl TypeKind {
    const NAMES: [(TypeKind, &'static str); 17] = [
        (TypeKind::Integer, "GIPSYInteger"),
        (TypeKind::Float, "GIPSYFloat"),
        (TypeKind::Double, "GIPSYDouble"),
        (TypeKind::Boolean, "GIPSYBoolean"),
        (TypeKind::Character, "GIPSYCharacter"),
        (TypeKind::String, "GIPSYString"),
        (TypeKind::Function, "GIPSYFunction"),
        (TypeKind::Operator, "GIPSYOperator"),
        (TypeKind::Array, "GIPSYArray"),
        (TypeKind::Object, "GIPSYObject"),
        (TypeKind::Embed, "GIPSYEmbed"),
        (TypeKind::Void, "GIPSYVoid"),
        (TypeKind::Identifier, "GIPSYIdentifier"),
        (TypeKind::Context, "GIPSYContext"),
        (TypeKind::Dimension, "Dimension"),
        (TypeKind::SizedInteger, "GIPSYSizedInteger"),
        (TypeKind::Special, "GIPSYSpecial"),
    ];

    pub fn internal_name(self) -> &'static str {
        Self::NAMES
            .iter()
            .find(|(k, _)| *k == self)
            .map(|(_, n)| *n)
            .unwrap_or("?")
    }

    pub fn from_internal_name(name: &str) -> Option<Self> {
        Self::NAMES
            .iter()
            .find(|(_, n)| *n == name)
            .map(|(k, _)| *k)
    }
}

impl fmt::Display for TypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.internal_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowDirection {
    /// Foreign return type -> type of an intensional expression.
    Return,
    /// Intensional argument type -> foreign parameter type.
    Param,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingRow {
    pub tag: String,
    pub direction: RowDirection,
    pub foreign: Vec<String>,
    pub lucid: Vec<String>,
    pub kind: TypeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeMappingTable {
    rows: Vec<MappingRow>,
}

impl Default for TypeMappingTable {
    fn default() -> Self {
        Self::standard()
    }
}

impl TypeMappingTable {
    pub fn empty() -> Self {
        TypeMappingTable { rows: Vec::new() }
    }

    /// The built-in JAVA and CPP tables.
    pub fn standard() -> Self {
        let mut t = Self::empty();
        for src in [JAVA_TABLE, CPP_TABLE] {
            t.extend_from_tsv(src)
                .expect("built-in tables are well formed");
        }
        t
    }

    pub fn extend_from_tsv(&mut self, src: &str) -> Result<usize, TableError> {
        let rows = parse_tsv(src)?;
        let n = rows.len();
        self.rows.extend(rows);
        Ok(n)
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.rows.iter().any(|r| r.tag == tag)
    }

    pub fn rows(&self, tag: &str, direction: RowDirection) -> impl Iterator<Item = &MappingRow> {
        let tag = tag.to_string();
        self.rows
            .iter()
            .filter(move |r| r.tag == tag && r.direction == direction)
    }

    /// Core type of a foreign return type. `T[]` maps element-wise when the
    /// tag has an array row; ambiguous names take their first row.
    pub fn map_foreign_return(&self, name: &str, tag: &str) -> Result<CoreType, TableError> {
        if !self.has_tag(tag) {
            return Err(TableError::UnknownTag(tag.to_string()));
        }
        let unknown = || TableError::UnknownForeignType {
            name: name.to_string(),
            tag: tag.to_string(),
        };
        if let Some(elem) = name.trim().strip_suffix("[]") {
            let has_arrays = self
                .rows(tag, RowDirection::Return)
                .any(|r| r.kind == TypeKind::Array);
            let elem = self.map_foreign_return(elem.trim(), tag)?;
            if !has_arrays || elem == CoreType::Void {
                return Err(unknown());
            }
            return Ok(CoreType::Array(Box::new(elem)));
        }
        let row = self
            .rows(tag, RowDirection::Return)
            .find(|r| r.foreign.iter().any(|f| f == name))
            .ok_or_else(unknown)?;
        Ok(match row.kind {
            TypeKind::Integer => CoreType::Integer,
            TypeKind::Float => CoreType::Float,
            TypeKind::Double => CoreType::Double,
            TypeKind::Boolean => CoreType::Boolean,
            TypeKind::Character => CoreType::Character,
            TypeKind::String => CoreType::String,
            TypeKind::Function => CoreType::Function,
            TypeKind::Operator => CoreType::Operator,
            TypeKind::Object => CoreType::Object(name.to_string()),
            TypeKind::Embed => CoreType::Embed,
            TypeKind::Void => CoreType::Void,
            TypeKind::Dimension => CoreType::Dimension,
            _ => return Err(unknown()),
        })
    }

    /// Foreign parameter type for an argument of type `ty`. Dimensions map
    /// by the kind of their current tag; with no tag known the implicit
    /// default (integer 0) decides.
    pub fn map_core_param(
        &self,
        ty: &CoreType,
        tag: &str,
        dim_tag: Option<&TagValue>,
    ) -> Result<String, TableError> {
        if !self.has_tag(tag) {
            return Err(TableError::UnknownTag(tag.to_string()));
        }
        let unmappable = || TableError::UnmappableType {
            ty: ty.clone(),
            tag: tag.to_string(),
        };
        let row = self
            .rows(tag, RowDirection::Param)
            .find(|r| r.kind == ty.kind())
            .ok_or_else(unmappable)?;
        match ty {
            CoreType::Array(elem) => {
                let inner = self.map_core_param(elem, tag, None)?;
                Ok(format!("{inner}[]"))
            }
            CoreType::Dimension => {
                let pick = match dim_tag {
                    Some(TagValue::Str(_)) if row.foreign.len() > 1 => 1,
                    _ => 0,
                };
                Ok(row.foreign[pick].clone())
            }
            _ => row.foreign.first().cloned().ok_or_else(unmappable),
        }
    }
}

fn parse_tsv(src: &str) -> Result<Vec<MappingRow>, TableError> {
    let mut rows = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let malformed = |reason: String| TableError::Malformed {
            line: line_no,
            reason,
        };
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [tag, direction, foreign, lucid, internal] = cols[..] else {
            return Err(malformed(format!(
                "expected 5 tab-separated columns, found {}",
                cols.len()
            )));
        };
        let direction = match direction {
            "return" => RowDirection::Return,
            "param" => RowDirection::Param,
            other => return Err(malformed(format!("unknown direction `{other}`"))),
        };
        let kind = TypeKind::from_internal_name(internal)
            .ok_or_else(|| malformed(format!("unknown internal type `{internal}`")))?;
        let list = |s: &str| -> Vec<String> {
            s.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(String::from)
                .collect()
        };
        let foreign = list(foreign);
        if tag.is_empty() || foreign.is_empty() {
            return Err(malformed("empty tag or foreign type list".into()));
        }
        rows.push(MappingRow {
            tag: tag.to_string(),
            direction,
            foreign,
            lucid: list(lucid),
            kind,
        });
    }
    Ok(rows)
}
