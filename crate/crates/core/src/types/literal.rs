use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{CoreValue, IntWidth};

/// The `kind` in an explicit `kind<lexeme>` constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LiteralKind {
    Int(IntWidth),
    Float32,
    Float64,
    Bool,
    Char,
    String,
}

impl LiteralKind {
    pub fn from_token(token: &str) -> Option<Self> {
        Some(match token {
            "int8" => LiteralKind::Int(IntWidth::W8),
            "int16" => LiteralKind::Int(IntWidth::W16),
            "int32" => LiteralKind::Int(IntWidth::W32),
            "int64" => LiteralKind::Int(IntWidth::W64),
            "float32" => LiteralKind::Float32,
            "float64" => LiteralKind::Float64,
            "bool" => LiteralKind::Bool,
            "char" => LiteralKind::Char,
            "string" => LiteralKind::String,
            _ => return None,
        })
    }

    pub fn token(self) -> &'static str {
        match self {
            LiteralKind::Int(IntWidth::W8) => "int8",
            LiteralKind::Int(IntWidth::W16) => "int16",
            LiteralKind::Int(IntWidth::W32) => "int32",
            LiteralKind::Int(IntWidth::W64) => "int64",
            LiteralKind::Float32 => "float32",
            LiteralKind::Float64 => "float64",
            LiteralKind::Bool => "bool",
            LiteralKind::Char => "char",
            LiteralKind::String => "string",
        }
    }
}

impl fmt::Display for LiteralKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypedLiteralError {
    #[error("unknown literal kind `{0}`")]
    UnknownKind(String),
    #[error("`{lexeme}` is out of range for {kind}")]
    OutOfRange { kind: String, lexeme: String },
    #[error("`{lexeme}` is not a valid {kind} lexeme")]
    MalformedLexeme { kind: String, lexeme: String },
}

/// Builds the value of `kind<lexeme>`.
pub fn typed_literal(kind_token: &str, lexeme: &str) -> Result<CoreValue, TypedLiteralError> {
    let kind = LiteralKind::from_token(kind_token)
        .ok_or_else(|| TypedLiteralError::UnknownKind(kind_token.to_string()))?;
    let malformed = || TypedLiteralError::MalformedLexeme {
        kind: kind_token.to_string(),
        lexeme: lexeme.to_string(),
    };
    let out_of_range = || TypedLiteralError::OutOfRange {
        kind: kind_token.to_string(),
        lexeme: lexeme.to_string(),
    };
    let text = lexeme.trim();
    match kind {
        LiteralKind::Int(width) => {
            let digits = text.strip_prefix(['-', '+']).unwrap_or(text);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            let v: i128 = text.parse().map_err(|_| out_of_range())?;
            let v = i64::try_from(v).map_err(|_| out_of_range())?;
            if width.contains(v) {
                Ok(CoreValue::Sized(width, v))
            } else {
                Err(out_of_range())
            }
        }
        LiteralKind::Float32 => {
            check_float_syntax(text).ok_or_else(malformed)?;
            let v: f32 = text.parse().map_err(|_| malformed())?;
            if v.is_finite() {
                Ok(CoreValue::Float(v))
            } else {
                Err(out_of_range())
            }
        }
        LiteralKind::Float64 => {
            check_float_syntax(text).ok_or_else(malformed)?;
            let v: f64 = text.parse().map_err(|_| malformed())?;
            if v.is_finite() {
                Ok(CoreValue::Double(v))
            } else {
                Err(out_of_range())
            }
        }
        LiteralKind::Bool => match text {
            "true" => Ok(CoreValue::Boolean(true)),
            "false" => Ok(CoreValue::Boolean(false)),
            _ => Err(malformed()),
        },
        LiteralKind::Char => {
            let mut chars = lexeme.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(CoreValue::Character(c)),
                _ => Err(malformed()),
            }
        }
        LiteralKind::String => Ok(CoreValue::String(Arc::from(lexeme))),
    }
}

// Rust's float parser also takes "inf" and "NaN"; only decimal notation is a lexeme.
fn check_float_syntax(text: &str) -> Option<()> {
    let body = text.strip_prefix(['-', '+']).unwrap_or(text);
    let (mantissa, exponent) = match body.split_once(['e', 'E']) {
        Some((m, e)) => (m, Some(e)),
        None => (body, None),
    };
    let (int_part, frac) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if int_part.is_empty() && frac.is_empty() || !digits(int_part) || !digits(frac) {
        return None;
    }
    if let Some(e) = exponent {
        let e = e.strip_prefix(['-', '+']).unwrap_or(e);
        if e.is_empty() || !digits(e) {
            return None;
        }
    }
    Some(())
}
