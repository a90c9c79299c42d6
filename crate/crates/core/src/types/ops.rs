//! Operator semantics over [`CoreValue`].
//!
//! Untyped numbers promote along Integer -> Float -> Double. Sized integers
//! only combine with the same width, and leaving the width yields
//! `special<arith>` instead of wrapping. Any special operand absorbs the
//! result, leftmost first.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use super::{combine_special, CoreValue, IntWidth, SourceLocation, SpecialKind, SpecialValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "mod",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(
            self,
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod
        )
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge
        )
    }
}

impl fmt::Display for BinaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
}

impl fmt::Display for UnaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnaryOp::Neg => "-",
            UnaryOp::Not => "not",
        })
    }
}

fn fail(kind: SpecialKind, at: Option<&SourceLocation>, note: String) -> CoreValue {
    let mut s = SpecialValue::new(kind).with_note(note);
    s.origin = at.cloned();
    CoreValue::Special(s)
}

enum Num {
    Int(i64),
    Sized(IntWidth, i64),
    F32(f32),
    F64(f64),
}

fn num(v: &CoreValue) -> Option<Num> {
    match v {
        CoreValue::Integer(i) => Some(Num::Int(*i)),
        CoreValue::Sized(w, i) => Some(Num::Sized(*w, *i)),
        CoreValue::Float(x) => Some(Num::F32(*x)),
        CoreValue::Double(x) => Some(Num::F64(*x)),
        _ => None,
    }
}

/// Pairs promoted to a common representation.
enum Pair {
    Int(i64, i64),
    Sized(IntWidth, i64, i64),
    F32(f32, f32),
    F64(f64, f64),
}

fn promote(l: Num, r: Num) -> Option<Pair> {
    use Num::*;
    Some(match (l, r) {
        (Int(a), Int(b)) => Pair::Int(a, b),
        (Sized(w, a), Sized(v, b)) if w == v => Pair::Sized(w, a, b),
        (Sized(..), _) | (_, Sized(..)) => return None,
        (F64(a), b) => Pair::F64(a, as_f64(b)),
        (a, F64(b)) => Pair::F64(as_f64(a), b),
        (F32(a), Int(b)) => Pair::F32(a, b as f32),
        (Int(a), F32(b)) => Pair::F32(a as f32, b),
        (F32(a), F32(b)) => Pair::F32(a, b),
    })
}

fn as_f64(n: Num) -> f64 {
    match n {
        Num::Int(i) | Num::Sized(_, i) => i as f64,
        Num::F32(x) => x as f64,
        Num::F64(x) => x,
    }
}

fn int_arith(op: BinaryOp, a: i64, b: i64) -> Result<i64, &'static str> {
    let r = match op {
        BinaryOp::Add => a.checked_add(b),
        BinaryOp::Sub => a.checked_sub(b),
        BinaryOp::Mul => a.checked_mul(b),
        BinaryOp::Div if b == 0 => return Err("division by zero"),
        BinaryOp::Div => a.checked_div(b),
        BinaryOp::Mod if b == 0 => return Err("modulo by zero"),
        BinaryOp::Mod => a.checked_rem_euclid(b),
        _ => unreachable!("not arithmetic"),
    };
    r.ok_or("integer overflow")
}

fn float_arith(op: BinaryOp, a: f64, b: f64) -> Result<f64, &'static str> {
    if b == 0.0 && matches!(op, BinaryOp::Div | BinaryOp::Mod) {
        return Err("division by zero");
    }
    let r = match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => a / b,
        BinaryOp::Mod => a.rem_euclid(b),
        _ => unreachable!("not arithmetic"),
    };
    if r.is_finite() {
        Ok(r)
    } else {
        Err("floating-point overflow")
    }
}

fn float32_arith(op: BinaryOp, a: f32, b: f32) -> Result<f32, &'static str> {
    if b == 0.0 && matches!(op, BinaryOp::Div | BinaryOp::Mod) {
        return Err("division by zero");
    }
    let r = match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => a / b,
        BinaryOp::Mod => a.rem_euclid(b),
        _ => unreachable!("not arithmetic"),
    };
    if r.is_finite() {
        Ok(r)
    } else {
        Err("floating-point overflow")
    }
}

fn arithmetic(
    op: BinaryOp,
    l: &CoreValue,
    r: &CoreValue,
    at: Option<&SourceLocation>,
) -> CoreValue {
    if let (BinaryOp::Add, CoreValue::String(a), CoreValue::String(b)) = (op, l, r) {
        return CoreValue::String(Arc::from(format!("{a}{b}")));
    }
    let type_error = || {
        fail(
            SpecialKind::TypeErr,
            at,
            format!(
                "cannot apply `{op}` to {} and {}",
                l.core_type(),
                r.core_type()
            ),
        )
    };
    let (Some(a), Some(b)) = (num(l), num(r)) else {
        return type_error();
    };
    let Some(pair) = promote(a, b) else {
        return type_error();
    };
    let arith = |msg: &str| fail(SpecialKind::Arith, at, msg.to_string());
    match pair {
        Pair::Int(a, b) => int_arith(op, a, b).map_or_else(arith, CoreValue::Integer),
        Pair::Sized(w, a, b) => match int_arith(op, a, b) {
            Ok(v) if w.contains(v) => CoreValue::Sized(w, v),
            Ok(_) => arith(&format!("int{} overflow", w.bits())),
            Err(e) => arith(e),
        },
        Pair::F32(a, b) => float32_arith(op, a, b).map_or_else(arith, CoreValue::Float),
        Pair::F64(a, b) => float_arith(op, a, b).map_or_else(arith, CoreValue::Double),
    }
}

/// Value equality as seen by the `=` operator. Untyped numbers compare
/// after promotion; sized integers only equal the same width; `Void` equals
/// `true`.
pub fn values_equal(l: &CoreValue, r: &CoreValue) -> bool {
    match (l, r) {
        (CoreValue::Void, other) | (other, CoreValue::Void) => other.as_bool() == Some(true),
        _ => match (num(l), num(r)) {
            (Some(a), Some(b)) => match promote(a, b) {
                Some(Pair::Int(a, b)) => a == b,
                Some(Pair::Sized(_, a, b)) => a == b,
                Some(Pair::F32(a, b)) => a == b,
                Some(Pair::F64(a, b)) => a == b,
                None => false,
            },
            _ => l == r,
        },
    }
}

fn ordering(l: &CoreValue, r: &CoreValue) -> Option<Ordering> {
    match (l, r) {
        (CoreValue::String(a), CoreValue::String(b)) => Some(a.cmp(b)),
        (CoreValue::Character(a), CoreValue::Character(b)) => Some(a.cmp(b)),
        _ => match promote(num(l)?, num(r)?)? {
            Pair::Int(a, b) | Pair::Sized(_, a, b) => Some(a.cmp(&b)),
            Pair::F32(a, b) => a.partial_cmp(&b),
            Pair::F64(a, b) => a.partial_cmp(&b),
        },
    }
}

pub fn apply_binary(
    op: BinaryOp,
    l: &CoreValue,
    r: &CoreValue,
    at: Option<&SourceLocation>,
) -> CoreValue {
    if let Some(s) = combine_special(l, r) {
        return s;
    }
    match op {
        _ if op.is_arithmetic() => arithmetic(op, l, r, at),
        BinaryOp::Eq => CoreValue::Boolean(values_equal(l, r)),
        BinaryOp::Ne => CoreValue::Boolean(!values_equal(l, r)),
        BinaryOp::And | BinaryOp::Or => match (l.as_bool(), r.as_bool()) {
            (Some(a), Some(b)) => {
                CoreValue::Boolean(if op == BinaryOp::And { a && b } else { a || b })
            }
            _ => fail(SpecialKind::TypeErr, at, format!("`{op}` needs booleans")),
        },
        _ => match ordering(l, r) {
            Some(ord) => CoreValue::Boolean(match op {
                BinaryOp::Lt => ord.is_lt(),
                BinaryOp::Le => ord.is_le(),
                BinaryOp::Gt => ord.is_gt(),
                BinaryOp::Ge => ord.is_ge(),
                _ => unreachable!(),
            }),
            None => fail(
                SpecialKind::TypeErr,
                at,
                format!("cannot compare {} with {}", l.core_type(), r.core_type()),
            ),
        },
    }
}

pub fn apply_unary(op: UnaryOp, v: &CoreValue, at: Option<&SourceLocation>) -> CoreValue {
    if v.is_special() {
        return v.clone();
    }
    match (op, v) {
        (UnaryOp::Neg, CoreValue::Integer(i)) => i.checked_neg().map_or_else(
            || fail(SpecialKind::Arith, at, "integer overflow".into()),
            CoreValue::Integer,
        ),
        (UnaryOp::Neg, CoreValue::Sized(w, i)) => match i.checked_neg() {
            Some(n) if w.contains(n) => CoreValue::Sized(*w, n),
            _ => fail(SpecialKind::Arith, at, format!("int{} overflow", w.bits())),
        },
        (UnaryOp::Neg, CoreValue::Float(x)) => CoreValue::Float(-x),
        (UnaryOp::Neg, CoreValue::Double(x)) => CoreValue::Double(-x),
        (UnaryOp::Not, v) if v.as_bool().is_some() => {
            CoreValue::Boolean(!v.as_bool().unwrap_or(false))
        }
        _ => fail(
            SpecialKind::TypeErr,
            at,
            format!("cannot apply `{op}` to {}", v.core_type()),
        ),
    }
}
