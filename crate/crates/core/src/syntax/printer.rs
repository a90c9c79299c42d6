//! Source printer. Output reparses to an equal tree; parentheses are only
//! added where precedence requires them.

use std::fmt::{self, Write};

use super::ast::{
    ContextEntry, Declaration, ExprKind, Expression, SurfaceOperator, TreeChild, TreeEntry,
};
use crate::types::{BinaryOp, CoreValue, UnaryOp};

const WHERE: u8 = 0;
const COND: u8 = 1;
const FBY: u8 = 2;
const WVR: u8 = 3;
const UNARY: u8 = 9;
const SWITCH: u8 = 10;
const POSTFIX: u8 = 11;
const ATOM: u8 = 12;

fn binary_prec(op: BinaryOp) -> u8 {
    match op {
        BinaryOp::Or => 4,
        BinaryOp::And => 5,
        BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
            6
        }
        BinaryOp::Add | BinaryOp::Sub => 7,
        BinaryOp::Mul | BinaryOp::Div | BinaryOp::Mod => 8,
    }
}

fn is_negative_number(e: &Expression) -> bool {
    matches!(&e.kind, ExprKind::Literal { lexeme, value: CoreValue::Integer(_) | CoreValue::Double(_) } if lexeme.starts_with('-'))
}

fn is_plain_number(e: &Expression) -> bool {
    matches!(
        &e.kind,
        ExprKind::Literal {
            value: CoreValue::Integer(_) | CoreValue::Double(_),
            ..
        }
    ) && !is_negative_number(e)
}

fn precedence(e: &Expression) -> u8 {
    match &e.kind {
        ExprKind::Where(..) => WHERE,
        ExprKind::Conditional(..) => COND,
        ExprKind::SurfaceOp(SurfaceOperator::Fby, ..) => FBY,
        ExprKind::SurfaceOp(op, ..) if !op.is_unary() => WVR,
        ExprKind::SurfaceOp(..) | ExprKind::Unary(..) | ExprKind::IsSpecial(..) => UNARY,
        ExprKind::Binary(op, ..) => binary_prec(*op),
        ExprKind::ContextSwitch(..) => SWITCH,
        ExprKind::MemberCall(..) => POSTFIX,
        _ if is_negative_number(e) => UNARY,
        _ => ATOM,
    }
}

fn dim_suffix(d: &crate::context::DimensionName) -> String {
    if d.as_str() == "t" {
        String::new()
    } else {
        format!(".{d}")
    }
}

struct Printer<'a, 'b> {
    out: &'a mut fmt::Formatter<'b>,
}

impl Printer<'_, '_> {
    fn expr(&mut self, e: &Expression, min: u8) -> fmt::Result {
        if precedence(e) < min {
            self.out.write_char('(')?;
            self.bare(e)?;
            self.out.write_char(')')
        } else {
            self.bare(e)
        }
    }

    // inside braces a nested brace literal would be read as structure
    fn operand(&mut self, e: &Expression, min: u8) -> fmt::Result {
        let braced = matches!(
            e.kind,
            ExprKind::ContextLiteral(_) | ExprKind::ContextSetLiteral(_) | ExprKind::TreeLiteral(_)
        );
        if braced {
            self.out.write_char('(')?;
            self.bare(e)?;
            self.out.write_char(')')
        } else {
            self.expr(e, min)
        }
    }

    fn list(&mut self, items: &[Expression]) -> fmt::Result {
        for (i, a) in items.iter().enumerate() {
            if i > 0 {
                self.out.write_str(", ")?;
            }
            self.expr(a, WHERE)?;
        }
        Ok(())
    }

    fn entries(&mut self, entries: &[ContextEntry]) -> fmt::Result {
        self.out.write_char('{')?;
        for (i, e) in entries.iter().enumerate() {
            if i > 0 {
                self.out.write_str(", ")?;
            }
            self.operand(&e.dimension, 4)?;
            self.out.write_char(':')?;
            self.operand(&e.tag, FBY)?;
        }
        self.out.write_char('}')
    }

    fn tree(&mut self, entries: &[TreeEntry]) -> fmt::Result {
        self.out.write_char('{')?;
        for (i, e) in entries.iter().enumerate() {
            if i > 0 {
                self.out.write_str(", ")?;
            }
            self.operand(&e.dimension, 4)?;
            self.out.write_char(':')?;
            match &e.child {
                TreeChild::Leaf(t) => self.operand(t, FBY)?,
                TreeChild::Subtree { default, entries } => {
                    if let Some(d) = default {
                        self.operand(d, FBY)?;
                        self.out.write_char(' ')?;
                    }
                    self.tree(entries)?;
                }
            }
        }
        self.out.write_char('}')
    }

    fn bare(&mut self, e: &Expression) -> fmt::Result {
        match &e.kind {
            ExprKind::Literal { lexeme, .. } => self.out.write_str(lexeme),
            ExprKind::TypedLiteral { kind, lexeme, .. } => write!(self.out, "{kind}<{lexeme}>"),
            ExprKind::SpecialLiteral(k) => write!(self.out, "special<{k}>"),
            ExprKind::Identifier(name) => self.out.write_str(name),
            ExprKind::TagQuery(d) => write!(self.out, "#{d}"),
            ExprKind::Binary(op, l, r) => {
                let p = binary_prec(*op);
                self.expr(l, p)?;
                write!(self.out, " {op} ")?;
                self.expr(r, p + 1)
            }
            ExprKind::Unary(op, operand) => {
                match op {
                    UnaryOp::Neg => self.out.write_char('-')?,
                    UnaryOp::Not => self.out.write_str("not ")?,
                }
                if *op == UnaryOp::Neg && is_plain_number(operand) {
                    self.out.write_char('(')?;
                    self.bare(operand)?;
                    return self.out.write_char(')');
                }
                self.expr(operand, UNARY)
            }
            ExprKind::IsSpecial(kind, operand) => {
                match kind {
                    Some(k) => write!(self.out, "isspecial<{k}> ")?,
                    None => self.out.write_str("isspecial ")?,
                }
                self.expr(operand, UNARY)
            }
            ExprKind::Conditional(c, t, f) => {
                self.out.write_str("if ")?;
                self.expr(c, WHERE)?;
                self.out.write_str(" then ")?;
                self.expr(t, WHERE)?;
                self.out.write_str(" else ")?;
                self.expr(f, FBY)
            }
            ExprKind::Apply(name, args) => {
                write!(self.out, "{name}(")?;
                self.list(args)?;
                self.out.write_char(')')
            }
            ExprKind::MemberCall(recv, name, args) => {
                self.expr(recv, POSTFIX)?;
                write!(self.out, ".{name}(")?;
                self.list(args)?;
                self.out.write_char(')')
            }
            ExprKind::ContextSwitch(body, ctx) => {
                self.expr(body, SWITCH)?;
                self.out.write_str(" @ ")?;
                self.expr(ctx, POSTFIX)
            }
            ExprKind::ContextLiteral(entries) => self.entries(entries),
            ExprKind::ContextSetLiteral(points) => {
                self.out.write_char('{')?;
                for (i, p) in points.iter().enumerate() {
                    if i > 0 {
                        self.out.write_str(", ")?;
                    }
                    self.entries(p)?;
                }
                self.out.write_char('}')
            }
            ExprKind::TreeLiteral(entries) => self.tree(entries),
            ExprKind::Where(body, decls) => {
                self.expr(body, COND)?;
                self.out.write_str(" where")?;
                for d in decls {
                    self.out.write_char(' ')?;
                    self.declaration(d)?;
                }
                self.out.write_str(" end")
            }
            ExprKind::SurfaceOp(op, operands, d) => {
                if op.is_unary() {
                    write!(self.out, "{}{} ", op.keyword(), dim_suffix(d))?;
                    self.expr(&operands[0], UNARY)
                } else {
                    let (lmin, rmin) = if *op == SurfaceOperator::Fby {
                        (WVR, FBY)
                    } else {
                        (WVR, 4)
                    };
                    self.expr(&operands[0], lmin)?;
                    write!(self.out, " {}{} ", op.keyword(), dim_suffix(d))?;
                    self.expr(&operands[1], rmin)
                }
            }
        }
    }

    fn declaration(&mut self, d: &Declaration) -> fmt::Result {
        match d {
            Declaration::Var { name, body } => {
                write!(self.out, "{name} = ")?;
                self.expr(body, WHERE)?;
            }
            Declaration::Fun { name, params, body } => {
                write!(self.out, "{name}({}) = ", params.join(", "))?;
                self.expr(body, WHERE)?;
            }
            Declaration::Dim(decl) => {
                write!(self.out, "dimension {}", decl.name)?;
                if let Some(t) = &decl.default_tag {
                    write!(self.out, " = {t}")?;
                }
            }
        }
        self.out.write_char(';')
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer { out: f }.expr(self, WHERE)
    }
}

impl fmt::Display for Declaration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer { out: f }.declaration(self)
    }
}
