use std::fmt;

use crate::context::{DimensionDecl, DimensionName};
use crate::types::{BinaryOp, CoreValue, LiteralKind, SourceLocation, SpecialKind, UnaryOp};

/// Line and column of a node, both 1-based.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub line: u32,
    pub column: u32,
}

impl Location {
    pub fn new(line: u32, column: u32) -> Self {
        Location { line, column }
    }

    pub fn to_source(self, file: Option<&std::sync::Arc<str>>) -> SourceLocation {
        SourceLocation {
            file: file.cloned(),
            line: self.line,
            column: self.column,
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceOperator {
    First,
    Next,
    Fby,
    Wvr,
    Asa,
    Upon,
}

impl SurfaceOperator {
    pub fn keyword(self) -> &'static str {
        match self {
            SurfaceOperator::First => "first",
            SurfaceOperator::Next => "next",
            SurfaceOperator::Fby => "fby",
            SurfaceOperator::Wvr => "wvr",
            SurfaceOperator::Asa => "asa",
            SurfaceOperator::Upon => "upon",
        }
    }

    pub fn is_unary(self) -> bool {
        matches!(self, SurfaceOperator::First | SurfaceOperator::Next)
    }
}

/// A `dimension : tag` pair of a context literal. The dimension side is an
/// expression: a bare identifier names a dimension unless it is bound to a
/// variable, in which case that variable must evaluate to a dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextEntry {
    pub dimension: Expression,
    pub tag: Expression,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeEntry {
    pub dimension: Expression,
    pub child: TreeChild,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeChild {
    Leaf(Expression),
    Subtree {
        default: Option<Expression>,
        entries: Vec<TreeEntry>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    /// An untyped literal; `lexeme` is its source text.
    Literal {
        value: CoreValue,
        lexeme: String,
    },
    /// `kind<lexeme>`
    TypedLiteral {
        kind: LiteralKind,
        lexeme: String,
        value: CoreValue,
    },
    /// `special<kind>`
    SpecialLiteral(SpecialKind),
    Identifier(String),
    Binary(BinaryOp, Box<Expression>, Box<Expression>),
    Unary(UnaryOp, Box<Expression>),
    /// `isspecial e` or `isspecial<kind> e`
    IsSpecial(Option<SpecialKind>, Box<Expression>),
    Conditional(Box<Expression>, Box<Expression>, Box<Expression>),
    Apply(String, Vec<Expression>),
    MemberCall(Box<Expression>, String, Vec<Expression>),
    /// `#d`
    TagQuery(DimensionName),
    /// `body @ context`
    ContextSwitch(Box<Expression>, Box<Expression>),
    ContextLiteral(Vec<ContextEntry>),
    ContextSetLiteral(Vec<Vec<ContextEntry>>),
    TreeLiteral(Vec<TreeEntry>),
    Where(Box<Expression>, Vec<Declaration>),
    SurfaceOp(SurfaceOperator, Vec<Expression>, DimensionName),
}

/// An expression with its position. Positions do not take part in
/// equality, so reparsed or rewritten trees compare by shape.
#[derive(Debug, Clone)]
pub struct Expression {
    pub kind: ExprKind,
    pub loc: Location,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expression {
    pub fn new(kind: ExprKind, loc: Location) -> Self {
        Expression { kind, loc }
    }

    /// Builds a node without a meaningful position.
    pub fn synthetic(kind: ExprKind) -> Self {
        Expression {
            kind,
            loc: Location::default(),
        }
    }

    pub fn int(v: i64) -> Self {
        Expression::synthetic(ExprKind::Literal {
            value: CoreValue::Integer(v),
            lexeme: v.to_string(),
        })
    }

    pub fn ident(name: &str) -> Self {
        Expression::synthetic(ExprKind::Identifier(name.to_string()))
    }

    /// True when no stream operator remains anywhere in the tree.
    pub fn is_core(&self) -> bool {
        let mut core = true;
        self.walk(&mut |e| {
            if matches!(e.kind, ExprKind::SurfaceOp(..)) {
                core = false;
            }
        });
        core
    }

    /// Direct sub-expressions, including declaration bodies and the parts
    /// of context literals, in source order.
    pub fn children(&self) -> Vec<&Expression> {
        let mut out = Vec::new();
        match &self.kind {
            ExprKind::Literal { .. }
            | ExprKind::TypedLiteral { .. }
            | ExprKind::SpecialLiteral(_)
            | ExprKind::Identifier(_)
            | ExprKind::TagQuery(_) => {}
            ExprKind::Binary(_, l, r) | ExprKind::ContextSwitch(l, r) => out.extend([&**l, &**r]),
            ExprKind::Unary(_, e) | ExprKind::IsSpecial(_, e) => out.push(&**e),
            ExprKind::Conditional(c, t, e) => out.extend([&**c, &**t, &**e]),
            ExprKind::Apply(_, args) | ExprKind::SurfaceOp(_, args, _) => out.extend(args),
            ExprKind::MemberCall(recv, _, args) => {
                out.push(&**recv);
                out.extend(args);
            }
            ExprKind::ContextLiteral(entries) => entry_children(entries, &mut out),
            ExprKind::ContextSetLiteral(points) => {
                points.iter().for_each(|p| entry_children(p, &mut out))
            }
            ExprKind::TreeLiteral(entries) => tree_children(entries, &mut out),
            ExprKind::Where(body, decls) => {
                out.push(&**body);
                for d in decls {
                    if let Declaration::Var { body, .. } | Declaration::Fun { body, .. } = d {
                        out.push(body);
                    }
                }
            }
        }
        out
    }

    /// Pre-order traversal over every sub-expression, including those in
    /// declarations and context literals.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expression)) {
        f(self);
        match &self.kind {
            ExprKind::Literal { .. }
            | ExprKind::TypedLiteral { .. }
            | ExprKind::SpecialLiteral(_)
            | ExprKind::Identifier(_)
            | ExprKind::TagQuery(_) => {}
            ExprKind::Binary(_, l, r) | ExprKind::ContextSwitch(l, r) => {
                l.walk(f);
                r.walk(f);
            }
            ExprKind::Unary(_, e) | ExprKind::IsSpecial(_, e) => e.walk(f),
            ExprKind::Conditional(c, t, e) => {
                c.walk(f);
                t.walk(f);
                e.walk(f);
            }
            ExprKind::Apply(_, args) | ExprKind::SurfaceOp(_, args, _) => {
                args.iter().for_each(|a| a.walk(f))
            }
            ExprKind::MemberCall(recv, _, args) => {
                recv.walk(f);
                args.iter().for_each(|a| a.walk(f));
            }
            ExprKind::ContextLiteral(entries) => walk_entries(entries, f),
            ExprKind::ContextSetLiteral(points) => points.iter().for_each(|p| walk_entries(p, f)),
            ExprKind::TreeLiteral(entries) => walk_tree(entries, f),
            ExprKind::Where(body, decls) => {
                body.walk(f);
                for d in decls {
                    match d {
                        Declaration::Var { body, .. } | Declaration::Fun { body, .. } => {
                            body.walk(f)
                        }
                        Declaration::Dim(_) => {}
                    }
                }
            }
        }
    }
}

fn entry_children<'a>(entries: &'a [ContextEntry], out: &mut Vec<&'a Expression>) {
    for e in entries {
        out.extend([&e.dimension, &e.tag]);
    }
}

fn tree_children<'a>(entries: &'a [TreeEntry], out: &mut Vec<&'a Expression>) {
    for e in entries {
        out.push(&e.dimension);
        match &e.child {
            TreeChild::Leaf(t) => out.push(t),
            TreeChild::Subtree { default, entries } => {
                out.extend(default.as_ref());
                tree_children(entries, out);
            }
        }
    }
}

fn walk_entries<'a>(entries: &'a [ContextEntry], f: &mut dyn FnMut(&'a Expression)) {
    for e in entries {
        e.dimension.walk(f);
        e.tag.walk(f);
    }
}

fn walk_tree<'a>(entries: &'a [TreeEntry], f: &mut dyn FnMut(&'a Expression)) {
    for e in entries {
        e.dimension.walk(f);
        match &e.child {
            TreeChild::Leaf(t) => t.walk(f),
            TreeChild::Subtree { default, entries } => {
                if let Some(d) = default {
                    d.walk(f);
                }
                walk_tree(entries, f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Declaration {
    Var {
        name: String,
        body: Expression,
    },
    Fun {
        name: String,
        params: Vec<String>,
        body: Expression,
    },
    Dim(DimensionDecl),
}

impl Declaration {
    pub fn name(&self) -> &str {
        match self {
            Declaration::Var { name, .. } | Declaration::Fun { name, .. } => name,
            Declaration::Dim(d) => d.name.as_str(),
        }
    }
}
