//! Recursive-descent parser for both dialects.
//!
//! Precedence, loosest first: `where`, conditional, `fby`, `wvr`/`asa`/
//! `upon`, `or`, `and`, comparison, additive, multiplicative, unary
//! (including `first`/`next`/`isspecial`), `@`, member call, atoms. A
//! conditional may start wherever an operand may; its `else` branch
//! extends as far as it can.

use std::collections::HashSet;

use super::ast::{
    ContextEntry, Declaration, ExprKind, Expression, Location, SurfaceOperator, TreeChild,
    TreeEntry,
};
use super::lexer::{tokenize, Keyword, Spanned, Token};
use super::SyntaxError;
use crate::context::{DimensionDecl, DimensionName, TagValue};
use crate::types::{typed_literal, BinaryOp, CoreValue, UnaryOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dialect {
    /// Core operators only.
    Core,
    /// Core plus the stream operators.
    Surface,
}

pub struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    dialect: Dialect,
}

type PResult<T> = Result<T, SyntaxError>;

const DEFAULT_DIMENSION: &str = "t";

impl Parser {
    /// `first_line` is the line number of the first source line, so that
    /// segments cut from a larger file report file positions.
    pub fn new(src: &str, dialect: Dialect, first_line: u32) -> PResult<Self> {
        Ok(Parser {
            tokens: tokenize(src, first_line)?,
            pos: 0,
            dialect,
        })
    }

    /// A whole program: one expression, optionally followed by `;`.
    pub fn parse_program(mut self) -> PResult<Expression> {
        let e = self.expr()?;
        self.eat_punct(";");
        if self.peek() != &Token::Eof {
            return Err(self.unexpected(&["end of input"]));
        }
        Ok(e)
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos].token
    }

    fn peek_at(&self, n: usize) -> &Token {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].token
    }

    fn loc(&self) -> Location {
        self.tokens[self.pos].loc
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].token.clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError::new(self.loc(), format!("unexpected {}", self.peek()))
            .expecting(expected.iter().map(|s| s.to_string()).collect())
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Token::Punct(q) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{p}`")]))
        }
    }

    fn is_kw(&self, k: Keyword) -> bool {
        self.peek() == &Token::Keyword(k)
    }

    fn expect_kw(&mut self, k: Keyword) -> PResult<()> {
        if self.is_kw(k) {
            self.advance();
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{}`", k.text())]))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Token::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    pub(crate) fn expr(&mut self) -> PResult<Expression> {
        let mut body = self.fby_level()?;
        while self.is_kw(Keyword::Where) {
            let loc = self.loc();
            self.advance();
            let decls = self.declarations()?;
            body = Expression::new(ExprKind::Where(Box::new(body), decls), loc);
        }
        Ok(body)
    }

    fn declarations(&mut self) -> PResult<Vec<Declaration>> {
        let mut decls = Vec::new();
        let mut seen = HashSet::new();
        while !self.is_kw(Keyword::End) {
            let loc = self.loc();
            let decl = self.declaration()?;
            if !seen.insert(decl.name().to_string()) {
                return Err(SyntaxError::new(
                    loc,
                    format!("`{}` is defined twice in this clause", decl.name()),
                ));
            }
            decls.push(decl);
        }
        self.advance();
        Ok(decls)
    }

    fn declaration(&mut self) -> PResult<Declaration> {
        if self.is_kw(Keyword::Dimension) {
            self.advance();
            let loc = self.loc();
            let name = self.ident()?;
            let name =
                DimensionName::new(name).map_err(|e| SyntaxError::new(loc, e.to_string()))?;
            let decl = if self.eat_punct("=") {
                DimensionDecl::with_default(name, self.constant_tag()?)
            } else {
                DimensionDecl::new(name)
            };
            self.expect_punct(";")?;
            return Ok(Declaration::Dim(decl));
        }
        let name = self.ident()?;
        if self.eat_punct("(") {
            let mut params = Vec::new();
            if !self.is_punct(")") {
                loop {
                    let loc = self.loc();
                    let p = self.ident()?;
                    if params.contains(&p) {
                        return Err(SyntaxError::new(
                            loc,
                            format!("parameter `{p}` is repeated"),
                        ));
                    }
                    params.push(p);
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
            self.expect_punct(")")?;
            self.expect_punct("=")?;
            let body = self.expr()?;
            self.expect_punct(";")?;
            return Ok(Declaration::Fun { name, params, body });
        }
        self.expect_punct("=")?;
        let body = self.expr()?;
        self.expect_punct(";")?;
        Ok(Declaration::Var { name, body })
    }

    fn constant_tag(&mut self) -> PResult<TagValue> {
        let negative = self.eat_punct("-");
        let loc = self.loc();
        match self.advance() {
            Token::Int(text) => {
                let text = if negative { format!("-{text}") } else { text };
                text.parse()
                    .map(TagValue::Int)
                    .map_err(|_| SyntaxError::new(loc, format!("`{text}` is out of range")))
            }
            Token::Str(s) if !negative => Ok(TagValue::Str(s)),
            _ => Err(SyntaxError::new(loc, "expected an integer or string tag")),
        }
    }

    fn surface_dimension(&mut self) -> PResult<DimensionName> {
        if self.is_punct(".") && matches!(self.peek_at(1), Token::Ident(_)) {
            self.advance();
            let loc = self.loc();
            let name = self.ident()?;
            return DimensionName::new(name).map_err(|e| SyntaxError::new(loc, e.to_string()));
        }
        Ok(crate::context::dim(DEFAULT_DIMENSION))
    }

    fn surface_op(&mut self, op: SurfaceOperator) -> PResult<(DimensionName, Location)> {
        let loc = self.loc();
        if self.dialect == Dialect::Core {
            return Err(SyntaxError::new(
                loc,
                format!(
                    "`{}` is a stream operator; it is not part of the core dialect",
                    op.keyword()
                ),
            ));
        }
        self.advance();
        Ok((self.surface_dimension()?, loc))
    }

    fn fby_level(&mut self) -> PResult<Expression> {
        let lhs = self.wvr_level()?;
        if self.is_kw(Keyword::Fby) {
            let (d, loc) = self.surface_op(SurfaceOperator::Fby)?;
            let rhs = self.fby_level()?;
            return Ok(Expression::new(
                ExprKind::SurfaceOp(SurfaceOperator::Fby, vec![lhs, rhs], d),
                loc,
            ));
        }
        Ok(lhs)
    }

    fn wvr_level(&mut self) -> PResult<Expression> {
        let mut lhs = self.or_level()?;
        loop {
            let op = match self.peek() {
                Token::Keyword(Keyword::Wvr) => SurfaceOperator::Wvr,
                Token::Keyword(Keyword::Asa) => SurfaceOperator::Asa,
                Token::Keyword(Keyword::Upon) => SurfaceOperator::Upon,
                _ => return Ok(lhs),
            };
            let (d, loc) = self.surface_op(op)?;
            let rhs = self.or_level()?;
            lhs = Expression::new(ExprKind::SurfaceOp(op, vec![lhs, rhs], d), loc);
        }
    }

    fn binary_level(
        &mut self,
        ops: &[(Token, BinaryOp)],
        next: fn(&mut Self) -> PResult<Expression>,
    ) -> PResult<Expression> {
        let mut lhs = next(self)?;
        while let Some((_, op)) = ops.iter().find(|(t, _)| t == self.peek()) {
            let op = *op;
            let loc = self.loc();
            self.advance();
            let rhs = next(self)?;
            lhs = Expression::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), loc);
        }
        Ok(lhs)
    }

    fn or_level(&mut self) -> PResult<Expression> {
        self.binary_level(
            &[(Token::Keyword(Keyword::Or), BinaryOp::Or)],
            Self::and_level,
        )
    }

    fn and_level(&mut self) -> PResult<Expression> {
        self.binary_level(
            &[(Token::Keyword(Keyword::And), BinaryOp::And)],
            Self::cmp_level,
        )
    }

    fn cmp_level(&mut self) -> PResult<Expression> {
        self.binary_level(
            &[
                (Token::Punct("="), BinaryOp::Eq),
                (Token::Punct("!="), BinaryOp::Ne),
                (Token::Punct("<"), BinaryOp::Lt),
                (Token::Punct("<="), BinaryOp::Le),
                (Token::Punct(">"), BinaryOp::Gt),
                (Token::Punct(">="), BinaryOp::Ge),
            ],
            Self::add_level,
        )
    }

    fn add_level(&mut self) -> PResult<Expression> {
        self.binary_level(
            &[
                (Token::Punct("+"), BinaryOp::Add),
                (Token::Punct("-"), BinaryOp::Sub),
            ],
            Self::mul_level,
        )
    }

    fn mul_level(&mut self) -> PResult<Expression> {
        self.binary_level(
            &[
                (Token::Punct("*"), BinaryOp::Mul),
                (Token::Punct("/"), BinaryOp::Div),
                (Token::Keyword(Keyword::Mod), BinaryOp::Mod),
            ],
            Self::unary,
        )
    }

    fn unary(&mut self) -> PResult<Expression> {
        let loc = self.loc();
        match self.peek().clone() {
            Token::Punct("-") => {
                self.advance();
                // `-` directly on a number literal is part of the literal
                let bare_number = matches!(self.peek(), Token::Int(_) | Token::Float(_))
                    && !matches!(self.peek_at(1), Token::Punct("@" | "."));
                if bare_number {
                    return self.number(loc, true);
                }
                let e = self.unary()?;
                Ok(Expression::new(
                    ExprKind::Unary(UnaryOp::Neg, Box::new(e)),
                    loc,
                ))
            }
            Token::Keyword(Keyword::Not) => {
                self.advance();
                let e = self.unary()?;
                Ok(Expression::new(
                    ExprKind::Unary(UnaryOp::Not, Box::new(e)),
                    loc,
                ))
            }
            Token::IsSpecial(kind) => {
                self.advance();
                let e = self.unary()?;
                Ok(Expression::new(ExprKind::IsSpecial(kind, Box::new(e)), loc))
            }
            Token::Keyword(k @ (Keyword::First | Keyword::Next)) => {
                let op = if k == Keyword::First {
                    SurfaceOperator::First
                } else {
                    SurfaceOperator::Next
                };
                let (d, loc) = self.surface_op(op)?;
                let e = self.unary()?;
                Ok(Expression::new(ExprKind::SurfaceOp(op, vec![e], d), loc))
            }
            _ => self.switch_level(),
        }
    }

    fn switch_level(&mut self) -> PResult<Expression> {
        let mut lhs = self.postfix()?;
        while self.is_punct("@") {
            let loc = self.loc();
            self.advance();
            let ctx = self.postfix()?;
            lhs = Expression::new(ExprKind::ContextSwitch(Box::new(lhs), Box::new(ctx)), loc);
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> PResult<Expression> {
        let mut e = self.atom()?;
        while self.is_punct(".") {
            let loc = self.loc();
            self.advance();
            let name = self.ident()?;
            let args = self.arguments()?;
            e = Expression::new(ExprKind::MemberCall(Box::new(e), name, args), loc);
        }
        Ok(e)
    }

    fn arguments(&mut self) -> PResult<Vec<Expression>> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if !self.eat_punct(")") {
            loop {
                args.push(self.expr()?);
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        Ok(args)
    }

    fn number(&mut self, loc: Location, negative: bool) -> PResult<Expression> {
        let sign = if negative { "-" } else { "" };
        let (value, lexeme) = match self.advance() {
            Token::Int(text) => {
                let lexeme = format!("{sign}{text}");
                let v: i64 = lexeme.parse().map_err(|_| {
                    SyntaxError::new(loc, format!("integer literal `{lexeme}` is out of range"))
                })?;
                (CoreValue::Integer(v), lexeme)
            }
            Token::Float(text) => {
                let lexeme = format!("{sign}{text}");
                let v: f64 = lexeme
                    .parse()
                    .map_err(|_| SyntaxError::new(loc, format!("malformed number `{lexeme}`")))?;
                if !v.is_finite() {
                    return Err(SyntaxError::new(
                        loc,
                        format!("number `{lexeme}` is out of range"),
                    ));
                }
                (CoreValue::Double(v), lexeme)
            }
            _ => return Err(SyntaxError::new(loc, "expected a number")),
        };
        Ok(Expression::new(ExprKind::Literal { value, lexeme }, loc))
    }

    fn atom(&mut self) -> PResult<Expression> {
        let loc = self.loc();
        match self.peek().clone() {
            Token::Int(_) | Token::Float(_) => self.number(loc, false),
            Token::Str(s) => {
                self.advance();
                let mut lexeme = String::new();
                crate::context::write_quoted(&mut lexeme, &s).ok();
                Ok(Expression::new(
                    ExprKind::Literal {
                        value: CoreValue::string(&s),
                        lexeme,
                    },
                    loc,
                ))
            }
            Token::Char(c) => {
                self.advance();
                let value = CoreValue::Character(c);
                let lexeme = value.lexeme();
                Ok(Expression::new(ExprKind::Literal { value, lexeme }, loc))
            }
            Token::Keyword(k @ (Keyword::True | Keyword::False)) => {
                self.advance();
                let b = k == Keyword::True;
                Ok(Expression::new(
                    ExprKind::Literal {
                        value: CoreValue::Boolean(b),
                        lexeme: b.to_string(),
                    },
                    loc,
                ))
            }
            Token::Typed(kind, lexeme) => {
                self.advance();
                let value = typed_literal(kind.token(), &lexeme)
                    .map_err(|e| SyntaxError::new(loc, e.to_string()))?;
                Ok(Expression::new(
                    ExprKind::TypedLiteral {
                        kind,
                        lexeme,
                        value,
                    },
                    loc,
                ))
            }
            Token::Special(kind) => {
                self.advance();
                Ok(Expression::new(ExprKind::SpecialLiteral(kind), loc))
            }
            Token::Ident(name) => {
                self.advance();
                if self.is_punct("(") {
                    let args = self.arguments()?;
                    return Ok(Expression::new(ExprKind::Apply(name, args), loc));
                }
                Ok(Expression::new(ExprKind::Identifier(name), loc))
            }
            Token::Punct("#") => {
                self.advance();
                let dloc = self.loc();
                let name = self.ident()?;
                let d =
                    DimensionName::new(name).map_err(|e| SyntaxError::new(dloc, e.to_string()))?;
                Ok(Expression::new(ExprKind::TagQuery(d), loc))
            }
            Token::Punct("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Token::Punct("{") => self.context_literal(),
            Token::Keyword(Keyword::If) => {
                self.advance();
                let test = self.expr()?;
                self.expect_kw(Keyword::Then)?;
                let then = self.expr()?;
                self.expect_kw(Keyword::Else)?;
                let otherwise = self.fby_level()?;
                Ok(Expression::new(
                    ExprKind::Conditional(Box::new(test), Box::new(then), Box::new(otherwise)),
                    loc,
                ))
            }
            _ => Err(self.unexpected(&["expression"])),
        }
    }

    fn context_literal(&mut self) -> PResult<Expression> {
        let loc = self.loc();
        self.expect_punct("{")?;
        if self.is_punct("{") {
            let mut points = Vec::new();
            loop {
                let ploc = self.loc();
                self.expect_punct("{")?;
                let entries = self.tree_entries()?;
                match flatten(entries) {
                    Some(point) => points.push(point),
                    None => {
                        return Err(SyntaxError::new(
                            ploc,
                            "elements of a context set must be points",
                        ))
                    }
                }
                if self.eat_punct("}") {
                    break;
                }
                self.expect_punct(",")?;
            }
            return Ok(Expression::new(ExprKind::ContextSetLiteral(points), loc));
        }
        let entries = self.tree_entries()?;
        let kind = match flatten(entries.clone()) {
            Some(point) => ExprKind::ContextLiteral(point),
            None => ExprKind::TreeLiteral(entries),
        };
        Ok(Expression::new(kind, loc))
    }

    // after `{`, through the closing `}`
    fn tree_entries(&mut self) -> PResult<Vec<TreeEntry>> {
        let mut entries = Vec::new();
        if self.eat_punct("}") {
            return Ok(entries);
        }
        loop {
            let dimension = self.or_level()?;
            self.expect_punct(":")?;
            let child = if self.eat_punct("{") {
                TreeChild::Subtree {
                    default: None,
                    entries: self.tree_entries()?,
                }
            } else {
                let tag = self.fby_level()?;
                if self.eat_punct("{") {
                    TreeChild::Subtree {
                        default: Some(tag),
                        entries: self.tree_entries()?,
                    }
                } else {
                    TreeChild::Leaf(tag)
                }
            };
            entries.push(TreeEntry { dimension, child });
            if self.eat_punct("}") {
                return Ok(entries);
            }
            self.expect_punct(",")?;
        }
    }
}

fn flatten(entries: Vec<TreeEntry>) -> Option<Vec<ContextEntry>> {
    entries
        .into_iter()
        .map(|e| match e.child {
            TreeChild::Leaf(tag) => Some(ContextEntry {
                dimension: e.dimension,
                tag,
            }),
            TreeChild::Subtree { .. } => None,
        })
        .collect()
}
