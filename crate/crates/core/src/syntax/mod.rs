//! Source syntax: lexer, parser, printer and the stream-operator
//! translation.
//!
//! Two dialects share one grammar. The core dialect has literals,
//! arithmetic, conditionals, `#d`, `@` and `where`; the surface dialect adds
//! `first`, `next`, `fby`, `wvr`, `asa` and `upon`, each optionally suffixed
//! with `.d` to pick a dimension other than `t`.

pub mod ast;
pub mod lexer;
mod parser;
mod printer;
mod translate;

use std::fmt;

pub use ast::{
    ContextEntry, Declaration, ExprKind, Expression, Location, SurfaceOperator, TreeChild,
    TreeEntry,
};
pub use parser::{Dialect, Parser};
pub use translate::translate_to_core;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub loc: Location,
    pub message: String,
    /// What the parser would have accepted at `loc`, if known.
    pub expected: Vec<String>,
}

impl SyntaxError {
    pub fn new(loc: Location, message: impl Into<String>) -> Self {
        SyntaxError {
            loc,
            message: message.into(),
            expected: Vec::new(),
        }
    }

    pub fn expecting(mut self, expected: Vec<String>) -> Self {
        self.expected = expected;
        self
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.loc, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

impl std::error::Error for SyntaxError {}

pub fn parse_core(src: &str) -> Result<Expression, SyntaxError> {
    parse(src, Dialect::Core, 1)
}

pub fn parse_surface(src: &str) -> Result<Expression, SyntaxError> {
    parse(src, Dialect::Surface, 1)
}

/// Parses a program whose first line is line `first_line` of some larger
/// file.
pub fn parse(src: &str, dialect: Dialect, first_line: u32) -> Result<Expression, SyntaxError> {
    Parser::new(src, dialect, first_line)?.parse_program()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::dim;
    use crate::types::{BinaryOp, CoreValue, SpecialKind};

    fn id(n: &str) -> Expression {
        Expression::ident(n)
    }

    fn surface(op: SurfaceOperator, args: Vec<Expression>) -> Expression {
        Expression::synthetic(ExprKind::SurfaceOp(op, args, dim("t")))
    }

    fn roundtrip(src: &str, dialect: Dialect) {
        let e = parse(src, dialect, 1).unwrap();
        let printed = e.to_string();
        let again = parse(&printed, dialect, 1).unwrap_or_else(|err| panic!("{printed}: {err}"));
        assert_eq!(e, again, "{src} printed as {printed}");
    }

    #[test]
    fn literal() {
        let e = parse_core("42").unwrap();
        assert_eq!(e, Expression::int(42));
        assert!(matches!(
            e.kind,
            ExprKind::Literal {
                value: CoreValue::Integer(42),
                ..
            }
        ));
    }

    #[test]
    fn tag_query() {
        assert_eq!(parse_core("#d").unwrap().kind, ExprKind::TagQuery(dim("d")));
    }

    #[test]
    fn where_clause() {
        let e = parse_core("X @ {d:1} where X = #d; end").unwrap();
        let ctx = Expression::synthetic(ExprKind::ContextLiteral(vec![ContextEntry {
            dimension: id("d"),
            tag: Expression::int(1),
        }]));
        let body = Expression::synthetic(ExprKind::ContextSwitch(Box::new(id("X")), Box::new(ctx)));
        let decl = Declaration::Var {
            name: "X".into(),
            body: Expression::synthetic(ExprKind::TagQuery(dim("d"))),
        };
        assert_eq!(
            e,
            Expression::synthetic(ExprKind::Where(Box::new(body), vec![decl]))
        );
    }

    #[test]
    fn surface_operators() {
        let n1 = Expression::synthetic(ExprKind::Binary(
            BinaryOp::Add,
            Box::new(id("N")),
            Box::new(Expression::int(1)),
        ));
        assert_eq!(
            parse_surface("0 fby N+1").unwrap(),
            surface(SurfaceOperator::Fby, vec![Expression::int(0), n1])
        );
        assert_eq!(
            parse_surface("first X").unwrap(),
            surface(SurfaceOperator::First, vec![id("X")])
        );
        assert_eq!(
            parse_surface("X wvr Y").unwrap(),
            surface(SurfaceOperator::Wvr, vec![id("X"), id("Y")])
        );
        let e = parse_surface("next.s X").unwrap();
        assert_eq!(
            e.kind,
            ExprKind::SurfaceOp(SurfaceOperator::Next, vec![id("X")], dim("s"))
        );
    }

    #[test]
    fn stream_operators_rejected_in_core() {
        let err = parse_core("0 fby 1").unwrap_err();
        assert!(err.message.contains("fby"), "{err}");
    }

    #[test]
    fn precedence() {
        let e = parse_core("1 + 2 * 3 = 7 and not false").unwrap();
        assert_eq!(e.to_string(), "1 + 2 * 3 = 7 and not false");
        let ExprKind::Binary(BinaryOp::And, l, _) = &e.kind else {
            panic!("{e:?}")
        };
        assert!(matches!(l.kind, ExprKind::Binary(BinaryOp::Eq, ..)));
        let e = parse_core("#d @ {d:3} + 1").unwrap();
        assert!(matches!(e.kind, ExprKind::Binary(BinaryOp::Add, ..)));
        let e = parse_surface("a fby b fby c").unwrap();
        let ExprKind::SurfaceOp(SurfaceOperator::Fby, ops, _) = &e.kind else {
            panic!()
        };
        assert!(matches!(
            ops[1].kind,
            ExprKind::SurfaceOp(SurfaceOperator::Fby, ..)
        ));
    }

    #[test]
    fn negative_literals() {
        assert_eq!(parse_core("-5").unwrap(), Expression::int(-5));
        let e = parse_core("-5 @ {d:1}").unwrap();
        assert!(matches!(e.kind, ExprKind::Unary(..)));
        assert_eq!(parse_core("-(5)").unwrap().to_string(), "-(5)");
        assert_eq!(parse_core("3 - -5").unwrap().to_string(), "3 - -5");
    }

    #[test]
    fn contexts() {
        let e = parse_core("{{d:1}, {d:2}}").unwrap();
        assert!(matches!(e.kind, ExprKind::ContextSetLiteral(ref p) if p.len() == 2));
        let e = parse_core(r#"{app:{cfg:"v1" {lang:"en"}}}"#).unwrap();
        assert!(matches!(e.kind, ExprKind::TreeLiteral(_)));
        assert!(parse_core("{{d:1}, {d:{e:1}}}").is_err());
    }

    #[test]
    fn errors_have_positions() {
        let err = parse_core("1 +\n  )").unwrap_err();
        assert_eq!(err.loc, Location::new(2, 3));
        assert_eq!(err.expected, vec!["expression".to_string()]);
        assert!(parse_core("X where X = 1; X = 2; end").is_err());
        assert!(parse_core("f(1) where f(a, a) = a; end").is_err());
        assert!(parse_core("1 2").is_err());
    }

    #[test]
    fn specials_and_typed() {
        let e = parse_core("isspecial<undecl> special<undecl>").unwrap();
        assert!(matches!(
            e.kind,
            ExprKind::IsSpecial(Some(SpecialKind::Undecl), _)
        ));
        assert!(parse_core("int8<300>").is_err());
        assert_eq!(
            parse_core("int8<42> != int16<42>").unwrap().to_string(),
            "int8<42> != int16<42>"
        );
    }

    #[test]
    fn printer_roundtrips() {
        for src in [
            "if a then b else c + 1",
            "(if a then b else c) + 1",
            "x where dimension d = 3; dimension e = \"k\"; f(a, b) = a + b; y = (z where z = 1; end); end",
            "foo(B, 2.0).intValue() + bar(1, 2)",
            "#d @ {d:#d - 1, e:\"x\"}",
            "{a:({b:1})}",
            "{app:\"v1\" {lang:\"en\"}, n:3}",
            "- -5 * -(3) - -x",
            "'c' = 'd' or true",
            "1 mod 2 / 3",
        ] {
            roundtrip(src, Dialect::Core);
        }
        for src in [
            "(a fby b) fby c",
            "x wvr y wvr z",
            "x wvr (y wvr z)",
            "first.s (x upon y) asa next z",
            "if a then b else c fby d",
            "0 fby.u N + 1",
        ] {
            roundtrip(src, Dialect::Surface);
        }
    }

    #[test]
    fn translation_removes_stream_operators() {
        let e = parse_surface("X wvr Y + (first Z asa next.s W) upon V where X = 0 fby X + 1; end")
            .unwrap();
        let core = translate_to_core(&e);
        assert!(core.is_core());
        let printed = core.to_string();
        assert_eq!(parse_core(&printed).unwrap(), core);
        assert_eq!(translate_to_core(&core), core);
    }

    #[test]
    fn translation_rules() {
        let t = |s: &str| translate_to_core(&parse_surface(s).unwrap()).to_string();
        assert_eq!(t("first X"), "X @ {t:0}");
        assert_eq!(t("next.d X"), "X @ {d:#d + 1}");
        assert_eq!(t("X fby Y"), "if #t = 0 then X @ {t:0} else Y @ {t:#t - 1}");
        assert_eq!(
            t("X upon Y"),
            "X @ {t:upon_S1} where upon_S1 = if #t = 0 then 0 @ {t:0} else (if Y then upon_S1 + 1 else upon_S1) @ {t:#t - 1}; end"
        );
    }

    #[test]
    fn fresh_names_avoid_collisions() {
        let e = parse_surface("wvr_T1 wvr wvr_U2").unwrap();
        let printed = translate_to_core(&e).to_string();
        assert!(printed.contains("wvr_T2 = "), "{printed}");
        assert!(printed.contains("wvr_U3 = "), "{printed}");
    }
}
