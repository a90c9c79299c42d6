//! Rewriting of the stream operators into the core.
//!
//! With `d` the operator's dimension:
//!
//! ```text
//! first X    =>  X @ {d:0}
//! next X     =>  X @ {d:#d + 1}
//! X fby Y    =>  if #d = 0 then X @ {d:0} else Y @ {d:#d - 1}
//! X wvr Y    =>  X @ {d:T} where T = U fby U @ {d:T + 1}; U = if Y then #d else next U; end
//! X asa Y    =>  first (X wvr Y)
//! X upon Y   =>  X @ {d:S} where S = 0 fby (if Y then S + 1 else S); end
//! ```
//!
//! `T`, `U` and `S` are fresh names that do not occur anywhere in the input.

use std::collections::HashSet;

use super::ast::{
    ContextEntry, Declaration, ExprKind, Expression, Location, SurfaceOperator, TreeChild,
    TreeEntry,
};
use crate::context::DimensionName;
use crate::types::{BinaryOp, CoreValue};

/// Rewrites every stream operator. Core input is returned unchanged.
pub fn translate_to_core(e: &Expression) -> Expression {
    if e.is_core() {
        return e.clone();
    }
    let mut t = Translator {
        used: used_names(e),
        counter: 0,
    };
    t.expr(e)
}

fn used_names(e: &Expression) -> HashSet<String> {
    let mut used = HashSet::new();
    e.walk(&mut |n| match &n.kind {
        ExprKind::Identifier(name) | ExprKind::Apply(name, _) => {
            used.insert(name.clone());
        }
        ExprKind::Where(_, decls) => {
            for d in decls {
                used.insert(d.name().to_string());
                if let Declaration::Fun { params, .. } = d {
                    used.extend(params.iter().cloned());
                }
            }
        }
        _ => {}
    });
    used
}

struct Translator {
    used: HashSet<String>,
    counter: usize,
}

fn at(kind: ExprKind, loc: Location) -> Expression {
    Expression::new(kind, loc)
}

fn switch(body: Expression, d: &DimensionName, tag: Expression, loc: Location) -> Expression {
    let entry = ContextEntry {
        dimension: at(ExprKind::Identifier(d.to_string()), loc),
        tag,
    };
    at(
        ExprKind::ContextSwitch(
            Box::new(body),
            Box::new(at(ExprKind::ContextLiteral(vec![entry]), loc)),
        ),
        loc,
    )
}

fn binary(op: BinaryOp, l: Expression, r: Expression, loc: Location) -> Expression {
    at(ExprKind::Binary(op, Box::new(l), Box::new(r)), loc)
}

fn int(v: i64, loc: Location) -> Expression {
    at(
        ExprKind::Literal {
            value: CoreValue::Integer(v),
            lexeme: v.to_string(),
        },
        loc,
    )
}

fn query(d: &DimensionName, loc: Location) -> Expression {
    at(ExprKind::TagQuery(d.clone()), loc)
}

fn surface(
    op: SurfaceOperator,
    operands: Vec<Expression>,
    d: &DimensionName,
    loc: Location,
) -> Expression {
    at(ExprKind::SurfaceOp(op, operands, d.clone()), loc)
}

impl Translator {
    fn fresh(&mut self, prefix: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("{prefix}{}", self.counter);
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    fn boxed(&mut self, e: &Expression) -> Box<Expression> {
        Box::new(self.expr(e))
    }

    fn entries(&mut self, entries: &[ContextEntry]) -> Vec<ContextEntry> {
        entries
            .iter()
            .map(|e| ContextEntry {
                dimension: self.expr(&e.dimension),
                tag: self.expr(&e.tag),
            })
            .collect()
    }

    fn tree(&mut self, entries: &[TreeEntry]) -> Vec<TreeEntry> {
        entries
            .iter()
            .map(|e| TreeEntry {
                dimension: self.expr(&e.dimension),
                child: match &e.child {
                    TreeChild::Leaf(t) => TreeChild::Leaf(self.expr(t)),
                    TreeChild::Subtree { default, entries } => TreeChild::Subtree {
                        default: default.as_ref().map(|d| self.expr(d)),
                        entries: self.tree(entries),
                    },
                },
            })
            .collect()
    }

    fn expr(&mut self, e: &Expression) -> Expression {
        let kind = match &e.kind {
            ExprKind::Literal { .. }
            | ExprKind::TypedLiteral { .. }
            | ExprKind::SpecialLiteral(_)
            | ExprKind::Identifier(_)
            | ExprKind::TagQuery(_) => e.kind.clone(),
            ExprKind::Binary(op, l, r) => ExprKind::Binary(*op, self.boxed(l), self.boxed(r)),
            ExprKind::Unary(op, x) => ExprKind::Unary(*op, self.boxed(x)),
            ExprKind::IsSpecial(k, x) => ExprKind::IsSpecial(*k, self.boxed(x)),
            ExprKind::Conditional(c, t, f) => {
                ExprKind::Conditional(self.boxed(c), self.boxed(t), self.boxed(f))
            }
            ExprKind::Apply(name, args) => {
                ExprKind::Apply(name.clone(), args.iter().map(|a| self.expr(a)).collect())
            }
            ExprKind::MemberCall(recv, name, args) => ExprKind::MemberCall(
                self.boxed(recv),
                name.clone(),
                args.iter().map(|a| self.expr(a)).collect(),
            ),
            ExprKind::ContextSwitch(body, ctx) => {
                ExprKind::ContextSwitch(self.boxed(body), self.boxed(ctx))
            }
            ExprKind::ContextLiteral(entries) => ExprKind::ContextLiteral(self.entries(entries)),
            ExprKind::ContextSetLiteral(points) => {
                ExprKind::ContextSetLiteral(points.iter().map(|p| self.entries(p)).collect())
            }
            ExprKind::TreeLiteral(entries) => ExprKind::TreeLiteral(self.tree(entries)),
            ExprKind::Where(body, decls) => {
                let decls = decls
                    .iter()
                    .map(|d| match d {
                        Declaration::Var { name, body } => Declaration::Var {
                            name: name.clone(),
                            body: self.expr(body),
                        },
                        Declaration::Fun { name, params, body } => Declaration::Fun {
                            name: name.clone(),
                            params: params.clone(),
                            body: self.expr(body),
                        },
                        Declaration::Dim(decl) => Declaration::Dim(decl.clone()),
                    })
                    .collect();
                ExprKind::Where(self.boxed(body), decls)
            }
            ExprKind::SurfaceOp(op, operands, d) => {
                let operands: Vec<Expression> = operands.iter().map(|o| self.expr(o)).collect();
                return self.rewrite(*op, operands, d, e.loc);
            }
        };
        Expression::new(kind, e.loc)
    }

    // operands are already core
    fn rewrite(
        &mut self,
        op: SurfaceOperator,
        mut operands: Vec<Expression>,
        d: &DimensionName,
        loc: Location,
    ) -> Expression {
        let y = if operands.len() > 1 {
            operands.pop()
        } else {
            None
        };
        let x = operands.pop().expect("stream operator without operand");
        match (op, y) {
            (SurfaceOperator::First, _) => switch(x, d, int(0, loc), loc),
            (SurfaceOperator::Next, _) => switch(
                x,
                d,
                binary(BinaryOp::Add, query(d, loc), int(1, loc), loc),
                loc,
            ),
            (SurfaceOperator::Fby, Some(y)) => {
                let test = binary(BinaryOp::Eq, query(d, loc), int(0, loc), loc);
                let then = switch(x, d, int(0, loc), loc);
                let otherwise = switch(
                    y,
                    d,
                    binary(BinaryOp::Sub, query(d, loc), int(1, loc), loc),
                    loc,
                );
                at(
                    ExprKind::Conditional(Box::new(test), Box::new(then), Box::new(otherwise)),
                    loc,
                )
            }
            (SurfaceOperator::Wvr, Some(y)) => self.wvr(x, y, d, loc),
            (SurfaceOperator::Asa, Some(y)) => {
                let w = self.wvr(x, y, d, loc);
                switch(w, d, int(0, loc), loc)
            }
            (SurfaceOperator::Upon, Some(y)) => {
                let s = self.fresh("upon_S");
                let s_id = at(ExprKind::Identifier(s.clone()), loc);
                let step = at(
                    ExprKind::Conditional(
                        Box::new(y),
                        Box::new(binary(BinaryOp::Add, s_id.clone(), int(1, loc), loc)),
                        Box::new(s_id.clone()),
                    ),
                    loc,
                );
                let s_body = surface(SurfaceOperator::Fby, vec![int(0, loc), step], d, loc);
                let decls = vec![Declaration::Var {
                    name: s,
                    body: self.expr(&s_body),
                }];
                at(
                    ExprKind::Where(Box::new(switch(x, d, s_id, loc)), decls),
                    loc,
                )
            }
            (op, None) => panic!("binary stream operator `{}` with one operand", op.keyword()),
        }
    }

    fn wvr(
        &mut self,
        x: Expression,
        y: Expression,
        d: &DimensionName,
        loc: Location,
    ) -> Expression {
        let t = self.fresh("wvr_T");
        let u = self.fresh("wvr_U");
        let t_id = at(ExprKind::Identifier(t.clone()), loc);
        let u_id = at(ExprKind::Identifier(u.clone()), loc);
        let advance = switch(
            u_id.clone(),
            d,
            binary(BinaryOp::Add, t_id.clone(), int(1, loc), loc),
            loc,
        );
        let t_body = surface(SurfaceOperator::Fby, vec![u_id.clone(), advance], d, loc);
        let u_body = at(
            ExprKind::Conditional(
                Box::new(y),
                Box::new(query(d, loc)),
                Box::new(surface(SurfaceOperator::Next, vec![u_id], d, loc)),
            ),
            loc,
        );
        let decls = vec![
            Declaration::Var {
                name: t,
                body: self.expr(&t_body),
            },
            Declaration::Var {
                name: u,
                body: self.expr(&u_body),
            },
        ];
        at(
            ExprKind::Where(Box::new(switch(x, d, t_id, loc)), decls),
            loc,
        )
    }
}
