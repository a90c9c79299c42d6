use std::fmt;

use thiserror::Error;

use super::decl::Dictionary;
use crate::syntax::{Declaration, ExprKind, Expression, Location};
use crate::types::CoreType;

/// The return type of one call to a declared function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallAnnotation {
    pub loc: Location,
    /// The name as written.
    pub name: String,
    /// The prototype it resolved to.
    pub callee: String,
    pub return_type: CoreType,
}

impl fmt::Display for CallAnnotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.loc, self.name)?;
        if self.name != self.callee {
            write!(f, " ({})", self.callee)?;
        }
        write!(f, " : {}", self.return_type)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CallError {
    #[error("{loc}: `{callee}` takes {expected} argument(s), {found} given")]
    ArityMismatch {
        callee: String,
        expected: usize,
        found: usize,
        loc: Location,
    },
    #[error("{loc}: argument {position} of `{callee}` is {found}, expected {expected}")]
    TypeMismatch {
        callee: String,
        position: usize,
        expected: CoreType,
        found: CoreType,
        loc: Location,
    },
    #[error("{loc}: no function `{name}`")]
    UnknownFunction { name: String, loc: Location },
}

impl CallError {
    pub fn loc(&self) -> Location {
        match self {
            CallError::ArityMismatch { loc, .. }
            | CallError::TypeMismatch { loc, .. }
            | CallError::UnknownFunction { loc, .. } => *loc,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallCheck {
    /// One entry per call of a declared function, in source order.
    pub annotations: Vec<CallAnnotation>,
    pub diagnostics: Vec<CallError>,
}

impl CallCheck {
    pub fn is_ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn annotation_at(&self, loc: Location) -> Option<&CallAnnotation> {
        self.annotations.iter().find(|a| a.loc == loc)
    }
}

/// Checks every function call in `e` against `dict`. Calls to functions
/// defined in an enclosing `where` clause are left alone. Only literals and
/// calls of declared functions have a known type; anything else matches
/// every parameter type.
pub fn typecheck_calls(e: &Expression, dict: &Dictionary) -> CallCheck {
    let mut c = Checker {
        dict,
        scopes: Vec::new(),
        out: CallCheck::default(),
    };
    c.visit(e);
    c.out
}

struct Checker<'a> {
    dict: &'a Dictionary,
    scopes: Vec<Vec<&'a str>>,
    out: CallCheck,
}

impl<'a> Checker<'a> {
    fn local(&self, name: &str) -> bool {
        self.scopes.iter().any(|s| s.contains(&name))
    }

    fn visit(&mut self, e: &'a Expression) -> Option<CoreType> {
        match &e.kind {
            ExprKind::Literal { value, .. } | ExprKind::TypedLiteral { value, .. } => {
                Some(value.core_type())
            }
            ExprKind::Where(_, decls) => {
                let funs = decls
                    .iter()
                    .filter_map(|d| match d {
                        Declaration::Fun { name, .. } => Some(name.as_str()),
                        _ => None,
                    })
                    .collect();
                self.scopes.push(funs);
                for child in e.children() {
                    self.visit(child);
                }
                self.scopes.pop();
                None
            }
            ExprKind::Apply(name, args) => {
                let found: Vec<Option<CoreType>> = args.iter().map(|a| self.visit(a)).collect();
                if self.local(name) {
                    return None;
                }
                let Some(proto) = self.dict.resolve(name) else {
                    self.out.diagnostics.push(CallError::UnknownFunction {
                        name: name.clone(),
                        loc: e.loc,
                    });
                    return None;
                };
                if found.len() != proto.param_types.len() {
                    self.out.diagnostics.push(CallError::ArityMismatch {
                        callee: proto.name.clone(),
                        expected: proto.param_types.len(),
                        found: found.len(),
                        loc: e.loc,
                    });
                } else {
                    for (i, (want, got)) in proto.param_types.iter().zip(&found).enumerate() {
                        if let Some(got) = got {
                            if got != want {
                                self.out.diagnostics.push(CallError::TypeMismatch {
                                    callee: proto.name.clone(),
                                    position: i + 1,
                                    expected: want.clone(),
                                    found: got.clone(),
                                    loc: args[i].loc,
                                });
                            }
                        }
                    }
                }
                self.out.annotations.push(CallAnnotation {
                    loc: e.loc,
                    name: name.clone(),
                    callee: proto.name.clone(),
                    return_type: proto.return_type.clone(),
                });
                Some(proto.return_type.clone())
            }
            _ => {
                for child in e.children() {
                    self.visit(child);
                }
                None
            }
        }
    }
}
