//! Demand-driven evaluation.
//!
//! A variable is evaluated only when demanded, at the context current at
//! the point of demand. While its definition runs, every `#d` it performs is
//! recorded; the result is stored in the [`Warehouse`] under the variable
//! and the tags of exactly those dimensions. A later demand at any context
//! that agrees on them is served from the warehouse.
//!
//! Queries made under `E @ {d:..}` of a dimension the switch sets do not
//! count for the enclosing variables: whatever they saw, they saw because of
//! the switch, not because of their own context.

mod trace;
mod warehouse;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::context::{
    lookup_tag, ContextSet, ContextTree, DimensionDecl, DimensionName, SimpleContext, TagValue,
    TreeNode,
};
use crate::syntax::{ContextEntry, Declaration, ExprKind, Expression, TreeChild, TreeEntry};
use crate::types::{
    apply_binary, apply_unary, is_special, BinaryOp, CoreValue, SourceLocation, SpecialKind,
    SpecialValue,
};

pub use trace::{TraceEvent, TraceKind};
pub use warehouse::{Demand, Subject, Warehouse, WarehouseConflict, WarehouseStats};

const RED_ZONE: usize = 128 * 1024;
const STACK_SEGMENT: usize = 4 * 1024 * 1024;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Eagerness {
    /// Each `dimension: tag` pair is evaluated in turn, left to right; the
    /// first error value makes the whole context an error.
    #[default]
    ContextEager,
    /// All dimension expressions first, then the tags. An error value from
    /// a tag under `@` is held back and only seen by a query of that
    /// dimension.
    DimensionEager,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluatorConfig {
    pub eagerness: Eagerness,
    /// Nested demands and calls allowed before evaluation gives up.
    pub max_depth: usize,
    pub trace_enabled: bool,
    pub use_warehouse: bool,
}

impl Default for EvaluatorConfig {
    fn default() -> Self {
        EvaluatorConfig {
            eagerness: Eagerness::ContextEager,
            max_depth: 10_000,
            trace_enabled: false,
            use_warehouse: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{loc}: more than {limit} nested demands while evaluating `{subject}`; the definition probably does not terminate")]
    DepthExceeded {
        limit: usize,
        subject: String,
        loc: SourceLocation,
    },
    #[error(transparent)]
    Warehouse(#[from] Box<WarehouseConflict>),
    #[error("{loc}: {message}")]
    Foreign {
        message: String,
        loc: SourceLocation,
    },
    #[error("{loc}: `{op}` must be translated to the core before evaluation")]
    NotCore {
        op: &'static str,
        loc: SourceLocation,
    },
    #[error("invalid evaluator configuration: {0}")]
    Config(String),
}

/// Functions and methods that are not defined by the program.
pub trait ForeignFunctions: Send + Sync {
    /// `None` when `name` is unknown here.
    fn call(
        &self,
        name: &str,
        args: &[CoreValue],
        at: &SourceLocation,
    ) -> Option<Result<CoreValue, EvalError>>;

    fn call_member(
        &self,
        receiver: &CoreValue,
        method: &str,
        args: &[CoreValue],
        at: &SourceLocation,
    ) -> Option<Result<CoreValue, EvalError>> {
        let _ = (receiver, method, args, at);
        None
    }
}

/// Decides how the argument demands of one foreign call are batched.
/// Batches run in order; the returned index lists must cover `0..count`.
pub trait DemandGrouper: Send + Sync {
    fn group(&self, count: usize) -> Vec<Vec<usize>>;
}

/// One demand at a time, left to right.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl DemandGrouper for Sequential {
    fn group(&self, count: usize) -> Vec<Vec<usize>> {
        (0..count).map(|i| vec![i]).collect()
    }
}

/// A core expression ready for evaluation.
#[derive(Debug, Clone)]
pub struct Program {
    expr: Arc<Expression>,
    digest: u64,
    // where-clause node address -> index in pre-order
    scopes: Arc<HashMap<usize, u32>>,
    file: Option<Arc<str>>,
}

impl Program {
    pub fn new(expr: Expression) -> Self {
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        format!("{expr:?}").hash(&mut hasher);
        let expr = Arc::new(expr);
        let mut scopes = HashMap::new();
        expr.walk(&mut |e| {
            if matches!(e.kind, ExprKind::Where(..)) {
                let n = scopes.len() as u32;
                scopes.insert(e as *const Expression as usize, n);
            }
        });
        Program {
            expr,
            digest: hasher.finish(),
            scopes: Arc::new(scopes),
            file: None,
        }
    }

    /// Names the source file in the provenance of error values.
    pub fn with_file(mut self, file: impl Into<Arc<str>>) -> Self {
        self.file = Some(file.into());
        self
    }

    pub fn expression(&self) -> &Expression {
        &self.expr
    }

    /// Identifies the program text; programs with equal digests share
    /// warehouse entries.
    pub fn digest(&self) -> u64 {
        self.digest
    }

    fn scope_index(&self, e: &Expression) -> u32 {
        self.scopes[&(e as *const Expression as usize)]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EvalStats {
    pub demands: u64,
    pub hits: u64,
    pub misses: u64,
    pub stores: u64,
    /// Trace events produced, whether or not tracing is enabled.
    pub events: u64,
    /// How often each variable or function body was evaluated.
    pub body_evaluations: BTreeMap<String, u64>,
    pub max_depth: usize,
}

impl EvalStats {
    pub fn body_evaluations_of(&self, name: &str) -> u64 {
        self.body_evaluations.get(name).copied().unwrap_or(0)
    }
}

/// The context a `@` applies: tags to bind, and under dimension-eager
/// evaluation, error values held back for dimensions whose tag failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContextPatch {
    pub point: SimpleContext,
    pub deferred: BTreeMap<DimensionName, CoreValue>,
}

impl ContextPatch {
    fn set(&mut self, d: DimensionName, tag: TagValue) {
        self.deferred.remove(&d);
        self.point.insert(d, tag);
    }

    fn defer(&mut self, d: DimensionName, v: CoreValue) {
        self.point.remove(&d);
        self.deferred.insert(d, v);
    }

    fn dimensions(&self) -> BTreeSet<DimensionName> {
        self.point
            .dimensions()
            .chain(self.deferred.keys())
            .cloned()
            .collect()
    }
}

impl From<SimpleContext> for ContextPatch {
    fn from(point: SimpleContext) -> Self {
        ContextPatch {
            point,
            deferred: BTreeMap::new(),
        }
    }
}

pub struct Evaluator {
    config: EvaluatorConfig,
    warehouse: Arc<Warehouse>,
    foreign: Option<Arc<dyn ForeignFunctions>>,
    grouper: Box<dyn DemandGrouper>,
    stats: EvalStats,
    trace: Vec<TraceEvent>,
}

impl Evaluator {
    pub fn new(config: EvaluatorConfig) -> Self {
        Self::with_warehouse(config, Arc::new(Warehouse::new()))
    }

    pub fn with_warehouse(config: EvaluatorConfig, warehouse: Arc<Warehouse>) -> Self {
        Evaluator {
            config,
            warehouse,
            foreign: None,
            grouper: Box::new(Sequential),
            stats: EvalStats::default(),
            trace: Vec::new(),
        }
    }

    pub fn set_foreign(&mut self, foreign: Arc<dyn ForeignFunctions>) {
        self.foreign = Some(foreign);
    }

    pub fn set_grouper(&mut self, grouper: Box<dyn DemandGrouper>) {
        self.grouper = grouper;
    }

    pub fn config(&self) -> &EvaluatorConfig {
        &self.config
    }

    pub fn warehouse(&self) -> &Arc<Warehouse> {
        &self.warehouse
    }

    pub fn stats(&self) -> &EvalStats {
        &self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = EvalStats::default();
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        std::mem::take(&mut self.trace)
    }

    fn check_config(&self) -> Result<(), EvalError> {
        if self.config.max_depth == 0 {
            return Err(EvalError::Config("max_depth must be positive".into()));
        }
        Ok(())
    }

    /// The value of `program` at `ctx`.
    pub fn evaluate(
        &mut self,
        program: &Program,
        ctx: &SimpleContext,
    ) -> Result<CoreValue, EvalError> {
        self.check_config()?;
        let mut m = Machine::new(program, self);
        let ctx = Ctx::from(ctx.clone());
        stacker::maybe_grow(RED_ZONE, STACK_SEGMENT, || {
            m.eval(&program.expr, &None, &ctx)
        })
    }

    /// Evaluates a program consisting of one context literal the way `@`
    /// does. `Err` carries the error value that replaces the context.
    pub fn eval_context_literal(
        &mut self,
        program: &Program,
        ctx: &SimpleContext,
    ) -> Result<Result<ContextPatch, CoreValue>, EvalError> {
        self.check_config()?;
        let ExprKind::ContextLiteral(entries) = &program.expr.kind else {
            let loc = program.expr.loc.to_source(program.file.as_ref());
            return Ok(Err(CoreValue::Special(
                SpecialValue::at(SpecialKind::TypeErr, loc).with_note("not a context literal"),
            )));
        };
        let mut m = Machine::new(program, self);
        m.context_entries(entries, &None, &Ctx::from(ctx.clone()), true)
    }
}

/// Evaluates a core expression at `ctx` with a fresh warehouse and the
/// default configuration.
pub fn evaluate(expr: &Expression, ctx: &SimpleContext) -> Result<CoreValue, EvalError> {
    Evaluator::new(EvaluatorConfig::default()).evaluate(&Program::new(expr.clone()), ctx)
}

static NEXT_FRAME: AtomicU64 = AtomicU64::new(1);

#[derive(Clone)]
struct Ctx {
    point: SimpleContext,
    deferred: Option<Arc<BTreeMap<DimensionName, CoreValue>>>,
}

impl From<SimpleContext> for Ctx {
    fn from(point: SimpleContext) -> Self {
        Ctx {
            point,
            deferred: None,
        }
    }
}

impl Ctx {
    fn apply(&self, patch: &ContextPatch) -> Ctx {
        let point = self.point.override_with(&patch.point);
        let mut deferred: BTreeMap<DimensionName, CoreValue> = self
            .deferred
            .as_deref()
            .map(|m| {
                m.iter()
                    .filter(|(d, _)| !patch.point.contains(d))
                    .map(|(d, v)| (d.clone(), v.clone()))
                    .collect()
            })
            .unwrap_or_default();
        let mut point = point;
        for (d, v) in &patch.deferred {
            point.remove(d);
            deferred.insert(d.clone(), v.clone());
        }
        Ctx {
            point,
            deferred: (!deferred.is_empty()).then(|| Arc::new(deferred)),
        }
    }

    fn deferred(&self, d: &DimensionName) -> Option<&CoreValue> {
        self.deferred.as_ref()?.get(d)
    }
}

#[derive(Clone)]
struct Thunk<'p> {
    expr: &'p Expression,
    env: Env<'p>,
}

type Env<'p> = Option<Rc<Scope<'p>>>;

struct Scope<'p> {
    kind: ScopeKind<'p>,
    parent: Env<'p>,
}

enum ScopeKind<'p> {
    Where {
        decls: &'p [Declaration],
        index: u32,
        frame: u64,
    },
    Call {
        params: &'p [String],
        args: Vec<Thunk<'p>>,
        frame: u64,
    },
}

enum Binding<'p> {
    Var {
        name: &'p str,
        body: &'p Expression,
        scope: Rc<Scope<'p>>,
        index: u32,
        frame: u64,
    },
    Fun {
        name: &'p str,
        params: &'p [String],
        body: &'p Expression,
        scope: Rc<Scope<'p>>,
    },
    Dim(&'p DimensionDecl),
    Param(Thunk<'p>),
}

fn lookup<'p>(env: &Env<'p>, name: &str) -> Option<Binding<'p>> {
    let mut cur = env.clone();
    while let Some(scope) = cur {
        match &scope.kind {
            ScopeKind::Where {
                decls,
                index,
                frame,
            } => {
                if let Some(d) = decls.iter().find(|d| d.name() == name) {
                    return Some(match d {
                        Declaration::Var { name, body } => Binding::Var {
                            name,
                            body,
                            scope: scope.clone(),
                            index: *index,
                            frame: *frame,
                        },
                        Declaration::Fun { name, params, body } => Binding::Fun {
                            name,
                            params,
                            body,
                            scope: scope.clone(),
                        },
                        Declaration::Dim(decl) => Binding::Dim(decl),
                    });
                }
            }
            ScopeKind::Call { params, args, .. } => {
                if let Some(i) = params.iter().position(|p| p == name) {
                    return Some(Binding::Param(args[i].clone()));
                }
            }
        }
        cur = scope.parent.clone();
    }
    None
}

fn dimension_decl<'p>(env: &Env<'p>, d: &DimensionName) -> Option<&'p DimensionDecl> {
    let mut cur = env.as_ref();
    while let Some(scope) = cur {
        if let ScopeKind::Where { decls, .. } = &scope.kind {
            let found = decls.iter().find_map(|decl| match decl {
                Declaration::Dim(decl) if &decl.name == d => Some(decl),
                _ => None,
            });
            if found.is_some() {
                return found;
            }
        }
        cur = scope.parent.as_ref();
    }
    None
}

fn frame_of(env: &Env<'_>) -> u64 {
    match env.as_deref().map(|s| &s.kind) {
        Some(ScopeKind::Where { frame, .. } | ScopeKind::Call { frame, .. }) => *frame,
        None => 0,
    }
}

fn tag_to_value(t: TagValue) -> CoreValue {
    match t {
        TagValue::Int(i) => CoreValue::Integer(i),
        TagValue::Str(s) => CoreValue::string(&s),
    }
}

enum Tracker {
    Demand {
        dims: BTreeSet<DimensionName>,
        poisoned: bool,
    },
    Switch(BTreeSet<DimensionName>),
}

type Outcome<T> = Result<Result<T, CoreValue>, EvalError>;

struct Machine<'p, 'e> {
    program: &'p Program,
    ev: &'e mut Evaluator,
    trackers: Vec<Tracker>,
    depth: usize,
}

impl<'p, 'e> Machine<'p, 'e> {
    fn new(program: &'p Program, ev: &'e mut Evaluator) -> Self {
        Machine {
            program,
            ev,
            trackers: Vec::new(),
            depth: 0,
        }
    }

    fn src(&self, e: &Expression) -> SourceLocation {
        e.loc.to_source(self.program.file.as_ref())
    }

    fn special(&self, kind: SpecialKind, e: &Expression, note: impl Into<Arc<str>>) -> CoreValue {
        CoreValue::Special(SpecialValue::at(kind, self.src(e)).with_note(note))
    }

    fn emit(&mut self, kind: TraceKind, subject: &dyn std::fmt::Display, ctx: &SimpleContext) {
        self.ev.stats.events += 1;
        if self.ev.config.trace_enabled {
            self.ev.trace.push(TraceEvent {
                kind,
                subject: subject.to_string(),
                context: ctx.clone(),
                depth: self.depth,
            });
        }
    }

    fn enter(&mut self, subject: &str, e: &Expression) -> Result<(), EvalError> {
        self.depth += 1;
        if self.depth > self.ev.config.max_depth {
            return Err(EvalError::DepthExceeded {
                limit: self.ev.config.max_depth,
                subject: subject.to_string(),
                loc: self.src(e),
            });
        }
        self.ev.stats.max_depth = self.ev.stats.max_depth.max(self.depth);
        Ok(())
    }

    fn record_query(&mut self, d: &DimensionName, poisoned: bool) {
        for t in self.trackers.iter_mut().rev() {
            match t {
                Tracker::Switch(set) if set.contains(d) => break,
                Tracker::Switch(_) => {}
                Tracker::Demand { dims, poisoned: p } => {
                    dims.insert(d.clone());
                    *p |= poisoned;
                }
            }
        }
    }

    fn count_body(&mut self, name: &str) {
        *self
            .ev
            .stats
            .body_evaluations
            .entry(name.to_string())
            .or_default() += 1;
    }

    fn eval(
        &mut self,
        e: &'p Expression,
        env: &Env<'p>,
        ctx: &Ctx,
    ) -> Result<CoreValue, EvalError> {
        match &e.kind {
            ExprKind::Literal { value, .. } | ExprKind::TypedLiteral { value, .. } => {
                Ok(value.clone())
            }
            ExprKind::SpecialLiteral(kind) => {
                Ok(CoreValue::Special(SpecialValue::at(*kind, self.src(e))))
            }
            ExprKind::Identifier(name) => match lookup(env, name) {
                Some(b @ Binding::Var { .. }) => self.demand(b, e, ctx),
                Some(Binding::Param(thunk)) => self.force(name, &thunk, e, ctx),
                Some(Binding::Fun { .. }) => Ok(self.special(
                    SpecialKind::TypeErr,
                    e,
                    format!("function `{name}` used as a value"),
                )),
                Some(Binding::Dim(decl)) => Ok(CoreValue::Dimension(decl.name.clone())),
                None => {
                    Ok(self.special(SpecialKind::Undecl, e, format!("`{name}` is not declared")))
                }
            },
            ExprKind::Binary(op, l, r) => self.binary(*op, l, r, e, env, ctx),
            ExprKind::Unary(op, x) => {
                let v = self.eval(x, env, ctx)?;
                Ok(apply_unary(*op, &v, Some(&self.src(e))))
            }
            ExprKind::IsSpecial(kind, x) => {
                let v = self.eval(x, env, ctx)?;
                Ok(is_special(&v, *kind))
            }
            ExprKind::Conditional(c, t, f) => {
                let test = self.eval(c, env, ctx)?;
                if test.is_special() {
                    return Ok(test);
                }
                match test.as_bool() {
                    Some(true) => self.eval(t, env, ctx),
                    Some(false) => self.eval(f, env, ctx),
                    None => Ok(self.special(
                        SpecialKind::TypeErr,
                        c,
                        format!("condition is {}, not a boolean", test.core_type()),
                    )),
                }
            }
            ExprKind::Apply(name, args) => self.apply(name, args, e, env, ctx),
            ExprKind::MemberCall(recv, method, args) => {
                let r = self.eval(recv, env, ctx)?;
                if r.is_special() {
                    return Ok(r);
                }
                let args = match self.arguments(args, env, ctx)? {
                    Ok(a) => a,
                    Err(s) => return Ok(s),
                };
                let at = self.src(e);
                match self
                    .ev
                    .foreign
                    .clone()
                    .and_then(|f| f.call_member(&r, method, &args, &at))
                {
                    Some(result) => result,
                    None => Ok(self.special(
                        SpecialKind::TypeErr,
                        e,
                        format!("{} has no method `{method}`", r.core_type()),
                    )),
                }
            }
            ExprKind::TagQuery(d) => {
                let d =
                    match self.dimension_named(d.as_str(), e, env, ctx, SpecialKind::UndefDim)? {
                        Ok(d) => d,
                        Err(s) => return Ok(s),
                    };
                let held = ctx.deferred(&d).cloned();
                self.record_query(&d, held.is_some());
                self.emit(TraceKind::DimensionQueried, &d, &ctx.point);
                if let Some(v) = held {
                    return Ok(v);
                }
                Ok(tag_to_value(lookup_tag(
                    &ctx.point,
                    &d,
                    dimension_decl(env, &d),
                )))
            }
            ExprKind::ContextSwitch(body, target) => {
                let patch = match &target.kind {
                    ExprKind::ContextLiteral(entries) => {
                        match self.context_entries(entries, env, ctx, true)? {
                            Ok(p) => p,
                            Err(s) => return Ok(s),
                        }
                    }
                    _ => match self.eval(target, env, ctx)? {
                        CoreValue::Context(c) => ContextPatch::from(c),
                        CoreValue::Tree(t) => ContextPatch::from(t.effective_context(t.root())),
                        v @ CoreValue::Special(_) => return Ok(v),
                        CoreValue::ContextSet(_) => {
                            return Ok(self.special(
                                SpecialKind::TypeErr,
                                target,
                                "cannot switch to a context set",
                            ))
                        }
                        v => {
                            return Ok(self.special(
                                SpecialKind::TypeErr,
                                target,
                                format!("cannot switch to a value of type {}", v.core_type()),
                            ))
                        }
                    },
                };
                let inner = ctx.apply(&patch);
                self.trackers.push(Tracker::Switch(patch.dimensions()));
                let r = self.eval(body, env, &inner);
                self.trackers.pop();
                r
            }
            ExprKind::ContextLiteral(entries) => {
                Ok(match self.context_entries(entries, env, ctx, false)? {
                    Ok(p) => CoreValue::Context(p.point),
                    Err(s) => s,
                })
            }
            ExprKind::ContextSetLiteral(points) => {
                let mut set = ContextSet::new();
                for p in points {
                    match self.context_entries(p, env, ctx, false)? {
                        Ok(p) => {
                            set.insert(p.point);
                        }
                        Err(s) => return Ok(s),
                    }
                }
                Ok(CoreValue::ContextSet(set))
            }
            ExprKind::TreeLiteral(entries) => Ok(match self.tree(entries, env, ctx)? {
                Ok(node) => CoreValue::Tree(Arc::new(ContextTree::new(&node))),
                Err(s) => s,
            }),
            ExprKind::Where(body, decls) => {
                let scope = Rc::new(Scope {
                    kind: ScopeKind::Where {
                        decls,
                        index: self.program.scope_index(e),
                        frame: frame_of(env),
                    },
                    parent: env.clone(),
                });
                self.eval(body, &Some(scope), ctx)
            }
            ExprKind::SurfaceOp(op, ..) => Err(EvalError::NotCore {
                op: op.keyword(),
                loc: self.src(e),
            }),
        }
    }

    fn binary(
        &mut self,
        op: BinaryOp,
        l: &'p Expression,
        r: &'p Expression,
        e: &'p Expression,
        env: &Env<'p>,
        ctx: &Ctx,
    ) -> Result<CoreValue, EvalError> {
        let lv = self.eval(l, env, ctx)?;
        if lv.is_special() {
            return Ok(lv);
        }
        if matches!(op, BinaryOp::And | BinaryOp::Or) {
            let Some(lb) = lv.as_bool() else {
                return Ok(self.special(SpecialKind::TypeErr, l, format!("`{op}` needs booleans")));
            };
            if lb == (op == BinaryOp::Or) {
                return Ok(CoreValue::Boolean(lb));
            }
            let rv = self.eval(r, env, ctx)?;
            if rv.is_special() {
                return Ok(rv);
            }
            return Ok(match rv.as_bool() {
                Some(b) => CoreValue::Boolean(b),
                None => self.special(SpecialKind::TypeErr, r, format!("`{op}` needs booleans")),
            });
        }
        let rv = self.eval(r, env, ctx)?;
        Ok(apply_binary(op, &lv, &rv, Some(&self.src(e))))
    }

    fn demand(
        &mut self,
        binding: Binding<'p>,
        e: &'p Expression,
        ctx: &Ctx,
    ) -> Result<CoreValue, EvalError> {
        let Binding::Var {
            name,
            body,
            scope,
            index,
            frame,
        } = binding
        else {
            unreachable!("demand on a non-variable binding")
        };
        let subject = Subject {
            name: Arc::from(name),
            program: self.program.digest,
            scope: index,
            frame,
        };
        self.enter(name, e)?;
        self.ev.stats.demands += 1;
        self.ev.warehouse.count_demand();
        self.emit(TraceKind::DemandIssued, &subject, &ctx.point);
        let caching = self.ev.config.use_warehouse;
        if caching {
            let held = ctx.deferred.clone();
            let usable = |dims: &BTreeSet<DimensionName>| {
                held.as_ref()
                    .is_none_or(|h| !dims.iter().any(|d| h.contains_key(d)))
            };
            if let Some((key, v)) = self.ev.warehouse.find_where(&subject, &ctx.point, usable) {
                self.ev.stats.hits += 1;
                self.ev.warehouse.count_hit();
                self.emit(TraceKind::CacheHit, &subject, &ctx.point);
                for d in key.dimensions() {
                    self.record_query(d, false);
                }
                self.depth -= 1;
                return Ok(v);
            }
            self.ev.stats.misses += 1;
            self.ev.warehouse.count_miss();
            self.emit(TraceKind::CacheMiss, &subject, &ctx.point);
        }
        self.count_body(name);
        self.trackers.push(Tracker::Demand {
            dims: BTreeSet::new(),
            poisoned: false,
        });
        let env = Some(scope);
        let r = stacker::maybe_grow(RED_ZONE, STACK_SEGMENT, || self.eval(body, &env, ctx));
        let Some(Tracker::Demand { dims, poisoned }) = self.trackers.pop() else {
            unreachable!("tracker stack out of balance")
        };
        let v = r?;
        if caching && !poisoned {
            let key = Demand::new(subject.clone(), &ctx.point, &dims);
            if self.ev.warehouse.store(key, v.clone())? {
                self.ev.stats.stores += 1;
                self.emit(TraceKind::Store, &subject, &ctx.point);
            }
        }
        self.depth -= 1;
        Ok(v)
    }

    fn force(
        &mut self,
        name: &str,
        thunk: &Thunk<'p>,
        e: &'p Expression,
        ctx: &Ctx,
    ) -> Result<CoreValue, EvalError> {
        self.enter(name, e)?;
        let r = stacker::maybe_grow(RED_ZONE, STACK_SEGMENT, || {
            self.eval(thunk.expr, &thunk.env, ctx)
        });
        self.depth -= 1;
        r
    }

    fn arguments(
        &mut self,
        args: &'p [Expression],
        env: &Env<'p>,
        ctx: &Ctx,
    ) -> Outcome<Vec<CoreValue>> {
        let mut values: Vec<Option<CoreValue>> = vec![None; args.len()];
        for batch in self.ev.grouper.group(args.len()) {
            for i in batch {
                if values[i].is_none() {
                    values[i] = Some(self.eval(&args[i], env, ctx)?);
                }
            }
        }
        let mut out = Vec::with_capacity(args.len());
        for (i, v) in values.into_iter().enumerate() {
            let v = match v {
                Some(v) => v,
                None => self.eval(&args[i], env, ctx)?,
            };
            out.push(v);
        }
        if let Some(s) = out.iter().find(|v| v.is_special()) {
            return Ok(Err(s.clone()));
        }
        Ok(Ok(out))
    }

    fn apply(
        &mut self,
        name: &'p str,
        args: &'p [Expression],
        e: &'p Expression,
        env: &Env<'p>,
        ctx: &Ctx,
    ) -> Result<CoreValue, EvalError> {
        match lookup(env, name) {
            Some(Binding::Fun {
                name,
                params,
                body,
                scope,
            }) => {
                if params.len() != args.len() {
                    return Ok(self.special(
                        SpecialKind::TypeErr,
                        e,
                        format!(
                            "`{name}` takes {} arguments, got {}",
                            params.len(),
                            args.len()
                        ),
                    ));
                }
                let call = Rc::new(Scope {
                    kind: ScopeKind::Call {
                        params,
                        args: args
                            .iter()
                            .map(|a| Thunk {
                                expr: a,
                                env: env.clone(),
                            })
                            .collect(),
                        frame: NEXT_FRAME.fetch_add(1, Ordering::Relaxed),
                    },
                    parent: Some(scope),
                });
                self.enter(name, e)?;
                self.count_body(name);
                let env = Some(call);
                let r = stacker::maybe_grow(RED_ZONE, STACK_SEGMENT, || self.eval(body, &env, ctx));
                self.depth -= 1;
                r
            }
            Some(_) => Ok(self.special(
                SpecialKind::TypeErr,
                e,
                format!("`{name}` is not a function"),
            )),
            None => {
                let values = match self.arguments(args, env, ctx)? {
                    Ok(v) => v,
                    Err(s) => return Ok(s),
                };
                let at = self.src(e);
                match self
                    .ev
                    .foreign
                    .clone()
                    .and_then(|f| f.call(name, &values, &at))
                {
                    Some(result) => result,
                    None => Ok(self.special(
                        SpecialKind::Undecl,
                        e,
                        format!("function `{name}` is not declared"),
                    )),
                }
            }
        }
    }

    /// The dimension a name denotes in a dimension position: a declared
    /// dimension, the value of a variable or parameter, or else the name
    /// itself.
    fn dimension_named(
        &mut self,
        name: &str,
        e: &'p Expression,
        env: &Env<'p>,
        ctx: &Ctx,
        failure: SpecialKind,
    ) -> Outcome<DimensionName> {
        let v = match lookup(env, name) {
            None => {
                return Ok(DimensionName::new(name)
                    .map_err(|err| self.special(SpecialKind::UndefDim, e, err.to_string())))
            }
            Some(Binding::Dim(decl)) => return Ok(Ok(decl.name.clone())),
            Some(Binding::Param(thunk)) => {
                self.enter(name, e)?;
                let r = self.dimension(thunk.expr, &thunk.env, ctx, failure);
                self.depth -= 1;
                return r;
            }
            Some(b @ Binding::Var { .. }) => self.demand(b, e, ctx)?,
            Some(Binding::Fun { .. }) => {
                self.special(failure, e, format!("function `{name}` is not a dimension"))
            }
        };
        Ok(self.as_dimension(v, e, failure))
    }

    fn as_dimension(
        &self,
        v: CoreValue,
        e: &Expression,
        failure: SpecialKind,
    ) -> Result<DimensionName, CoreValue> {
        match v {
            CoreValue::Dimension(d) => Ok(d),
            CoreValue::Special(_) => Err(v),
            v => Err(self.special(failure, e, format!("{} is not a dimension", v.core_type()))),
        }
    }

    fn dimension(
        &mut self,
        e: &'p Expression,
        env: &Env<'p>,
        ctx: &Ctx,
        failure: SpecialKind,
    ) -> Outcome<DimensionName> {
        if let ExprKind::Identifier(name) = &e.kind {
            return self.dimension_named(name, e, env, ctx, failure);
        }
        let v = self.eval(e, env, ctx)?;
        Ok(self.as_dimension(v, e, failure))
    }

    fn tag(&mut self, e: &'p Expression, env: &Env<'p>, ctx: &Ctx) -> Outcome<TagValue> {
        Ok(match self.eval(e, env, ctx)? {
            CoreValue::Integer(i) | CoreValue::Sized(_, i) => Ok(TagValue::Int(i)),
            CoreValue::String(s) => Ok(TagValue::Str(s.to_string())),
            v @ CoreValue::Special(_) => Err(v),
            v => Err(self.special(
                SpecialKind::TypeErr,
                e,
                format!(
                    "a tag must be an integer or a string, not {}",
                    v.core_type()
                ),
            )),
        })
    }

    fn context_entries(
        &mut self,
        entries: &'p [ContextEntry],
        env: &Env<'p>,
        ctx: &Ctx,
        under_switch: bool,
    ) -> Outcome<ContextPatch> {
        let mut patch = ContextPatch::default();
        match self.ev.config.eagerness {
            Eagerness::ContextEager => {
                for entry in entries {
                    let d =
                        match self.dimension(&entry.dimension, env, ctx, SpecialKind::TypeErr)? {
                            Ok(d) => d,
                            Err(s) => return Ok(Err(s)),
                        };
                    match self.tag(&entry.tag, env, ctx)? {
                        Ok(t) => patch.set(d, t),
                        Err(s) => return Ok(Err(s)),
                    }
                }
            }
            Eagerness::DimensionEager => {
                let mut dims = Vec::with_capacity(entries.len());
                for entry in entries {
                    match self.dimension(&entry.dimension, env, ctx, SpecialKind::TypeErr)? {
                        Ok(d) => dims.push(d),
                        Err(s) => return Ok(Err(s)),
                    }
                }
                for (d, entry) in dims.into_iter().zip(entries) {
                    match self.tag(&entry.tag, env, ctx)? {
                        Ok(t) => patch.set(d, t),
                        Err(s) if under_switch => patch.defer(d, s),
                        Err(s) => return Ok(Err(s)),
                    }
                }
            }
        }
        Ok(Ok(patch))
    }

    fn tree(&mut self, entries: &'p [TreeEntry], env: &Env<'p>, ctx: &Ctx) -> Outcome<TreeNode> {
        let mut node = TreeNode::new();
        for entry in entries {
            let d = match self.dimension(&entry.dimension, env, ctx, SpecialKind::TypeErr)? {
                Ok(d) => d,
                Err(s) => return Ok(Err(s)),
            };
            let child = match &entry.child {
                TreeChild::Leaf(t) => match self.tag(t, env, ctx)? {
                    Ok(t) => crate::context::Child::Leaf(t),
                    Err(s) => return Ok(Err(s)),
                },
                TreeChild::Subtree { default, entries } => {
                    let default = match default {
                        Some(t) => match self.tag(t, env, ctx)? {
                            Ok(t) => Some(t),
                            Err(s) => return Ok(Err(s)),
                        },
                        None => None,
                    };
                    match self.tree(entries, env, ctx)? {
                        Ok(mut sub) => {
                            sub.default = default;
                            crate::context::Child::Node(sub)
                        }
                        Err(s) => return Ok(Err(s)),
                    }
                }
            };
            node.children.insert(d, child);
        }
        Ok(Ok(node))
    }
}

#[cfg(test)]
mod tests;
