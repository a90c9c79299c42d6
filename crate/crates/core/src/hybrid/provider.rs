use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use super::decl::{Dictionary, FunctionPrototype};
use crate::eval::{EvalError, ForeignFunctions};
use crate::syntax::{parse_core, ExprKind};
use crate::types::{CoreType, CoreValue, ObjectValue, SourceLocation, SpecialKind, SpecialValue};

/// Runs the functions of one segment language.
pub trait Provider: Send + Sync {
    fn provides(&self, name: &str) -> bool;

    fn call(&self, proto: &FunctionPrototype, args: &[CoreValue]) -> Result<CoreValue, String>;

    fn call_member(
        &self,
        receiver: &ObjectValue,
        method: &str,
        args: &[CoreValue],
    ) -> Result<CoreValue, String>;
}

/// What a stub sees of a call.
pub struct StubCall<'a> {
    pub name: &'a str,
    /// The tag of the provider running the stub.
    pub tag: &'a str,
    pub args: &'a [CoreValue],
    /// Set for function calls.
    pub prototype: Option<&'a FunctionPrototype>,
    /// Set for member calls.
    pub receiver: Option<&'a ObjectValue>,
}

pub type StubFn = Arc<dyn Fn(&StubCall<'_>) -> Result<CoreValue, String> + Send + Sync>;

/// A provider made of closures, one per function or method name.
#[derive(Clone)]
pub struct StubProvider {
    tag: String,
    bindings: BTreeMap<String, StubFn>,
}

impl fmt::Debug for StubProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StubProvider")
            .field("tag", &self.tag)
            .field("bindings", &self.bindings.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl StubProvider {
    pub fn new(tag: &str) -> Self {
        StubProvider {
            tag: tag.to_string(),
            bindings: BTreeMap::new(),
        }
    }

    pub fn bind(
        mut self,
        name: &str,
        f: impl Fn(&StubCall<'_>) -> Result<CoreValue, String> + Send + Sync + 'static,
    ) -> Self {
        self.bindings.insert(name.to_string(), Arc::new(f));
        self
    }

    pub fn bind_stub(&mut self, name: &str, f: StubFn) {
        self.bindings.insert(name.to_string(), f);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(String::as_str)
    }

    fn run(&self, call: StubCall<'_>) -> Result<CoreValue, String> {
        let f = self
            .bindings
            .get(call.name)
            .ok_or_else(|| format!("{} provider has no `{}`", self.tag, call.name))?;
        f(&call)
    }
}

impl Provider for StubProvider {
    fn provides(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }

    fn call(&self, proto: &FunctionPrototype, args: &[CoreValue]) -> Result<CoreValue, String> {
        self.run(StubCall {
            name: &proto.name,
            tag: &self.tag,
            args,
            prototype: Some(proto),
            receiver: None,
        })
    }

    fn call_member(
        &self,
        receiver: &ObjectValue,
        method: &str,
        args: &[CoreValue],
    ) -> Result<CoreValue, String> {
        self.run(StubCall {
            name: method,
            tag: &self.tag,
            args,
            prototype: None,
            receiver: Some(receiver),
        })
    }
}

fn number(v: &CoreValue) -> Result<f64, String> {
    match v {
        CoreValue::Integer(i) | CoreValue::Sized(_, i) => Ok(*i as f64),
        CoreValue::Float(f) => Ok(*f as f64),
        CoreValue::Double(d) => Ok(*d),
        other => Err(format!("`{other}` is not a number")),
    }
}

fn sum(values: &[CoreValue]) -> Result<f64, String> {
    values.iter().map(number).sum()
}

fn sum_int(values: &[CoreValue]) -> Result<i64, String> {
    let ints: Option<Vec<i64>> = values
        .iter()
        .map(|v| match v {
            CoreValue::Integer(i) | CoreValue::Sized(_, i) => Some(*i),
            _ => None,
        })
        .collect();
    match ints {
        Some(ints) => ints
            .into_iter()
            .try_fold(0i64, |a, b| a.checked_add(b))
            .ok_or_else(|| "integer overflow".to_string()),
        None => Ok(sum(values)?.trunc() as i64),
    }
}

/// Names of the stubs [`builtin_stub`] knows, `const:` aside.
pub const BUILTIN_STUBS: &[&str] = &[
    "zero",
    "void",
    "object",
    "field_sum_int",
    "sum_int",
    "sum_float32",
    "sum_double",
    "identity",
];

/// A stub by manifest id:
///
/// - `zero`: integer 0
/// - `void`: no result
/// - `object`: an object of the declared return class holding the
///   arguments as fields
/// - `field_sum_int`: the receiver's numeric fields summed and truncated
/// - `sum_int`, `sum_float32`, `sum_double`: the arguments summed
/// - `identity`: the first argument
/// - `const:<literal>`: that literal
pub fn builtin_stub(id: &str) -> Option<StubFn> {
    if let Some(lit) = id.strip_prefix("const:") {
        let value = match parse_core(lit.trim()).ok()?.kind {
            ExprKind::Literal { value, .. } | ExprKind::TypedLiteral { value, .. } => value,
            _ => return None,
        };
        return Some(Arc::new(move |_| Ok(value.clone())));
    }
    let f: StubFn = match id {
        "zero" => Arc::new(|_| Ok(CoreValue::Integer(0))),
        "void" => Arc::new(|_| Ok(CoreValue::Void)),
        "object" => Arc::new(|c| {
            let class = match c.prototype.map(|p| &p.return_type) {
                Some(CoreType::Object(class)) => class.clone(),
                Some(_) => c
                    .prototype
                    .map_or(c.name.to_string(), |p| p.return_decl.clone()),
                None => c.name.to_string(),
            };
            Ok(CoreValue::Object(ObjectValue {
                class: class.into(),
                origin_tag: c.tag.into(),
                source_url: c
                    .prototype
                    .and_then(|p| p.source_url.as_deref())
                    .map(Arc::from),
                fields: c.args.into(),
            }))
        }),
        "field_sum_int" => Arc::new(|c| {
            let recv = c.receiver.ok_or("field_sum_int needs a receiver")?;
            Ok(CoreValue::Integer(sum_int(&recv.fields)?))
        }),
        "sum_int" => Arc::new(|c| Ok(CoreValue::Integer(sum_int(c.args)?))),
        "sum_float32" => Arc::new(|c| Ok(CoreValue::Float(sum(c.args)? as f32))),
        "sum_double" => Arc::new(|c| Ok(CoreValue::Double(sum(c.args)?))),
        "identity" => Arc::new(|c| {
            c.args
                .first()
                .cloned()
                .ok_or_else(|| "identity needs an argument".to_string())
        }),
        _ => return None,
    };
    Some(f)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("provider manifest line {line}: {reason}")]
pub struct ManifestError {
    pub line: usize,
    pub reason: String,
}

/// Providers by segment tag.
#[derive(Clone, Default)]
pub struct ProviderRegistry {
    providers: BTreeMap<String, Arc<dyn Provider>>,
}

impl fmt::Debug for ProviderRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.providers.keys()).finish()
    }
}

impl ProviderRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, tag: &str, provider: Arc<dyn Provider>) {
        self.providers.insert(tag.to_string(), provider);
    }

    pub fn get(&self, tag: &str) -> Option<&Arc<dyn Provider>> {
        self.providers.get(tag)
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.providers.keys().map(String::as_str)
    }

    /// Stub providers from a manifest of `TAG.name = stub-id` lines. Blank
    /// lines and lines starting with `#` are skipped.
    pub fn from_manifest(src: &str) -> Result<Self, ManifestError> {
        let mut stubs: BTreeMap<String, StubProvider> = BTreeMap::new();
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let err = |reason: String| ManifestError { line, reason };
            let (lhs, id) = text
                .split_once('=')
                .ok_or_else(|| err(format!("`{text}` is not `TAG.name = stub`")))?;
            let (tag, name) = lhs
                .trim()
                .split_once('.')
                .ok_or_else(|| err(format!("`{}` is not `TAG.name`", lhs.trim())))?;
            let (tag, name, id) = (tag.trim(), name.trim(), id.trim());
            if tag.is_empty() || name.is_empty() {
                return Err(err(format!("`{}` is not `TAG.name`", lhs.trim())));
            }
            let stub = builtin_stub(id).ok_or_else(|| err(format!("unknown stub `{id}`")))?;
            let tag = tag.to_ascii_uppercase();
            stubs
                .entry(tag.clone())
                .or_insert_with(|| StubProvider::new(&tag))
                .bind_stub(name, stub);
        }
        let mut r = Self::new();
        for (tag, p) in stubs {
            r.register(&tag, Arc::new(p));
        }
        Ok(r)
    }

    pub fn load_manifest(path: &Path) -> Result<Self, ManifestError> {
        let src = std::fs::read_to_string(path).map_err(|e| ManifestError {
            line: 0,
            reason: format!("{}: {e}", path.display()),
        })?;
        Self::from_manifest(&src)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindError {
    #[error("missing provider for {}", .names.join(", "))]
    MissingProvider { names: Vec<String> },
}

/// Declared functions bound to their providers.
#[derive(Debug, Clone)]
pub struct ForeignEnvironment {
    dictionary: Dictionary,
    registry: ProviderRegistry,
}

/// Checks that every declared function has a provider for its language.
pub fn bind_providers(
    dictionary: &Dictionary,
    registry: &ProviderRegistry,
) -> Result<ForeignEnvironment, BindError> {
    let names: Vec<String> = dictionary
        .prototypes
        .values()
        .filter(|p| {
            !registry
                .get(&p.language_tag)
                .is_some_and(|r| r.provides(&p.name))
        })
        .map(|p| p.name.clone())
        .collect();
    if !names.is_empty() {
        return Err(BindError::MissingProvider { names });
    }
    Ok(ForeignEnvironment {
        dictionary: dictionary.clone(),
        registry: registry.clone(),
    })
}

/// Whether `value` is acceptable as a result declared `declared`.
fn matches_declared(value: &CoreValue, declared: &CoreType) -> bool {
    match (value, declared) {
        (CoreValue::Object(o), CoreType::Object(class)) => *o.class == **class,
        (CoreValue::Object(_), CoreType::Embed) => true,
        (CoreValue::Array(items), CoreType::Array(elem)) => {
            items.iter().all(|v| matches_declared(v, elem))
        }
        _ => value.core_type() == *declared,
    }
}

impl ForeignEnvironment {
    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    fn coerce(&self, proto: &FunctionPrototype, value: CoreValue) -> Result<CoreValue, String> {
        if value.is_special() {
            return Ok(value);
        }
        if proto.return_type == CoreType::Void {
            return Ok(CoreValue::Void);
        }
        if matches_declared(&value, &proto.return_type) {
            return Ok(value);
        }
        Err(format!(
            "ResultTypeMismatch: `{}` is declared {} but its provider returned {}",
            proto.name,
            proto.return_type,
            value.core_type()
        ))
    }
}

impl ForeignFunctions for ForeignEnvironment {
    fn call(
        &self,
        name: &str,
        args: &[CoreValue],
        at: &SourceLocation,
    ) -> Option<Result<CoreValue, EvalError>> {
        let proto = self.dictionary.resolve(name)?;
        if args.len() != proto.param_types.len() {
            let note = format!(
                "`{}` takes {} argument(s)",
                proto.name,
                proto.param_types.len()
            );
            return Some(Ok(CoreValue::Special(
                SpecialValue::at(SpecialKind::TypeErr, at.clone()).with_note(note),
            )));
        }
        let fail = |message: String| EvalError::Foreign {
            message,
            loc: at.clone(),
        };
        let Some(provider) = self.registry.get(&proto.language_tag) else {
            return Some(Err(fail(format!(
                "no {} provider for `{}`",
                proto.language_tag, proto.name
            ))));
        };
        Some(
            provider
                .call(proto, args)
                .and_then(|v| self.coerce(proto, v))
                .map_err(|m| fail(format!("{} ({}): {m}", proto.name, proto.language_tag))),
        )
    }

    fn call_member(
        &self,
        receiver: &CoreValue,
        method: &str,
        args: &[CoreValue],
        at: &SourceLocation,
    ) -> Option<Result<CoreValue, EvalError>> {
        let CoreValue::Object(obj) = receiver else {
            return None;
        };
        let fail = |message: String| EvalError::Foreign {
            message,
            loc: at.clone(),
        };
        let Some(provider) = self.registry.get(&obj.origin_tag) else {
            return Some(Err(fail(format!(
                "no {} provider for `{}.{method}`",
                obj.origin_tag, obj.class
            ))));
        };
        Some(
            provider
                .call_member(obj, method, args)
                .map_err(|m| fail(format!("{}.{method} ({}): {m}", obj.class, obj.origin_tag))),
        )
    }
}
