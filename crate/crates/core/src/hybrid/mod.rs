//! Hybrid programs: source files mixing declaration segments, foreign code
//! and intensional code, each introduced by a `#TAG` marker line.
//!
//! The pipeline is [`split_segments`], [`build_dictionary`], parsing and
//! translating each intensional segment, [`typecheck_calls`] and finally
//! [`bind_providers`], which attaches foreign functions to an evaluator.
//! Foreign bodies are never compiled; providers stand in for them.

mod decl;
mod provider;
mod segments;
mod typecheck;

use std::sync::Arc;

use thiserror::Error;

pub use decl::{
    build_dictionary, map_declared_type, parse_funcdecl, parse_typedecl, Dictionary,
    DictionaryError, FunctionPrototype, EMBED_TAG, EXTERN_TAG,
};
pub use provider::{
    bind_providers, builtin_stub, BindError, ForeignEnvironment, ManifestError, Provider,
    ProviderRegistry, StubCall, StubFn, StubProvider, BUILTIN_STUBS,
};
pub use segments::{split_segments, Segment, SegmentError, SegmentedProgram, TagKind, TagRegistry};
pub use typecheck::{typecheck_calls, CallAnnotation, CallCheck, CallError};

use crate::context::SimpleContext;
use crate::eval::{EvalError, Evaluator, Program};
use crate::syntax::{parse, translate_to_core, Dialect, Expression, SyntaxError};
use crate::types::CoreValue;
use crate::types::TypeMappingTable;

/// One parsed intensional segment.
#[derive(Debug, Clone)]
pub struct IntensionalUnit {
    pub tag: String,
    pub dialect: Dialect,
    pub start_line: u32,
    /// As parsed.
    pub source: Expression,
    /// After translation to the core.
    pub core: Expression,
    pub calls: CallCheck,
}

#[derive(Debug, Clone)]
pub struct HybridProgram {
    pub segments: SegmentedProgram,
    pub dictionary: Dictionary,
    pub units: Vec<IntensionalUnit>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HybridError {
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Dictionary(#[from] DictionaryError),
    #[error("#{tag} segment: {error}")]
    Syntax { tag: String, error: SyntaxError },
}

impl HybridError {
    pub fn line(&self) -> Option<u32> {
        match self {
            HybridError::Segment(e) => e.line(),
            HybridError::Dictionary(e) => Some(e.line()),
            HybridError::Syntax { error, .. } => Some(error.loc.line),
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Bind(#[from] BindError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Splits, parses, translates and type checks a hybrid source file.
pub fn compile(
    src: &str,
    tags: &TagRegistry,
    table: &TypeMappingTable,
) -> Result<HybridProgram, HybridError> {
    let segments = split_segments(src, tags)?;
    let dictionary = build_dictionary(&segments, table)?;
    let mut units = Vec::new();
    for s in segments.intensional() {
        let TagKind::Intensional(dialect) = s.kind else {
            continue;
        };
        let source =
            parse(&s.body, dialect, s.start_line).map_err(|error| HybridError::Syntax {
                tag: s.tag.clone(),
                error,
            })?;
        let core = translate_to_core(&source);
        let calls = typecheck_calls(&core, &dictionary);
        units.push(IntensionalUnit {
            tag: s.tag.clone(),
            dialect,
            start_line: s.start_line,
            source,
            core,
            calls,
        });
    }
    Ok(HybridProgram {
        segments,
        dictionary,
        units,
    })
}

impl HybridProgram {
    pub fn diagnostics(&self) -> impl Iterator<Item = &CallError> {
        self.units.iter().flat_map(|u| u.calls.diagnostics.iter())
    }

    /// Evaluates every intensional segment at `ctx`, in order, on `ev`
    /// with foreign calls going to `providers`.
    pub fn evaluate(
        &self,
        ev: &mut Evaluator,
        providers: &ProviderRegistry,
        ctx: &SimpleContext,
        file: Option<&str>,
    ) -> Result<Vec<CoreValue>, RunError> {
        let env = bind_providers(&self.dictionary, providers)?;
        ev.set_foreign(Arc::new(env));
        let mut out = Vec::new();
        for u in &self.units {
            let mut program = Program::new(u.core.clone());
            if let Some(f) = file {
                program = program.with_file(f);
            }
            out.push(ev.evaluate(&program, ctx)?);
        }
        Ok(out)
    }
}

/// Whether any line of `src` is a segment marker, known or not.
pub fn has_markers(src: &str, tags: &TagRegistry) -> bool {
    segments::has_markers(src, tags)
}

/// Compiles a file without markers as a single intensional segment tagged
/// `tag`.
pub fn compile_bare(src: &str, tag: &str, dialect: Dialect) -> Result<HybridProgram, HybridError> {
    let end_line = src.lines().count().max(1) as u32;
    let segment = Segment {
        tag: tag.to_string(),
        kind: TagKind::Intensional(dialect),
        marker: String::new(),
        body: src.to_string(),
        marker_line: 1,
        start_line: 1,
        end_line,
    };
    let source = parse(src, dialect, 1).map_err(|error| HybridError::Syntax {
        tag: tag.to_string(),
        error,
    })?;
    let core = translate_to_core(&source);
    let dictionary = Dictionary::default();
    let calls = typecheck_calls(&core, &dictionary);
    Ok(HybridProgram {
        segments: SegmentedProgram {
            preamble: String::new(),
            segments: vec![segment],
        },
        dictionary,
        units: vec![IntensionalUnit {
            tag: tag.to_string(),
            dialect,
            start_line: 1,
            source,
            core,
            calls,
        }],
    })
}
