//! A context-aware intensional language core.
//!
//! Programs are expressions whose value depends on a context, a point in a
//! multidimensional space of tags. Evaluation is demand driven: a variable
//! is computed only when some expression asks for it at some context, and
//! each result is stored in a warehouse keyed by the dimensions it actually
//! read.
//!
//! - [`context`]: points, regions and hierarchical contexts.
//! - [`types`]: the value and type universe, typed constants, error values
//!   and the foreign type matching tables.
//! - [`syntax`]: lexer, parser, printer and the translation of stream
//!   operators into the core.
//! - [`eval`]: the demand-driven evaluator and its warehouse.
//! - [`hybrid`]: splitting hybrid source files into language segments, the
//!   declaration dictionary, call type checking and foreign providers.

pub mod context;
pub mod eval;
pub mod hybrid;
pub mod syntax;
pub mod types;
