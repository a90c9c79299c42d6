use std::fmt;

use serde::Serialize;

use crate::context::SimpleContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum TraceKind {
    DemandIssued,
    CacheHit,
    CacheMiss,
    Store,
    DimensionQueried,
}

impl TraceKind {
    pub fn name(self) -> &'static str {
        match self {
            TraceKind::DemandIssued => "demandIssued",
            TraceKind::CacheHit => "cacheHit",
            TraceKind::CacheMiss => "cacheMiss",
            TraceKind::Store => "store",
            TraceKind::DimensionQueried => "dimensionQueried",
        }
    }
}

/// One step of an evaluation. `subject` is a variable name, or the
/// dimension name for `dimensionQueried`. `depth` is the number of
/// enclosing demands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEvent {
    pub kind: TraceKind,
    pub subject: String,
    pub context: SimpleContext,
    pub depth: usize,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {}",
            self.kind.name(),
            self.subject,
            self.context,
            self.depth
        )
    }
}
