use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use crate::syntax::Dialect;

/// What a segment holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TagKind {
    TypeDecl,
    FuncDecl,
    /// Foreign code, carried as opaque text.
    Imperative,
    /// An intensional program in the given dialect.
    Intensional(Dialect),
}

impl TagKind {
    pub fn is_intensional(self) -> bool {
        matches!(self, TagKind::Intensional(_))
    }

    pub fn is_declaration(self) -> bool {
        matches!(self, TagKind::TypeDecl | TagKind::FuncDecl)
    }
}

/// Known segment tags. Tags are upper case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagRegistry {
    tags: BTreeMap<String, TagKind>,
}

const IMPERATIVE: &[&str] = &["JAVA", "CPP", "FORTRAN", "PERL", "PYTHON"];
const SURFACE: &[&str] = &[
    "LUCX",
    "JOOIP",
    "INDEXICALLUCID",
    "JLUCID",
    "OBJECTIVELUCID",
    "TENSORLUCID",
    "ONYX",
    "FORENSICLUCID",
    "TRANSLUCID",
];

impl Default for TagRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl TagRegistry {
    pub fn empty() -> Self {
        TagRegistry {
            tags: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register("TYPEDECL", TagKind::TypeDecl);
        r.register("FUNCDECL", TagKind::FuncDecl);
        for t in IMPERATIVE {
            r.register(t, TagKind::Imperative);
        }
        r.register("GIPL", TagKind::Intensional(Dialect::Core));
        for t in SURFACE {
            r.register(t, TagKind::Intensional(Dialect::Surface));
        }
        r
    }

    pub fn register(&mut self, tag: &str, kind: TagKind) {
        self.tags.insert(tag.to_ascii_uppercase(), kind);
    }

    pub fn kind(&self, tag: &str) -> Option<TagKind> {
        self.tags.get(tag).copied()
    }

    pub fn tags(&self) -> impl Iterator<Item = (&str, TagKind)> {
        self.tags.iter().map(|(t, k)| (t.as_str(), *k))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub tag: String,
    pub kind: TagKind,
    /// The marker line as written, including its line break.
    pub marker: String,
    pub body: String,
    pub marker_line: u32,
    /// Line of the first body line.
    pub start_line: u32,
    /// Last line of the segment; the marker line when the body is empty.
    pub end_line: u32,
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}-{}", self.tag, self.marker_line, self.end_line)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedProgram {
    /// Text before the first marker: blank lines and comments.
    pub preamble: String,
    pub segments: Vec<Segment>,
}

impl SegmentedProgram {
    /// The source text the program was split from.
    pub fn reassemble(&self) -> String {
        let mut out = self.preamble.clone();
        for s in &self.segments {
            out.push_str(&s.marker);
            out.push_str(&s.body);
        }
        out
    }

    pub fn find(&self, kind: TagKind) -> Option<&Segment> {
        self.segments.iter().find(|s| s.kind == kind)
    }

    pub fn intensional(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.kind.is_intensional())
    }

    pub fn imperative(&self) -> impl Iterator<Item = &Segment> {
        self.segments
            .iter()
            .filter(|s| s.kind == TagKind::Imperative)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentError {
    #[error("no intensional segment")]
    NoIntensionalSegment,
    #[error("line {line}: second #{tag} segment (first at line {first})")]
    DuplicateDeclSegment { tag: String, line: u32, first: u32 },
    #[error("line {line}: unknown segment tag #{tag}")]
    UnknownTag { tag: String, line: u32 },
    #[error("line {line}: text before the first segment marker")]
    StrayText { line: u32 },
}

impl SegmentError {
    pub fn line(&self) -> Option<u32> {
        match self {
            SegmentError::NoIntensionalSegment => None,
            SegmentError::DuplicateDeclSegment { line, .. }
            | SegmentError::UnknownTag { line, .. }
            | SegmentError::StrayText { line } => Some(*line),
        }
    }
}

fn marker_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^#([A-Za-z][A-Za-z0-9]*)[ \t]*\r?\n?$").unwrap())
}

/// The tag a line introduces, if it is a marker line. Lower-case words are
/// markers only for the two declaration segments, so `#include` and
/// friends stay in foreign bodies.
fn marker_tag(
    line: &str,
    registry: &TagRegistry,
    line_no: u32,
) -> Result<Option<(String, TagKind)>, SegmentError> {
    let Some(caps) = marker_re().captures(line) else {
        return Ok(None);
    };
    let word = &caps[1];
    let upper = word.to_ascii_uppercase();
    if word.chars().any(|c| c.is_ascii_lowercase()) {
        return Ok(match registry.kind(&upper) {
            Some(k) if k.is_declaration() => Some((upper, k)),
            _ => None,
        });
    }
    match registry.kind(&upper) {
        Some(k) => Ok(Some((upper, k))),
        None => Err(SegmentError::UnknownTag {
            tag: upper,
            line: line_no,
        }),
    }
}

pub(crate) fn has_markers(src: &str, registry: &TagRegistry) -> bool {
    src.split_inclusive('\n')
        .enumerate()
        .any(|(i, line)| !matches!(marker_tag(line, registry, i as u32 + 1), Ok(None)))
}

/// Splits a hybrid source file at its marker lines.
pub fn split_segments(src: &str, registry: &TagRegistry) -> Result<SegmentedProgram, SegmentError> {
    let mut preamble = String::new();
    let mut segments: Vec<Segment> = Vec::new();
    let mut line_no = 0u32;
    for line in src.split_inclusive('\n') {
        line_no += 1;
        if let Some((tag, kind)) = marker_tag(line, registry, line_no)? {
            if kind.is_declaration() {
                if let Some(first) = segments.iter().find(|s| s.kind == kind) {
                    return Err(SegmentError::DuplicateDeclSegment {
                        tag,
                        line: line_no,
                        first: first.marker_line,
                    });
                }
            }
            segments.push(Segment {
                tag,
                kind,
                marker: line.to_string(),
                body: String::new(),
                marker_line: line_no,
                start_line: line_no + 1,
                end_line: line_no,
            });
            continue;
        }
        match segments.last_mut() {
            Some(s) => {
                s.body.push_str(line);
                s.end_line = line_no;
            }
            None => preamble.push_str(line),
        }
    }
    if let Some(line) = stray_text(&preamble) {
        return Err(SegmentError::StrayText { line });
    }
    if !segments.iter().any(|s| s.kind.is_intensional()) {
        return Err(SegmentError::NoIntensionalSegment);
    }
    Ok(SegmentedProgram { preamble, segments })
}

/// Line of the first character outside `//` and `/* */` comments that is
/// not whitespace.
fn stray_text(text: &str) -> Option<u32> {
    let mut line = 1;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\n' => line += 1,
            '/' if chars.peek() == Some(&'/') => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        break;
                    }
                }
            }
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let opened = line;
                let mut prev = ' ';
                let mut closed = false;
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                    }
                    if prev == '*' && c == '/' {
                        closed = true;
                        break;
                    }
                    prev = c;
                }
                if !closed {
                    return Some(opened);
                }
            }
            c if c.is_whitespace() => {}
            _ => return Some(line),
        }
    }
    None
}

/// Removes `//` and `/* */` comments, keeping line breaks so that line
/// numbers survive.
pub(crate) fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    let mut in_string = false;
    while let Some(c) = chars.next() {
        if in_string {
            out.push(c);
            if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_string = true;
                out.push(c);
            }
            '/' if chars.peek() == Some(&'/') => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        out.push('\n');
                        break;
                    }
                }
            }
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let mut prev = ' ';
                for c in chars.by_ref() {
                    if c == '\n' {
                        out.push('\n');
                    }
                    if prev == '*' && c == '/' {
                        break;
                    }
                    prev = c;
                }
                out.push(' ');
            }
            _ => out.push(c),
        }
    }
    out
}
